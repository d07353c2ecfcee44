#pragma once

#include "firesale/inverse_demand.hpp"
#include "firesale/network.hpp"

#include <limits>
#include <optional>

namespace firesale {

/// Share quantity that may be +infinity, meaning "no root exists".
class ExtendedShares {
public:
    constexpr ExtendedShares() = default;
    constexpr explicit ExtendedShares(double value) : value_(value) {}

    static constexpr ExtendedShares infinite() {
        return ExtendedShares(std::numeric_limits<double>::infinity());
    }

    constexpr bool is_infinite() const { return value_ == std::numeric_limits<double>::infinity(); }
    constexpr double value() const { return value_; }

    friend constexpr auto operator<=>(ExtendedShares, ExtendedShares) = default;

private:
    double value_ = 0.0;
};

/// Liquidation cost plus interest on whatever the sale does not cover:
/// s (1 - f(s_other + s)) + r (h - s f(s_other + s))^+.
double objective(double s, double s_other, double shortfall, double rate, const InverseDemand& f);

/// Smallest s >= 0 with s f(s_other + s) = h (sell just enough, borrow nothing).
ExtendedShares liquidation_only_root(double s_other, double shortfall, const InverseDemand& f);

/// Root of 1 - (1+r)(f(s_other + s) + s f'(s_other + s)) = 0 on [0, M - s_other].
ExtendedShares interior_stationary(double s_other, double rate, const InverseDemand& f);

/// Root of s (1 - f(s_other + s)) = a - h: the most a bank can sell and still
/// collateralize its borrowing at book value.
ExtendedShares collateral_cap(double s_other, double holdings, double shortfall, const InverseDemand& f);

struct BankPosition {
    double holdings;
    double shortfall;
    double rate;
};

/// Optimal liquidation for one participating bank.
///
/// Without price_cap this is the selector over s^L, s^0 (and s^b when
/// collateralized) capped by the holdings. With price_cap = q the sale is the
/// minimizer over the box [0, min(a, h/q)] (collateralized: also
/// (a - h)/(1 - q)), which is what the equilibrium solver iterates on.
double best_response(double s_other, const BankPosition& bank, const InverseDemand& f, BorrowingMode mode,
                     std::optional<double> price_cap = std::nullopt);

/// Upper end of the price-parameterized box for one participant.
double liquidation_upper_bound(const BankPosition& bank, double price, BorrowingMode mode);

}  // namespace firesale
