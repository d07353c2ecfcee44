#include "firesale/best_response.hpp"

#include "firesale/errors.hpp"
#include "firesale/roots.hpp"

#include <algorithm>
#include <cmath>

namespace firesale {

namespace {

double root_tolerance(const InverseDemand& f) { return 1e-12 * f.market_cap(); }

double span_after(double s_other, const InverseDemand& f) {
    if (s_other < 0.0) throw DomainError("s_other must be nonnegative");
    return std::max(0.0, f.market_cap() - s_other);
}

bool is_linear(const InverseDemand& f) { return f.family() == InverseDemand::Family::Linear; }

ExtendedShares within_span(double root, double span) {
    if (!(root >= 0.0) || root > span) return ExtendedShares::infinite();
    return ExtendedShares(root);
}

}  // namespace

double objective(double s, double s_other, double shortfall, double rate, const InverseDemand& f) {
    if (s < 0.0 || s_other < 0.0) throw DomainError("objective: negative liquidation");
    const double q = f.price(s_other + s);
    return s * (1.0 - q) + rate * std::max(0.0, shortfall - s * q);
}

ExtendedShares liquidation_only_root(double s_other, double shortfall, const InverseDemand& f) {
    if (!(shortfall > 0.0)) throw PreconditionError("liquidation_only_root needs h > 0");
    const double span = span_after(s_other, f);

    if (is_linear(f)) {
        // alpha s^2 - b s + h = 0, smaller root in cancellation-free form.
        const double alpha = f.parameter();
        const double b = 1.0 - alpha * s_other;
        const double disc = b * b - 4.0 * alpha * shortfall;
        if (b <= 0.0 || disc < 0.0) return ExtendedShares::infinite();
        return within_span(2.0 * shortfall / (b + std::sqrt(disc)), span);
    }

    if (span * f.price(s_other + span) < shortfall) return ExtendedShares::infinite();
    auto fn = [&](double s) {
        const double x = s_other + s;
        return ValueAndSlope{s * f.price(x) - shortfall, f.price(x) + s * f.slope(x)};
    };
    return ExtendedShares(find_root(fn, 0.0, span, root_tolerance(f)).root);
}

ExtendedShares interior_stationary(double s_other, double rate, const InverseDemand& f) {
    const double span = span_after(s_other, f);
    const double growth = 1.0 + rate;

    if (is_linear(f)) {
        const double alpha = f.parameter();
        double root = (rate / growth - alpha * s_other) / (2.0 * alpha);
        // At f(s_other) (1 + r) = 1 the root is zero; keep rounding from pushing it below.
        if (root < 0.0 && root > -root_tolerance(f)) root = 0.0;
        return within_span(root, span);
    }

    auto fn = [&](double s) {
        const double x = s_other + s;
        return ValueAndSlope{1.0 - growth * (f.price(x) + s * f.slope(x)),
                             -growth * (2.0 * f.slope(x) + s * f.curvature(x))};
    };
    const double at_zero = fn(0.0).value;
    if (at_zero > 0.0) return ExtendedShares::infinite();
    if (at_zero == 0.0) return ExtendedShares(0.0);
    if (fn(span).value < 0.0) return ExtendedShares::infinite();
    return ExtendedShares(find_root(fn, 0.0, span, root_tolerance(f)).root);
}

ExtendedShares collateral_cap(double s_other, double holdings, double shortfall, const InverseDemand& f) {
    if (holdings < shortfall) throw PreconditionError("collateral_cap needs a >= h");
    const double target = holdings - shortfall;
    const double span = span_after(s_other, f);
    if (target == 0.0) return ExtendedShares(0.0);

    if (is_linear(f)) {
        // alpha s^2 + alpha s_other s - (a - h) = 0, positive root.
        const double alpha = f.parameter();
        const double lin = alpha * s_other;
        return within_span(2.0 * target / (lin + std::sqrt(lin * lin + 4.0 * alpha * target)), span);
    }

    if (span * (1.0 - f.price(s_other + span)) < target) return ExtendedShares::infinite();
    auto fn = [&](double s) {
        const double x = s_other + s;
        return ValueAndSlope{s * (1.0 - f.price(x)) - target, 1.0 - f.price(x) - s * f.slope(x)};
    };
    return ExtendedShares(find_root(fn, 0.0, span, root_tolerance(f)).root);
}

double liquidation_upper_bound(const BankPosition& bank, double price, BorrowingMode mode) {
    if (!(bank.shortfall > 0.0)) return 0.0;
    double upper = std::min(bank.holdings, bank.shortfall / price);
    if (mode == BorrowingMode::Collateralized && price < 1.0) {
        upper = std::min(upper, std::max(0.0, bank.holdings - bank.shortfall) / (1.0 - price));
    }
    return std::max(0.0, upper);
}

double best_response(double s_other, const BankPosition& bank, const InverseDemand& f, BorrowingMode mode,
                     std::optional<double> price_cap) {
    if (!(bank.shortfall > 0.0)) {
        throw PreconditionError("best_response is only defined for banks with a positive shortfall");
    }
    if (mode == BorrowingMode::Collateralized && bank.holdings < bank.shortfall) {
        throw PreconditionError("collateralized best_response needs a >= h");
    }

    // Pure borrowing: every share sold costs more than the interest it saves.
    if (f.price(s_other) * (1.0 + bank.rate) < 1.0) return 0.0;

    const ExtendedShares stationary = interior_stationary(s_other, bank.rate, f);

    if (price_cap) {
        const double upper = liquidation_upper_bound(bank, *price_cap, mode);
        return std::min(stationary.value(), upper);
    }

    ExtendedShares choice = std::min({stationary, liquidation_only_root(s_other, bank.shortfall, f),
                                      ExtendedShares(bank.holdings)});
    if (mode == BorrowingMode::Collateralized) {
        choice = std::min(choice, collateral_cap(s_other, bank.holdings, bank.shortfall, f));
    }
    return choice.value();
}

}  // namespace firesale
