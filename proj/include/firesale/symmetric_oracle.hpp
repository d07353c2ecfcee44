#pragma once

#include "firesale/best_response.hpp"
#include "firesale/inverse_demand.hpp"
#include "firesale/network.hpp"

#include <optional>
#include <string_view>

namespace firesale {

/// n identical banks with shortfall h, holdings a and rate r, linear impact alpha.
struct SymmetricScenario {
    int n = 1;
    double h = 0.0;
    double a = 0.0;
    double r = 0.0;
    double alpha = 0.0;
    BorrowingMode mode = BorrowingMode::Uncollateralized;
    /// Stress-test haircut; when absent in collateralized mode, half the
    /// largest haircut that keeps every bank passing the stress test.
    std::optional<double> nu;
    /// Defaults to n a.
    std::optional<double> market_cap;

    double resolved_market_cap() const;
    std::optional<double> resolved_nu() const;
};

enum class SymmetricRegime { LiquidateOnly, Mixed, CollateralCapped, AssetCapped };
std::string_view to_string(SymmetricRegime r);

struct SymmetricEquilibrium {
    double s_per_bank = 0.0;
    double price = 1.0;
    SymmetricRegime regime = SymmetricRegime::LiquidateOnly;
    ExtendedShares liquidation_root;
    ExtendedShares stationary;
    /// Infinite in uncollateralized mode.
    ExtendedShares collateral_cap;
};

/// Closed-form symmetric equilibrium. Ties resolve in the order
/// LiquidateOnly, Mixed, CollateralCapped, AssetCapped.
SymmetricEquilibrium closed_form(const SymmetricScenario& scenario);

struct SymmetricThresholds {
    /// Below this shortfall banks only liquidate; above it they also borrow.
    double h_liquidate_mixed = 0.0;
    /// Above this shortfall the collateral constraint binds instead of s^0.
    double h_mixed_cap = 0.0;
    /// a (1 - alpha n a): below it s^L stays under the collateral cap.
    double h_liquidate_cap = 0.0;
    /// False when alpha n a >= 1, which makes h_liquidate_cap meaningless.
    bool liquidate_cap_valid = true;
};

SymmetricThresholds thresholds(const SymmetricScenario& scenario);

/// Network realizing the scenario: external debt h, no cash, no interbank links.
FinancialNetwork symmetric_network(const SymmetricScenario& scenario);
InverseDemand symmetric_demand(const SymmetricScenario& scenario);

}  // namespace firesale
