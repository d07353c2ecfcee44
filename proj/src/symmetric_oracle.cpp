#include "firesale/symmetric_oracle.hpp"

#include "firesale/errors.hpp"

#include <array>
#include <cmath>
#include <string>

namespace firesale {

double SymmetricScenario::resolved_market_cap() const {
    return market_cap ? *market_cap : static_cast<double>(n) * a;
}

std::optional<double> SymmetricScenario::resolved_nu() const {
    if (mode != BorrowingMode::Collateralized) return std::nullopt;
    if (nu) return nu;
    if (!(a > 0.0) || !(h < a)) return std::nullopt;
    return 0.5 * (1.0 - h / a);
}

std::string_view to_string(SymmetricRegime r) {
    switch (r) {
        case SymmetricRegime::LiquidateOnly: return "LiquidateOnly";
        case SymmetricRegime::Mixed: return "Mixed";
        case SymmetricRegime::CollateralCapped: return "CollateralCapped";
        case SymmetricRegime::AssetCapped: return "AssetCapped";
    }
    return "?";
}

namespace {

void validate(const SymmetricScenario& sc) {
    auto fail = [](const std::string& why) { throw InvalidInput("symmetric scenario: " + why); };
    if (sc.n < 1) fail("n must be at least 1");
    if (!(sc.alpha > 0.0)) fail("alpha must be positive");
    if (!(sc.r >= 0.0)) fail("r must be nonnegative");
    if (!(sc.a > 0.0)) fail("a must be positive");
    if (!(sc.h > 0.0)) fail("h must be positive (h <= 0 means every bank is in Case II)");
    if (sc.h > sc.a) fail("h > a makes every bank fundamentally insolvent (Case I)");
    const double M = sc.resolved_market_cap();
    if (M < sc.n * sc.a * (1.0 - 1e-12)) fail("market cap below total holdings n a");
    if (!(sc.alpha * M < 1.0)) fail("alpha M >= 1 leaves no positive price at M");
    if (sc.mode == BorrowingMode::Collateralized) {
        const auto nu = sc.resolved_nu();
        if (!nu || !(*nu > 0.0 && *nu < 1.0)) fail("collateralized mode needs nu in (0, 1)");
        if (sc.a * (1.0 - *nu) < sc.h) fail("a (1 - nu) < h: banks fail the stress test (Case III)");
    }
}

}  // namespace

SymmetricEquilibrium closed_form(const SymmetricScenario& sc) {
    validate(sc);
    const double n = sc.n;
    const double an = sc.alpha * n;

    SymmetricEquilibrium eq;
    const double disc = 1.0 - 4.0 * an * sc.h;
    eq.liquidation_root =
        disc >= 0.0 ? ExtendedShares(2.0 * sc.h / (1.0 + std::sqrt(disc))) : ExtendedShares::infinite();
    eq.stationary = ExtendedShares(sc.r / (sc.alpha * (n + 1.0) * (1.0 + sc.r)));
    eq.collateral_cap = sc.mode == BorrowingMode::Collateralized
                            ? ExtendedShares(std::sqrt((sc.a - sc.h) / an))
                            : ExtendedShares::infinite();

    const std::array<std::pair<ExtendedShares, SymmetricRegime>, 4> candidates{{
        {eq.liquidation_root, SymmetricRegime::LiquidateOnly},
        {eq.stationary, SymmetricRegime::Mixed},
        {eq.collateral_cap, SymmetricRegime::CollateralCapped},
        {ExtendedShares(sc.a), SymmetricRegime::AssetCapped},
    }};
    auto best = candidates[0];
    for (const auto& c : candidates) {
        if (c.first < best.first) best = c;
    }
    eq.s_per_bank = best.first.value();
    eq.regime = best.second;
    eq.price = 1.0 - an * eq.s_per_bank;
    return eq;
}

SymmetricThresholds thresholds(const SymmetricScenario& sc) {
    const double n = sc.n;
    const double an = sc.alpha * n;
    const double x = 2.0 * n * sc.r / ((1.0 + sc.r) * (n + 1.0));
    SymmetricThresholds t;
    t.h_liquidate_mixed = (1.0 - (1.0 - x) * (1.0 - x)) / (4.0 * an);
    t.h_mixed_cap = sc.a - n * sc.r * sc.r / (sc.alpha * (n + 1.0) * (n + 1.0) * (1.0 + sc.r) * (1.0 + sc.r));
    t.h_liquidate_cap = sc.a * (1.0 - an * sc.a);
    t.liquidate_cap_valid = an * sc.a < 1.0;
    return t;
}

FinancialNetwork symmetric_network(const SymmetricScenario& sc) {
    if (sc.n < 1) throw InvalidInput("symmetric scenario: n must be at least 1");
    const Eigen::Index n = sc.n;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n + 1);
    L.col(0).setConstant(sc.h);
    return FinancialNetwork(std::move(L), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, sc.a),
                            Eigen::VectorXd::Constant(n, sc.r));
}

InverseDemand symmetric_demand(const SymmetricScenario& sc) {
    return InverseDemand::linear(sc.alpha, sc.resolved_market_cap());
}

}  // namespace firesale
