#pragma once

#include "firesale/inverse_demand.hpp"
#include "firesale/network.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace firesale {

struct SolverConfig {
    /// Stop the price loop once |q - f(sum s(q))| falls below this.
    double outer_tol = 1e-10;
    /// Stop the liquidation loop once the projected gradient's sup-norm falls below this.
    double inner_tol = 1e-10;
    std::size_t max_outer = 10000;
    std::size_t max_inner = 100000;
    /// When price iterates stop contracting, bisect q - f(sum s(q)) on the
    /// bracket the iterates have established instead of failing.
    bool bracket_fallback = true;

    void validate() const;
};

enum class BankRegime { NoAction, LiquidateOnly, Mixed, PureBorrow, TakenOver, Insolvent };
std::string_view to_string(BankRegime r);

struct EquilibriumResult {
    BorrowingMode mode = BorrowingMode::Uncollateralized;
    Eigen::VectorXd liquidations;
    double price = 1.0;
    Eigen::VectorXd borrowing;
    Eigen::VectorXd payments;
    Eigen::VectorXd shortfalls;
    std::vector<BankCase> cases;
    std::vector<BankRegime> per_bank_regime;

    std::size_t outer_iters = 0;
    std::size_t inner_iters_total = 0;
    /// Inner steps that fell back to the fixed step because the line step degenerated.
    std::size_t fallback_steps = 0;
    /// Outer steps taken by bisection rather than by the plain price update.
    std::size_t bracketed_steps = 0;
    /// sup-norm of the projected gradient at the returned point.
    double kkt_residual = 0.0;
    /// |q - f(sum s)| at the last evaluated price.
    double price_residual = 0.0;
    /// The sufficient uniqueness conditions on f (and nu) do not hold.
    bool conditions_violated = false;
    /// Price iterates q^0, q^1, ... of the outer loop.
    std::vector<double> price_history;
    /// Participants whose borrowing exceeds their remaining book holdings.
    std::vector<std::size_t> negative_equity;
};

/// Projected, participant-masked gradient of the fixed-price game at s.
Eigen::VectorXd g_map(const Eigen::VectorXd& s, double price, const ClassifiedSystem& system,
                      const InverseDemand& f);

/// Jacobian of the unprojected gradient (zero rows for non-participants).
Eigen::MatrixXd jacobian_G(const Eigen::VectorXd& s, const ClassifiedSystem& system, const InverseDemand& f);

struct InnerResult {
    Eigen::VectorXd liquidations;
    std::size_t iterations = 0;
    std::size_t fallback_steps = 0;
    double residual = 0.0;
};

/// Fixed-price Nash equilibrium s(q) by gradient projection.
InnerResult inner_equilibrium(double price, const ClassifiedSystem& system, const InverseDemand& f,
                              const SolverConfig& config = {},
                              const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

/// Joint liquidation-price equilibrium of an already classified system.
EquilibriumResult solve(const ClassifiedSystem& system, const InverseDemand& f, const SolverConfig& config = {},
                        const std::optional<Eigen::VectorXd>& initial_liquidations = std::nullopt);

/// Classifies the network, then solves.
EquilibriumResult solve(const FinancialNetwork& network, const InverseDemand& f, BorrowingMode mode,
                        std::optional<double> nu = std::nullopt, const SolverConfig& config = {},
                        const std::optional<Eigen::VectorXd>& initial_liquidations = std::nullopt);

}  // namespace firesale
