#pragma once

#include "firesale/inverse_demand.hpp"
#include "firesale/network.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace firesale {

struct ClearingConfig {
    /// On max(|dp| / max(1, max pbar), |dq|) between Picard steps.
    double tol = 1e-12;
    std::size_t max_iter = 100000;
};

/// Joint payments / liquidations / price of the pure fire-sale model.
struct ClearingOutcome {
    Eigen::VectorXd payments;
    Eigen::VectorXd liquidations;
    double price = 1.0;
    std::vector<std::size_t> defaults;
    std::size_t iterations = 0;
    /// Every Picard step kept payments and price from rising.
    bool monotone = true;
    double payment_residual = 0.0;
    double liquidation_residual = 0.0;
    double price_residual = 0.0;
    std::vector<double> price_history;
};

/// Liquidation rule s = a ∧ (pbar - c - Pi^T p)^+ / q.
Eigen::VectorXd forced_liquidations(const FinancialNetwork& network, const Eigen::MatrixXd& pi_interbank,
                                    const Eigen::VectorXd& payments, double price);

/// Payment map p = pbar ∧ (c + s q + Pi^T p).
Eigen::VectorXd payment_map(const FinancialNetwork& network, const Eigen::MatrixXd& pi_interbank,
                            const Eigen::VectorXd& payments, const Eigen::VectorXd& liquidations, double price);

/// Picard iteration from (pbar, 1), decreasing to the greatest clearing point.
/// Every bank follows the liquidation rule; there is no case partition here.
ClearingOutcome clear(const FinancialNetwork& network, const InverseDemand& f, const ClearingConfig& config = {});

}  // namespace firesale
