#include "firesale/fire_sale.hpp"

#include "firesale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace firesale {

Eigen::VectorXd forced_liquidations(const FinancialNetwork& network, const Eigen::MatrixXd& pi_interbank,
                                    const Eigen::VectorXd& payments, double price) {
    const Eigen::VectorXd need =
        (network.total_liabilities() - network.liquid() - pi_interbank.transpose() * payments).cwiseMax(0.0);
    return network.illiquid().cwiseMin(need / price);
}

Eigen::VectorXd payment_map(const FinancialNetwork& network, const Eigen::MatrixXd& pi_interbank,
                            const Eigen::VectorXd& payments, const Eigen::VectorXd& liquidations, double price) {
    const Eigen::VectorXd available =
        network.liquid() + price * liquidations + pi_interbank.transpose() * payments;
    return network.total_liabilities().cwiseMin(available);
}

ClearingOutcome clear(const FinancialNetwork& network, const InverseDemand& f, const ClearingConfig& config) {
    if (network.illiquid().sum() > f.market_cap() * (1.0 + 1e-12)) {
        throw InvalidInput("market capitalization is below total holdings");
    }
    const Eigen::MatrixXd pi = relative_liabilities(network).interbank();
    const Eigen::VectorXd& pbar = network.total_liabilities();
    const double scale = std::max(1.0, pbar.size() > 0 ? pbar.maxCoeff() : 1.0);
    const double slack = 1e-13 * scale;

    ClearingOutcome out;
    Eigen::VectorXd p = pbar;
    double q = 1.0;
    out.price_history.push_back(q);

    Eigen::VectorXd s_last = Eigen::VectorXd::Zero(pbar.size());
    bool converged = false;
    for (std::size_t k = 1; k <= config.max_iter; ++k) {
        const Eigen::VectorXd s = forced_liquidations(network, pi, p, q);
        const double q_next = f.price(s.sum());
        if (!(q_next > 0.0)) {
            throw DomainError("fire-sale price reached " + std::to_string(q_next) +
                              "; the inverse demand must stay positive on [0, M]");
        }
        // Liquidations at the updated price so that the sale proceeds follow the new q.
        const Eigen::VectorXd s_next = forced_liquidations(network, pi, p, q_next);
        const Eigen::VectorXd p_next = payment_map(network, pi, p, s_next, q_next);

        if (q_next > q + 1e-15 || (p_next - p).maxCoeff() > slack) out.monotone = false;

        const double change = std::max((p_next - p).lpNorm<Eigen::Infinity>() / scale, std::abs(q_next - q));
        p = p_next;
        q = q_next;
        s_last = s_next;
        out.iterations = k;
        out.price_history.push_back(q);
        if (change <= config.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NonConvergence("fire-sale clearing did not converge", config.max_iter, 0.0);
    }

    out.payments = p;
    out.price = q;
    out.liquidations = s_last;
    out.payment_residual = (payment_map(network, pi, p, s_last, q) - p).lpNorm<Eigen::Infinity>();
    out.liquidation_residual = (forced_liquidations(network, pi, p, q) - s_last).lpNorm<Eigen::Infinity>();
    out.price_residual = std::abs(f.price(out.liquidations.sum()) - q);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) < pbar(i) - 1e-9 * std::max(1.0, pbar(i))) out.defaults.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

}  // namespace firesale
