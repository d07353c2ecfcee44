#include "firesale/equilibrium_solver.hpp"

#include "firesale/best_response.hpp"
#include "firesale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace firesale {

void SolverConfig::validate() const {
    if (!(outer_tol > 0.0) || !(inner_tol > 0.0)) throw InvalidInput("solver tolerances must be positive");
    if (max_outer < 1 || max_inner < 1) throw InvalidInput("solver iteration caps must be at least 1");
}

std::string_view to_string(BankRegime r) {
    switch (r) {
        case BankRegime::NoAction: return "NoAction";
        case BankRegime::LiquidateOnly: return "LiquidateOnly";
        case BankRegime::Mixed: return "Mixed";
        case BankRegime::PureBorrow: return "PureBorrow";
        case BankRegime::TakenOver: return "TakenOver";
        case BankRegime::Insolvent: return "Insolvent";
    }
    return "?";
}

namespace {

BankPosition position(const ClassifiedSystem& sys, Eigen::Index i) {
    return {sys.holdings(i), sys.shortfalls(i), sys.rates(i)};
}

Eigen::VectorXd upper_bounds(double price, const ClassifiedSystem& sys) {
    const auto n = static_cast<Eigen::Index>(sys.size());
    Eigen::VectorXd upper = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (sys.participates(static_cast<std::size_t>(i))) {
            upper(i) = liquidation_upper_bound(position(sys, i), price, sys.mode);
        }
    }
    return upper;
}

void clamp_to_box(Eigen::VectorXd& s, const Eigen::VectorXd& upper) {
    s = s.cwiseMax(0.0).cwiseMin(upper);
}

// face_tol widens the upper face so that a point clamped at a nearby price
// still counts as sitting on it.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& s, const Eigen::VectorXd& upper,
                                   const ClassifiedSystem& sys, const InverseDemand& f, double face_tol = 0.0) {
    const double total = s.sum();
    const double q = f.price(total);
    const double dq = f.slope(total);
    const auto n = s.size();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!sys.participates(static_cast<std::size_t>(i))) continue;
        const double raw = 1.0 / (1.0 + sys.rates(i)) - (q + s(i) * dq);
        double value = raw;
        if (s(i) <= 0.0) value -= std::max(raw, 0.0);
        if (s(i) >= upper(i) - face_tol * std::max(1.0, upper(i))) value += std::max(-raw, 0.0);
        g(i) = value;
    }
    return g;
}

// G v without forming G: G_ij = -(f'(S) (delta_ij + 1) + s_i f''(S)) on participant rows.
Eigen::VectorXd jacobian_times(const Eigen::VectorXd& s, const Eigen::VectorXd& v, const ClassifiedSystem& sys,
                               const InverseDemand& f) {
    const double total = s.sum();
    const double d1 = f.slope(total);
    const double d2 = f.curvature(total);
    const double vsum = v.sum();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (sys.participates(static_cast<std::size_t>(i))) {
            out(i) = -(d1 * (v(i) + vsum) + s(i) * d2 * vsum);
        }
    }
    return out;
}

void check_capacity(const ClassifiedSystem& sys, const InverseDemand& f) {
    const double held = sys.holdings.sum();
    if (held > f.market_cap() * (1.0 + 1e-12)) {
        throw InvalidInput("market capitalization M = " + std::to_string(f.market_cap()) +
                           " is below total holdings " + std::to_string(held));
    }
}

}  // namespace

Eigen::VectorXd g_map(const Eigen::VectorXd& s, double price, const ClassifiedSystem& system,
                      const InverseDemand& f) {
    return projected_gradient(s, upper_bounds(price, system), system, f);
}

Eigen::MatrixXd jacobian_G(const Eigen::VectorXd& s, const ClassifiedSystem& system, const InverseDemand& f) {
    const auto n = s.size();
    const double total = s.sum();
    const double d1 = f.slope(total);
    const double d2 = f.curvature(total);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!system.participates(static_cast<std::size_t>(i))) continue;
        for (Eigen::Index j = 0; j < n; ++j) {
            G(i, j) = -(d1 * ((i == j ? 1.0 : 0.0) + 1.0) + s(i) * d2);
        }
    }
    return G;
}

InnerResult inner_equilibrium(double price, const ClassifiedSystem& system, const InverseDemand& f,
                              const SolverConfig& config, const std::optional<Eigen::VectorXd>& warm_start) {
    const auto n = static_cast<Eigen::Index>(system.size());
    const Eigen::VectorXd upper = upper_bounds(price, system);

    InnerResult out;
    out.liquidations = warm_start ? *warm_start : Eigen::VectorXd::Zero(n);
    if (out.liquidations.size() != n) throw InvalidInput("warm start has the wrong length");
    auto& s = out.liquidations;
    clamp_to_box(s, upper);

    const double fallback_step = -1e-3 * f.market_cap();
    for (std::size_t it = 0; it < config.max_inner; ++it) {
        const Eigen::VectorXd v = projected_gradient(s, upper, system, f);
        out.residual = v.lpNorm<Eigen::Infinity>();
        if (out.residual <= config.inner_tol) {
            out.iterations = it;
            return out;
        }
        const Eigen::VectorXd Gv = jacobian_times(s, v, system, f);
        const double denom = Gv.squaredNorm();
        double t = -v.dot(Gv) / denom;
        if (!std::isfinite(t) || t >= 0.0 || denom <= std::numeric_limits<double>::min()) {
            t = fallback_step;
            ++out.fallback_steps;
        }
        s += t * v;
        clamp_to_box(s, upper);
    }
    throw NonConvergence("inner liquidation loop did not converge", config.max_inner, out.residual);
}

EquilibriumResult solve(const ClassifiedSystem& system, const InverseDemand& f, const SolverConfig& config,
                        const std::optional<Eigen::VectorXd>& initial_liquidations) {
    config.validate();
    check_capacity(system, f);

    const auto n = static_cast<Eigen::Index>(system.size());
    EquilibriumResult res;
    res.mode = system.mode;
    res.payments = system.payments;
    res.shortfalls = system.shortfalls;
    res.cases = system.case_of;
    const auto uniq = validate_uniqueness(
        f, system.mode == BorrowingMode::Collateralized ? system.nu : std::nullopt);
    res.conditions_violated = !uniq.pass;

    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    double q = 1.0;

    if (system.participant_count() > 0) {
        if (initial_liquidations) {
            if (initial_liquidations->size() != n) throw InvalidInput("initial liquidations have the wrong length");
            s = initial_liquidations->cwiseMax(0.0).cwiseMin(system.holdings);
        }
        q = f.price(s.sum());
        res.price_history.push_back(q);

        // q - f(sum s(q)) is <= 0 at f(M) and >= 0 at 1; iterates tighten this bracket.
        double lo = f.price(f.market_cap());
        double hi = 1.0;
        bool bracketing = false;
        int stalled = 0;
        double prev_gap = std::numeric_limits<double>::infinity();
        bool converged = false;

        for (std::size_t k = 1; k <= config.max_outer; ++k) {
            auto inner = inner_equilibrium(q, system, f, config, s);
            res.inner_iters_total += inner.iterations;
            res.fallback_steps += inner.fallback_steps;
            s = std::move(inner.liquidations);
            res.outer_iters = k;

            const double image = f.price(s.sum());
            const double gap = q - image;
            res.price_residual = std::abs(gap);
            if (std::abs(gap) <= config.outer_tol) {
                q = image;
                converged = true;
                break;
            }
            if (gap > 0.0) {
                hi = std::min(hi, q);
            } else {
                lo = std::max(lo, q);
            }

            if (!bracketing) {
                stalled = std::abs(gap) >= 0.99 * prev_gap ? stalled + 1 : 0;
                prev_gap = std::abs(gap);
                bracketing = config.bracket_fallback && stalled >= 5;
            }
            if (bracketing) {
                q = 0.5 * (lo + hi);
                ++res.bracketed_steps;
            } else {
                q = image;
                res.price_history.push_back(q);
            }
        }
        if (!converged) {
            throw NonConvergence("outer price loop did not converge", config.max_outer, res.price_residual);
        }

        // Land on the box of the final price. Shrinking face banks raises q,
        // which shrinks h/q again, so repeat until the point stays inside.
        for (int polish = 0; polish < 100; ++polish) {
            const Eigen::VectorXd upper = upper_bounds(q, system);
            if ((s.array() <= upper.array()).all()) break;
            clamp_to_box(s, upper);
            q = f.price(s.sum());
        }
    }

    res.liquidations = s;
    res.price = q;
    res.borrowing = Eigen::VectorXd::Zero(n);
    res.per_bank_regime.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        auto& regime = res.per_bank_regime[idx];
        if (system.participates(idx)) {
            const double h = system.shortfalls(i);
            res.borrowing(i) = std::max(0.0, h - s(i) * q);
            if (s(i) <= 1e-10 * std::max(1.0, system.holdings(i))) {
                regime = BankRegime::PureBorrow;
            } else if (res.borrowing(i) <= 1e-10 * std::max(1.0, h)) {
                regime = BankRegime::LiquidateOnly;
            } else {
                regime = BankRegime::Mixed;
            }
            if (res.borrowing(i) > system.holdings(i) - s(i)) res.negative_equity.push_back(idx);
        } else if (system.case_of[idx] == BankCase::CaseI) {
            regime = BankRegime::Insolvent;
        } else if (system.case_of[idx] == BankCase::CaseII) {
            regime = BankRegime::NoAction;
        } else {
            regime = BankRegime::TakenOver;
        }
    }
    // The final price moves by at most outer_tol, which shifts the h/q faces by
    // a relative amount of the same order.
    const double face_tol = 10.0 * config.outer_tol;
    res.kkt_residual = system.participant_count() > 0
                           ? projected_gradient(s, upper_bounds(q, system), system, f, face_tol).lpNorm<Eigen::Infinity>()
                           : 0.0;
    return res;
}

EquilibriumResult solve(const FinancialNetwork& network, const InverseDemand& f, BorrowingMode mode,
                        std::optional<double> nu, const SolverConfig& config,
                        const std::optional<Eigen::VectorXd>& initial_liquidations) {
    return solve(classify(network, mode, nu), f, config, initial_liquidations);
}

}  // namespace firesale
