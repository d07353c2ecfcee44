#pragma once

// Shared generators and brute-force oracles for the test binaries. Nothing
// here calls into the solver internals: oracles are written from the model
// definitions so that they can disagree with the library.

#include "firesale/calibration.hpp"
#include "firesale/inverse_demand.hpp"
#include "firesale/network.hpp"
#include "firesale/symmetric_oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace testing_support {

using firesale::BorrowingMode;
using firesale::FinancialNetwork;
using firesale::InverseDemand;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    bool coin(double p) { return std::bernoulli_distribution(p)(engine_); }

private:
    std::mt19937_64 engine_;
};

/// Plain bisection on a sign change, used by the oracles.
inline double bisect_root(const std::function<double(double)>& g, double lo, double hi, int iters = 200) {
    double glo = g(lo);
    for (int k = 0; k < iters; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm <= 0.0) == (glo <= 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Omega constant W(1): the root of x e^x = 1.
inline double lambert_w1() {
    return bisect_root([](double x) { return x * std::exp(x) - 1.0; }, 0.0, 1.0);
}

/// Cost of selling s shares while the others sell s_other, written out from
/// the model rather than taken from the library.
inline double cost(double s, double s_other, double h, double r, double alpha) {
    const double q = 1.0 - alpha * (s_other + s);
    return s * (1.0 - q) + r * std::max(0.0, h - s * q);
}

struct GridBank {
    double h;
    double a;
    double r;
};

/// Feasible deviations for one bank: s in [0, a] with s f(S) <= h, plus the
/// collateral constraint s (1 - f(S)) <= a - h when collateralized.
inline bool feasible(double s, double s_other, const GridBank& b, double alpha, bool collateralized) {
    const double q = 1.0 - alpha * (s_other + s);
    if (s * q > b.h + 1e-12) return false;
    if (collateralized && s * (1.0 - q) > b.a - b.h + 1e-12) return false;
    return true;
}

/// Brute-force best response on an equally spaced grid over [0, a].
inline double grid_best_response(double s_other, const GridBank& b, double alpha, bool collateralized,
                                 std::size_t points) {
    double best_s = 0.0;
    double best = cost(0.0, s_other, b.h, b.r, alpha);
    for (std::size_t k = 1; k < points; ++k) {
        const double s = b.a * static_cast<double>(k) / static_cast<double>(points - 1);
        if (!feasible(s, s_other, b, alpha, collateralized)) break;
        const double c = cost(s, s_other, b.h, b.r, alpha);
        if (c < best) {
            best = c;
            best_s = s;
        }
    }
    return best_s;
}

/// Grid best response over the box [0, upper] (the fixed-price game).
inline double grid_best_response_box(double s_other, const GridBank& b, double alpha, double upper,
                                     std::size_t points) {
    double best_s = 0.0;
    double best = cost(0.0, s_other, b.h, b.r, alpha);
    for (std::size_t k = 1; k < points; ++k) {
        const double s = upper * static_cast<double>(k) / static_cast<double>(points - 1);
        const double c = cost(s, s_other, b.h, b.r, alpha);
        if (c < best) {
            best = c;
            best_s = s;
        }
    }
    return best_s;
}

/// Alternating (Gauss-Seidel) grid best responses until the largest change
/// drops below `change_tol`. When `price` is set, each bank is confined to the
/// fixed-price box [0, min(a, h / price)] instead of the joint constraint set.
inline std::vector<double> alternating_best_response(const std::vector<GridBank>& banks, double alpha,
                                                     bool collateralized, std::size_t points,
                                                     std::optional<double> price = std::nullopt,
                                                     double change_tol = 1e-7, int max_sweeps = 10000) {
    std::vector<double> s(banks.size(), 0.0);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (std::size_t i = 0; i < banks.size(); ++i) {
            double other = 0.0;
            for (std::size_t j = 0; j < banks.size(); ++j) {
                if (j != i) other += s[j];
            }
            const auto& b = banks[i];
            double next = 0.0;
            if (price) {
                double upper = std::min(b.a, b.h / *price);
                if (collateralized && *price < 1.0) upper = std::min(upper, (b.a - b.h) / (1.0 - *price));
                next = grid_best_response_box(other, b, alpha, upper, points);
            } else {
                next = grid_best_response(other, b, alpha, collateralized, points);
            }
            change = std::max(change, std::abs(next - s[i]));
            s[i] = next;
        }
        if (change < change_tol) break;
    }
    return s;
}

/// Largest cost improvement any participant finds over `points` feasible
/// deviations, everyone else held at s. Costs use f directly.
inline double nash_gap(const Eigen::VectorXd& s, const firesale::ClassifiedSystem& sys, const InverseDemand& f,
                       std::size_t points = 10001) {
    const bool coll = sys.mode == BorrowingMode::Collateralized;
    const double total = s.sum();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (!sys.participates(static_cast<std::size_t>(i))) continue;
        const double h = sys.shortfalls(i);
        const double a = sys.holdings(i);
        const double r = sys.rates(i);
        const double other = std::max(0.0, total - s(i));
        auto cost_at = [&](double x) {
            const double q = f.price(std::min(other + x, f.market_cap()));
            return x * (1.0 - q) + r * std::max(0.0, h - x * q);
        };
        const double mine = cost_at(s(i));
        for (std::size_t k = 0; k < points; ++k) {
            const double x = a * static_cast<double>(k) / static_cast<double>(points - 1);
            if (other + x > f.market_cap()) break;
            const double q = f.price(other + x);
            if (x * q > h + 1e-12) break;
            if (coll && x * (1.0 - q) > a - h + 1e-12) break;
            worst = std::max(worst, mine - cost_at(x));
        }
    }
    return worst;
}

/// Random stressed network of n banks. Interbank links are sparse, cash is
/// thin and the external debt is large enough that most banks need funds.
inline FinancialNetwork random_network(Rng& rng, int n, bool allow_insolvent = true) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n + 1);
    Eigen::VectorXd c(n), a(n), r(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j != i && rng.coin(0.3)) L(i, j + 1) = rng.uniform(0.0, 1.0);
        }
        a(i) = rng.uniform(1.0, 6.0);
        c(i) = rng.uniform(0.0, 1.0);
        r(i) = rng.uniform(0.01, 0.2);
    }
    for (int i = 0; i < n; ++i) {
        const double incoming = L.col(i + 1).sum();
        const double book = c(i) + a(i) + incoming;
        const double interbank_out = L.row(i).tail(n).sum();
        // Target total obligations between cash and book value, occasionally above book.
        const double top = allow_insolvent && rng.coin(0.08) ? 1.2 * book : 0.8 * book;
        const double target = rng.uniform(c(i) + incoming, std::max(c(i) + incoming, top));
        L(i, 0) = std::max(0.0, target - interbank_out);
    }
    return FinancialNetwork(std::move(L), std::move(c), std::move(a), std::move(r));
}

/// Valid symmetric scenario with alpha below 1/(2M), M = n a.
inline firesale::SymmetricScenario random_symmetric(Rng& rng, BorrowingMode mode) {
    firesale::SymmetricScenario sc;
    sc.n = rng.integer(2, 100);
    sc.a = rng.uniform(0.5, 3.0);
    sc.r = rng.uniform(0.0, 0.3);
    const double M = sc.n * sc.a;
    sc.alpha = rng.uniform(0.05, 0.95) / (2.0 * M);
    sc.mode = mode;
    if (mode == BorrowingMode::Collateralized) {
        sc.nu = rng.uniform(0.01, 0.5);
        sc.h = rng.uniform(0.01, 1.0) * sc.a * (1.0 - *sc.nu);
    } else {
        sc.h = rng.uniform(0.01, 1.0) * sc.a;
    }
    return sc;
}

/// EBA-style synthetic balance sheets: thin capital, modest liquid share and
/// an interbank block estimated from the marginals.
inline FinancialNetwork synthetic_calibrated_network(Rng& rng, int n, double rate = 0.02) {
    std::vector<firesale::BalanceSheetRow> rows;
    for (int i = 0; i < n; ++i) {
        const double T = std::exp(rng.uniform(std::log(50.0), std::log(2000.0)));
        rows.push_back({"bank" + std::to_string(i + 1), T, T * rng.uniform(0.03, 0.08),
                        T * rng.uniform(0.05, 0.25), rng.uniform(0.03, 0.12)});
    }
    return firesale::build_network(rows, Eigen::VectorXd::Constant(n, rate));
}

}  // namespace testing_support
