#include "firesale/roots.hpp"

#include "firesale/errors.hpp"

#include <cmath>
#include <utility>

namespace firesale {

RootResult find_root(const std::function<ValueAndSlope(double)>& fn, double lo, double hi,
                     double abs_tol, std::size_t max_iter) {
    if (lo > hi) std::swap(lo, hi);
    const auto flo = fn(lo);
    const auto fhi = fn(hi);
    if (flo.value == 0.0) return {lo, 0};
    if (fhi.value == 0.0) return {hi, 0};
    if ((flo.value > 0.0) == (fhi.value > 0.0)) {
        throw PreconditionError("find_root: interval does not bracket a root");
    }

    // Orient so that fn(neg) < 0 < fn(pos).
    double neg = flo.value < 0.0 ? lo : hi;
    double pos = flo.value < 0.0 ? hi : lo;

    double x = 0.5 * (lo + hi);
    double step_old = hi - lo;
    double step = step_old;
    auto fx = fn(x);

    for (std::size_t it = 1; it <= max_iter; ++it) {
        const bool newton_leaves_bracket =
            ((x - pos) * fx.slope - fx.value) * ((x - neg) * fx.slope - fx.value) >= 0.0;
        const bool newton_too_slow = std::abs(2.0 * fx.value) > std::abs(step_old * fx.slope);
        if (newton_leaves_bracket || newton_too_slow || fx.slope == 0.0) {
            step_old = step;
            step = 0.5 * (pos - neg);
            x = neg + step;
        } else {
            step_old = step;
            step = fx.value / fx.slope;
            x -= step;
        }
        if (std::abs(step) < abs_tol) return {x, it};
        fx = fn(x);
        if (fx.value == 0.0) return {x, it};
        if (fx.value < 0.0) {
            neg = x;
        } else {
            pos = x;
        }
        if (std::abs(pos - neg) < abs_tol) return {x, it};
    }
    throw NonConvergence("find_root: iteration cap reached", max_iter, std::abs(fx.value));
}

RootResult bisect(const std::function<double(double)>& fn, double lo, double hi, double abs_tol,
                  std::size_t max_iter) {
    double flo = fn(lo);
    double fhi = fn(hi);
    if (flo == 0.0) return {lo, 0};
    if (fhi == 0.0) return {hi, 0};
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw PreconditionError("bisect: interval does not bracket a root");
    }
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = fn(mid);
        if (fm == 0.0 || 0.5 * (hi - lo) < abs_tol) return {mid, it};
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    throw NonConvergence("bisect: iteration cap reached", max_iter, hi - lo);
}

}  // namespace firesale
