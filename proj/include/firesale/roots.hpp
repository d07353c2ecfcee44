#pragma once

#include <cstddef>
#include <functional>

namespace firesale {

struct ValueAndSlope {
    double value;
    double slope;
};

struct RootResult {
    double root = 0.0;
    std::size_t iterations = 0;
};

/// Safeguarded Newton iteration on a sign-changing bracket [lo, hi].
///
/// Takes a Newton step whenever it stays inside the current bracket and
/// shrinks the residual fast enough, otherwise bisects. Stops when the
/// step falls below abs_tol or the residual is exactly zero. Throws
/// PreconditionError if fn(lo) and fn(hi) share a strict sign, and
/// NonConvergence after max_iter steps.
RootResult find_root(const std::function<ValueAndSlope(double)>& fn, double lo, double hi,
                     double abs_tol, std::size_t max_iter = 400);

/// Plain bisection; fn(lo) and fn(hi) must bracket a root.
RootResult bisect(const std::function<double(double)>& fn, double lo, double hi, double abs_tol,
                  std::size_t max_iter = 400);

}  // namespace firesale
