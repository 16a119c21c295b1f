#pragma once

#include "wsnc/errors.hpp"

#include <cmath>
#include <limits>

namespace wsnc {

struct ScalarMinimum {
    double x = 0.0;
    double value = std::numeric_limits<double>::infinity();
    int evaluations = 0;
};

/// Five-point interval search for the minimum of a convex function on (lo, hi).
///
/// The interval is split into quarters {lo, l, m, r, hi}; the endpoints are
/// never evaluated, so the objective may be infinite there. Each round keeps
/// the half-width window around the best of l, m, r:
///   best l -> (lo, m),  best m -> (l, r),  best r -> (m, hi).
/// Ties go to m, then l. NaN counts as +inf. Stops once the quarter width is
/// at most `delta_min` and returns the midpoint.
template <class F>
ScalarMinimum five_point_search(F&& f, double lo, double hi, double delta_min) {
    if (!(delta_min > 0.0)) throw DomainError("five_point_search: delta_min must be > 0");
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw InfeasibleError(InfeasibleError::Reason::Stability,
                              "five_point_search: empty search interval");
    }
    ScalarMinimum out;
    auto eval = [&](double x) {
        ++out.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    double quarter = (hi - lo) / 4.0;
    double mid = lo + 2.0 * quarter;
    double f_mid = eval(mid);
    while (quarter > delta_min) {
        const double left = mid - quarter;
        const double right = mid + quarter;
        const double f_left = eval(left);
        const double f_right = eval(right);
        if (f_mid <= f_left && f_mid <= f_right) {
            // window (left, right), midpoint unchanged
        } else if (f_left <= f_right) {
            mid = left;
            f_mid = f_left;
        } else {
            mid = right;
            f_mid = f_right;
        }
        quarter /= 2.0;
    }
    out.x = mid;
    out.value = f_mid;
    return out;
}

}  // namespace wsnc
