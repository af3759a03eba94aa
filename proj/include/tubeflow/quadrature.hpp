#pragma once

#include "tubeflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace tubeflow::quad {

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth, int& bad)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    if (depth <= 0) {
        ++bad;
        return left + right + diff / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, bad)
         + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, bad);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b]. The target error is
/// max(tol, rel_tol * |coarse estimate|). Throws QuadratureError if the
/// recursion depth is exhausted anywhere.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-13, double rel_tol = 1e-13,
                        int max_depth = 48)
{
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    tol = std::max(tol, rel_tol * std::abs(whole));
    int bad = 0;
    const double v = detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, bad);
    if (bad > 0 || !std::isfinite(v)) throw QuadratureError("adaptive Simpson did not converge");
    return v;
}

/// Composite Simpson weights for N uniform cells of width h. Odd N closes
/// with a 3/8 panel on the last three cells.
std::vector<double> simpson_weights(int N, double h);

/// Inverse of a strictly increasing function on [lo, hi] by bisection,
/// to |dx| <= xtol. Throws RangeError if y is not bracketed.
template <class F>
double bisect_increasing(const F& f, double y, double lo, double hi, double xtol = 1e-12)
{
    double flo = f(lo);
    double fhi = f(hi);
    if (y < flo || y > fhi) throw RangeError("value outside the range of the function");
    if (y == flo) return lo;
    if (y == fhi) return hi;
    while (hi - lo > xtol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace tubeflow::quad
