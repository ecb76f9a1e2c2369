#pragma once

#include <cmath>
#include <cstddef>

#include "stefan_lab/errors.hpp"

namespace stefan_lab::quadrature {

namespace detail {

template <class F>
double simpson_step(F& fn, double a, double fa, double m, double fm, double b, double fb,
                    double whole, double tol, int depth, std::size_t& evals) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = fn(lm);
    const double frm = fn(rm);
    evals += 2;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_step(fn, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, evals) +
           simpson_step(fn, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, evals);
}

}  // namespace detail

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
///
/// The interval is first split into `panels` equal pieces so that integrands with
/// interior structure are not mis-sampled by the very first estimate.
template <class F>
double adaptive_simpson(F&& fn, double a, double b, double tol = 1e-12, int panels = 8,
                        int max_depth = 48) {
    if (a == b) return 0.0;
    const double width = (b - a) / panels;
    double total = 0.0;
    std::size_t evals = 0;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * width;
        const double hi = (k + 1 == panels) ? b : lo + width;
        const double mid = 0.5 * (lo + hi);
        const double flo = fn(lo);
        const double fmid = fn(mid);
        const double fhi = fn(hi);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += detail::simpson_step(fn, lo, flo, mid, fmid, hi, fhi, whole, tol / panels,
                                      max_depth, evals);
    }
    if (!std::isfinite(total)) throw NumericalError("adaptive_simpson: non-finite integral");
    return total;
}

/// Composite trapezoid on n equal panels; used as a low-order cross-check.
template <class F>
double trapezoid(F&& fn, double a, double b, std::size_t n) {
    const double step = (b - a) / static_cast<double>(n);
    double sum = 0.5 * (fn(a) + fn(b));
    for (std::size_t i = 1; i < n; ++i) sum += fn(a + step * static_cast<double>(i));
    return sum * step;
}

}  // namespace stefan_lab::quadrature
