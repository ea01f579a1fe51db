#ifndef TGMRF_QUADRATURE_HPP
#define TGMRF_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

namespace tgmrf {

namespace detail {

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0)
        throw std::runtime_error("adaptive_simpson: recursion limit reached");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature with absolute tolerance.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 48) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Composite form for long oscillatory ranges: the interval is cut into
/// panels of at most panel_len, each integrated adaptively with a
/// proportional share of the tolerance.
template <class F>
double adaptive_simpson_panels(const F& f, double a, double b, double tol, double panel_len,
                               int max_depth = 48) {
    if (!(panel_len > 0.0)) throw std::invalid_argument("panel_len must be positive");
    const int n_panels = std::max(1, static_cast<int>(std::ceil((b - a) / panel_len)));
    const double per_panel = tol / static_cast<double>(n_panels);
    double sum = 0.0;
    for (int p = 0; p < n_panels; ++p) {
        const double x0 = a + (b - a) * p / n_panels;
        const double x1 = a + (b - a) * (p + 1) / n_panels;
        sum += adaptive_simpson(f, x0, x1, per_panel, max_depth);
    }
    return sum;
}

} // namespace tgmrf

#endif
