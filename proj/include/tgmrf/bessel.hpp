#ifndef TGMRF_BESSEL_HPP
#define TGMRF_BESSEL_HPP

#include <cmath>
#include <numbers>

namespace tgmrf {

namespace detail {

// Hankel asymptotic coefficients c_m = prod_{j=1..m} (mu - (2j-1)^2) / (m! 8^m)
// evaluated for nu = 0 (mu = 0) and nu = 1 (mu = 4).
inline void hankel_pq(double x, double nu, double& p, double& q) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    p = 1.0;
    q = 0.0;
    const double inv8x = 1.0 / (8.0 * x);
    for (int m = 1; m <= 16; ++m) {
        term *= (mu - (2.0 * m - 1.0) * (2.0 * m - 1.0)) / m * inv8x;
        if (m % 2 == 1)
            q += (((m - 1) / 2) % 2 == 0 ? term : -term);
        else
            p += ((m / 2) % 2 == 0 ? term : -term);
        if (std::abs(term) < 1e-17) break;
    }
}

} // namespace detail

/// Bessel J0: Maclaurin series below |x| = 12, Hankel asymptotic expansion
/// beyond. Absolute accuracy comfortably below 1e-10 on [0, 1e6].
inline double bessel_j0(double x) {
    x = std::abs(x);
    if (x < 12.0) {
        const double t = 0.25 * x * x;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k <= 40; ++k) {
            term *= -t / (static_cast<double>(k) * k);
            sum += term;
            if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
        }
        return sum;
    }
    double p, q;
    detail::hankel_pq(x, 0.0, p, q);
    const double w = x - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(w) - q * std::sin(w));
}

/// Bessel J1 with the same series/asymptotic split at |x| = 12.
inline double bessel_j1(double x) {
    const double sign = x < 0.0 ? -1.0 : 1.0;
    x = std::abs(x);
    if (x < 12.0) {
        const double t = 0.25 * x * x;
        double term = 0.5 * x, sum = term;
        for (int k = 1; k <= 40; ++k) {
            term *= -t / (static_cast<double>(k) * (k + 1.0));
            sum += term;
            if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
        }
        return sign * sum;
    }
    double p, q;
    detail::hankel_pq(x, 1.0, p, q);
    const double w = x - 0.75 * std::numbers::pi;
    return sign * std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(w) - q * std::sin(w));
}

} // namespace tgmrf

#endif
