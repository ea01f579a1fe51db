#ifndef TGMRF_CONTINUOUS_HPP
#define TGMRF_CONTINUOUS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "tgmrf/bessel.hpp"
#include "tgmrf/quadrature.hpp"
#include "tgmrf/rng.hpp"

namespace tgmrf {

/// Euclidean distance between the polar points (mu, theta1) and (lambda,
/// theta2) on the unit disc, where a parameter value p sits at radius 1-p.
inline double polar_distance(double mu, double lambda, double theta1, double theta2) {
    const double a = 1.0 - mu;
    const double b = 1.0 - lambda;
    const double d2 = a * a + b * b - 2.0 * a * b * std::cos(theta1 - theta2);
    return std::sqrt(std::max(d2, 0.0));
}

/// Covariance of a homogeneous isotropic field as a function of Euclidean
/// distance, with its derivative (analytic when available, otherwise central
/// differences with step 1e-6, one-sided at 0).
struct RadialCovariance {
    std::function<double(double)> upsilon;
    std::function<double(double)> upsilon_prime;

    static RadialCovariance with_numeric_derivative(std::function<double(double)> ups,
                                                    double step = 1e-6) {
        RadialCovariance rc;
        rc.upsilon = ups;
        rc.upsilon_prime = [ups, step](double t) {
            if (t < step) return (ups(t + step) - ups(t)) / step;
            return (ups(t + step) - ups(t - step)) / (2.0 * step);
        };
        return rc;
    }

    static RadialCovariance analytic(std::function<double(double)> ups,
                                     std::function<double(double)> ups_prime) {
        RadialCovariance rc;
        rc.upsilon = std::move(ups);
        rc.upsilon_prime = std::move(ups_prime);
        return rc;
    }

    double covariance(double mu, double lambda, double theta1, double theta2) const {
        return upsilon(polar_distance(mu, lambda, theta1, theta2));
    }
};

/// Closed-form jump of d/dmu R across mu = lambda for an isotropic field:
/// -2 Upsilon'(0) on the diagonal, 0 for theta1 != theta2.
inline double c_lambda_isotropic(const RadialCovariance& cov, double theta1, double theta2) {
    if (theta1 == theta2) return -2.0 * cov.upsilon_prime(0.0);
    return 0.0;
}

/// Numeric companion: evaluate the derivative-jump definition directly with
/// one-sided finite differences of R in mu (step 1e-5). Second-order
/// stencils, so the smooth part of R cancels to O(step^2) even where
/// d^2 D / d mu^2 grows like 1/D near the collapse point.
inline double c_lambda_numeric(const RadialCovariance& cov, double lambda, double theta1,
                               double theta2, double step = 1e-5) {
    const double r0 = cov.covariance(lambda, lambda, theta1, theta2);
    const auto at = [&](double mu) { return cov.covariance(mu, lambda, theta1, theta2); };
    const double left =
        (3.0 * r0 - 4.0 * at(lambda - step) + at(lambda - 2.0 * step)) / (2.0 * step);
    const double right =
        (-3.0 * r0 + 4.0 * at(lambda + step) - at(lambda + 2.0 * step)) / (2.0 * step);
    return left - right;
}

/// Driving-noise ingredients: the covariance-derivative jump C_lambda and its
/// square-root normalization B_lambda (the constant K on the C = 0 branch).
struct NoiseSpec {
    std::function<double(double, double, double)> c_lambda; // (lambda, theta1, theta2)
    double K = 1.0;

    double b_lambda(double lambda, double theta) const {
        if (K == 0.0) throw std::invalid_argument("NoiseSpec: K must be nonzero");
        const double c = c_lambda(lambda, theta, theta);
        if (c < 0.0)
            throw std::invalid_argument("NoiseSpec: C_lambda(theta,theta) must be nonnegative");
        return c != 0.0 ? std::sqrt(c) : K;
    }

    static NoiseSpec isotropic(const RadialCovariance& cov, double K = 1.0) {
        NoiseSpec ns;
        ns.K = K;
        ns.c_lambda = [cov](double, double t1, double t2) {
            return c_lambda_isotropic(cov, t1, t2);
        };
        return ns;
    }
};

struct IncrementMoments {
    double same_level_cov = 0.0; // E[w_l2(t1) w_l2(t2)]
    double increment_var = 0.0;  // E[(w_l1(t1) - w_l2(t2))^2]
};

/// Second moments of the driving noise by adaptive quadrature of
///   E[w_l(t1) w_l(t2)]            = int_0^l  C_u(t1,t2)/(B_u(t1) B_u(t2)) du
///   E[(w_l1(t1) - w_l2(t2))^2]    = l1 + l2 - 2 int_0^l2 (same integrand) du
/// for l2 <= l1. On the diagonal the increment variance reduces to l1 - l2
/// whenever C_u(t,t) vanishes only on a null set.
inline IncrementMoments w_increment_moments(const NoiseSpec& spec, double lambda1,
                                            double lambda2, double theta1, double theta2,
                                            double tol = 1e-8) {
    if (lambda2 > lambda1)
        throw std::invalid_argument("w_increment_moments: requires lambda2 <= lambda1");
    const auto integrand = [&](double u) {
        return spec.c_lambda(u, theta1, theta2) /
               (spec.b_lambda(u, theta1) * spec.b_lambda(u, theta2));
    };
    IncrementMoments m;
    m.same_level_cov = lambda2 == 0.0 ? 0.0 : adaptive_simpson(integrand, 0.0, lambda2, tol);
    m.increment_var = lambda1 + lambda2 - 2.0 * m.same_level_cov;
    return m;
}

/// Radial covariance of the Whittle field, Upsilon(t) = int_0^inf
/// b/(1+b^2)^2 J0(bt) db, by panelled adaptive quadrature. The tail beyond
/// B is bounded by 1/(2(1+B^2)) via |J0| <= 1, or through the 1/sqrt decay of
/// the Bessel envelope once bt is large.
inline double whittle_upsilon(double t, double tol = 1e-8) {
    t = std::abs(t);
    const auto f = [t](double b) {
        const double s = 1.0 + b * b;
        return b / (s * s) * bessel_j0(b * t);
    };
    // Cut point: envelope bound sqrt(2/(pi t)) (2/5) B^-5/2 <= tol/2 when the
    // integrand oscillates, else the crude 1/(2(1+B^2)) bound.
    double B = std::sqrt(1.0 / tol);
    if (t > 1e-3) {
        const double env = std::sqrt(2.0 / (std::numbers::pi * t)) * 0.4;
        const double B_osc = std::pow(env / (0.5 * tol), 0.4);
        B = std::min(B, std::max(B_osc, 8.0));
    }
    const double panel = t > 1e-9 ? std::min(4.0, 0.5 * std::numbers::pi / t) : 4.0;
    return adaptive_simpson_panels(f, 0.0, B, 0.5 * tol, panel);
}

/// Derivative Upsilon'(t) = -int_0^inf b^2/(1+b^2)^2 J1(bt) db. At t = 0 the
/// integrand vanishes identically (J1(0) = 0), so Upsilon'(0) = 0 exactly.
inline double whittle_upsilon_prime(double t, double tol = 1e-8) {
    const double sign = t < 0.0 ? -1.0 : 1.0;
    t = std::abs(t);
    if (t == 0.0) return 0.0;
    const auto f = [t](double b) {
        const double s = 1.0 + b * b;
        return -b * b / (s * s) * bessel_j1(b * t);
    };
    // b^2/(1+b^2)^2 tail decays like 1/b^2: int_B^inf <= 1/B; with the Bessel
    // envelope the bound improves to sqrt(2/(pi t)) (2/3) B^-3/2.
    const double env = std::sqrt(2.0 / (std::numbers::pi * t)) * (2.0 / 3.0);
    const double B = std::max(std::pow(env / (0.5 * tol), 2.0 / 3.0), 8.0);
    const double panel = std::min(4.0, 0.5 * std::numbers::pi / t);
    return sign * adaptive_simpson_panels(f, 0.0, B, 0.5 * tol, panel);
}

/// Brownian bridge covariance R(t,s) = min(t,s) (1 - max(t,s)) on [0,1].
inline double bb_covariance(double t, double s) {
    return std::min(t, s) * (1.0 - std::max(t, s));
}

/// One-step prediction coefficient of the Brownian bridge: E[x(s) | x(r)] =
/// (1-s)/(1-r) x(r) for 0 <= r < s < 1. Equals R(s,r)/R(r,r).
inline double bb_predict(double r, double s) {
    if (!(r >= 0.0 && r < s && s < 1.0))
        throw std::invalid_argument("bb_predict: requires 0 <= r < s < 1");
    return (1.0 - s) / (1.0 - r);
}

/// Simulate the bridge on the uniform grid {i/n_steps} by the telescoping
/// conditional recursion from t = 0 toward t = 1, x(0) = 0. Conditional
/// variance at each step is R(s,s) - coeff^2 R(r,r).
inline std::vector<double> bb_telescope_sample(int n_steps, std::uint64_t seed) {
    if (n_steps < 2) throw std::invalid_argument("bb_telescope_sample: n_steps >= 2");
    GaussianStream gs(seed);
    std::vector<double> path(static_cast<std::size_t>(n_steps) + 1, 0.0);
    for (int i = 1; i <= n_steps; ++i) {
        const double r = static_cast<double>(i - 1) / n_steps;
        const double s = static_cast<double>(i) / n_steps;
        if (i == n_steps) {
            path[static_cast<std::size_t>(i)] = 0.0; // pinned endpoint
            break;
        }
        const double coeff = bb_predict(r, s);
        const double var = bb_covariance(s, s) - coeff * coeff * bb_covariance(r, r);
        path[static_cast<std::size_t>(i)] =
            coeff * path[static_cast<std::size_t>(i - 1)] + std::sqrt(std::max(var, 0.0)) * gs.next();
    }
    return path;
}

} // namespace tgmrf

#endif
