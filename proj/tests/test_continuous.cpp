#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tgmrf/continuous.hpp"

using namespace tgmrf;
using Catch::Matchers::WithinAbs;

TEST_CASE("polar distance") {
    CHECK(polar_distance(0.3, 0.3, 1.1, 1.1) == 0.0);
    CHECK_THAT(polar_distance(0.0, 1.0, 0.7, 2.2), WithinAbs(1.0, 1e-15));
    CHECK_THAT(polar_distance(0.0, 0.0, 0.0, std::numbers::pi), WithinAbs(2.0, 1e-15));
    // Same radius, small angle: chord length 2 (1-l) sin(dtheta/2).
    CHECK_THAT(polar_distance(0.5, 0.5, 0.0, 0.2), WithinAbs(2.0 * 0.5 * std::sin(0.1), 1e-15));
}

TEST_CASE("bessel J0 and J1 reference values") {
    // Handbook values (Abramowitz & Stegun tables).
    CHECK_THAT(bessel_j0(0.0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(bessel_j0(1.0), WithinAbs(0.7651976865579666, 1e-12));
    CHECK_THAT(bessel_j0(2.404825557695773), WithinAbs(0.0, 1e-12)); // first zero
    CHECK_THAT(bessel_j0(5.0), WithinAbs(-0.17759677131433830, 1e-12));
    CHECK_THAT(bessel_j0(15.0), WithinAbs(-0.014224472826780773, 1e-10));
    CHECK_THAT(bessel_j0(100.0), WithinAbs(0.019985850304223122, 1e-10));
    CHECK_THAT(bessel_j1(0.0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(bessel_j1(1.0), WithinAbs(0.4400505857449335, 1e-12));
    CHECK_THAT(bessel_j1(5.0), WithinAbs(-0.3275791375914652, 1e-12));
    CHECK_THAT(bessel_j1(15.0), WithinAbs(0.20510403861352276, 1e-10));
    CHECK_THAT(bessel_j1(-1.0), WithinAbs(-0.4400505857449335, 1e-12));
    // Both sides of the series/asymptotic split stay on the curve.
    CHECK_THAT(bessel_j0(11.999999), WithinAbs(0.04768908734969627, 1e-10));
    CHECK_THAT(bessel_j0(12.000001), WithinAbs(0.0476895342439049, 1e-10));
    CHECK_THAT(bessel_j1(11.999999), WithinAbs(-0.22344717080042228, 1e-10));
    CHECK_THAT(bessel_j1(12.000001), WithinAbs(-0.22344703818061667, 1e-10));
}

TEST_CASE("adaptive quadrature sanity") {
    CHECK_THAT(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-10),
               WithinAbs(2.0, 1e-9));
    CHECK_THAT(adaptive_simpson([](double x) { return std::exp(-x * x); }, -8.0, 8.0, 1e-10),
               WithinAbs(std::sqrt(std::numbers::pi), 1e-9));
    CHECK_THAT(adaptive_simpson_panels([](double x) { return std::cos(x); }, 0.0, 200.0, 1e-9, 1.0),
               WithinAbs(std::sin(200.0), 1e-8));
}

TEST_CASE("closed-form C_lambda for exponential covariances") {
    auto exp_cov = RadialCovariance::analytic([](double t) { return std::exp(-t); },
                                              [](double t) { return -std::exp(-t); });
    CHECK_THAT(c_lambda_isotropic(exp_cov, 0.4, 0.4), WithinAbs(2.0, 1e-15));
    CHECK(c_lambda_isotropic(exp_cov, 0.0, std::numbers::pi / 2) == 0.0);
}

TEST_CASE("numeric C_lambda agrees with the closed form") {
    const auto check_grid = [](const RadialCovariance& cov, double expected_diag, double tol) {
        for (double lambda : {0.1, 0.3, 0.5, 0.7, 0.9})
            for (double dtheta : {0.0, 0.4, 0.9, 1.7, 3.0}) {
                const double closed = dtheta == 0.0 ? expected_diag : 0.0;
                const double numeric = c_lambda_numeric(cov, lambda, 0.2, 0.2 + dtheta);
                REQUIRE_THAT(numeric, WithinAbs(closed, tol));
            }
    };
    SECTION("exp(-t)") {
        auto cov = RadialCovariance::analytic([](double t) { return std::exp(-t); },
                                              [](double t) { return -std::exp(-t); });
        check_grid(cov, 2.0, 1e-4);
    }
    SECTION("exp(-2t)") {
        auto cov = RadialCovariance::analytic([](double t) { return std::exp(-2.0 * t); },
                                              [](double t) { return -2.0 * std::exp(-2.0 * t); });
        check_grid(cov, 4.0, 1e-4);
    }
    SECTION("whittle") {
        auto cov = RadialCovariance::analytic([](double t) { return whittle_upsilon(t); },
                                              [](double t) { return whittle_upsilon_prime(t); });
        check_grid(cov, 0.0, 1e-4);
    }
}

TEST_CASE("numeric derivative fallback") {
    auto cov = RadialCovariance::with_numeric_derivative([](double t) { return std::exp(-t); });
    CHECK_THAT(cov.upsilon_prime(0.5), WithinAbs(-std::exp(-0.5), 1e-9));
    // One-sided at zero: exact up to O(h) truncation.
    CHECK_THAT(cov.upsilon_prime(0.0), WithinAbs(-1.0, 1e-5));
}

TEST_CASE("driving noise increment moments") {
    auto exp_cov = RadialCovariance::analytic([](double t) { return std::exp(-t); },
                                              [](double t) { return -std::exp(-t); });
    auto spec = NoiseSpec::isotropic(exp_cov);
    SECTION("diagonal increments are Brownian") {
        auto m = w_increment_moments(spec, 0.7, 0.2, 1.3, 1.3);
        CHECK_THAT(m.increment_var, WithinAbs(0.5, 1e-7));
        CHECK_THAT(m.same_level_cov, WithinAbs(0.2, 1e-7));
    }
    SECTION("off-diagonal same-level covariance vanishes") {
        auto m = w_increment_moments(spec, 0.9, 0.9, 0.3, 1.9);
        CHECK_THAT(m.same_level_cov, WithinAbs(0.0, 1e-12));
    }
    SECTION("zero-length increment") {
        auto m = w_increment_moments(spec, 0.4, 0.4, 0.8, 0.8);
        CHECK_THAT(m.increment_var, WithinAbs(0.0, 1e-12));
    }
    SECTION("general [a,b] identity for a second admissible covariance") {
        auto cov2 = RadialCovariance::analytic([](double t) { return std::exp(-2.0 * t); },
                                               [](double t) { return -2.0 * std::exp(-2.0 * t); });
        auto spec2 = NoiseSpec::isotropic(cov2);
        for (auto [a, b] : {std::pair{0.0, 1.0}, {0.15, 0.35}, {0.5, 0.95}}) {
            auto m = w_increment_moments(spec2, b, a, 0.6, 0.6);
            REQUIRE_THAT(m.increment_var, WithinAbs(b - a, 1e-7));
        }
    }
    SECTION("lambda order is enforced") {
        CHECK_THROWS_AS(w_increment_moments(spec, 0.2, 0.7, 0.0, 0.0), std::invalid_argument);
    }
}

TEST_CASE("whittle radial covariance") {
    SECTION("value at zero from the closed-form antiderivative") {
        // int_0^inf b/(1+b^2)^2 db = 1/2 exactly.
        CHECK_THAT(whittle_upsilon(0.0), WithinAbs(0.5, 1e-7));
    }
    SECTION("derivative at zero vanishes") {
        CHECK_THAT(whittle_upsilon_prime(0.0), WithinAbs(0.0, 1e-6));
        // Hence B reduces to the constant K.
        auto cov = RadialCovariance::analytic([](double t) { return whittle_upsilon(t); },
                                              [](double t) { return whittle_upsilon_prime(t); });
        auto spec = NoiseSpec::isotropic(cov, 2.5);
        CHECK_THAT(spec.b_lambda(0.5, 1.0), WithinAbs(2.5, 1e-12));
    }
    SECTION("monotone decreasing on [0,1]") {
        double prev = whittle_upsilon(0.0);
        for (int i = 1; i <= 10; ++i) {
            const double cur = whittle_upsilon(0.1 * i);
            REQUIRE(cur < prev);
            prev = cur;
        }
    }
    SECTION("stable under tolerance halving") {
        for (double t : {0.0, 0.3, 1.0, 2.5, 4.0}) {
            const double coarse = whittle_upsilon(t, 1e-8);
            const double fine = whittle_upsilon(t, 5e-9);
            REQUIRE_THAT(coarse, WithinAbs(fine, 1e-7));
        }
    }
    SECTION("independent reference value") {
        // Upsilon(1) = K_1(1)/2 via the Hankel-transform identity; K_1(1) from
        // handbook tables.
        CHECK_THAT(whittle_upsilon(1.0), WithinAbs(0.3009536150986173, 1e-7));
    }
}

TEST_CASE("brownian bridge prediction coefficient") {
    CHECK_THAT(bb_predict(0.5, 0.75), WithinAbs(0.5, 1e-15));
    CHECK_THAT(bb_covariance(0.75, 0.5) / bb_covariance(0.5, 0.5), WithinAbs(0.5, 1e-15));
    SECTION("equals the covariance ratio on a 50-point grid") {
        for (int i = 0; i < 50; ++i) {
            const double r = 0.01 + 0.9 * i / 50.0;
            const double s = r + 0.5 * (1.0 - r) * (i % 7 + 1) / 8.0;
            REQUIRE_THAT(bb_predict(r, s),
                         WithinAbs(bb_covariance(s, r) / bb_covariance(r, r), 1e-15));
        }
    }
    SECTION("identity limit") {
        CHECK_THAT(bb_predict(0.3, 0.3 + 1e-12), WithinAbs(1.0, 1e-11));
    }
    SECTION("covariance factorization across a separating point") {
        const double t = 0.25, r = 0.5, s = 0.75;
        CHECK_THAT(bb_covariance(s, t), WithinAbs(bb_predict(r, s) * bb_covariance(r, t), 1e-14));
        CHECK_THAT(bb_covariance(s, t), WithinAbs(0.0625, 1e-15));
        // Seeded triples t < r < s.
        CounterRng rng(321);
        for (int k = 0; k < 100; ++k) {
            double a = rng.next_uniform(), b = rng.next_uniform(), c = rng.next_uniform();
            if (a > b) std::swap(a, b);
            if (b > c) std::swap(b, c);
            if (a > b) std::swap(a, b);
            if (c >= 1.0 || a <= 0.0 || a == b || b == c) continue;
            REQUIRE_THAT(bb_covariance(c, a),
                         WithinAbs(bb_predict(b, c) * bb_covariance(b, a), 1e-14));
        }
    }
    SECTION("domain validation") {
        CHECK_THROWS_AS(bb_predict(0.5, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(bb_predict(0.5, 1.0), std::invalid_argument);
    }
}

TEST_CASE("telescoped bridge simulation matches the covariance") {
    SECTION("endpoints pinned") {
        auto p = bb_telescope_sample(8, 99);
        CHECK(p.front() == 0.0);
        CHECK(p.back() == 0.0);
    }
    SECTION("grid moments at 100000 paths") {
        const int n_paths = 100000;
        const int n_steps = 4;
        double var_half = 0.0, cross = 0.0;
        for (int k = 0; k < n_paths; ++k) {
            auto p = bb_telescope_sample(n_steps, static_cast<std::uint64_t>(k));
            var_half += p[2] * p[2];
            cross += p[1] * p[3];
        }
        var_half /= n_paths;
        cross /= n_paths;
        // Moment s.e.: Var(x^2) = 2 R^2 for the variance entry; for the cross
        // term Var(xy) = R_xx R_yy + R_xy^2.
        const double se_var = std::sqrt(2.0) * 0.25 / std::sqrt(static_cast<double>(n_paths));
        const double se_cross = std::sqrt(0.1875 * 0.1875 + 0.0625 * 0.0625) /
                                std::sqrt(static_cast<double>(n_paths));
        CHECK_THAT(var_half, WithinAbs(0.25, 5.0 * se_var));
        CHECK_THAT(cross, WithinAbs(0.0625, 5.0 * se_cross));
    }
}
