#include <catch2/catch_amalgamated.hpp>

#include "tgmrf/telescoping.hpp"
#include "helpers.hpp"

using namespace tgmrf;

namespace {

double rel_dev(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
}

} // namespace

TEST_CASE("decoupled model has F = 0, Q = I") {
    const LatticeSpec spec(4, 5);
    auto sys = build_precision(spec, NeighborhoodCoefficients::homogeneous(1.0, test::uniform_beta(0.0)),
                               Matrix::Zero(spec.boundary_count(), spec.boundary_count()));
    auto d = shells(spec);
    auto model = factorize(permute_system(sys, d), sys.boundary_cov);
    for (int k = 1; k <= model.tau; ++k) {
        CHECK(model.F[static_cast<std::size_t>(k - 1)].cwiseAbs().maxCoeff() == 0.0);
        CHECK(model.Q[static_cast<std::size_t>(k - 1)].isIdentity(1e-14));
    }
}

TEST_CASE("two-stage recursion on the 3x3 model") {
    const LatticeSpec spec(3, 3);
    auto sys = build_precision(spec, NeighborhoodCoefficients::homogeneous(9.0, test::uniform_beta(1.0)),
                               Matrix::Identity(spec.boundary_count(), spec.boundary_count()));
    auto d = shells(spec);
    auto model = factorize(permute_system(sys, d), sys.boundary_cov);
    REQUIRE(model.tau == 2);
    // Center given the ring averages its 8 neighbors with weight 1/9.
    CHECK_THAT(model.Q[1](0, 0), Catch::Matchers::WithinAbs(1.0 / 9.0, 1e-15));
    REQUIRE(model.F[1].cols() == 8);
    for (int j = 0; j < 8; ++j)
        CHECK_THAT(model.F[1](0, j), Catch::Matchers::WithinAbs(1.0 / 9.0, 1e-15));
    // Cross-check both stages against the covariance oracle.
    auto jc = joint_covariance(sys);
    auto oracle = factorize_oracle(jc.cov_xx, jc.cov_xb, sys.boundary_cov, d);
    for (int k = 1; k <= 2; ++k) {
        CHECK(rel_dev(model.F[static_cast<std::size_t>(k - 1)], oracle.F[static_cast<std::size_t>(k - 1)]) < 1e-10);
        CHECK(rel_dev(model.Q[static_cast<std::size_t>(k - 1)], oracle.Q[static_cast<std::size_t>(k - 1)]) < 1e-10);
    }
}

TEST_CASE("oracle equivalence on seeded heterogeneous models") {
    // Heterogeneous symmetric beta from a seeded generator, up to NM = 400.
    for (const auto [n, m] : {std::pair{5, 5}, {3, 8}, {1, 6}, {20, 20}}) {
        auto rm = test::random_model(n, m, 2024 + static_cast<std::uint64_t>(n * m));
        auto d = shells(rm.spec);
        auto model = factorize(permute_system(rm.sys, d), rm.sys.boundary_cov);
        auto jc = joint_covariance(rm.sys);
        auto oracle = factorize_oracle(jc.cov_xx, jc.cov_xb, rm.sys.boundary_cov, d);
        for (int k = 1; k <= model.tau; ++k) {
            CHECK(rel_dev(model.F[static_cast<std::size_t>(k - 1)], oracle.F[static_cast<std::size_t>(k - 1)]) < 1e-9);
            CHECK(rel_dev(model.Q[static_cast<std::size_t>(k - 1)], oracle.Q[static_cast<std::size_t>(k - 1)]) < 1e-9);
        }
    }
}

TEST_CASE("all Q factors admit a strict Cholesky") {
    auto rm = test::random_model(7, 6, 5150);
    auto d = shells(rm.spec);
    auto model = factorize(permute_system(rm.sys, d), rm.sys.boundary_cov);
    for (const auto& q : model.Q) {
        CHECK((q - q.transpose()).norm() < 1e-12);
        double min_pivot = 0.0;
        int bad = -1;
        CHECK(detail::cholesky_pivots(q, min_pivot, bad));
        CHECK(min_pivot > 0.0);
    }
}

TEST_CASE("cholesky reassembly identity") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto rm = test::random_model(5, 4, seed);
        auto d = shells(rm.spec);
        auto bt = permute_system(rm.sys, d);
        auto model = factorize(bt, rm.sys.boundary_cov);
        const Matrix rebuilt = cholesky_reassemble(model, bt);
        const Matrix papt = bt.assemble();
        CHECK((rebuilt - papt).norm() / papt.norm() < 1e-10);
    }
}

TEST_CASE("chain-implied covariance reproduces the dense oracle") {
    auto rm = test::random_model(4, 6, 77); // NM = 24
    auto d = shells(rm.spec);
    auto model = factorize(permute_system(rm.sys, d), rm.sys.boundary_cov);
    const Matrix chain_cov = chain_covariance(model);
    auto jc = joint_covariance(rm.sys);
    // Assemble the reference joint covariance of (z_0, z_1..z_tau).
    const int n = rm.spec.interior_count();
    const int nb = rm.spec.boundary_count();
    Matrix ref(nb + n, nb + n);
    ref.block(0, 0, nb, nb) = rm.sys.boundary_cov;
    Matrix perm_xx(n, n), perm_xb(n, nb);
    for (int a = 0; a < n; ++a) {
        perm_xb.row(a) = jc.cov_xb.row(d.node_at[static_cast<std::size_t>(a)]);
        for (int b = 0; b < n; ++b)
            perm_xx(a, b) = jc.cov_xx(d.node_at[static_cast<std::size_t>(a)],
                                      d.node_at[static_cast<std::size_t>(b)]);
    }
    ref.block(nb, nb, n, n) = perm_xx;
    ref.block(nb, 0, n, nb) = perm_xb;
    ref.block(0, nb, nb, n) = perm_xb.transpose();
    CHECK((chain_cov - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("factorize reports the failing stage for an invalid model") {
    const LatticeSpec spec(3, 3);
    auto sys = build_precision(spec, NeighborhoodCoefficients::homogeneous(1.0, test::uniform_beta(1.0)),
                               Matrix::Identity(spec.boundary_count(), spec.boundary_count()));
    auto d = shells(spec);
    // alpha == total beta mass: indefinite interior operator.
    CHECK_THROWS_WITH(factorize(permute_system(sys, d), sys.boundary_cov),
                      Catch::Matchers::ContainsSubstring("not positive definite"));
}

TEST_CASE("factorize_oracle rejects a singular previous-shell covariance") {
    const LatticeSpec spec(2, 2);
    auto sys = build_precision(spec, NeighborhoodCoefficients::homogeneous(9.0, test::uniform_beta(1.0)),
                               Matrix::Zero(spec.boundary_count(), spec.boundary_count()));
    auto d = shells(spec);
    auto jc = joint_covariance(sys);
    CHECK_THROWS_WITH(factorize_oracle(jc.cov_xx, jc.cov_xb, sys.boundary_cov, d),
                      Catch::Matchers::ContainsSubstring("singular"));
}
