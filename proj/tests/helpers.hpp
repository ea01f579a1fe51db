#ifndef TGMRF_TEST_HELPERS_HPP
#define TGMRF_TEST_HELPERS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <unistd.h>

#include "tgmrf/lattice.hpp"
#include "tgmrf/rng.hpp"
#include "tgmrf/shells.hpp"

namespace tgmrf::test {

/// Scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               (tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline std::array<double, 8> uniform_beta(double v) {
    return {v, v, v, v, v, v, v, v};
}

/// Seeded random valid model: symmetric heterogeneous beta in (0,1),
/// diagonally dominant alpha (guarantees PD), random SPD boundary covariance.
struct RandomModel {
    LatticeSpec spec;
    PrecisionSystem sys;
};

inline RandomModel random_model(int n_rows, int n_cols, std::uint64_t seed,
                                bool random_boundary_cov = true) {
    LatticeSpec spec(n_rows, n_cols);
    CounterRng rng(seed);
    const int n = spec.interior_count();
    std::vector<std::array<double, 8>> beta(static_cast<std::size_t>(n));
    for (int idx = 0; idx < n; ++idx) {
        const Node p = spec.interior_node(idx);
        for (int k = 0; k < 8; ++k) {
            const Node q{p.row + kNeighborOffsets[k].row, p.col + kNeighborOffsets[k].col};
            if (spec.is_interior(q) && spec.interior_index(q) < idx) {
                // Mirror of an already-drawn weight.
                beta[static_cast<std::size_t>(idx)][static_cast<std::size_t>(k)] =
                    beta[static_cast<std::size_t>(spec.interior_index(q))]
                        [static_cast<std::size_t>(opposite_offset(k))];
            } else {
                beta[static_cast<std::size_t>(idx)][static_cast<std::size_t>(k)] =
                    rng.next_uniform();
            }
        }
    }
    std::vector<double> alpha(static_cast<std::size_t>(n));
    for (int idx = 0; idx < n; ++idx) {
        double sum = 0.0;
        for (int k = 0; k < 8; ++k)
            sum += std::abs(beta[static_cast<std::size_t>(idx)][static_cast<std::size_t>(k)]);
        alpha[static_cast<std::size_t>(idx)] = sum + 0.5 + rng.next_uniform();
    }
    const int nb = spec.boundary_count();
    Matrix sigma_b;
    if (random_boundary_cov) {
        Matrix w(nb, nb);
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j) w(i, j) = 2.0 * rng.next_uniform() - 1.0;
        sigma_b = w * w.transpose() / nb + 0.5 * Matrix::Identity(nb, nb);
    } else {
        sigma_b = Matrix::Identity(nb, nb);
    }

    RandomModel m{spec, {}};
    m.sys = build_precision(
        spec, NeighborhoodCoefficients::heterogeneous(std::move(alpha), std::move(beta)),
        sigma_b);
    return m;
}

/// Conditional-Gaussian oracle in covariance form: posterior mean and
/// covariance of target given noisy linear observations obs = G x_obs + e,
/// where joint is the covariance of the stacked vector and idx_* select rows.
struct DenseConditional {
    Vector mean;
    Matrix cov;
};

inline DenseConditional conditional_oracle(const Matrix& joint,
                                           const std::vector<int>& target_idx,
                                           const std::vector<int>& obs_idx,
                                           const Vector& gains, const Vector& noise_var,
                                           const Vector& values) {
    const auto nt = static_cast<Eigen::Index>(target_idx.size());
    const auto no = static_cast<Eigen::Index>(obs_idx.size());
    Matrix c_tt(nt, nt), c_to(nt, no), c_oo(no, no);
    for (Eigen::Index i = 0; i < nt; ++i)
        for (Eigen::Index j = 0; j < nt; ++j)
            c_tt(i, j) = joint(target_idx[static_cast<std::size_t>(i)],
                               target_idx[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < nt; ++i)
        for (Eigen::Index j = 0; j < no; ++j)
            c_to(i, j) = joint(target_idx[static_cast<std::size_t>(i)],
                               obs_idx[static_cast<std::size_t>(j)]) *
                         gains[j];
    for (Eigen::Index i = 0; i < no; ++i)
        for (Eigen::Index j = 0; j < no; ++j) {
            c_oo(i, j) = gains[i] * gains[j] *
                         joint(obs_idx[static_cast<std::size_t>(i)],
                               obs_idx[static_cast<std::size_t>(j)]);
            if (i == j) c_oo(i, j) += noise_var[i];
        }
    DenseConditional out;
    if (no == 0) {
        out.mean = Vector::Zero(nt);
        out.cov = c_tt;
        return out;
    }
    Eigen::LLT<Matrix> llt(c_oo);
    out.mean = c_to * llt.solve(values);
    out.cov = c_tt - c_to * llt.solve(c_to.transpose());
    return out;
}

} // namespace tgmrf::test

#endif
