#ifndef TGMRF_SAMPLING_HPP
#define TGMRF_SAMPLING_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tgmrf/rng.hpp"
#include "tgmrf/shells.hpp"
#include "tgmrf/telescoping.hpp"

namespace tgmrf {

struct FieldSample {
    Vector boundary;  // z_0, clockwise boundary order
    Matrix interior;  // N x M lattice values
    std::uint64_t seed = 0;
};

/// Draw one field realization by running the chain forward:
/// z_0 = chol(boundary_cov) xi_0, z_k = F_k z_{k-1} + chol(Q_k) xi_k.
/// Normal draws are consumed shell by shell in clockwise node order (the
/// boundary ring always consumes its full length, even when boundary_cov is
/// rank deficient), so a given (model, seed) reproduces bit-for-bit.
inline FieldSample sample_field(const TelescopingModel& model,
                                const ShellDecomposition& dec,
                                std::uint64_t seed) {
    if (model.tau != dec.tau)
        throw std::invalid_argument("sample_field: model and decomposition disagree");
    GaussianStream gs(seed);
    FieldSample out;
    out.seed = seed;

    const int nb = model.sizes[0];
    const auto bfac = detail::pivoted_cholesky(model.boundary_cov);
    Vector xi(nb);
    for (int i = 0; i < nb; ++i) xi[i] = gs.next();
    out.boundary = detail::apply_factor(bfac, xi);

    Vector z_prev = out.boundary;
    Vector interior_flat(dec.spec.interior_count());
    int off = 0;
    for (int k = 1; k <= model.tau; ++k) {
        const int nk = model.sizes[static_cast<std::size_t>(k)];
        Eigen::LLT<Matrix> llt(model.Q[static_cast<std::size_t>(k - 1)]);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("sample_field: Q_" + std::to_string(k) +
                                     " is not positive definite");
        Vector xik(nk);
        for (int i = 0; i < nk; ++i) xik[i] = gs.next();
        Vector zk = model.F[static_cast<std::size_t>(k - 1)] * z_prev +
                    Matrix(llt.matrixL()) * xik;
        interior_flat.segment(off, nk) = zk;
        off += nk;
        z_prev = zk;
    }

    const Vector row_major = dec.to_row_major(interior_flat);
    out.interior.resize(dec.spec.n_rows, dec.spec.n_cols);
    for (int i = 0; i < dec.spec.n_rows; ++i)
        for (int j = 0; j < dec.spec.n_cols; ++j)
            out.interior(i, j) = row_major[i * dec.spec.n_cols + j];
    return out;
}

namespace detail {

/// Interior lattice flattened in row-major node order, matching the rows of
/// the matrix form and of joint_covariance.
inline Vector flatten_interior(const FieldSample& s) {
    const auto rows = s.interior.rows();
    const auto cols = s.interior.cols();
    Vector v(rows * cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) v[i * cols + j] = s.interior(i, j);
    return v;
}

} // namespace detail

/// Unbiased sample covariance (1/(n-1) normalization) of the flattened
/// interior lattices.
inline Matrix empirical_covariance(const std::vector<FieldSample>& samples) {
    if (samples.size() < 2)
        throw std::invalid_argument("empirical_covariance: need at least 2 samples");
    const auto rows = samples.front().interior.rows();
    const auto cols = samples.front().interior.cols();
    const auto d = rows * cols;
    Vector mean = Vector::Zero(d);
    for (const auto& s : samples) {
        if (s.interior.rows() != rows || s.interior.cols() != cols)
            throw std::invalid_argument("empirical_covariance: sample shapes disagree");
        mean += detail::flatten_interior(s);
    }
    mean /= static_cast<double>(samples.size());
    Matrix cov = Matrix::Zero(d, d);
    for (const auto& s : samples) {
        const Vector v = detail::flatten_interior(s) - mean;
        cov.noalias() += v * v.transpose();
    }
    cov /= static_cast<double>(samples.size() - 1);
    return cov;
}

/// Unbiased sample cross covariance between the flattened interior (row-major)
/// and the boundary ring.
inline Matrix empirical_cross_covariance(const std::vector<FieldSample>& samples) {
    if (samples.size() < 2)
        throw std::invalid_argument("empirical_cross_covariance: need at least 2 samples");
    const auto rows = samples.front().interior.rows();
    const auto cols = samples.front().interior.cols();
    const auto d = rows * cols;
    const auto nb = samples.front().boundary.size();
    Vector mean_i = Vector::Zero(d), mean_b = Vector::Zero(nb);
    for (const auto& s : samples) {
        if (s.interior.rows() != rows || s.interior.cols() != cols || s.boundary.size() != nb)
            throw std::invalid_argument("empirical_cross_covariance: sample shapes disagree");
        mean_i += detail::flatten_interior(s);
        mean_b += s.boundary;
    }
    mean_i /= static_cast<double>(samples.size());
    mean_b /= static_cast<double>(samples.size());
    Matrix cov = Matrix::Zero(d, nb);
    for (const auto& s : samples)
        cov.noalias() += (detail::flatten_interior(s) - mean_i) * (s.boundary - mean_b).transpose();
    cov /= static_cast<double>(samples.size() - 1);
    return cov;
}

} // namespace tgmrf

#endif
