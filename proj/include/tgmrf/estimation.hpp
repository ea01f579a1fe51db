#ifndef TGMRF_ESTIMATION_HPP
#define TGMRF_ESTIMATION_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tgmrf/lattice.hpp"
#include "tgmrf/shells.hpp"
#include "tgmrf/telescoping.hpp"

namespace tgmrf {

/// Pointwise observation model y(p) = gain(p) x(p) + noise, noise variance
/// r(p) > 0, over an arbitrary subset of interior nodes (row-major layout).
/// The boundary ring may optionally carry its own observations; by default it
/// is unobserved.
struct ObservationModel {
    std::vector<std::uint8_t> observed; // interior mask, row-major
    Vector gain;                        // per interior node
    Vector noise_var;                   // per interior node

    std::vector<std::uint8_t> boundary_observed; // clockwise order; may be empty
    Vector boundary_gain;
    Vector boundary_noise_var;

    static ObservationModel all_observed(const LatticeSpec& spec, double gain_value,
                                         double variance) {
        ObservationModel o;
        const int n = spec.interior_count();
        o.observed.assign(static_cast<std::size_t>(n), 1);
        o.gain = Vector::Constant(n, gain_value);
        o.noise_var = Vector::Constant(n, variance);
        return o;
    }
    static ObservationModel none(const LatticeSpec& spec) {
        ObservationModel o;
        const int n = spec.interior_count();
        o.observed.assign(static_cast<std::size_t>(n), 0);
        o.gain = Vector::Zero(n);
        o.noise_var = Vector::Ones(n);
        return o;
    }

    void validate(const LatticeSpec& spec) const {
        const auto n = static_cast<std::size_t>(spec.interior_count());
        if (observed.size() != n || gain.size() != static_cast<Eigen::Index>(n) ||
            noise_var.size() != static_cast<Eigen::Index>(n))
            throw std::invalid_argument("ObservationModel: interior sizes disagree");
        for (std::size_t i = 0; i < n; ++i)
            if (observed[i] && !(noise_var[static_cast<Eigen::Index>(i)] > 0.0))
                throw std::invalid_argument(
                    "ObservationModel: observed node needs positive noise variance");
        if (!boundary_observed.empty()) {
            const auto nb = static_cast<std::size_t>(spec.boundary_count());
            if (boundary_observed.size() != nb ||
                boundary_gain.size() != static_cast<Eigen::Index>(nb) ||
                boundary_noise_var.size() != static_cast<Eigen::Index>(nb))
                throw std::invalid_argument("ObservationModel: boundary sizes disagree");
            for (std::size_t i = 0; i < nb; ++i)
                if (boundary_observed[i] && !(boundary_noise_var[static_cast<Eigen::Index>(i)] > 0.0))
                    throw std::invalid_argument(
                        "ObservationModel: observed boundary node needs positive noise variance");
        }
    }
};

struct ShellEstimate {
    Vector mean;
    Matrix cov;
};

/// Filtering and smoothing output over the shell chain, plus the smoothed
/// field reassembled on the lattice.
struct EstimationResult {
    std::vector<ShellEstimate> filtered;  // m_{k|k}, S_{k|k}, k = 0..tau
    std::vector<ShellEstimate> predicted; // m_{k|k-1}, S_{k|k-1} (predicted[0] is the prior)
    std::vector<ShellEstimate> smoothed;  // m_{k|T}, S_{k|T}
    Matrix smoothed_interior;             // N x M posterior means
    Matrix posterior_variance;            // N x M posterior variances
};

namespace detail {

struct ShellObs {
    std::vector<int> rows;  // positions within the shell
    Vector gain;
    Vector noise_var;
    Vector value;
};

/// Collect the observed nodes of shell k with their gains, variances, values.
inline ShellObs shell_observations(const ShellDecomposition& dec, const ObservationModel& obs,
                                   const Vector& y_interior, const Vector* y_boundary, int k) {
    ShellObs so;
    const auto& nodes = dec.shells[static_cast<std::size_t>(k)];
    if (k == 0) {
        if (obs.boundary_observed.empty() || y_boundary == nullptr) return so;
        for (std::size_t t = 0; t < nodes.size(); ++t)
            if (obs.boundary_observed[t]) {
                so.rows.push_back(static_cast<int>(t));
                so.gain.conservativeResize(so.rows.size());
                so.noise_var.conservativeResize(so.rows.size());
                so.value.conservativeResize(so.rows.size());
                so.gain[static_cast<Eigen::Index>(so.rows.size() - 1)] =
                    obs.boundary_gain[static_cast<Eigen::Index>(t)];
                so.noise_var[static_cast<Eigen::Index>(so.rows.size() - 1)] =
                    obs.boundary_noise_var[static_cast<Eigen::Index>(t)];
                so.value[static_cast<Eigen::Index>(so.rows.size() - 1)] =
                    (*y_boundary)[static_cast<Eigen::Index>(t)];
            }
        return so;
    }
    for (std::size_t t = 0; t < nodes.size(); ++t) {
        const int idx = dec.spec.interior_index(nodes[t]);
        if (!obs.observed[static_cast<std::size_t>(idx)]) continue;
        so.rows.push_back(static_cast<int>(t));
        so.gain.conservativeResize(so.rows.size());
        so.noise_var.conservativeResize(so.rows.size());
        so.value.conservativeResize(so.rows.size());
        so.gain[static_cast<Eigen::Index>(so.rows.size() - 1)] = obs.gain[idx];
        so.noise_var[static_cast<Eigen::Index>(so.rows.size() - 1)] = obs.noise_var[idx];
        so.value[static_cast<Eigen::Index>(so.rows.size() - 1)] = y_interior[idx];
    }
    return so;
}

/// Joseph-form measurement update with a sparse selection-times-gain H.
inline void joseph_update(ShellEstimate& e, const ShellObs& so) {
    const auto nobs = static_cast<Eigen::Index>(so.rows.size());
    if (nobs == 0) return;
    const auto n = e.mean.size();
    Matrix H = Matrix::Zero(nobs, n);
    for (Eigen::Index r = 0; r < nobs; ++r)
        H(r, so.rows[static_cast<std::size_t>(r)]) = so.gain[r];
    const Matrix R = so.noise_var.asDiagonal();
    const Matrix PHt = e.cov * H.transpose();
    Matrix S = H * PHt + R;
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("kalman_filter: innovation covariance not PD");
    const Matrix K = llt.solve(PHt.transpose()).transpose();
    e.mean += K * (so.value - H * e.mean);
    const Matrix IKH = Matrix::Identity(n, n) - K * H;
    Matrix cov = IKH * e.cov * IKH.transpose() + K * R * K.transpose();
    e.cov = 0.5 * (cov + cov.transpose()).eval();
}

} // namespace detail

/// Shell-sweep Kalman filter: start on the boundary ring with the prior
/// N(0, boundary_cov), absorb each shell's observations in one block update,
/// and predict inward through z_k = F_k z_{k-1} + w_k. Fills filtered and
/// predicted; smoothed parts are left empty.
inline EstimationResult kalman_filter(const TelescopingModel& model,
                                      const ShellDecomposition& dec,
                                      const ObservationModel& obs,
                                      const Vector& y_interior,
                                      const Vector* y_boundary = nullptr) {
    obs.validate(dec.spec);
    if (y_interior.size() != dec.spec.interior_count())
        throw std::invalid_argument("kalman_filter: observation vector has wrong length");
    if (model.tau != dec.tau)
        throw std::invalid_argument("kalman_filter: model and decomposition disagree");

    EstimationResult res;
    res.filtered.resize(static_cast<std::size_t>(model.tau) + 1);
    res.predicted.resize(static_cast<std::size_t>(model.tau) + 1);

    ShellEstimate cur;
    cur.mean = Vector::Zero(model.sizes[0]);
    cur.cov = model.boundary_cov;
    res.predicted[0] = cur;
    detail::joseph_update(cur, detail::shell_observations(dec, obs, y_interior, y_boundary, 0));
    res.filtered[0] = cur;

    for (int k = 1; k <= model.tau; ++k) {
        const auto& Fk = model.F[static_cast<std::size_t>(k - 1)];
        ShellEstimate pred;
        pred.mean = Fk * cur.mean;
        Matrix cov = Fk * cur.cov * Fk.transpose() + model.Q[static_cast<std::size_t>(k - 1)];
        pred.cov = 0.5 * (cov + cov.transpose()).eval();
        res.predicted[static_cast<std::size_t>(k)] = pred;
        cur = pred;
        detail::joseph_update(cur, detail::shell_observations(dec, obs, y_interior, y_boundary, k));
        res.filtered[static_cast<std::size_t>(k)] = cur;
    }
    return res;
}

/// Rauch-Tung-Striebel backward sweep k = tau-1..0 with gain
/// J_k = S_{k|k} F_{k+1}^T S_{k+1|k}^-1; completes the result with smoothed
/// shell estimates and the reassembled lattice of means and variances.
inline void rts_smoother(const TelescopingModel& model, const ShellDecomposition& dec,
                         EstimationResult& res) {
    if (res.filtered.size() != static_cast<std::size_t>(model.tau) + 1)
        throw std::invalid_argument("rts_smoother: run kalman_filter first");
    res.smoothed.resize(res.filtered.size());
    res.smoothed.back() = res.filtered.back();

    for (int k = model.tau - 1; k >= 0; --k) {
        const auto& Fn = model.F[static_cast<std::size_t>(k)];
        const auto& fk = res.filtered[static_cast<std::size_t>(k)];
        const auto& pred_next = res.predicted[static_cast<std::size_t>(k + 1)];
        const auto& smo_next = res.smoothed[static_cast<std::size_t>(k + 1)];
        Eigen::LDLT<Matrix> ldlt(pred_next.cov);
        if (ldlt.info() != Eigen::Success)
            throw std::runtime_error("rts_smoother: predicted covariance singular at stage " +
                                     std::to_string(k + 1));
        // J_k = S_{k|k} F^T S_{k+1|k}^-1, computed by solving against the SPD factor.
        const Matrix J = ldlt.solve(Fn * fk.cov).transpose();
        ShellEstimate s;
        s.mean = fk.mean + J * (smo_next.mean - pred_next.mean);
        Matrix cov = fk.cov + J * (smo_next.cov - pred_next.cov) * J.transpose();
        s.cov = 0.5 * (cov + cov.transpose()).eval();
        res.smoothed[static_cast<std::size_t>(k)] = s;
    }

    // Reassemble the interior lattice via P^T.
    const int n = dec.spec.interior_count();
    Vector mean_shell(n), var_shell(n);
    int off = 0;
    for (int k = 1; k <= model.tau; ++k) {
        const auto& s = res.smoothed[static_cast<std::size_t>(k)];
        mean_shell.segment(off, s.mean.size()) = s.mean;
        var_shell.segment(off, s.mean.size()) = s.cov.diagonal();
        off += static_cast<int>(s.mean.size());
    }
    const Vector mean_rm = dec.to_row_major(mean_shell);
    const Vector var_rm = dec.to_row_major(var_shell);
    res.smoothed_interior.resize(dec.spec.n_rows, dec.spec.n_cols);
    res.posterior_variance.resize(dec.spec.n_rows, dec.spec.n_cols);
    for (int i = 0; i < dec.spec.n_rows; ++i)
        for (int j = 0; j < dec.spec.n_cols; ++j) {
            res.smoothed_interior(i, j) = mean_rm[i * dec.spec.n_cols + j];
            res.posterior_variance(i, j) = var_rm[i * dec.spec.n_cols + j];
        }
}

struct MmseResult {
    Vector mean;          // interior posterior mean, row-major
    Matrix posterior_cov; // interior posterior covariance
};

/// Dense normal-equations oracle: solve (C^-1 + H^T R^-1 H) m = H^T R^-1 y
/// with C the interior joint covariance. Rows of H vanish at unobserved
/// nodes. Returns the posterior covariance as well.
inline MmseResult direct_mmse(const PrecisionSystem& sys, const ObservationModel& obs,
                              const Vector& y_interior) {
    obs.validate(sys.spec);
    const int n = sys.spec.interior_count();
    if (n > 4096)
        throw std::invalid_argument("direct_mmse: interior too large for the dense oracle");
    if (y_interior.size() != n)
        throw std::invalid_argument("direct_mmse: observation vector has wrong length");

    const JointCovariance jc = joint_covariance(sys);
    Eigen::LLT<Matrix> llt_c(jc.cov_xx);
    if (llt_c.info() != Eigen::Success)
        throw std::runtime_error("direct_mmse: joint covariance not PD");
    Matrix info = llt_c.solve(Matrix::Identity(n, n));
    Vector rhs = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (!obs.observed[static_cast<std::size_t>(i)]) continue;
        const double g = obs.gain[i];
        const double r = obs.noise_var[i];
        info(i, i) += g * g / r;
        rhs[i] = g * y_interior[i] / r;
    }
    info = 0.5 * (info + info.transpose()).eval();
    Eigen::LLT<Matrix> llt_post(info);
    if (llt_post.info() != Eigen::Success)
        throw std::runtime_error("direct_mmse: posterior information matrix not PD");
    MmseResult r;
    r.mean = llt_post.solve(rhs);
    r.posterior_cov = llt_post.solve(Matrix::Identity(n, n));
    r.posterior_cov = 0.5 * (r.posterior_cov + r.posterior_cov.transpose()).eval();
    return r;
}

struct DenoiseReport {
    double noise_var = 0.0;
    double mean_offset = 0.0;      // per-image mean removed before smoothing
    double mse_in = -1.0;          // input vs reference, if a reference was given
    double mse_out = -1.0;         // output vs reference
};

struct DenoiseResult {
    Matrix denoised; // N x M, clamped to [0,255]
    DenoiseReport report;
};

/// Chain-smoothing image restoration: pixels map to interior nodes (image
/// must be exactly N x M), intensities are centered by their mean, smoothed
/// with unit gain and the given noise variance, re-offset and clamped.
inline DenoiseResult denoise_image(const TelescopingModel& model,
                                   const ShellDecomposition& dec, const Matrix& image,
                                   double noise_var, const Matrix* reference = nullptr) {
    if (image.rows() != dec.spec.n_rows || image.cols() != dec.spec.n_cols)
        throw std::invalid_argument(
            "denoise_image: image is " + std::to_string(image.rows()) + "x" +
            std::to_string(image.cols()) + " but the model expects " +
            std::to_string(dec.spec.n_rows) + "x" + std::to_string(dec.spec.n_cols));
    if (!(noise_var > 0.0))
        throw std::invalid_argument("denoise_image: noise variance must be positive");

    DenoiseResult out;
    out.report.noise_var = noise_var;
    out.report.mean_offset = image.mean();

    const int n = dec.spec.interior_count();
    Vector y(n);
    for (int i = 0; i < dec.spec.n_rows; ++i)
        for (int j = 0; j < dec.spec.n_cols; ++j)
            y[i * dec.spec.n_cols + j] = image(i, j) - out.report.mean_offset;

    const ObservationModel obs = ObservationModel::all_observed(dec.spec, 1.0, noise_var);
    EstimationResult est = kalman_filter(model, dec, obs, y);
    rts_smoother(model, dec, est);

    out.denoised = est.smoothed_interior.array() + out.report.mean_offset;
    out.denoised = out.denoised.cwiseMax(0.0).cwiseMin(255.0);

    if (reference != nullptr) {
        if (reference->rows() != image.rows() || reference->cols() != image.cols())
            throw std::invalid_argument("denoise_image: reference image size mismatch");
        out.report.mse_in = (image - *reference).array().square().mean();
        out.report.mse_out = (out.denoised - *reference).array().square().mean();
    }
    return out;
}

} // namespace tgmrf

#endif
