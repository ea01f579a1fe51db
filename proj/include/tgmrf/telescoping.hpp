#ifndef TGMRF_TELESCOPING_HPP
#define TGMRF_TELESCOPING_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "tgmrf/lattice.hpp"
#include "tgmrf/shells.hpp"

namespace tgmrf {

/// Shell-chain form of the lattice model:
///   z_0 ~ N(0, boundary_cov),  z_k = F_k z_{k-1} + w_k,  w_k ~ N(0, Q_k),
/// for k = 1..tau. F[k-1] maps shell k-1 to shell k; Q[k-1] is the process
/// noise on shell k. Boundary randomness enters only through F_1.
struct TelescopingModel {
    int tau = 0;
    std::vector<int> sizes;  // M^z_k, k = 0..tau
    std::vector<Matrix> F;   // F_k, k = 1..tau
    std::vector<Matrix> Q;   // Q_k, k = 1..tau
    Matrix boundary_cov;
};

/// Backward block recursion over the shell blocks:
///   Q_tau = (M0_tau)^-1, F_tau = Q_tau M-_tau,
///   Q_k^-1 = M0_k - M+_k F_{k+1}, F_k = Q_k M-_k   for k = tau-1..1.
/// Every inverse is realized through an SPD factorization of Q_k^-1; a
/// nonpositive pivot at stage k means the field model itself is invalid.
inline TelescopingModel factorize(const BlockTridiagonal& bt, const Matrix& boundary_cov) {
    TelescopingModel m;
    m.tau = bt.tau;
    m.sizes = bt.sizes;
    m.boundary_cov = boundary_cov;
    if (boundary_cov.rows() != bt.sizes[0] || boundary_cov.cols() != bt.sizes[0])
        throw std::invalid_argument("factorize: boundary_cov size mismatch");
    m.F.resize(static_cast<std::size_t>(m.tau));
    m.Q.resize(static_cast<std::size_t>(m.tau));

    Matrix q_inv;
    for (int k = m.tau; k >= 1; --k) {
        if (k == m.tau)
            q_inv = bt.diag.back();
        else
            q_inv = bt.diag[static_cast<std::size_t>(k - 1)] -
                    bt.super[static_cast<std::size_t>(k - 1)] * m.F[static_cast<std::size_t>(k)];
        q_inv = 0.5 * (q_inv + q_inv.transpose()).eval();
        Eigen::LLT<Matrix> llt(q_inv);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("factorize: Q_" + std::to_string(k) +
                                     "^-1 is not positive definite");
        const auto nk = q_inv.rows();
        Matrix q = llt.solve(Matrix::Identity(nk, nk));
        m.Q[static_cast<std::size_t>(k - 1)] = 0.5 * (q + q.transpose()).eval();
        m.F[static_cast<std::size_t>(k - 1)] = llt.solve(bt.sub[static_cast<std::size_t>(k - 1)]);
    }
    return m;
}

/// Chain parameters recovered purely from second moments,
///   F_k = E[z_k z_{k-1}^T] (E[z_{k-1} z_{k-1}^T])^-1,
///   Q_k = E[z_k z_k^T] - F_k E[z_{k-1} z_k^T],
/// used to cross-validate factorize() against the dense covariance oracle.
inline TelescopingModel factorize_oracle(const Matrix& cov_xx, const Matrix& cov_xb,
                                         const Matrix& boundary_cov,
                                         const ShellDecomposition& dec) {
    const int n = dec.spec.interior_count();
    if (cov_xx.rows() != n || cov_xb.rows() != n || cov_xb.cols() != dec.spec.boundary_count())
        throw std::invalid_argument("factorize_oracle: covariance shapes disagree");

    TelescopingModel m;
    m.tau = dec.tau;
    m.sizes.resize(static_cast<std::size_t>(dec.tau) + 1);
    for (int k = 0; k <= dec.tau; ++k) m.sizes[static_cast<std::size_t>(k)] = dec.shell_size(k);
    m.boundary_cov = boundary_cov;
    m.F.resize(static_cast<std::size_t>(m.tau));
    m.Q.resize(static_cast<std::size_t>(m.tau));

    // Covariance blocks in shell order; shell 0 is the boundary itself.
    std::vector<int> start(static_cast<std::size_t>(dec.tau) + 1, 0);
    for (int k = 2; k <= dec.tau; ++k)
        start[static_cast<std::size_t>(k)] =
            start[static_cast<std::size_t>(k - 1)] + m.sizes[static_cast<std::size_t>(k - 1)];

    Matrix perm_xx(n, n), perm_xb(n, cov_xb.cols());
    for (int a = 0; a < n; ++a) {
        const int ia = dec.node_at[static_cast<std::size_t>(a)];
        perm_xb.row(a) = cov_xb.row(ia);
        for (int b = 0; b < n; ++b) perm_xx(a, b) = cov_xx(ia, dec.node_at[static_cast<std::size_t>(b)]);
    }

    for (int k = 1; k <= m.tau; ++k) {
        const int nk = m.sizes[static_cast<std::size_t>(k)];
        const int nm = m.sizes[static_cast<std::size_t>(k - 1)];
        Matrix c_self(nk, nk), c_cross(nk, nm), c_prev(nm, nm);
        if (k == 1) {
            c_self = perm_xx.block(0, 0, nk, nk);
            c_cross = perm_xb.block(0, 0, nk, nm);
            c_prev = boundary_cov;
        } else {
            const int ok = start[static_cast<std::size_t>(k)];
            const int om = start[static_cast<std::size_t>(k - 1)];
            c_self = perm_xx.block(ok, ok, nk, nk);
            c_cross = perm_xx.block(ok, om, nk, nm);
            c_prev = perm_xx.block(om, om, nm, nm);
        }
        Eigen::LLT<Matrix> llt(c_prev);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("factorize_oracle: E[z_" + std::to_string(k - 1) +
                                     " z_" + std::to_string(k - 1) + "^T] is singular");
        m.F[static_cast<std::size_t>(k - 1)] = llt.solve(c_cross.transpose()).transpose();
        Matrix q = c_self - m.F[static_cast<std::size_t>(k - 1)] * c_cross.transpose();
        m.Q[static_cast<std::size_t>(k - 1)] = 0.5 * (q + q.transpose()).eval();
    }
    return m;
}

/// Rebuild P A P^T from the chain as L^T L, with L block lower-bidiagonal,
/// L_k lower triangular with L_k^T L_k = Q_k^-1, and subdiagonal blocks
/// -P_k = -L_k^-T M-_k. Test identity for the factorization.
inline Matrix cholesky_reassemble(const TelescopingModel& m, const BlockTridiagonal& bt) {
    int n = 0;
    for (int k = 1; k <= m.tau; ++k) n += m.sizes[static_cast<std::size_t>(k)];
    Matrix L = Matrix::Zero(n, n);
    std::vector<int> start(static_cast<std::size_t>(m.tau) + 1, 0);
    for (int k = 2; k <= m.tau; ++k)
        start[static_cast<std::size_t>(k)] =
            start[static_cast<std::size_t>(k - 1)] + m.sizes[static_cast<std::size_t>(k - 1)];

    for (int k = 1; k <= m.tau; ++k) {
        const int nk = m.sizes[static_cast<std::size_t>(k)];
        const int ok = start[static_cast<std::size_t>(k)];
        Eigen::LLT<Matrix> llt_q(m.Q[static_cast<std::size_t>(k - 1)]);
        if (llt_q.info() != Eigen::Success)
            throw std::runtime_error("cholesky_reassemble: Q_" + std::to_string(k) +
                                     " is not positive definite");
        // Q_k = G G^T, so L_k = G^-1 satisfies L_k^T L_k = Q_k^-1.
        Matrix G = llt_q.matrixL();
        Matrix Lk = G.triangularView<Eigen::Lower>().solve(Matrix::Identity(nk, nk));
        L.block(ok, ok, nk, nk) = Lk;
        if (k >= 2) {
            const int om = start[static_cast<std::size_t>(k - 1)];
            const int nm = m.sizes[static_cast<std::size_t>(k - 1)];
            // P_k = L_k^-T M-_k, stored negated in L.
            Matrix Pk = Lk.transpose().triangularView<Eigen::Upper>().solve(
                bt.sub[static_cast<std::size_t>(k - 1)]);
            L.block(ok, om, nk, nm) = -Pk;
        }
    }
    return L.transpose() * L;
}

/// Joint covariance of (z_0, z_1, ..., z_tau) implied by the chain, in shell
/// order with the boundary first. Test oracle for chain consistency.
inline Matrix chain_covariance(const TelescopingModel& m) {
    int n = 0;
    for (int k = 0; k <= m.tau; ++k) n += m.sizes[static_cast<std::size_t>(k)];
    Matrix C = Matrix::Zero(n, n);
    std::vector<int> start(static_cast<std::size_t>(m.tau) + 1, 0);
    for (int k = 1; k <= m.tau; ++k)
        start[static_cast<std::size_t>(k)] =
            start[static_cast<std::size_t>(k - 1)] + m.sizes[static_cast<std::size_t>(k - 1)];

    C.block(0, 0, m.sizes[0], m.sizes[0]) = m.boundary_cov;
    for (int k = 1; k <= m.tau; ++k) {
        const auto& Fk = m.F[static_cast<std::size_t>(k - 1)];
        const int ok = start[static_cast<std::size_t>(k)];
        const int om = start[static_cast<std::size_t>(k - 1)];
        const int nk = m.sizes[static_cast<std::size_t>(k)];
        const int nm = m.sizes[static_cast<std::size_t>(k - 1)];
        // Cross blocks against every earlier shell, then the marginal.
        for (int j = 0; j < k; ++j) {
            const int oj = start[static_cast<std::size_t>(j)];
            const int nj = m.sizes[static_cast<std::size_t>(j)];
            C.block(ok, oj, nk, nj) = Fk * C.block(om, oj, nm, nj);
            C.block(oj, ok, nj, nk) = C.block(ok, oj, nk, nj).transpose();
        }
        C.block(ok, ok, nk, nk) =
            Fk * C.block(om, om, nm, nm) * Fk.transpose() + m.Q[static_cast<std::size_t>(k - 1)];
    }
    return C;
}

} // namespace tgmrf

#endif
