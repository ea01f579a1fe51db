#ifndef TGMRF_SHELLS_HPP
#define TGMRF_SHELLS_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "tgmrf/lattice.hpp"

namespace tgmrf {

/// Telescoping shell decomposition of the lattice. Shell k holds the nodes of
/// T_k \ T_{k+1} with T_k = [k,N+1-k]x[k,M+1-k]; shell 0 is the boundary ring
/// and shells 1..tau partition the interior. Each shell is ordered clockwise
/// from its top-left node; degenerate shells (single row / single column) run
/// left-to-right / top-to-bottom.
struct ShellDecomposition {
    LatticeSpec spec;
    int tau = 0;
    std::vector<std::vector<Node>> shells; // index k = 0..tau
    std::vector<int> node_at;      // shell-chain position -> interior row-major index
    std::vector<int> shell_pos_of; // interior row-major index -> shell-chain position

    int shell_size(int k) const { return static_cast<int>(shells[static_cast<std::size_t>(k)].size()); }

    /// Permute a row-major interior vector into shell-chain order (z = P x).
    Vector to_shell_order(const Vector& x) const {
        Vector z(x.size());
        for (Eigen::Index a = 0; a < z.size(); ++a) z[a] = x[node_at[static_cast<std::size_t>(a)]];
        return z;
    }
    /// Inverse permutation (x = P^T z).
    Vector to_row_major(const Vector& z) const {
        Vector x(z.size());
        for (Eigen::Index a = 0; a < z.size(); ++a) x[node_at[static_cast<std::size_t>(a)]] = z[a];
        return x;
    }
};

namespace detail {

/// Clockwise perimeter of the rectangle [r0,r1]x[c0,c1], starting at (r0,c0).
inline std::vector<Node> ring_nodes(int r0, int r1, int c0, int c1) {
    std::vector<Node> out;
    if (r0 == r1) {
        for (int c = c0; c <= c1; ++c) out.push_back({r0, c});
    } else if (c0 == c1) {
        for (int r = r0; r <= r1; ++r) out.push_back({r, c0});
    } else {
        for (int c = c0; c <= c1; ++c) out.push_back({r0, c});
        for (int r = r0 + 1; r <= r1; ++r) out.push_back({r, c1});
        for (int c = c1 - 1; c >= c0; --c) out.push_back({r1, c});
        for (int r = r1 - 1; r >= r0 + 1; --r) out.push_back({r, c0});
    }
    return out;
}

} // namespace detail

inline ShellDecomposition shells(const LatticeSpec& spec) {
    ShellDecomposition dec;
    dec.spec = spec;
    dec.tau = (std::min(spec.n_rows, spec.n_cols) + 1) / 2;
    dec.shells.resize(static_cast<std::size_t>(dec.tau) + 1);
    for (int k = 0; k <= dec.tau; ++k)
        dec.shells[static_cast<std::size_t>(k)] =
            detail::ring_nodes(k, spec.n_rows + 1 - k, k, spec.n_cols + 1 - k);

    const int n = spec.interior_count();
    dec.node_at.reserve(static_cast<std::size_t>(n));
    for (int k = 1; k <= dec.tau; ++k)
        for (const Node p : dec.shells[static_cast<std::size_t>(k)])
            dec.node_at.push_back(spec.interior_index(p));
    dec.shell_pos_of.assign(static_cast<std::size_t>(n), -1);
    for (int a = 0; a < n; ++a)
        dec.shell_pos_of[static_cast<std::size_t>(dec.node_at[static_cast<std::size_t>(a)])] = a;
    return dec;
}

/// Shell-ordered block view of P A P^T together with the boundary coupling.
/// diag[k-1] is the k-th diagonal block of P A P^T. The off-diagonal blocks of
/// P A P^T appear negated (sub[k-1] = -block(k,k-1) for k >= 2), so sub/super
/// hold the +beta coupling matrices the chain recursion consumes directly;
/// sub[0] is the first block row of P A_b, which is not negated. With this
/// convention super[k-1] == sub[k]^T entry-for-entry.
struct BlockTridiagonal {
    int tau = 0;
    std::vector<int> sizes;    // M^z_k for k = 0..tau (index 0 = boundary)
    std::vector<Matrix> diag;  // M0_k,  k = 1..tau
    std::vector<Matrix> sub;   // M-_k,  k = 1..tau
    std::vector<Matrix> super; // M+_k,  k = 1..tau-1

    /// Reassemble P A P^T from the blocks (exact, including the sign flips).
    Matrix assemble() const {
        int n = 0;
        for (int k = 1; k <= tau; ++k) n += sizes[static_cast<std::size_t>(k)];
        Matrix out = Matrix::Zero(n, n);
        int off = 0;
        std::vector<int> offsets(static_cast<std::size_t>(tau) + 1, 0);
        for (int k = 1; k <= tau; ++k) {
            offsets[static_cast<std::size_t>(k)] = off;
            off += sizes[static_cast<std::size_t>(k)];
        }
        for (int k = 1; k <= tau; ++k) {
            const int ok = offsets[static_cast<std::size_t>(k)];
            const int nk = sizes[static_cast<std::size_t>(k)];
            out.block(ok, ok, nk, nk) = diag[static_cast<std::size_t>(k - 1)];
            if (k >= 2) {
                const int om = offsets[static_cast<std::size_t>(k - 1)];
                const int nm = sizes[static_cast<std::size_t>(k - 1)];
                out.block(ok, om, nk, nm) = -sub[static_cast<std::size_t>(k - 1)];
                out.block(om, ok, nm, nk) = -sub[static_cast<std::size_t>(k - 1)].transpose();
            }
        }
        return out;
    }
};

/// Extract the shell-ordered blocks of P A P^T and P A_b. Errors if any entry
/// of P A P^T falls outside the block-tridiagonal envelope or if a row of
/// P A_b beyond the first shell is nonzero: either means the neighborhood
/// reaches past adjacent shells.
inline BlockTridiagonal permute_system(const PrecisionSystem& sys,
                                       const ShellDecomposition& dec) {
    if (sys.spec.n_rows != dec.spec.n_rows || sys.spec.n_cols != dec.spec.n_cols)
        throw std::invalid_argument("permute_system: lattice shapes disagree");
    const int tau = dec.tau;
    BlockTridiagonal bt;
    bt.tau = tau;
    bt.sizes.resize(static_cast<std::size_t>(tau) + 1);
    for (int k = 0; k <= tau; ++k) bt.sizes[static_cast<std::size_t>(k)] = dec.shell_size(k);

    // Shell index of every interior node, for the envelope check.
    std::vector<int> shell_of(static_cast<std::size_t>(sys.spec.interior_count()));
    std::vector<int> pos_in_shell(shell_of.size());
    for (int k = 1; k <= tau; ++k) {
        const auto& sh = dec.shells[static_cast<std::size_t>(k)];
        for (std::size_t t = 0; t < sh.size(); ++t) {
            const int idx = sys.spec.interior_index(sh[t]);
            shell_of[static_cast<std::size_t>(idx)] = k;
            pos_in_shell[static_cast<std::size_t>(idx)] = static_cast<int>(t);
        }
    }

    bt.diag.resize(static_cast<std::size_t>(tau));
    bt.sub.resize(static_cast<std::size_t>(tau));
    bt.super.resize(static_cast<std::size_t>(tau > 0 ? tau - 1 : 0));
    for (int k = 1; k <= tau; ++k) {
        bt.diag[static_cast<std::size_t>(k - 1)] =
            Matrix::Zero(bt.sizes[static_cast<std::size_t>(k)], bt.sizes[static_cast<std::size_t>(k)]);
        bt.sub[static_cast<std::size_t>(k - 1)] =
            Matrix::Zero(bt.sizes[static_cast<std::size_t>(k)], bt.sizes[static_cast<std::size_t>(k - 1)]);
        if (k < tau)
            bt.super[static_cast<std::size_t>(k - 1)] =
                Matrix::Zero(bt.sizes[static_cast<std::size_t>(k)], bt.sizes[static_cast<std::size_t>(k + 1)]);
    }

    const auto n = sys.A.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        const int ki = shell_of[static_cast<std::size_t>(i)];
        const int ti = pos_in_shell[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = sys.A(i, j);
            if (a == 0.0) continue;
            const int kj = shell_of[static_cast<std::size_t>(j)];
            const int tj = pos_in_shell[static_cast<std::size_t>(j)];
            if (kj == ki) {
                bt.diag[static_cast<std::size_t>(ki - 1)](ti, tj) = a;
            } else if (kj == ki - 1) {
                bt.sub[static_cast<std::size_t>(ki - 1)](ti, tj) = -a;
            } else if (kj == ki + 1) {
                bt.super[static_cast<std::size_t>(ki - 1)](ti, tj) = -a;
            } else {
                throw std::invalid_argument(
                    "permute_system: coupling between shells " + std::to_string(ki) +
                    " and " + std::to_string(kj) + " falls outside the envelope");
            }
        }
    }

    // Boundary coupling: only shell 1 may touch the boundary ring.
    const auto nb = sys.A_b.cols();
    const int n1 = bt.sizes[1];
    bt.sub[0] = Matrix::Zero(n1, nb);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int ki = shell_of[static_cast<std::size_t>(i)];
        const int ti = pos_in_shell[static_cast<std::size_t>(i)];
        for (Eigen::Index b = 0; b < nb; ++b) {
            const double v = sys.A_b(i, b);
            if (v == 0.0) continue;
            if (ki != 1)
                throw std::invalid_argument(
                    "permute_system: boundary coupling from shell " + std::to_string(ki));
            bt.sub[0](ti, b) = v;
        }
    }
    return bt;
}

} // namespace tgmrf

#endif
