#ifndef TGMRF_LATTICE_HPP
#define TGMRF_LATTICE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tgmrf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Lattice coordinates. Interior nodes live on [1,N]x[1,M]; the full grid
/// including the Dirichlet boundary ring is [0,N+1]x[0,M+1].
struct Node {
    int row = 0;
    int col = 0;
    friend bool operator==(const Node&, const Node&) = default;
};

/// Second-order (8-connected) neighborhood offsets, fixed compass order.
/// opposite(k) = (k+4) % 8.
inline constexpr std::array<Node, 8> kNeighborOffsets = {{
    {-1, 0},  // n
    {-1, 1},  // ne
    {0, 1},   // e
    {1, 1},   // se
    {1, 0},   // s
    {1, -1},  // sw
    {0, -1},  // w
    {-1, -1}, // nw
}};

inline constexpr std::array<const char*, 8> kOffsetNames = {
    "n", "ne", "e", "se", "s", "sw", "w", "nw"};

inline constexpr int opposite_offset(int k) { return (k + 4) % 8; }

struct LatticeSpec {
    int n_rows = 0; // N
    int n_cols = 0; // M

    LatticeSpec() = default;
    LatticeSpec(int rows, int cols) : n_rows(rows), n_cols(cols) {
        if (rows < 1 || cols < 1)
            throw std::invalid_argument("LatticeSpec: dimensions must be >= 1");
    }

    int interior_count() const { return n_rows * n_cols; }
    int boundary_count() const { return 2 * (n_rows + 1) + 2 * (n_cols + 1); }

    bool is_interior(Node p) const {
        return p.row >= 1 && p.row <= n_rows && p.col >= 1 && p.col <= n_cols;
    }
    bool is_boundary(Node p) const {
        const bool in_full = p.row >= 0 && p.row <= n_rows + 1 &&
                             p.col >= 0 && p.col <= n_cols + 1;
        return in_full && !is_interior(p);
    }

    /// Row-major index of an interior node (row 1 left-to-right, then row 2, ...).
    int interior_index(Node p) const {
        return (p.row - 1) * n_cols + (p.col - 1);
    }
    Node interior_node(int idx) const {
        return {idx / n_cols + 1, idx % n_cols + 1};
    }

    /// Boundary nodes in clockwise order starting at the top-left node (0,0):
    /// top row left-to-right, right column downward, bottom row right-to-left,
    /// left column upward.
    std::vector<Node> boundary_nodes() const {
        std::vector<Node> out;
        out.reserve(boundary_count());
        for (int j = 0; j <= n_cols + 1; ++j) out.push_back({0, j});
        for (int i = 1; i <= n_rows + 1; ++i) out.push_back({i, n_cols + 1});
        for (int j = n_cols; j >= 0; --j) out.push_back({n_rows + 1, j});
        for (int i = n_rows; i >= 1; --i) out.push_back({i, 0});
        return out;
    }
};

/// Interaction weights of the noncausal second-order lattice model
///   alpha(p) x(p) = sum_o beta(p,o) x(p+o) + v(p).
/// Either a single (alpha, beta[8]) pair reused at every node, or per-node
/// tables. Symmetry beta(p,o) == beta(p+o,-o) is required for a valid model
/// and is checked by build_precision.
class NeighborhoodCoefficients {
public:
    static NeighborhoodCoefficients homogeneous(double alpha,
                                                const std::array<double, 8>& beta) {
        NeighborhoodCoefficients c;
        c.homogeneous_ = true;
        c.alpha_flat_ = {alpha};
        c.beta_flat_ = {beta};
        return c;
    }

    /// Per-node tables, row-major over the interior. beta[idx][k] multiplies
    /// x(node(idx) + kNeighborOffsets[k]); every such neighbor of an interior
    /// node lies in the full grid (interior or boundary).
    static NeighborhoodCoefficients heterogeneous(
        std::vector<double> alpha, std::vector<std::array<double, 8>> beta) {
        NeighborhoodCoefficients c;
        c.homogeneous_ = false;
        c.alpha_flat_ = std::move(alpha);
        c.beta_flat_ = std::move(beta);
        return c;
    }

    bool is_homogeneous() const { return homogeneous_; }

    double alpha(const LatticeSpec& spec, Node p) const {
        return homogeneous_ ? alpha_flat_[0]
                            : alpha_flat_[static_cast<std::size_t>(spec.interior_index(p))];
    }
    double beta(const LatticeSpec& spec, Node p, int offset_idx) const {
        return homogeneous_
                   ? beta_flat_[0][static_cast<std::size_t>(offset_idx)]
                   : beta_flat_[static_cast<std::size_t>(spec.interior_index(p))]
                               [static_cast<std::size_t>(offset_idx)];
    }

    void validate(const LatticeSpec& spec) const {
        if (!homogeneous_) {
            const auto n = static_cast<std::size_t>(spec.interior_count());
            if (alpha_flat_.size() != n || beta_flat_.size() != n)
                throw std::invalid_argument(
                    "NeighborhoodCoefficients: table size does not match lattice");
        }
        for (int idx = 0; idx < spec.interior_count(); ++idx) {
            const Node p = spec.interior_node(idx);
            if (!(alpha(spec, p) > 0.0))
                throw std::invalid_argument(
                    "NeighborhoodCoefficients: alpha must be positive at node (" +
                    std::to_string(p.row) + "," + std::to_string(p.col) + ")");
            for (int k = 0; k < 8; ++k) {
                const Node q{p.row + kNeighborOffsets[k].row,
                             p.col + kNeighborOffsets[k].col};
                if (!spec.is_interior(q)) continue;
                const double forward = beta(spec, p, k);
                const double backward = beta(spec, q, opposite_offset(k));
                if (forward != backward)
                    throw std::invalid_argument(
                        "NeighborhoodCoefficients: beta symmetry violated between (" +
                        std::to_string(p.row) + "," + std::to_string(p.col) + ") and (" +
                        std::to_string(q.row) + "," + std::to_string(q.col) + ")");
            }
            if (homogeneous_) break; // one node suffices; beta symmetry checked below
        }
        if (homogeneous_) {
            for (int k = 0; k < 8; ++k)
                if (beta_flat_[0][static_cast<std::size_t>(k)] !=
                    beta_flat_[0][static_cast<std::size_t>(opposite_offset(k))])
                    throw std::invalid_argument(
                        "NeighborhoodCoefficients: homogeneous beta must satisfy "
                        "beta(o) == beta(-o)");
        }
    }

private:
    bool homogeneous_ = true;
    std::vector<double> alpha_flat_;
    std::vector<std::array<double, 8>> beta_flat_;
};

/// Matrix form A x = A_b x_b + v of the lattice model. A carries alpha on the
/// diagonal and -beta between interior neighbors; A_b carries +beta toward
/// boundary neighbors (the boundary terms move to the right-hand side).
/// Rows follow the row-major interior order, A_b columns the clockwise
/// boundary order. boundary_cov is the covariance of x_b.
struct PrecisionSystem {
    LatticeSpec spec;
    Matrix A;
    Matrix A_b;
    Matrix boundary_cov;
};

struct SpdReport {
    bool ok = false;
    double min_pivot = 0.0;
    int first_bad_index = -1; // row of the first nonpositive pivot, -1 if none
};

namespace detail {

/// Diagonal-pivoted Cholesky for a PSD matrix: S = P L L^T P^T. Pivots below
/// tol (1e-12 * trace) are treated as exact zeros; their columns stay zero so
/// the factor can be applied to a full-length standard-normal vector. Throws
/// if the residual after the accepted pivots is meaningfully negative.
struct PivotedCholesky {
    Matrix L;              // n x n, columns beyond the rank are zero
    std::vector<int> perm; // P: output row i takes factor row perm[i]
    int rank = 0;
};

inline PivotedCholesky pivoted_cholesky(const Matrix& S) {
    const auto n = S.rows();
    PivotedCholesky f;
    f.L = Matrix::Zero(n, n);
    f.perm.resize(static_cast<std::size_t>(n));
    Matrix W = S;
    std::vector<int> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);
    const double tol = 1e-12 * std::max(S.trace(), 0.0);

    Eigen::Index k = 0;
    for (; k < n; ++k) {
        // Largest remaining diagonal entry becomes the next pivot.
        Eigen::Index piv = k;
        for (Eigen::Index i = k + 1; i < n; ++i)
            if (W(i, i) > W(piv, piv)) piv = i;
        if (W(piv, piv) <= tol) break;
        if (piv != k) {
            W.row(k).swap(W.row(piv));
            W.col(k).swap(W.col(piv));
            f.L.row(k).swap(f.L.row(piv));
            std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(piv)]);
        }
        const double d = std::sqrt(W(k, k));
        f.L(k, k) = d;
        for (Eigen::Index i = k + 1; i < n; ++i) f.L(i, k) = W(i, k) / d;
        for (Eigen::Index i = k + 1; i < n; ++i)
            for (Eigen::Index j = k + 1; j <= i; ++j) {
                W(i, j) -= f.L(i, k) * f.L(j, k);
                W(j, i) = W(i, j);
            }
    }
    f.rank = static_cast<int>(k);
    for (Eigen::Index i = k; i < n; ++i)
        if (W(i, i) < -1e3 * std::max(tol, 1e-300))
            throw std::invalid_argument("pivoted_cholesky: matrix is not PSD");
    for (Eigen::Index i = 0; i < n; ++i)
        f.perm[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = static_cast<int>(i);
    return f;
}

inline Vector apply_factor(const PivotedCholesky& f, const Vector& xi) {
    Vector y = f.L.leftCols(f.rank) * xi.head(f.rank);
    Vector out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
        out[i] = y[f.perm[static_cast<std::size_t>(i)]];
    return out;
}

/// Dense lower Cholesky attempt tracking pivots (the diagonal value before
/// the square root). Returns false at the first nonpositive pivot.
inline bool cholesky_pivots(const Matrix& S, double& min_pivot, int& bad_index) {
    const auto n = S.rows();
    Matrix L = Matrix::Zero(n, n);
    min_pivot = std::numeric_limits<double>::infinity();
    bad_index = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = S(j, j) - L.row(j).head(j).squaredNorm();
        min_pivot = std::min(min_pivot, d);
        if (!(d > 0.0)) {
            bad_index = static_cast<int>(j);
            return false;
        }
        L(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = S(i, j) - L.row(i).head(j).dot(L.row(j).head(j));
            L(i, j) = s / L(j, j);
        }
    }
    if (n == 0) min_pivot = 0.0;
    return true;
}

} // namespace detail

/// Assemble the matrix form from neighborhood coefficients. boundary_cov must
/// be symmetric (to 1e-10 relative) and positive semidefinite.
inline PrecisionSystem build_precision(const LatticeSpec& spec,
                                       const NeighborhoodCoefficients& coeffs,
                                       const Matrix& boundary_cov) {
    coeffs.validate(spec);
    const int nb = spec.boundary_count();
    if (boundary_cov.rows() != nb || boundary_cov.cols() != nb)
        throw std::invalid_argument("build_precision: boundary_cov must be " +
                                    std::to_string(nb) + "x" + std::to_string(nb));
    const double scale = boundary_cov.cwiseAbs().maxCoeff();
    const double asym = (boundary_cov - boundary_cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(scale, 1.0))
        throw std::invalid_argument("build_precision: boundary_cov is not symmetric");
    try {
        // Attempted factorization; zero pivots allowed (PSD, no diagonal shift).
        detail::pivoted_cholesky(boundary_cov);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("build_precision: boundary_cov is not PSD");
    }

    const int n = spec.interior_count();
    PrecisionSystem sys;
    sys.spec = spec;
    sys.A = Matrix::Zero(n, n);
    sys.A_b = Matrix::Zero(n, nb);
    sys.boundary_cov = boundary_cov;

    std::vector<int> bidx(static_cast<std::size_t>((spec.n_rows + 2) * (spec.n_cols + 2)), -1);
    const auto flat = [&](Node p) {
        return p.row * (spec.n_cols + 2) + p.col;
    };
    {
        int b = 0;
        for (const Node p : spec.boundary_nodes()) bidx[static_cast<std::size_t>(flat(p))] = b++;
    }

    for (int idx = 0; idx < n; ++idx) {
        const Node p = spec.interior_node(idx);
        sys.A(idx, idx) = coeffs.alpha(spec, p);
        for (int k = 0; k < 8; ++k) {
            const Node q{p.row + kNeighborOffsets[k].row, p.col + kNeighborOffsets[k].col};
            if (spec.is_interior(q))
                sys.A(idx, spec.interior_index(q)) = -coeffs.beta(spec, p, k);
            else
                sys.A_b(idx, bidx[static_cast<std::size_t>(flat(q))]) = coeffs.beta(spec, p, k);
        }
    }
    return sys;
}

/// Full dense Cholesky attempt on A; success reports the minimum pivot,
/// failure the first nonpositive pivot row.
inline SpdReport validate_spd(const PrecisionSystem& sys) {
    SpdReport r;
    r.ok = detail::cholesky_pivots(sys.A, r.min_pivot, r.first_bad_index);
    return r;
}

struct JointCovariance {
    Matrix cov_xx; // interior x interior
    Matrix cov_xb; // interior x boundary
};

/// Dense joint second moments implied by A x = A_b x_b + v with v ~ N(0, A)
/// independent of x_b:
///   Cov(x)     = A^-1 A_b S_b A_b^T A^-T + A^-1
///   Cov(x,x_b) = A^-1 A_b S_b.
/// O(n^3) oracle; refuses lattices past 4096 interior nodes.
inline JointCovariance joint_covariance(const PrecisionSystem& sys) {
    const auto n = sys.A.rows();
    if (n > 4096)
        throw std::invalid_argument("joint_covariance: interior too large for the dense oracle");
    Eigen::LLT<Matrix> llt(sys.A);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("joint_covariance: A is not positive definite");
    JointCovariance jc;
    const Matrix AinvAb = llt.solve(sys.A_b);
    jc.cov_xx = AinvAb * sys.boundary_cov * AinvAb.transpose() +
                llt.solve(Matrix::Identity(n, n));
    jc.cov_xx = 0.5 * (jc.cov_xx + jc.cov_xx.transpose()).eval();
    jc.cov_xb = AinvAb * sys.boundary_cov;
    return jc;
}

} // namespace tgmrf

#endif
