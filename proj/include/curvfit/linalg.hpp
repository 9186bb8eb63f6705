#pragma once

// Small dense linear-algebra kernel used by the fitting pipeline: fixed-size
// 2- and 3-dimensional types, a dynamic row-major matrix, Householder QR,
// triangular condition estimation and back substitution, a closed-form
// symmetric 2x2 eigensolver, and the explicit SVD of the height-function
// Jacobian [I2 | grad]^T.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "curvfit/errors.hpp"

namespace curvfit {

// ---------------------------------------------------------------------------
// Fixed-size vectors and matrices

struct Vec2 {
    double x = 0.0, y = 0.0;

    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double squared_norm() const { return x * x + y * y + z * z; }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3& operator+=(Vec3& a, Vec3 b) { a = a + b; return a; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Vec3 normalized(Vec3 a) {
    const double n = a.norm();
    return {a.x / n, a.y / n, a.z / n};
}

/// 2x2 matrix, row major.
struct Mat2 {
    double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

    static Mat2 identity() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }
    double trace() const { return m[0][0] + m[1][1]; }
    double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
};

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
    return r;
}
inline Vec2 operator*(const Mat2& a, Vec2 v) {
    return {a.m[0][0] * v.x + a.m[0][1] * v.y, a.m[1][0] * v.x + a.m[1][1] * v.y};
}

/// Symmetric 2x2 matrix with a single stored off-diagonal entry, so that
/// symmetry holds exactly by construction.
struct SymMat2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;

    double trace() const { return xx + yy; }
    double det() const { return xx * yy - xy * xy; }
    Mat2 full() const { return {{{xx, xy}, {xy, yy}}}; }
};

/// Quadratic form v^T M v.
inline double quad_form(const SymMat2& m, Vec2 v) {
    return m.xx * v.x * v.x + 2.0 * m.xy * v.x * v.y + m.yy * v.y * v.y;
}

/// 3x3 matrix, row major.
struct Mat3 {
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    static Mat3 identity() {
        Mat3 q;
        q.m[0][0] = q.m[1][1] = q.m[2][2] = 1.0;
        return q;
    }
    static Mat3 from_columns(Vec3 c0, Vec3 c1, Vec3 c2) {
        Mat3 q;
        for (int i = 0; i < 3; ++i) {
            q.m[i][0] = c0[i];
            q.m[i][1] = c1[i];
            q.m[i][2] = c2[i];
        }
        return q;
    }
    Vec3 col(int j) const { return {m[0][j], m[1][j], m[2][j]}; }
    Mat3 transposed() const {
        Mat3 t;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) t.m[i][j] = m[j][i];
        return t;
    }
    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }
    double max_abs() const {
        double r = 0.0;
        for (const auto& row : m)
            for (double v : row) r = std::max(r, std::abs(v));
        return r;
    }
};

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a.m[i][k] * b.m[k][j];
            r.m[i][j] = s;
        }
    return r;
}
inline Vec3 operator*(const Mat3& a, Vec3 v) {
    Vec3 r;
    for (int i = 0; i < 3; ++i) r[i] = a.m[i][0] * v.x + a.m[i][1] * v.y + a.m[i][2] * v.z;
    return r;
}
inline Mat3 operator+(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
    return r;
}
inline Mat3 operator*(double s, const Mat3& a) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = s * a.m[i][j];
    return r;
}

/// 3x2 matrix (tall); used for the Jacobian and tangent bases.
struct Mat32 {
    double m[3][2] = {{0, 0}, {0, 0}, {0, 0}};

    Vec3 col(int j) const { return {m[0][j], m[1][j], m[2][j]}; }
};

inline Vec3 operator*(const Mat32& a, Vec2 v) {
    Vec3 r;
    for (int i = 0; i < 3; ++i) r[i] = a.m[i][0] * v.x + a.m[i][1] * v.y;
    return r;
}

/// 2x3 matrix (wide); used for the Jacobian pseudo-inverse.
struct Mat23 {
    double m[2][3] = {{0, 0, 0}, {0, 0, 0}};
};

inline Vec2 operator*(const Mat23& a, Vec3 v) {
    return {a.m[0][0] * v.x + a.m[0][1] * v.y + a.m[0][2] * v.z,
            a.m[1][0] * v.x + a.m[1][1] * v.y + a.m[1][2] * v.z};
}

// ---------------------------------------------------------------------------
// Dynamic matrix

/// Dense row-major matrix of doubles. Sized for the local fitting systems
/// (at most a few dozen rows/columns), so no blocking or views.
class MatrixMN {
  public:
    MatrixMN() = default;
    MatrixMN(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols, 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }

    double max_abs() const {
        double r = 0.0;
        for (double v : a_) r = std::max(r, std::abs(v));
        return r;
    }

    /// Largest column sum of absolute values.
    double norm1() const {
        double r = 0.0;
        for (int j = 0; j < cols_; ++j) {
            double s = 0.0;
            for (int i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
            r = std::max(r, s);
        }
        return r;
    }

  private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

// ---------------------------------------------------------------------------
// Householder QR

struct QRFactors {
    MatrixMN Q; ///< m x n, orthonormal columns
    MatrixMN R; ///< n x n, upper triangular, nonnegative diagonal
};

/// Reduced QR factorization A = QR by Householder reflections
/// (Trefethen & Bau, Algorithm 10.1), with the sign convention that the
/// diagonal of R is nonnegative so the factors are deterministic.
/// Requires m >= n. Rank deficiency is not an error here; it surfaces as a
/// zero diagonal entry of R and is handled by the caller via the condition
/// estimate.
inline QRFactors householder_qr(const MatrixMN& A) {
    const int m = A.rows(), n = A.cols();
    if (m < n) throw Error("householder_qr: need rows >= cols");

    MatrixMN work = A;                          // reduced in place to R
    std::vector<std::vector<double>> vs(n);     // unit Householder vectors

    for (int k = 0; k < n; ++k) {
        double norm_x = 0.0;
        for (int i = k; i < m; ++i) norm_x += work(i, k) * work(i, k);
        norm_x = std::sqrt(norm_x);

        std::vector<double>& v = vs[k];
        v.assign(m, 0.0);
        if (norm_x == 0.0) continue;            // zero column: skip reflector

        for (int i = k; i < m; ++i) v[i] = work(i, k);
        v[k] += (work(k, k) >= 0.0 ? norm_x : -norm_x);
        double norm_v = 0.0;
        for (int i = k; i < m; ++i) norm_v += v[i] * v[i];
        norm_v = std::sqrt(norm_v);
        for (int i = k; i < m; ++i) v[i] /= norm_v;

        for (int j = k; j < n; ++j) {
            double d = 0.0;
            for (int i = k; i < m; ++i) d += v[i] * work(i, j);
            for (int i = k; i < m; ++i) work(i, j) -= 2.0 * d * v[i];
        }
    }

    QRFactors f;
    f.R = MatrixMN(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) f.R(i, j) = work(i, j);

    // Thin Q: apply the reflectors in reverse to the first n identity columns.
    f.Q = MatrixMN(m, n);
    std::vector<double> col(m);
    for (int j = 0; j < n; ++j) {
        std::fill(col.begin(), col.end(), 0.0);
        col[j] = 1.0;
        for (int k = n - 1; k >= 0; --k) {
            const std::vector<double>& v = vs[k];
            if (v.empty()) continue;
            double d = 0.0;
            for (int i = k; i < m; ++i) d += v[i] * col[i];
            for (int i = k; i < m; ++i) col[i] -= 2.0 * d * v[i];
        }
        for (int i = 0; i < m; ++i) f.Q(i, j) = col[i];
    }

    // Nonnegative-diagonal convention: flip row k of R and column k of Q.
    for (int k = 0; k < n; ++k) {
        if (f.R(k, k) < 0.0) {
            for (int j = k; j < n; ++j) f.R(k, j) = -f.R(k, j);
            for (int i = 0; i < m; ++i) f.Q(i, k) = -f.Q(i, k);
        }
    }
    return f;
}

/// Back substitution for an upper-triangular system R x = y.
inline std::vector<double> solve_upper(const MatrixMN& R, const std::vector<double>& y) {
    const int n = R.cols();
    if (R.rows() != n || int(y.size()) != n) throw Error("solve_upper: shape mismatch");
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        if (R(i, i) == 0.0)
            throw FitError("solve_upper: singular system (zero diagonal at " + std::to_string(i) + ")");
        double s = y[i];
        for (int j = i + 1; j < n; ++j) s -= R(i, j) * x[j];
        x[i] = s / R(i, i);
    }
    return x;
}

/// 1-norm condition number of an upper-triangular matrix,
/// ||R||_1 * ||R^-1||_1; the inverse norm is computed exactly by n
/// triangular solves, which is cheap at the sizes used here (n <= 28).
/// Returns +infinity if any diagonal entry is exactly zero.
inline double cond1_upper_triangular(const MatrixMN& R) {
    const int n = R.cols();
    if (n == 0) return 1.0;
    for (int i = 0; i < n; ++i)
        if (R(i, i) == 0.0) return std::numeric_limits<double>::infinity();

    double inv_norm = 0.0;
    std::vector<double> e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        std::vector<double> x = solve_upper(R, e);
        e[j] = 0.0;
        double s = 0.0;
        for (double v : x) s += std::abs(v);
        inv_norm = std::max(inv_norm, s);
    }
    return R.norm1() * inv_norm;
}

// ---------------------------------------------------------------------------
// Symmetric 2x2 eigendecomposition

struct EigSym2 {
    double lambda1 = 0.0; ///< larger eigenvalue (by signed value)
    double lambda2 = 0.0;
    Mat2 X;               ///< orthogonal eigenvector matrix, columns match (lambda1, lambda2)
};

/// Closed-form eigendecomposition of a symmetric 2x2 matrix. The eigenvalue
/// of larger magnitude is formed first from the sign of the trace and the
/// other recovered from the determinant, avoiding cancellation; the second
/// eigenvector is the exact perpendicular of the first so X is orthogonal
/// to the last bit.
inline EigSym2 eig_sym2(const SymMat2& M) {
    const double half_tr = 0.5 * (M.xx + M.yy);
    const double delta = 0.5 * (M.xx - M.yy);
    const double disc = std::hypot(delta, M.xy);

    EigSym2 out;
    if (disc == 0.0) {
        out.lambda1 = out.lambda2 = half_tr;
        out.X = Mat2::identity();
        return out;
    }
    const double big = half_tr + std::copysign(disc, half_tr);
    const double small = (big == 0.0) ? 0.0 : M.det() / big;
    if (half_tr >= 0.0) {
        out.lambda1 = big;
        out.lambda2 = small;
    } else {
        out.lambda1 = small;
        out.lambda2 = big;
    }

    // Eigenvector for lambda1 from the better-conditioned of the two rows.
    Vec2 va{M.xy, out.lambda1 - M.xx};
    Vec2 vb{out.lambda1 - M.yy, M.xy};
    Vec2 v = (va.squared_norm() >= vb.squared_norm()) ? va : vb;
    double nv = v.norm();
    if (nv == 0.0) { v = {1.0, 0.0}; nv = 1.0; }
    Vec2 x1{v.x / nv, v.y / nv};
    if (std::abs(x1.x) >= std::abs(x1.y) ? x1.x < 0.0 : x1.y < 0.0) x1 = {-x1.x, -x1.y};

    out.X.m[0][0] = x1.x;
    out.X.m[1][0] = x1.y;
    out.X.m[0][1] = -x1.y; // exact perpendicular
    out.X.m[1][1] = x1.x;
    return out;
}

// ---------------------------------------------------------------------------
// SVD of the height-function Jacobian

/// Explicit SVD of J = [I2 | grad]^T, J = U Sigma V^T, with
///   U = [c/l, -s; s/l, c; |grad|/l, 0],  Sigma = diag(l, 1),
///   V = [c, -s; s, c],  c = f_u/|grad|, s = f_v/|grad|, l = sqrt(1+|grad|^2).
/// The angle is defined as 0 when the gradient vanishes.
struct JacobianSVD {
    Mat32 U;
    double sigma[2] = {1.0, 1.0}; ///< (ell, 1)
    Mat2 V;
    double c = 1.0, s = 0.0, theta = 0.0;
    double ell = 1.0;
};

inline JacobianSVD jacobian_svd(Vec2 grad) {
    JacobianSVD d;
    const double g = grad.norm();
    d.ell = std::sqrt(1.0 + grad.squared_norm());
    if (g < 1e-14) {
        d.c = 1.0;
        d.s = 0.0;
        d.theta = 0.0;
    } else {
        d.c = grad.x / g;
        d.s = grad.y / g;
        d.theta = std::atan2(grad.y, grad.x);
    }
    d.sigma[0] = d.ell;
    d.sigma[1] = 1.0;
    d.U.m[0][0] = d.c / d.ell;
    d.U.m[0][1] = -d.s;
    d.U.m[1][0] = d.s / d.ell;
    d.U.m[1][1] = d.c;
    d.U.m[2][0] = g / d.ell;
    d.U.m[2][1] = 0.0;
    d.V.m[0][0] = d.c;
    d.V.m[0][1] = -d.s;
    d.V.m[1][0] = d.s;
    d.V.m[1][1] = d.c;
    return d;
}

} // namespace curvfit
