#pragma once

// Conversion of the gradient and Hessian of a height function into surface
// quantities: unit normal, symmetric shape operator, principal curvatures
// and orthonormal directions, the 3x3 curvature tensor in local and global
// frames, mean and Gaussian curvature, and frame-to-frame transfer of
// (grad, Hessian). Symmetry and orthogonality are enforced structurally
// (symmetric storage, exact-perpendicular eigenvectors), so the outputs are
// consistent even when the inputs carry estimation error: curvatures are
// real, directions orthonormal, and the normal spans the tensor null space.

#include <cmath>
#include <utility>

#include "curvfit/fitting.hpp"
#include "curvfit/linalg.hpp"

namespace curvfit {

/// Unit surface normal (-f_u, -f_v, 1)/l in the frame, and rotated to
/// global coordinates.
inline std::pair<Vec3, Vec3> normal_from_gradient(Vec2 grad, const Mat3& frame_rotation) {
    const double ell = std::sqrt(1.0 + grad.squared_norm());
    const Vec3 local{-grad.x / ell, -grad.y / ell, 1.0 / ell};
    return {local, frame_rotation * local};
}

/// Shape operator expressed in the orthonormal tangent basis given by the
/// left singular vectors of the Jacobian; symmetric by construction, so its
/// eigenvalues (the principal curvatures) are real and its eigenvectors
/// orthonormal regardless of rounding in the inputs.
struct ShapeOperator2 {
    SymMat2 w_tilde;
    Mat32 basis; ///< orthonormal tangent basis U (local coordinates)
};

inline ShapeOperator2 symmetric_shape_operator(Vec2 grad, const SymMat2& hess) {
    const JacobianSVD svd = jacobian_svd(grad);
    const double c = svd.c, s = svd.s, ell = svd.ell;

    // S^{-1} = V Sigma^{-1} = [c/l, -s; s/l, c]
    const Mat2 sinv{{{c / ell, -s}, {s / ell, c}}};
    const Mat2 h = hess.full();
    Mat2 w;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double acc = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) acc += sinv.m[a][i] * h.m[a][b] * sinv.m[b][j];
            w.m[i][j] = acc / ell;
        }

    ShapeOperator2 out;
    out.w_tilde = {w.m[0][0], 0.5 * (w.m[0][1] + w.m[1][0]), w.m[1][1]};
    out.basis = svd.U;
    return out;
}

/// Principal curvatures (kappa1 >= kappa2 by signed value) and unit
/// principal directions in local coordinates. Directions get a
/// deterministic sign: the largest-magnitude component is made positive.
struct Principal {
    double kappa1 = 0.0, kappa2 = 0.0;
    Vec3 dir1, dir2;
};

inline Vec3 canonical_sign(Vec3 d) {
    int k = 0;
    if (std::abs(d.y) > std::abs(d[k])) k = 1;
    if (std::abs(d.z) > std::abs(d[k])) k = 2;
    return d[k] < 0.0 ? Vec3{-d.x, -d.y, -d.z} : d;
}

inline Principal principal(const ShapeOperator2& shape) {
    const EigSym2 eig = eig_sym2(shape.w_tilde);
    Principal out;
    out.kappa1 = eig.lambda1;
    out.kappa2 = eig.lambda2;
    out.dir1 = canonical_sign(shape.basis * Vec2{eig.X.m[0][0], eig.X.m[1][0]});
    out.dir2 = canonical_sign(shape.basis * Vec2{eig.X.m[0][1], eig.X.m[1][1]});
    return out;
}

/// Explicit pseudo-inverse of the Jacobian J = [I2 | grad]^T.
inline Mat23 jacobian_pseudo_inverse(Vec2 grad) {
    const double fu = grad.x, fv = grad.y;
    const double g = 1.0 + fu * fu + fv * fv; // l^2
    Mat23 jp;
    jp.m[0][0] = (1.0 + fv * fv) / g;
    jp.m[0][1] = -fu * fv / g;
    jp.m[0][2] = fu / g;
    jp.m[1][0] = -fu * fv / g;
    jp.m[1][1] = (1.0 + fu * fu) / g;
    jp.m[1][2] = fv / g;
    return jp;
}

/// Curvature tensors C = J^{+T} H J^{+} / l in the local frame and
/// C_g = Q C Q^T in the global frame; both symmetrized. The local normal is
/// in the null space of C by construction of the pseudo-inverse.
inline std::pair<Mat3, Mat3> curvature_tensor(Vec2 grad, const SymMat2& hess,
                                              const Mat3& frame_rotation) {
    const double ell = std::sqrt(1.0 + grad.squared_norm());
    const Mat23 jp = jacobian_pseudo_inverse(grad);
    const Mat2 h = hess.full();

    Mat3 c;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            double acc = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) acc += jp.m[a][i] * h.m[a][b] * jp.m[b][j];
            acc /= ell;
            c.m[i][j] = acc;
            c.m[j][i] = acc;
        }

    const Mat3 qc = frame_rotation * c;
    Mat3 cg;
    const Mat3 qt = frame_rotation.transposed();
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += qc.m[i][k] * qt.m[k][j];
            cg.m[i][j] = acc;
            cg.m[j][i] = acc;
        }
    // exact symmetrization of the rotated tensor
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double avg = 0.5 * (cg.m[i][j] + cg.m[j][i]);
            cg.m[i][j] = avg;
            cg.m[j][i] = avg;
        }
    return {c, cg};
}

/// Mean and Gaussian curvature:
///   kappa_H = tr(H)/(2 l) - grad^T H grad / (2 l^3),  kappa_G = det(H)/l^4.
inline std::pair<double, double> mean_gaussian(Vec2 grad, const SymMat2& hess) {
    const double g = 1.0 + grad.squared_norm();
    const double ell = std::sqrt(g);
    const double kH = hess.trace() / (2.0 * ell) - quad_form(hess, grad) / (2.0 * g * ell);
    const double kG = hess.det() / (g * g);
    return {kH, kG};
}

/// Gradient and Hessian of the same surface point expressed in another
/// frame. Frames are given as rotation matrices in global coordinates; the
/// target frame must see the surface as a graph (its w axis not
/// perpendicular to the normal).
inline GradHess transfer_frame(Vec2 grad, const SymMat2& hess, const Mat3& from_rotation,
                               const Mat3& to_rotation) {
    const auto [n_local, n_global] = normal_from_gradient(grad, from_rotation);
    (void)n_local;
    const Vec3 abc = to_rotation.transposed() * n_global; // (alpha, beta, gamma)
    if (abc.z <= 1e-10)
        throw FitError("transfer_frame: degenerate target frame (gamma = " + std::to_string(abc.z) + ")");

    GradHess out;
    out.grad = {-abc.x / abc.z, -abc.y / abc.z};

    const auto [c_local, c_global] = curvature_tensor(grad, hess, from_rotation);
    (void)c_local;
    // J~ = Q_to [I | grad~]^T, columns in global coordinates
    const Vec3 j1 = to_rotation * Vec3{1.0, 0.0, out.grad.x};
    const Vec3 j2 = to_rotation * Vec3{0.0, 1.0, out.grad.y};
    const Vec3 cj1 = c_global * j1;
    const Vec3 cj2 = c_global * j2;
    const double h11 = dot(j1, cj1) / abc.z;
    const double h22 = dot(j2, cj2) / abc.z;
    const double h12 = 0.5 * (dot(j1, cj2) + dot(j2, cj1)) / abc.z;
    out.hess = {h11, h12, h22};
    return out;
}

/// Classical (nonsymmetric) Weingarten matrix W = G^{-1} B = (J^T J)^{-1} H / l.
/// Kept for consistency demonstrations and tests; the symmetric shape
/// operator above is used for actual curvature extraction.
inline Mat2 classical_weingarten(Vec2 grad, const SymMat2& hess) {
    const double fu = grad.x, fv = grad.y;
    const double g = 1.0 + fu * fu + fv * fv;
    const double ell = std::sqrt(g);
    const Mat2 ginv{{{(1.0 + fv * fv) / g, -fu * fv / g}, {-fu * fv / g, (1.0 + fu * fu) / g}}};
    const Mat2 h = hess.full();
    Mat2 w = ginv * h;
    for (auto& row : w.m)
        for (double& x : row) x /= ell;
    return w;
}

// ---------------------------------------------------------------------------
// Packaged per-vertex output

/// All differential quantities of one vertex in global coordinates.
struct VertexDiff {
    Vec3 normal;                ///< unit, follows the local frame's +w side
    double kappa1 = 0.0;        ///< principal curvatures, kappa1 >= kappa2
    double kappa2 = 0.0;
    Vec3 dir1, dir2;            ///< unit principal directions
    double kappaH = 0.0, kappaG = 0.0;
    Mat3 tensor;                ///< symmetric curvature tensor
    bool dirs_reliable = true;  ///< false near umbilic points
};

inline VertexDiff make_vertex_diff(Vec2 grad, const SymMat2& hess, const Mat3& frame_rotation) {
    VertexDiff out;
    out.normal = normal_from_gradient(grad, frame_rotation).second;

    const Principal pr = principal(symmetric_shape_operator(grad, hess));
    out.kappa1 = pr.kappa1;
    out.kappa2 = pr.kappa2;
    out.dir1 = canonical_sign(frame_rotation * pr.dir1);
    out.dir2 = canonical_sign(frame_rotation * pr.dir2);
    out.dirs_reliable =
        std::abs(pr.kappa1 - pr.kappa2) >= 1e-9 * std::max(std::abs(pr.kappa1), 1.0);

    const auto [kH, kG] = mean_gaussian(grad, hess);
    out.kappaH = kH;
    out.kappaG = kG;
    out.tensor = curvature_tensor(grad, hess, frame_rotation).second;
    return out;
}

} // namespace curvfit
