#pragma once

// Local polynomial fitting of a height function. At a vertex, neighbor
// points are expressed in a frame whose w axis is the approximate vertex
// normal; the Taylor coefficients c_jk of the height f(u,v) are estimated
// by weighted least squares on a generalized Vandermonde system, solved by
// Householder QR with column scaling and a conditioning safeguard that
// trims the highest-degree coefficient block when the triangular factor is
// ill conditioned. A second, optional pass fits the neighbors' normals
// (converted to height-function gradients) with the same matrix to obtain
// a more accurate Hessian.

#include <cmath>
#include <utility>
#include <vector>

#include "curvfit/errors.hpp"
#include "curvfit/linalg.hpp"
#include "curvfit/mesh.hpp"

namespace curvfit {

// ---------------------------------------------------------------------------
// Local frames

/// Orthonormal right-handed frame at a point; columns of `rotation` are the
/// u, v, w axes in global coordinates, with w the chosen normal direction.
struct LocalFrame {
    Vec3 origin;
    Mat3 rotation; // [t1 | t2 | m]

    Vec3 to_local(Vec3 p) const {
        const Vec3 d = p - origin;
        return {dot(rotation.col(0), d), dot(rotation.col(1), d), dot(rotation.col(2), d)};
    }
    Vec3 to_global(Vec3 local) const { return origin + rotation * local; }
    /// Rotates a direction (no translation) into the frame.
    Vec3 dir_to_local(Vec3 d) const {
        return {dot(rotation.col(0), d), dot(rotation.col(1), d), dot(rotation.col(2), d)};
    }
};

/// Builds the frame with w = `normal` and u chosen as the global axis least
/// aligned with the normal, projected and normalized; v completes the
/// right-handed system.
inline LocalFrame build_local_frame(Vec3 origin, Vec3 normal) {
    const double n = normal.norm();
    if (n == 0.0) throw FitError("build_local_frame: zero normal");
    if (std::abs(n - 1.0) > 1e-10) throw FitError("build_local_frame: normal is not unit length");

    int k = 0;
    if (std::abs(normal.y) < std::abs(normal[k])) k = 1;
    if (std::abs(normal.z) < std::abs(normal[k])) k = 2;
    Vec3 axis{};
    axis[k] = 1.0;
    const Vec3 t1 = normalized(axis - dot(axis, normal) * normal);
    const Vec3 t2 = cross(normal, t1);
    return LocalFrame{origin, Mat3::from_columns(t1, t2, normal)};
}

/// Transforms points into (u, v, f) triples in the given frame.
inline std::vector<Vec3> to_local(const LocalFrame& frame, const std::vector<Vec3>& points) {
    std::vector<Vec3> out;
    out.reserve(points.size());
    for (const Vec3& p : points) out.push_back(frame.to_local(p));
    return out;
}

// ---------------------------------------------------------------------------
// Fit configuration and results

struct FitConfig {
    int degree = 2;               ///< requested fitting degree, 1..6
    bool weighting = true;        ///< distance/normal weights vs. plain least squares
    bool iterative = false;       ///< run the second (normal-fitting) pass
    bool conditioning = true;     ///< degree reduction when cond1(R) is too large
    double cond_threshold = 1e3;
    RingLevel ring_cap = RingLevel(3.5);

    void validate() const {
        if (degree < 1 || degree > 6) throw Error("FitConfig: degree must be in 1..6");
        if (!(cond_threshold > 1.0)) throw Error("FitConfig: cond_threshold must be > 1");
    }
};

/// Number of coefficients of a bivariate polynomial of total degree d.
inline int coeff_count(int degree) { return (degree + 1) * (degree + 2) / 2; }

/// Fitted Taylor coefficients c_jk = d^{j+k} f / du^j dv^k at the origin,
/// stored in increasing total degree; within degree p the order is
/// (p,0), (p-1,1), ..., (0,p).
struct FitResult {
    std::vector<double> coeffs;
    int requested_degree = 0;
    int achieved_degree = 0;
    RingLevel ring_used = RingLevel(1.0);
    double cond_estimate = 1.0;
    int point_count = 0; ///< rows with strictly positive weight

    double coeff(int j, int k) const {
        const int p = j + k;
        return coeffs[std::size_t(p * (p + 1) / 2 + k)];
    }
    Vec2 gradient() const { return {coeff(1, 0), coeff(0, 1)}; }
    SymMat2 hessian() const {
        if (achieved_degree < 2) return {};
        return {coeff(2, 0), coeff(1, 1), coeff(0, 2)};
    }
};

/// Gradient and Hessian of a height function at the frame origin.
struct GradHess {
    Vec2 grad;
    SymMat2 hess;
};

// ---------------------------------------------------------------------------
// System assembly

/// Generalized Vandermonde system: row i holds u_i^j v_i^k / (j! k!) in
/// degree-sorted column order; the right-hand side is the height f_i.
inline std::pair<MatrixMN, std::vector<double>> assemble_vandermonde(const std::vector<Vec3>& uvf,
                                                                     int degree) {
    const int m = int(uvf.size());
    const int n = coeff_count(degree);
    MatrixMN V(m, n);
    std::vector<double> f(m);
    std::vector<double> factorial(std::size_t(degree) + 1, 1.0);
    for (int i = 1; i <= degree; ++i) factorial[i] = factorial[i - 1] * i;

    for (int i = 0; i < m; ++i) {
        const double u = uvf[i].x, v = uvf[i].y;
        f[i] = uvf[i].z;
        std::vector<double> upow(std::size_t(degree) + 1, 1.0), vpow(std::size_t(degree) + 1, 1.0);
        for (int p = 1; p <= degree; ++p) {
            upow[p] = upow[p - 1] * u;
            vpow[p] = vpow[p - 1] * v;
        }
        int col = 0;
        for (int p = 0; p <= degree; ++p)
            for (int k = 0; k <= p; ++k, ++col) {
                const int j = p - k;
                V(i, col) = upow[j] * vpow[k] / (factorial[j] * factorial[k]);
            }
    }
    return {std::move(V), std::move(f)};
}

/// Row weights  w_i = max(0, m_i . m_0) / (|u_i|^2 + eps)^(d/4)  with
/// eps = sum |u_i|^2 / (100 m); the normal factor discards points whose
/// normal opposes the center normal, and eps keeps the weight finite at
/// points on top of the origin. Neighbor normals are given in the local
/// frame, so the center normal is the +w axis.
inline std::vector<double> compute_weights(const std::vector<Vec2>& uv,
                                           const std::vector<Vec3>& neighbor_normals_local,
                                           int degree) {
    const std::size_t m = uv.size();
    if (neighbor_normals_local.size() != m) throw Error("compute_weights: size mismatch");
    double eps = 0.0;
    for (const Vec2& p : uv) eps += p.squared_norm();
    eps /= 100.0 * double(m);

    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double gamma = std::max(0.0, neighbor_normals_local[i].z);
        w[i] = gamma / std::pow(uv[i].squared_norm() + eps, 0.25 * degree);
    }
    return w;
}

/// Column scale factors 1/|a_j|_2; zero columns get scale 1.
inline std::vector<double> column_scale(const MatrixMN& A) {
    std::vector<double> s(std::size_t(A.cols()));
    for (int j = 0; j < A.cols(); ++j) {
        double nrm = 0.0;
        for (int i = 0; i < A.rows(); ++i) nrm += A(i, j) * A(i, j);
        nrm = std::sqrt(nrm);
        s[std::size_t(j)] = (nrm == 0.0) ? 1.0 : 1.0 / nrm;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Safeguarded solve

namespace detail {

/// Shared core of the safeguarded solve for one or more right-hand sides
/// over the same Vandermonde matrix. Rows with zero weight are removed,
/// the degree is lowered until the positive-weight count covers the
/// coefficients, and (when enabled) the trailing total-degree column block
/// is dropped while cond1(R) exceeds the threshold; truncating Q and R
/// reuses the factorization instead of recomputing it.
struct MultiFit {
    std::vector<std::vector<double>> coeff_sets;
    int achieved_degree = 0;
    double cond_estimate = 1.0;
    int point_count = 0;
};

inline MultiFit safeguarded_solve_multi(const MatrixMN& V,
                                        const std::vector<std::vector<double>>& rhs,
                                        const std::vector<double>& weights,
                                        const FitConfig& config) {
    config.validate();
    const int m_all = V.rows();
    if (int(weights.size()) != m_all) throw Error("safeguarded_solve: weight count mismatch");
    for (const auto& b : rhs)
        if (int(b.size()) != m_all) throw Error("safeguarded_solve: rhs length mismatch");

    std::vector<int> active;
    active.reserve(std::size_t(m_all));
    for (int i = 0; i < m_all; ++i)
        if (weights[std::size_t(i)] > 0.0) active.push_back(i);
    const int m = int(active.size());
    if (m < 3) throw FitError("fit failed: only " + std::to_string(m) +
                              " positively weighted points (need at least 3)");

    int degree = config.degree;
    while (coeff_count(degree) > m && degree > 1) --degree;

    const int n = coeff_count(degree);
    MatrixMN A(m, n);
    for (int r = 0; r < m; ++r) {
        const double w = weights[std::size_t(active[std::size_t(r)])];
        for (int j = 0; j < n; ++j) A(r, j) = w * V(active[std::size_t(r)], j);
    }
    const std::vector<double> scale = column_scale(A);
    for (int r = 0; r < m; ++r)
        for (int j = 0; j < n; ++j) A(r, j) *= scale[std::size_t(j)];

    QRFactors qr = householder_qr(A);

    // Truncate whole total-degree blocks while ill conditioned.
    int n_used = n;
    double cond = cond1_upper_triangular(qr.R);
    if (config.conditioning) {
        while (cond >= config.cond_threshold && degree > 1) {
            n_used -= degree + 1; // the block of degree-`degree` terms
            --degree;
            MatrixMN Rt(n_used, n_used);
            for (int i = 0; i < n_used; ++i)
                for (int j = i; j < n_used; ++j) Rt(i, j) = qr.R(i, j);
            qr.R = std::move(Rt);
            cond = cond1_upper_triangular(qr.R);
        }
    }

    MultiFit out;
    out.achieved_degree = degree;
    out.cond_estimate = cond;
    out.point_count = m;
    out.coeff_sets.reserve(rhs.size());
    for (const auto& b_full : rhs) {
        std::vector<double> qtb(std::size_t(n_used), 0.0);
        for (int j = 0; j < n_used; ++j) {
            double s = 0.0;
            for (int r = 0; r < m; ++r)
                s += qr.Q(r, j) * weights[std::size_t(active[std::size_t(r)])] *
                     b_full[std::size_t(active[std::size_t(r)])];
            qtb[std::size_t(j)] = s;
        }
        std::vector<double> d = solve_upper(qr.R, qtb);
        for (int j = 0; j < n_used; ++j) d[std::size_t(j)] *= scale[std::size_t(j)];
        out.coeff_sets.push_back(std::move(d));
    }
    return out;
}

} // namespace detail

/// Solves the weighted least-squares system min |W(Vc - f)| with column
/// scaling and the conditioning safeguard; returns the Taylor coefficients
/// of the achieved degree.
inline FitResult safeguarded_solve(const MatrixMN& V, const std::vector<double>& f,
                                   const std::vector<double>& weights, const FitConfig& config) {
    detail::MultiFit mf = detail::safeguarded_solve_multi(V, {f}, weights, config);
    FitResult out;
    out.coeffs = std::move(mf.coeff_sets[0]);
    out.requested_degree = config.degree;
    out.achieved_degree = mf.achieved_degree;
    out.cond_estimate = mf.cond_estimate;
    out.point_count = mf.point_count;
    return out;
}

// ---------------------------------------------------------------------------
// End-to-end per-vertex fits

/// Fits the height function at a vertex: point selection, frame
/// construction from the approximate normal, weighting, and the safeguarded
/// solve. `approx_normals` are unit vertex normals in global coordinates
/// (typically the averaged face normals).
inline std::pair<FitResult, LocalFrame> fit_height(const Mesh& mesh, int vertex,
                                                   const std::vector<Vec3>& approx_normals,
                                                   const FitConfig& config) {
    config.validate();
    auto [ids, ring] = mesh.select_fit_points(vertex, config.degree, config.ring_cap);
    const LocalFrame frame = build_local_frame(mesh.vertex(vertex), approx_normals[std::size_t(vertex)]);

    std::vector<Vec3> uvf;
    uvf.reserve(ids.size());
    std::vector<Vec2> uv;
    uv.reserve(ids.size());
    std::vector<Vec3> normals_local;
    normals_local.reserve(ids.size());
    for (int id : ids) {
        const Vec3 q = frame.to_local(mesh.vertex(id));
        uvf.push_back(q);
        uv.push_back({q.x, q.y});
        normals_local.push_back(frame.dir_to_local(approx_normals[std::size_t(id)]));
    }

    auto [V, f] = assemble_vandermonde(uvf, config.degree);
    std::vector<double> w = config.weighting ? compute_weights(uv, normals_local, config.degree)
                                             : std::vector<double>(uvf.size(), 1.0);
    FitResult fit = safeguarded_solve(V, f, w, config);
    fit.ring_used = ring;
    return {std::move(fit), frame};
}

/// Second fitting pass: neighbors' unit normals (global coordinates, from a
/// prior `fit_height` sweep) are converted to height-function gradients
/// -alpha/gamma, -beta/gamma in this vertex's frame and fitted with the
/// same Vandermonde matrix, one shared factorization for both components.
/// The Hessian comes from the fitted gradient coefficients, symmetrized by
/// averaging the two estimates of the mixed derivative; the gradient of the
/// positional fit is kept.
inline GradHess iterative_fit(const Mesh& mesh, int vertex, const LocalFrame& frame,
                              const std::vector<Vec3>& fitted_normals, Vec2 positional_gradient,
                              const FitConfig& config) {
    config.validate();
    auto [ids, ring] = mesh.select_fit_points(vertex, config.degree, config.ring_cap);
    (void)ring;

    std::vector<Vec3> uvf;
    std::vector<Vec2> uv;
    std::vector<Vec3> normals_local;
    std::vector<double> rhs_u, rhs_v;
    for (int id : ids) {
        const Vec3 nl = frame.dir_to_local(fitted_normals[std::size_t(id)]);
        if (nl.z <= 0.0) continue; // surface not a graph over this frame there
        const Vec3 q = frame.to_local(mesh.vertex(id));
        uvf.push_back(q);
        uv.push_back({q.x, q.y});
        normals_local.push_back(nl);
        rhs_u.push_back(-nl.x / nl.z);
        rhs_v.push_back(-nl.y / nl.z);
    }
    if (uvf.size() < 3) throw FitError("iterative fit failed: fewer than 3 usable neighbor normals");

    auto [V, f] = assemble_vandermonde(uvf, config.degree);
    (void)f;
    std::vector<double> w = config.weighting ? compute_weights(uv, normals_local, config.degree)
                                             : std::vector<double>(uvf.size(), 1.0);
    detail::MultiFit mf = detail::safeguarded_solve_multi(V, {rhs_u, rhs_v}, w, config);

    auto coeff = [](const std::vector<double>& c, int j, int k) {
        const int p = j + k;
        return c[std::size_t(p * (p + 1) / 2 + k)];
    };
    const auto& a = mf.coeff_sets[0]; // expansion of f_u
    const auto& b = mf.coeff_sets[1]; // expansion of f_v

    GradHess out;
    out.grad = positional_gradient;
    const double mixed = 0.5 * (coeff(a, 0, 1) + coeff(b, 1, 0));
    out.hess = {coeff(a, 1, 0), mixed, coeff(b, 0, 1)};
    return out;
}

} // namespace curvfit
