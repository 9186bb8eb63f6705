#pragma once

// Analytic test surfaces with exact differential quantities: a sphere, a
// torus, and two graph surfaces over the unit square,
//   F1(x,y) = (1.25 + cos(5.4 y)) / (6 + 6 (3x - 1)^2)
//   F2(x,y) = exp(-81/16 ((x - 0.5)^2 + (y - 0.5)^2)).
//
// Orientation conventions: sphere and torus use outward unit normals,
// graphs use the upward (+z) normal. Curvature signs follow the
// height-function formulas evaluated with the w axis along that normal, so
// oracle values compare directly against fitted results on meshes with the
// same orientation (a unit sphere with outward normals has kappa = -1).

#include <cmath>
#include <string>

#include "curvfit/diffgeo.hpp"
#include "curvfit/errors.hpp"
#include "curvfit/linalg.hpp"

namespace curvfit {

/// Exact quantities at a surface point, same layout and invariants as the
/// estimated per-vertex output.
struct ExactQuantities {
    Vec3 position;
    Vec3 normal;
    double kappa1 = 0.0, kappa2 = 0.0; ///< kappa1 >= kappa2
    double kappaH = 0.0, kappaG = 0.0;
    Vec3 dir1, dir2;
};

class AnalyticSurface {
  public:
    enum class Kind { Sphere, Torus, GraphF1, GraphF2 };

    static AnalyticSurface sphere(double radius) {
        if (radius <= 0.0) throw Error("AnalyticSurface: radius must be positive");
        AnalyticSurface s;
        s.kind_ = Kind::Sphere;
        s.radius_ = radius;
        return s;
    }
    static AnalyticSurface torus(double center_radius, double tube_radius) {
        if (!(center_radius > tube_radius && tube_radius > 0.0))
            throw Error("AnalyticSurface: need center_radius > tube_radius > 0");
        AnalyticSurface s;
        s.kind_ = Kind::Torus;
        s.center_radius_ = center_radius;
        s.tube_radius_ = tube_radius;
        return s;
    }
    static AnalyticSurface graph_f1() {
        AnalyticSurface s;
        s.kind_ = Kind::GraphF1;
        return s;
    }
    static AnalyticSurface graph_f2() {
        AnalyticSurface s;
        s.kind_ = Kind::GraphF2;
        return s;
    }

    Kind kind() const { return kind_; }
    bool is_graph() const { return kind_ == Kind::GraphF1 || kind_ == Kind::GraphF2; }
    double radius() const { return radius_; }
    double center_radius() const { return center_radius_; }
    double tube_radius() const { return tube_radius_; }

    /// Height of a graph surface.
    double height(double x, double y) const {
        switch (kind_) {
            case Kind::GraphF1: {
                const double num = 1.25 + std::cos(5.4 * y);
                const double t = 3.0 * x - 1.0;
                return num / (6.0 + 6.0 * t * t);
            }
            case Kind::GraphF2: {
                const double dx = x - 0.5, dy = y - 0.5;
                return std::exp(-81.0 / 16.0 * (dx * dx + dy * dy));
            }
            default:
                throw Error("height: not a graph surface");
        }
    }

    /// Analytic gradient of a graph surface.
    Vec2 gradient(double x, double y) const {
        switch (kind_) {
            case Kind::GraphF1: {
                const double num = 1.25 + std::cos(5.4 * y);
                const double nump = -5.4 * std::sin(5.4 * y);
                const double t = 3.0 * x - 1.0;
                const double den = 6.0 + 6.0 * t * t;
                const double denp = 36.0 * t;
                return {-num * denp / (den * den), nump / den};
            }
            case Kind::GraphF2: {
                const double k = 81.0 / 8.0;
                const double dx = x - 0.5, dy = y - 0.5;
                const double f = height(x, y);
                return {-k * dx * f, -k * dy * f};
            }
            default:
                throw Error("gradient: not a graph surface");
        }
    }

    /// Analytic Hessian of a graph surface.
    SymMat2 hessian(double x, double y) const {
        switch (kind_) {
            case Kind::GraphF1: {
                const double num = 1.25 + std::cos(5.4 * y);
                const double nump = -5.4 * std::sin(5.4 * y);
                const double numpp = -5.4 * 5.4 * std::cos(5.4 * y);
                const double t = 3.0 * x - 1.0;
                const double den = 6.0 + 6.0 * t * t;
                const double denp = 36.0 * t;
                const double denpp = 108.0;
                const double fxx = -num * (denpp * den - 2.0 * denp * denp) / (den * den * den);
                const double fxy = -nump * denp / (den * den);
                const double fyy = numpp / den;
                return {fxx, fxy, fyy};
            }
            case Kind::GraphF2: {
                const double k = 81.0 / 8.0;
                const double dx = x - 0.5, dy = y - 0.5;
                const double f = height(x, y);
                return {(-k + k * k * dx * dx) * f, k * k * dx * dy * f, (-k + k * k * dy * dy) * f};
            }
            default:
                throw Error("hessian: not a graph surface");
        }
    }

    /// Exact differential quantities at a point on the surface (e.g., a
    /// mesh vertex produced by the generators). Throws if the sample is off
    /// the surface or outside a graph's parameter domain.
    ExactQuantities exact_at(Vec3 p) const {
        switch (kind_) {
            case Kind::Sphere: return sphere_at(p);
            case Kind::Torus: return torus_at(p);
            default: return graph_at(p);
        }
    }

  private:
    ExactQuantities sphere_at(Vec3 p) const {
        const double n = p.norm();
        if (std::abs(n - radius_) > 1e-8 * std::max(1.0, radius_))
            throw Error("exact_at: sample is not on the sphere");
        ExactQuantities q;
        q.position = p;
        q.normal = p / n;
        q.kappa1 = q.kappa2 = q.kappaH = -1.0 / radius_;
        q.kappaG = 1.0 / (radius_ * radius_);
        // umbilic: any orthonormal tangent pair
        const LocalFrame frame = build_local_frame(p, q.normal);
        q.dir1 = canonical_sign(frame.rotation.col(0));
        q.dir2 = canonical_sign(frame.rotation.col(1));
        return q;
    }

    ExactQuantities torus_at(Vec3 p) const {
        const double R = center_radius_, r = tube_radius_;
        const double rho = std::hypot(p.x, p.y);
        const double d = std::hypot(rho - R, p.z);
        if (std::abs(d - r) > 1e-8) throw Error("exact_at: sample is not on the torus");
        const double phi = std::atan2(p.y, p.x);
        const double psi = std::atan2(p.z, rho - R);
        const double cphi = std::cos(phi), sphi = std::sin(phi);
        const double cpsi = std::cos(psi), spsi = std::sin(psi);

        ExactQuantities q;
        q.position = p;
        q.normal = {cpsi * cphi, cpsi * sphi, spsi};
        // with the outward normal the tube direction always carries -1/r and
        // the ring direction -cos(psi)/(R + r cos(psi)), which is the larger
        const double k_ring = -cpsi / (R + r * cpsi);
        const double k_tube = -1.0 / r;
        q.kappa1 = k_ring;
        q.kappa2 = k_tube;
        q.kappaH = 0.5 * (k_ring + k_tube);
        q.kappaG = k_ring * k_tube;
        q.dir1 = canonical_sign({-sphi, cphi, 0.0});
        q.dir2 = canonical_sign({-spsi * cphi, -spsi * sphi, cpsi});
        return q;
    }

    ExactQuantities graph_at(Vec3 p) const {
        const double x = p.x, y = p.y;
        const double slack = 1e-12;
        if (x < -slack || x > 1.0 + slack || y < -slack || y > 1.0 + slack)
            throw Error("exact_at: (x, y) outside the unit square");
        if (std::abs(p.z - height(x, y)) > 1e-8)
            throw Error("exact_at: sample is not on the graph surface");

        const Vec2 g = gradient(x, y);
        const SymMat2 h = hessian(x, y);
        const Mat3 global = Mat3::identity();

        ExactQuantities q;
        q.position = p;
        q.normal = normal_from_gradient(g, global).second;
        const Principal pr = principal(symmetric_shape_operator(g, h));
        q.kappa1 = pr.kappa1;
        q.kappa2 = pr.kappa2;
        q.dir1 = pr.dir1;
        q.dir2 = pr.dir2;
        const auto [kH, kG] = mean_gaussian(g, h);
        q.kappaH = kH;
        q.kappaG = kG;
        return q;
    }

    Kind kind_ = Kind::Sphere;
    double radius_ = 1.0;
    double center_radius_ = 1.0, tube_radius_ = 0.3;
};

} // namespace curvfit
