#pragma once

// Deterministic mesh generators for the convergence studies. Edge lengths
// halve from one level to the next for every family:
//   - icosphere: icosahedron subdivided 1:4 and reprojected per level;
//   - torus: structured (48*2^L) x (16*2^L) parameter grid, optionally
//     jittered in parameter space, quads split along the shorter diagonal;
//   - graph meshes over [0,1]^2: a regular right-triangle pattern at
//     resolution 8*2^L (semiregular), or a jittered 8x8 grid with random
//     diagonals refined by 1:4 subdivision with heights re-evaluated
//     (irregular).
// All randomness comes from a seeded mt19937_64, so a fixed seed
// reproduces the mesh exactly.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "curvfit/errors.hpp"
#include "curvfit/mesh.hpp"
#include "curvfit/surfaces.hpp"

namespace curvfit {

namespace detail {

/// Uniform double in [0, 1) built directly from engine output, so the
/// stream does not depend on the standard library's distribution code.
inline double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_pm(std::mt19937_64& rng, double amplitude) {
    return (2.0 * uniform01(rng) - 1.0) * amplitude;
}

} // namespace detail

/// Unit icosphere: an icosahedron subdivided `level` times, vertices
/// projected to the unit sphere after every split. V = 10 * 4^level + 2.
inline Mesh gen_sphere_mesh(int level) {
    if (level < 0 || level > 7) throw Error("gen_sphere_mesh: level must be in 0..7");
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    for (Vec3& v : verts) v = normalized(v);
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    Mesh mesh(std::move(verts), std::move(faces));
    for (int i = 0; i < level; ++i) {
        Mesh fine = mesh.subdivide_1to4();
        std::vector<Vec3> projected = fine.vertices();
        for (Vec3& v : projected) v = normalized(v);
        mesh = Mesh(std::move(projected), fine.faces());
    }
    return mesh;
}

/// Torus with center-circle radius R and tube radius r (defaults match a
/// ring with inner radius 0.7 and outer radius 1.3). The (phi, psi)
/// parameter grid has 48*2^level by 16*2^level cells; with jitter on, each
/// vertex is moved in parameter space by up to 0.3 of a cell in both
/// directions and each quad is split along its shorter diagonal, which
/// yields irregular valences. Vertices lie exactly on the torus either way.
inline Mesh gen_torus_mesh(int level, bool jitter, std::uint64_t seed, double center_radius = 1.0,
                           double tube_radius = 0.3) {
    if (level < 0 || level > 7) throw Error("gen_torus_mesh: level must be in 0..7");
    const int nmaj = 48 << level;
    const int nmin = 16 << level;
    const double R = center_radius, r = tube_radius;
    const double two_pi = 2.0 * 3.14159265358979323846;
    const double dphi = two_pi / nmaj, dpsi = two_pi / nmin;

    std::mt19937_64 rng(seed);
    std::vector<Vec3> verts(std::size_t(nmaj) * nmin);
    std::vector<std::array<double, 2>> params(verts.size());
    for (int i = 0; i < nmaj; ++i)
        for (int j = 0; j < nmin; ++j) {
            double phi = i * dphi, psi = j * dpsi;
            if (jitter) {
                phi += detail::uniform_pm(rng, 0.3 * dphi);
                psi += detail::uniform_pm(rng, 0.3 * dpsi);
            }
            const std::size_t id = std::size_t(i) * nmin + j;
            params[id] = {phi, psi};
            const double w = R + r * std::cos(psi);
            verts[id] = {w * std::cos(phi), w * std::sin(phi), r * std::sin(psi)};
        }

    std::vector<std::array<int, 3>> faces;
    faces.reserve(std::size_t(nmaj) * nmin * 2);
    auto vid = [&](int i, int j) { return ((i + nmaj) % nmaj) * nmin + ((j + nmin) % nmin); };
    for (int i = 0; i < nmaj; ++i)
        for (int j = 0; j < nmin; ++j) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
            const double d0 = (verts[v00] - verts[v11]).squared_norm();
            const double d1 = (verts[v10] - verts[v01]).squared_norm();
            if (d0 <= d1) {
                faces.push_back({v00, v10, v11});
                faces.push_back({v00, v11, v01});
            } else {
                faces.push_back({v00, v10, v01});
                faces.push_back({v10, v11, v01});
            }
        }
    return Mesh(std::move(verts), std::move(faces));
}

enum class GraphStyle { Irregular, Semiregular };

/// Triangulated graph mesh of F1 or F2 over [0,1]^2. See the header note
/// for the two styles; every vertex satisfies z = F(x, y) exactly.
inline Mesh gen_graph_mesh(const AnalyticSurface& surface, GraphStyle style, int level,
                           std::uint64_t seed) {
    if (!surface.is_graph()) throw Error("gen_graph_mesh: surface must be a graph (F1 or F2)");
    if (level < 0 || level > 6) throw Error("gen_graph_mesh: level must be in 0..6");

    const int base = 8;
    if (style == GraphStyle::Semiregular) {
        const int res = base << level;
        std::vector<Vec3> verts;
        verts.reserve(std::size_t(res + 1) * (res + 1));
        for (int j = 0; j <= res; ++j)
            for (int i = 0; i <= res; ++i) {
                const double x = double(i) / res, y = double(j) / res;
                verts.push_back({x, y, surface.height(x, y)});
            }
        auto vid = [&](int i, int j) { return j * (res + 1) + i; };
        std::vector<std::array<int, 3>> faces;
        faces.reserve(std::size_t(res) * res * 2);
        for (int j = 0; j < res; ++j)
            for (int i = 0; i < res; ++i) {
                faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
                faces.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
            }
        return Mesh(std::move(verts), std::move(faces));
    }

    // Irregular: jittered coarse grid with random diagonals, then `level`
    // rounds of 1:4 subdivision with z re-evaluated on the graph.
    std::mt19937_64 rng(seed);
    const int res = base;
    const double cell = 1.0 / res;
    std::vector<Vec3> verts(std::size_t(res + 1) * (res + 1));
    for (int j = 0; j <= res; ++j)
        for (int i = 0; i <= res; ++i) {
            double x = i * cell, y = j * cell;
            const bool on_x_border = (i == 0 || i == res);
            const bool on_y_border = (j == 0 || j == res);
            const double jx = detail::uniform_pm(rng, 0.3 * cell);
            const double jy = detail::uniform_pm(rng, 0.3 * cell);
            if (!on_x_border) x += jx;
            if (!on_y_border) y += jy;
            verts[std::size_t(j) * (res + 1) + i] = {x, y, surface.height(x, y)};
        }
    auto vid = [&](int i, int j) { return j * (res + 1) + i; };
    std::vector<std::array<int, 3>> faces;
    faces.reserve(std::size_t(res) * res * 2);
    for (int j = 0; j < res; ++j)
        for (int i = 0; i < res; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
            if ((rng() & 1u) == 0u) {
                faces.push_back({v00, v10, v11});
                faces.push_back({v00, v11, v01});
            } else {
                faces.push_back({v00, v10, v01});
                faces.push_back({v10, v11, v01});
            }
        }
    Mesh mesh(std::move(verts), std::move(faces));
    for (int l = 0; l < level; ++l) {
        Mesh fine = mesh.subdivide_1to4();
        std::vector<Vec3> lifted = fine.vertices();
        for (Vec3& v : lifted) v.z = surface.height(v.x, v.y);
        mesh = Mesh(std::move(lifted), fine.faces());
    }
    return mesh;
}

} // namespace curvfit
