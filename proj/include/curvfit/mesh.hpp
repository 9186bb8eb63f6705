#pragma once

// Indexed triangle mesh with vertex/face adjacency, integer and half-integer
// ring neighborhoods, area-weighted vertex normals, and uniform one-to-four
// subdivision. The mesh is immutable after construction; all queries are
// read-only and safe to call concurrently.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "curvfit/errors.hpp"
#include "curvfit/linalg.hpp"

namespace curvfit {

/// Neighborhood depth in half steps: one of 1, 1.5, 2, 2.5, 3, 3.5.
class RingLevel {
  public:
    RingLevel() = default;
    explicit RingLevel(double value) : half_steps_(int(value * 2.0 + 0.5)) {
        if (half_steps_ < 2 || half_steps_ > 7 || std::abs(half_steps_ - value * 2.0) > 1e-9)
            throw Error("RingLevel: value must be in {1, 1.5, 2, 2.5, 3, 3.5}");
    }

    double value() const { return half_steps_ / 2.0; }
    bool is_half() const { return half_steps_ % 2 != 0; }
    int whole_part() const { return half_steps_ / 2; }

    RingLevel& operator+=(double inc) { return *this = RingLevel(value() + inc); }
    friend bool operator<(RingLevel a, RingLevel b) { return a.half_steps_ < b.half_steps_; }
    friend bool operator==(RingLevel a, RingLevel b) { return a.half_steps_ == b.half_steps_; }
    friend bool operator<=(RingLevel a, RingLevel b) { return a.half_steps_ <= b.half_steps_; }

  private:
    int half_steps_ = 2;
};

class Mesh {
  public:
    Mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces)
        : vertices_(std::move(vertices)), faces_(std::move(faces)) {
        validate_and_build();
    }

    int vertex_count() const { return int(vertices_.size()); }
    int face_count() const { return int(faces_.size()); }
    int edge_count() const { return edge_count_; }
    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& faces() const { return faces_; }
    Vec3 vertex(int v) const { return vertices_[std::size_t(v)]; }
    const std::vector<int>& incident_faces(int v) const { return vertex_faces_[std::size_t(v)]; }

    /// Face adjacent across the edge (face[i], face[i+1]); -1 on the boundary.
    int face_neighbor(int f, int i) const { return face_neighbors_[std::size_t(f)][std::size_t(i)]; }

    /// Unit normal of each vertex, the normalized sum of incident face
    /// normals taken with their cross-product magnitudes (area weighting).
    std::vector<Vec3> vertex_normals_averaged() const {
        std::vector<Vec3> normals(vertices_.size(), Vec3{});
        for (const auto& f : faces_) {
            const Vec3 fn = cross(vertices_[f[1]] - vertices_[f[0]], vertices_[f[2]] - vertices_[f[0]]);
            for (int k = 0; k < 3; ++k) normals[f[k]] += fn;
        }
        for (std::size_t v = 0; v < normals.size(); ++v) {
            if (vertex_faces_[v].empty())
                throw MeshError("vertex_normals_averaged: isolated vertex " + std::to_string(v));
            const double n = normals[v].norm();
            if (n == 0.0)
                throw MeshError("vertex_normals_averaged: zero normal sum at vertex " + std::to_string(v));
            normals[v] = normals[v] / n;
        }
        return normals;
    }

    /// Ring neighborhood of a vertex, center included. Integer rings expand
    /// by vertex adjacency; half rings additionally cross one face-edge
    /// adjacency. The returned order is the center first, then the remaining
    /// ids ascending, so downstream fits are reproducible.
    std::vector<int> ring_neighborhood(int v, RingLevel ring) const {
        std::vector<int> set;
        if (ring == RingLevel(1.0)) {
            set = one_ring(v);
        } else if (ring == RingLevel(1.5)) {
            set = onefive_ring(v);
        } else {
            // (k+1)-ring = k-ring plus the 1-rings of its members;
            // (k+1.5)-ring = k-ring plus the 1.5-rings of its members.
            const int base = ring.whole_part() - 1;
            set = one_ring(v);
            for (int step = 2; step <= base; ++step) set = expand(set, /*half=*/false);
            set = expand(set, /*half=*/ring.is_half());
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
        std::vector<int> out;
        out.reserve(set.size());
        out.push_back(v);
        for (int u : set)
            if (u != v) out.push_back(u);
        return out;
    }

    /// Points used for a degree-d fit at a vertex: start from the
    /// (d+1)/2-ring and grow by half levels while the count is below 1.5x
    /// the number of coefficients, up to the cap.
    std::pair<std::vector<int>, RingLevel> select_fit_points(int v, int degree,
                                                             RingLevel cap = RingLevel(3.5)) const {
        if (degree < 1 || degree > 6) throw Error("select_fit_points: degree must be in 1..6");
        const int n_coeff = (degree + 1) * (degree + 2) / 2;
        RingLevel ring((degree + 1) / 2.0);
        std::vector<int> pts = ring_neighborhood(v, ring);
        while (double(pts.size()) < 1.5 * n_coeff && ring < cap) {
            ring += 0.5;
            pts = ring_neighborhood(v, ring);
        }
        return {pts, ring};
    }

    /// Uniform refinement: each face is split at its edge midpoints into
    /// four, midpoints shared across adjacent faces. V' = V + E, F' = 4F.
    Mesh subdivide_1to4() const {
        std::vector<Vec3> verts = vertices_;
        std::unordered_map<std::uint64_t, int> midpoint;
        midpoint.reserve(faces_.size() * 2);
        auto mid = [&](int a, int b) {
            const std::uint64_t key = edge_key(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = int(verts.size());
            verts.push_back(0.5 * (vertices_[a] + vertices_[b]));
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> out;
        out.reserve(faces_.size() * 4);
        for (const auto& f : faces_) {
            const int mab = mid(f[0], f[1]);
            const int mbc = mid(f[1], f[2]);
            const int mca = mid(f[2], f[0]);
            out.push_back({f[0], mab, mca});
            out.push_back({mab, f[1], mbc});
            out.push_back({mca, mbc, f[2]});
            out.push_back({mab, mbc, mca});
        }
        return Mesh(std::move(verts), std::move(out));
    }

  private:
    static std::uint64_t edge_key(int a, int b) {
        const std::uint32_t lo = std::uint32_t(std::min(a, b));
        const std::uint32_t hi = std::uint32_t(std::max(a, b));
        return (std::uint64_t(lo) << 32) | hi;
    }

    void validate_and_build() {
        const int nv = int(vertices_.size());
        vertex_faces_.assign(vertices_.size(), {});
        face_neighbors_.assign(faces_.size(), {-1, -1, -1});

        struct EdgeUse {
            int face = -1, slot = -1;
            int count = 0;
            bool forward_seen = false, backward_seen = false;
        };
        std::unordered_map<std::uint64_t, EdgeUse> edges;
        edges.reserve(faces_.size() * 2);

        for (int fi = 0; fi < int(faces_.size()); ++fi) {
            const auto& f = faces_[fi];
            for (int k = 0; k < 3; ++k) {
                if (f[k] < 0 || f[k] >= nv)
                    throw MeshError("face " + std::to_string(fi) + ": vertex index " +
                                    std::to_string(f[k]) + " out of range (have " +
                                    std::to_string(nv) + " vertices)");
            }
            if (f[0] == f[1] || f[1] == f[2] || f[2] == f[0])
                throw MeshError("face " + std::to_string(fi) + ": degenerate (repeated vertex index)");
            for (int k = 0; k < 3; ++k) vertex_faces_[f[k]].push_back(fi);

            for (int k = 0; k < 3; ++k) {
                const int a = f[k], b = f[(k + 1) % 3];
                EdgeUse& e = edges[edge_key(a, b)];
                e.count++;
                if (e.count > 2)
                    throw MeshError("non-manifold edge (" + std::to_string(a) + ", " +
                                    std::to_string(b) + "): more than two incident faces");
                const bool forward = a < b;
                if ((forward && e.forward_seen) || (!forward && e.backward_seen))
                    throw MeshError("inconsistent orientation at edge (" + std::to_string(a) +
                                    ", " + std::to_string(b) + ")");
                (forward ? e.forward_seen : e.backward_seen) = true;
                if (e.face >= 0) {
                    face_neighbors_[fi][k] = e.face;
                    face_neighbors_[e.face][e.slot] = fi;
                } else {
                    e.face = fi;
                    e.slot = k;
                }
            }
        }
        edge_count_ = int(edges.size());
    }

    /// Vertices of the faces incident on v (the conventional 1-ring).
    std::vector<int> one_ring(int v) const {
        std::vector<int> out;
        out.reserve(8);
        for (int fi : vertex_faces_[v])
            for (int u : faces_[fi]) out.push_back(u);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Vertices of all faces sharing an edge with a face incident on v,
    /// together with the 1-ring itself (so the sets stay nested at
    /// boundaries, where a face may have no edge neighbors).
    std::vector<int> onefive_ring(int v) const {
        std::vector<int> out = one_ring(v);
        for (int fi : vertex_faces_[v]) {
            for (int k = 0; k < 3; ++k) {
                const int nb = face_neighbors_[fi][k];
                if (nb < 0) continue;
                for (int u : faces_[nb]) out.push_back(u);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::vector<int> expand(const std::vector<int>& set, bool half) const {
        std::vector<int> out = set;
        for (int u : set) {
            std::vector<int> add = half ? onefive_ring(u) : one_ring(u);
            out.insert(out.end(), add.begin(), add.end());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 3>> faces_;
    std::vector<std::vector<int>> vertex_faces_;
    std::vector<std::array<int, 3>> face_neighbors_;
    int edge_count_ = 0;
};

} // namespace curvfit
