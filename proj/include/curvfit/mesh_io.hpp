#pragma once

// OFF and OBJ readers and an OFF writer.
//
// OFF grammar: header token "OFF", a counts line "V F E", V coordinate
// lines, then F face lines "3 i j k" with 0-based indices.
// OBJ grammar: "v x y z" and "f i j k" lines with 1-based indices; all other
// line types are ignored. Both formats are whitespace-delimited and allow
// '#' comments.

#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "curvfit/errors.hpp"
#include "curvfit/mesh.hpp"

namespace curvfit {

enum class MeshFormat { OFF, OBJ };

namespace detail {

/// Reads the next line that has content after comment stripping.
/// Returns false at end of file; `line_no` tracks the physical line.
inline bool next_content_line(std::istream& in, std::string& line, int& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
}

[[noreturn]] inline void parse_fail(const std::string& path, int line_no, const std::string& what) {
    throw IoError(path + ":" + std::to_string(line_no) + ": " + what);
}

} // namespace detail

inline Mesh load_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    int line_no = 0;
    std::string line;

    if (!detail::next_content_line(in, line, line_no)) detail::parse_fail(path, line_no, "empty file");
    long nv = -1, nf = -1, ne = -1;
    {
        std::istringstream ss(line);
        std::string header;
        ss >> header;
        if (header != "OFF") detail::parse_fail(path, line_no, "expected OFF header, got '" + header + "'");
        ss >> nv >> nf >> ne; // counts may share the header line
    }
    if (nv < 0) {
        if (!detail::next_content_line(in, line, line_no)) detail::parse_fail(path, line_no, "missing counts line");
        std::istringstream ss(line);
        if (!(ss >> nv >> nf >> ne) || nv < 0 || nf < 0)
            detail::parse_fail(path, line_no, "expected counts 'V F E'");
    }

    std::vector<Vec3> verts;
    verts.reserve(std::size_t(nv));
    for (long i = 0; i < nv; ++i) {
        if (!detail::next_content_line(in, line, line_no))
            detail::parse_fail(path, line_no, "unexpected end of file while reading vertices");
        std::istringstream ss(line);
        Vec3 p;
        if (!(ss >> p.x >> p.y >> p.z))
            detail::parse_fail(path, line_no, "expected vertex 'x y z'");
        verts.push_back(p);
    }

    std::vector<std::array<int, 3>> faces;
    faces.reserve(std::size_t(nf));
    for (long i = 0; i < nf; ++i) {
        if (!detail::next_content_line(in, line, line_no))
            detail::parse_fail(path, line_no, "unexpected end of file while reading faces");
        std::istringstream ss(line);
        int cnt = 0;
        std::array<int, 3> f{};
        if (!(ss >> cnt >> f[0] >> f[1] >> f[2]))
            detail::parse_fail(path, line_no, "expected face '3 i j k'");
        if (cnt != 3)
            detail::parse_fail(path, line_no, "only triangle faces are supported (got " + std::to_string(cnt) + "-gon)");
        faces.push_back(f);
    }

    try {
        return Mesh(std::move(verts), std::move(faces));
    } catch (const MeshError& e) {
        throw MeshError(path + ": " + e.what());
    }
}

inline Mesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    int line_no = 0;
    std::string line;
    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> faces;

    while (detail::next_content_line(in, line, line_no)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3 p;
            if (!(ss >> p.x >> p.y >> p.z))
                detail::parse_fail(path, line_no, "expected vertex 'v x y z'");
            verts.push_back(p);
        } else if (tag == "f") {
            std::array<int, 3> f{};
            std::string tok;
            int got = 0;
            while (ss >> tok && got < 3) {
                // accept "i", "i/t", "i/t/n"
                const std::string head = tok.substr(0, tok.find('/'));
                std::size_t used = 0;
                long idx = 0;
                try {
                    idx = std::stol(head, &used);
                } catch (...) {
                    detail::parse_fail(path, line_no, "bad face index '" + tok + "'");
                }
                if (used != head.size() || idx < 1)
                    detail::parse_fail(path, line_no, "face indices must be positive integers");
                f[got++] = int(idx - 1);
            }
            if (got != 3 || (ss >> tok))
                detail::parse_fail(path, line_no, "expected triangle face 'f i j k'");
            faces.push_back(f);
        }
        // all other line types ignored
    }

    try {
        return Mesh(std::move(verts), std::move(faces));
    } catch (const MeshError& e) {
        throw MeshError(path + ": " + e.what());
    }
}

inline Mesh load_mesh(const std::string& path, MeshFormat format) {
    return format == MeshFormat::OFF ? load_off(path) : load_obj(path);
}

/// Detects the format from the file extension (.off / .obj).
inline Mesh load_mesh(const std::string& path) {
    auto ends_with_nocase = [&](const std::string& suffix) {
        if (path.size() < suffix.size()) return false;
        for (std::size_t i = 0; i < suffix.size(); ++i) {
            const char a = char(std::tolower(path[path.size() - suffix.size() + i]));
            if (a != suffix[i]) return false;
        }
        return true;
    };
    if (ends_with_nocase(".off")) return load_off(path);
    if (ends_with_nocase(".obj")) return load_obj(path);
    throw IoError(path + ": unknown mesh extension (expected .off or .obj)");
}

/// Writes an OFF file; coordinates use max round-trip precision so a
/// load-save-load cycle reproduces the vertex list exactly.
inline void save_off(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.face_count() << ' ' << mesh.edge_count() << '\n';
    for (const Vec3& p : mesh.vertices()) out << p.x << ' ' << p.y << ' ' << p.z << '\n';
    for (const auto& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    if (!out) throw IoError("write failed: " + path);
}

} // namespace curvfit
