#pragma once

// Error norms against the analytic oracles, convergence rates across
// refinement levels, and the CSV reports written by the command-line
// driver. Number formatting goes through one printf-style helper so that a
// fixed configuration and seed reproduce byte-identical files.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "curvfit/errors.hpp"
#include "curvfit/estimator.hpp"
#include "curvfit/generators.hpp"
#include "curvfit/mesh_io.hpp"
#include "curvfit/surfaces.hpp"

namespace curvfit {

// ---------------------------------------------------------------------------
// Error norms

/// Relative L2 and Linf error of one scalar quantity. If the exact field is
/// identically zero the relative norms are undefined; the absolute norms
/// are reported instead and flagged.
struct QuantityError {
    double l2 = 0.0;
    double linf = 0.0;
    bool absolute = false; ///< true when the normalization was degenerate
};

struct ErrorReport {
    QuantityError kappa1, kappa2, kappaH, kappaG;
    double normal_l2 = 0.0;  ///< sqrt(mean |n~ - n|^2)
    double normal_linf = 0.0;
    double dir1_l2 = 0.0;    ///< like normals, minimized over direction sign
    double dir1_linf = 0.0;
    int vertex_count = 0;    ///< vertices included in the norms
    int failed_count = 0;    ///< excluded fit failures
    double wall_time_sec = 0.0;
};

namespace detail {

inline QuantityError scalar_error(const std::vector<double>& est, const std::vector<double>& exact) {
    double num2 = 0.0, den2 = 0.0, max_abs_exact = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double d = est[i] - exact[i];
        num2 += d * d;
        den2 += exact[i] * exact[i];
        max_abs_exact = std::max(max_abs_exact, std::abs(exact[i]));
    }
    QuantityError out;
    if (den2 == 0.0) {
        out.absolute = true;
        out.l2 = std::sqrt(num2);
        for (std::size_t i = 0; i < est.size(); ++i)
            out.linf = std::max(out.linf, std::abs(est[i] - exact[i]));
        return out;
    }
    out.l2 = std::sqrt(num2) / std::sqrt(den2);
    const double eps = 0.01 * max_abs_exact;
    for (std::size_t i = 0; i < est.size(); ++i)
        out.linf = std::max(out.linf,
                            std::abs(est[i] - exact[i]) / std::max(std::abs(exact[i]), eps));
    return out;
}

inline double sign_min_distance(Vec3 a, Vec3 b) {
    return std::min((a - b).norm(), (a + b).norm());
}

} // namespace detail

/// Error norms of an estimate against oracle values, failed vertices
/// excluded (and counted).
inline ErrorReport error_norms(const EstimateResult& est, const std::vector<ExactQuantities>& exact) {
    if (est.diffs.size() != exact.size()) throw Error("error_norms: length mismatch");
    std::vector<double> k1e, k1x, k2e, k2x, khe, khx, kge, kgx;
    double nsum2 = 0.0, nmax = 0.0, dsum2 = 0.0, dmax = 0.0;
    int included = 0, failed = 0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        if (est.failed[i]) {
            ++failed;
            continue;
        }
        ++included;
        const VertexDiff& d = est.diffs[i];
        const ExactQuantities& q = exact[i];
        k1e.push_back(d.kappa1);
        k1x.push_back(q.kappa1);
        k2e.push_back(d.kappa2);
        k2x.push_back(q.kappa2);
        khe.push_back(d.kappaH);
        khx.push_back(q.kappaH);
        kge.push_back(d.kappaG);
        kgx.push_back(q.kappaG);
        const double ne = (d.normal - q.normal).norm();
        nsum2 += ne * ne;
        nmax = std::max(nmax, ne);
        const double de = detail::sign_min_distance(d.dir1, q.dir1);
        dsum2 += de * de;
        dmax = std::max(dmax, de);
    }
    ErrorReport out;
    out.vertex_count = included;
    out.failed_count = failed;
    if (included == 0) return out;
    out.kappa1 = detail::scalar_error(k1e, k1x);
    out.kappa2 = detail::scalar_error(k2e, k2x);
    out.kappaH = detail::scalar_error(khe, khx);
    out.kappaG = detail::scalar_error(kge, kgx);
    out.normal_l2 = std::sqrt(nsum2 / included);
    out.normal_linf = nmax;
    out.dir1_l2 = std::sqrt(dsum2 / included);
    out.dir1_linf = dmax;
    return out;
}

// ---------------------------------------------------------------------------
// Convergence rate

/// Rate over L refinement levels from the first and last errors,
///   rate = log2(e_first / e_last) / (L - 1).
/// A zero error at any level means the quantity was resolved exactly; the
/// returned sentinel is +infinity and prints as "exact".
inline double convergence_rate(const std::vector<double>& errors, int levels) {
    if (levels < 2) throw Error("convergence_rate: need at least 2 levels");
    if (errors.empty()) throw Error("convergence_rate: empty error list");
    for (double e : errors) {
        if (e < 0.0) throw Error("convergence_rate: negative error");
        if (e == 0.0) return std::numeric_limits<double>::infinity();
    }
    return std::log2(errors.front() / errors.back()) / double(levels - 1);
}

// ---------------------------------------------------------------------------
// CSV output

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_rate(double v) {
    if (v == std::numeric_limits<double>::infinity()) return "exact";
    return fmt(v);
}

} // namespace detail

/// Per-vertex CSV: position, normal, curvatures, principal directions, fit
/// metadata, and an explicit status column (failed fits never emit NaN).
inline void write_vertex_csv(const std::string& path, const Mesh& mesh, const EstimateResult& est) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "vertex_id,x,y,z,nx,ny,nz,kappa1,kappa2,kappaH,kappaG,"
           "d1x,d1y,d1z,d2x,d2y,d2z,achieved_degree,ring,cond,status\n";
    using detail::fmt;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        const Vec3 p = mesh.vertex(v);
        out << v << ',' << fmt(p.x) << ',' << fmt(p.y) << ',' << fmt(p.z) << ',';
        if (est.failed[std::size_t(v)]) {
            out << ",,,,,,,,,,,,,,,,failed:" << est.failure_reason[std::size_t(v)] << '\n';
            continue;
        }
        const VertexDiff& d = est.diffs[std::size_t(v)];
        const VertexFitInfo& info = est.info[std::size_t(v)];
        out << fmt(d.normal.x) << ',' << fmt(d.normal.y) << ',' << fmt(d.normal.z) << ','
            << fmt(d.kappa1) << ',' << fmt(d.kappa2) << ',' << fmt(d.kappaH) << ','
            << fmt(d.kappaG) << ',' << fmt(d.dir1.x) << ',' << fmt(d.dir1.y) << ','
            << fmt(d.dir1.z) << ',' << fmt(d.dir2.x) << ',' << fmt(d.dir2.y) << ','
            << fmt(d.dir2.z) << ',' << info.achieved_degree << ',' << info.ring_used.value()
            << ',' << fmt(info.cond_estimate) << ",ok\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Experiment driver

struct RunConfig {
    enum class Command { Estimate, Convergence, GenMesh };
    Command command = Command::Estimate;

    std::string mesh_path;            ///< estimate: input mesh file
    std::string surface = "sphere";   ///< sphere | torus | f1 | f2
    std::string style = "irregular";  ///< irregular | semiregular
    int levels = 4;                   ///< convergence: refinement levels (0 .. levels-1)
    int level = 0;                    ///< genmesh: single level
    int degree_min = 2, degree_max = 2;
    FitConfig fit;
    std::uint64_t seed = 0;
    std::string out_path;

    /// Quantities carried into the summary; the per-vertex file always has
    /// every column.
    std::vector<std::string> quantities = {"normal", "kappa1", "kappa2", "kappaH", "kappaG", "dir1"};
};

namespace detail {

inline AnalyticSurface surface_by_name(const std::string& name) {
    if (name == "sphere") return AnalyticSurface::sphere(1.0);
    if (name == "torus") return AnalyticSurface::torus(1.0, 0.3);
    if (name == "f1") return AnalyticSurface::graph_f1();
    if (name == "f2") return AnalyticSurface::graph_f2();
    throw Error("unknown surface '" + name + "' (expected sphere|torus|f1|f2)");
}

inline Mesh generate_mesh(const AnalyticSurface& surface, const std::string& style, int level,
                          std::uint64_t seed) {
    switch (surface.kind()) {
        case AnalyticSurface::Kind::Sphere:
            return gen_sphere_mesh(level);
        case AnalyticSurface::Kind::Torus:
            return gen_torus_mesh(level, style == "irregular", seed);
        default:
            return gen_graph_mesh(surface, style == "irregular" ? GraphStyle::Irregular
                                                                : GraphStyle::Semiregular,
                                  level, seed);
    }
}

inline std::vector<ExactQuantities> exact_for_mesh(const AnalyticSurface& surface, const Mesh& mesh) {
    std::vector<ExactQuantities> out;
    out.reserve(std::size_t(mesh.vertex_count()));
    for (const Vec3& p : mesh.vertices()) out.push_back(surface.exact_at(p));
    return out;
}

} // namespace detail

/// One row of the convergence summary.
struct SummaryRow {
    int degree = 0;
    int level = 0;
    int vertices = 0;
    int failed = 0;
    ErrorReport report;
    /// rates over the levels seen so far for this degree (NaN until the
    /// second level; +inf prints as "exact")
    double rate_normal = std::numeric_limits<double>::quiet_NaN();
    double rate_kappa1 = std::numeric_limits<double>::quiet_NaN();
    double rate_kappa2 = std::numeric_limits<double>::quiet_NaN();
    double rate_kappaH = std::numeric_limits<double>::quiet_NaN();
    double rate_kappaG = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceOutcome {
    std::vector<SummaryRow> rows;
    int total_failed = 0;
};

/// Runs the estimation over a refinement hierarchy for every requested
/// degree, filling error norms and running convergence rates.
inline ConvergenceOutcome run_convergence(const RunConfig& config,
                                          bool keep_vertex_files = true) {
    const AnalyticSurface surface = detail::surface_by_name(config.surface);
    ConvergenceOutcome outcome;

    std::vector<Mesh> meshes;
    std::vector<std::vector<ExactQuantities>> exact;
    for (int level = 0; level < config.levels; ++level) {
        meshes.push_back(detail::generate_mesh(surface, config.style, level, config.seed));
        exact.push_back(detail::exact_for_mesh(surface, meshes.back()));
    }

    for (int degree = config.degree_min; degree <= config.degree_max; ++degree) {
        std::vector<double> e_normal, e_k1, e_k2, e_kh, e_kg;
        for (int level = 0; level < config.levels; ++level) {
            FitConfig fit = config.fit;
            fit.degree = degree;
            const auto t0 = std::chrono::steady_clock::now();
            EstimateResult est = estimate_all(meshes[std::size_t(level)], fit);
            ErrorReport report = error_norms(est, exact[std::size_t(level)]);
            report.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            SummaryRow row;
            row.degree = degree;
            row.level = level;
            row.vertices = meshes[std::size_t(level)].vertex_count();
            row.failed = report.failed_count;
            row.report = report;
            outcome.total_failed += report.failed_count;

            e_normal.push_back(report.normal_l2);
            e_k1.push_back(report.kappa1.l2);
            e_k2.push_back(report.kappa2.l2);
            e_kh.push_back(report.kappaH.l2);
            e_kg.push_back(report.kappaG.l2);
            if (level >= 1) {
                row.rate_normal = convergence_rate(e_normal, level + 1);
                row.rate_kappa1 = convergence_rate(e_k1, level + 1);
                row.rate_kappa2 = convergence_rate(e_k2, level + 1);
                row.rate_kappaH = convergence_rate(e_kh, level + 1);
                row.rate_kappaG = convergence_rate(e_kg, level + 1);
            }
            outcome.rows.push_back(row);

            if (keep_vertex_files && !config.out_path.empty()) {
                const std::string path = config.out_path + "/vertices_d" + std::to_string(degree) +
                                         "_l" + std::to_string(level) + ".csv";
                write_vertex_csv(path, meshes[std::size_t(level)], est);
            }
        }
    }
    return outcome;
}

/// Writes the summary CSV for a convergence run (one row per degree x level).
inline void write_summary_csv(const std::string& path, const RunConfig& config,
                              const ConvergenceOutcome& outcome) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    using detail::fmt;
    using detail::fmt_rate;
    out << "surface,style,degree,level,vertices,failed,"
           "normal_l2,normal_linf,kappa1_l2,kappa1_linf,kappa2_l2,kappa2_linf,"
           "kappaH_l2,kappaH_linf,kappaG_l2,kappaG_linf,dir1_l2,dir1_linf,max_cond_flag,"
           "rate_normal,rate_kappa1,rate_kappa2,rate_kappaH,rate_kappaG\n";
    for (const SummaryRow& r : outcome.rows) {
        const ErrorReport& e = r.report;
        out << config.surface << ',' << config.style << ',' << r.degree << ',' << r.level << ','
            << r.vertices << ',' << r.failed << ',' << fmt(e.normal_l2) << ',' << fmt(e.normal_linf)
            << ',' << fmt(e.kappa1.l2) << ',' << fmt(e.kappa1.linf) << ',' << fmt(e.kappa2.l2)
            << ',' << fmt(e.kappa2.linf) << ',' << fmt(e.kappaH.l2) << ',' << fmt(e.kappaH.linf)
            << ',' << fmt(e.kappaG.l2) << ',' << fmt(e.kappaG.linf) << ',' << fmt(e.dir1_l2) << ','
            << fmt(e.dir1_linf) << ','
            << (e.kappa1.absolute || e.kappaH.absolute || e.kappaG.absolute ? "degenerate" : "ok");
        const double rates[] = {r.rate_normal, r.rate_kappa1, r.rate_kappa2, r.rate_kappaH,
                                r.rate_kappaG};
        for (double rt : rates) {
            out << ',';
            if (!std::isnan(rt)) out << fmt_rate(rt);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace curvfit
