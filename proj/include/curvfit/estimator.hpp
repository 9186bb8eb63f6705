#pragma once

// Whole-mesh estimation: averaged normals, per-vertex height fits, the
// optional normal-fitting pass, and conversion to per-vertex differential
// quantities. Per-vertex work is a pure function of the immutable mesh, so
// the loop runs in parallel over disjoint output slots; results do not
// depend on the thread count.

#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "curvfit/diffgeo.hpp"
#include "curvfit/fitting.hpp"
#include "curvfit/mesh.hpp"

namespace curvfit {

namespace detail {

template <class Fn>
void parallel_for(int n, Fn&& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const int workers = int(std::min<unsigned>(hw, 8));
    if (workers <= 1 || n < 256) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(std::size_t(workers));
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = w * chunk, hi = std::min(n, lo + chunk);
        pool.emplace_back([&, w, lo, hi] {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[std::size_t(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

/// Per-vertex fit metadata kept for reports.
struct VertexFitInfo {
    int achieved_degree = 0;
    RingLevel ring_used = RingLevel(1.0);
    double cond_estimate = 1.0;
    int point_count = 0;
};

struct EstimateResult {
    std::vector<VertexDiff> diffs;
    std::vector<VertexFitInfo> info;
    std::vector<Vec3> fitted_normals;
    std::vector<bool> failed;                 ///< explicit failure markers
    std::vector<std::string> failure_reason;  ///< empty string when ok
    std::vector<int> failed_ids() const {
        std::vector<int> out;
        for (int v = 0; v < int(failed.size()); ++v)
            if (failed[std::size_t(v)]) out.push_back(v);
        return out;
    }
};

/// Runs the full pipeline on every vertex. Vertices whose fit fails carry
/// an explicit marker and reason instead of quiet NaNs.
inline EstimateResult estimate_all(const Mesh& mesh, const FitConfig& config) {
    config.validate();
    const int nv = mesh.vertex_count();
    const std::vector<Vec3> approx_normals = mesh.vertex_normals_averaged();

    EstimateResult out;
    out.diffs.resize(std::size_t(nv));
    out.info.resize(std::size_t(nv));
    out.fitted_normals.assign(std::size_t(nv), Vec3{0, 0, 1});
    out.failed.assign(std::size_t(nv), false);
    out.failure_reason.assign(std::size_t(nv), {});

    std::vector<GradHess> fitted(std::size_t(nv));
    std::vector<LocalFrame> frames(std::size_t(nv));

    detail::parallel_for(nv, [&](int v) {
        try {
            auto [fit, frame] = fit_height(mesh, v, approx_normals, config);
            fitted[std::size_t(v)] = {fit.gradient(), fit.hessian()};
            frames[std::size_t(v)] = frame;
            out.info[std::size_t(v)] = {fit.achieved_degree, fit.ring_used, fit.cond_estimate,
                                        fit.point_count};
            out.fitted_normals[std::size_t(v)] =
                normal_from_gradient(fitted[std::size_t(v)].grad, frame.rotation).second;
        } catch (const FitError& e) {
            out.failed[std::size_t(v)] = true;
            out.failure_reason[std::size_t(v)] = e.what();
        }
    });

    if (config.iterative) {
        std::vector<GradHess> second(fitted);
        detail::parallel_for(nv, [&](int v) {
            if (out.failed[std::size_t(v)]) return;
            try {
                second[std::size_t(v)] =
                    iterative_fit(mesh, v, frames[std::size_t(v)], out.fitted_normals,
                                  fitted[std::size_t(v)].grad, config);
            } catch (const FitError& e) {
                out.failed[std::size_t(v)] = true;
                out.failure_reason[std::size_t(v)] = e.what();
            }
        });
        fitted = std::move(second);
    }

    detail::parallel_for(nv, [&](int v) {
        if (out.failed[std::size_t(v)]) return;
        out.diffs[std::size_t(v)] =
            make_vertex_diff(fitted[std::size_t(v)].grad, fitted[std::size_t(v)].hess,
                             frames[std::size_t(v)].rotation);
    });
    return out;
}

} // namespace curvfit
