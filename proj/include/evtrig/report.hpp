#pragma once

// CSV and JSON writers for runs, certificates and manifolds.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <string>

#include "evtrig/certificates.hpp"
#include "evtrig/config.hpp"
#include "evtrig/manifold.hpp"
#include "evtrig/sim.hpp"

namespace evtrig {

namespace report_detail {

/// NaN and inf are not JSON numbers; write them as null.
inline Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline std::ofstream open(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << std::setprecision(17);
    return out;
}

}  // namespace report_detail

inline void write_json(const std::filesystem::path& path, const Json& j) {
    auto out = report_detail::open(path);
    out << j.dump(2) << '\n';
}

/// Columns t, y.., z.., v.., w.., u.., V, event_flag.
inline void write_trajectory_csv(const std::filesystem::path& path, const SimResult& r) {
    auto out = report_detail::open(path);
    const Trajectory& tr = r.traj;
    out << 't';
    auto header = [&](const char* name, int n) {
        for (int i = 1; i <= n; ++i) out << ',' << name << i;
    };
    header("y", tr.k);
    header("z", tr.nz);
    header("v", tr.nz);
    header("w", tr.nz);
    header("u", tr.m);
    out << ",V,event_flag\n";
    auto row = [&](const std::vector<double>& data, int width, std::size_t i) {
        for (int j = 0; j < width; ++j) out << ',' << data[i * static_cast<std::size_t>(width) + j];
    };
    for (std::size_t i = 0; i < tr.size(); ++i) {
        out << tr.t[i];
        row(tr.y, tr.k, i);
        row(tr.z, tr.nz, i);
        row(tr.v, tr.nz, i);
        row(tr.w, tr.nz, i);
        row(tr.u, tr.m, i);
        out << ',' << tr.V[i] << ',' << static_cast<int>(tr.event[i]) << '\n';
    }
}

/// Columns index, time, iet (empty for the first event).
inline void write_events_csv(const std::filesystem::path& path, const EventLog& log) {
    auto out = report_detail::open(path);
    out << "index,time,iet\n";
    const auto& ts = log.times();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out << i << ',' << ts[i] << ',';
        if (i > 0) out << ts[i] - ts[i - 1];
        out << '\n';
    }
}

inline Json certificate_json(const Certificate& c) {
    return {{"P", config_detail::to_json(c.P)},
            {"Q", config_detail::to_json(c.Q)},
            {"s_f", c.s_f},
            {"s_y", c.s_y},
            {"variant", to_string(c.variant)},
            {"sigma_max", report_detail::num(c.sigma_max)},
            {"unbounded", c.unbounded},
            {"notice", c.notice},
            {"lambda_min_P", c.lambda_min_P},
            {"lambda_max_P", c.lambda_max_P}};
}

inline Json manifold_json(const PolyManifold& h, const Matrix& E, const Matrix& residual) {
    Json comps = Json::array();
    const auto all = h.terms(1e-14);
    for (std::size_t i = 0; i < h.dimension(); ++i) {
        Json terms = Json::array();
        for (const auto& [d, c] : all[i]) terms.push_back({{"degree", d}, {"coefficient", c}});
        comps.push_back({{"component", "v" + std::to_string(i + 1)}, {"polynomial", h.to_string(i)}, {"terms", terms}});
    }
    return {{"order", h.order()},
            {"exact", h.exact()},
            {"E", config_detail::to_json(E)},
            {"components", comps},
            {"residual_max_abs", residual.size() ? residual.cwiseAbs().maxCoeff() : 0.0},
            {"residual", config_detail::to_json(residual)}};
}

inline Json constants_json(const AnalyticConstants& c) {
    auto n = report_detail::num;
    return {{"label", c.label}, {"delta", c.delta}, {"k1", n(c.k1)}, {"k2", n(c.k2)}, {"k5", n(c.k5)},
            {"k6", n(c.k6)}, {"k8", n(c.k8)}, {"p", c.p}, {"L1", n(c.L1)}, {"flow_bound", n(c.flow)},
            {"a", {n(c.a1), n(c.a2), n(c.a3), n(c.a4)}}, {"b", {n(c.b1), n(c.b2), n(c.b3), n(c.b4)}},
            {"tau1", n(c.tau1.value)}, {"tau1_fallback", c.tau1.fallback}, {"tau2", n(c.tau2.value)},
            {"tau2_fallback", c.tau2.fallback}, {"r1", n(c.r1)}, {"sigma_l", n(c.sigma_l)}, {"tau3", n(c.tau3)}};
}

inline Json summary_json(const SimResult& r, double sigma, const Certificate& cert, const SimConfig& cfg) {
    auto n = report_detail::num;
    return {{"status", to_string(r.status)},
            {"diagnostic", r.diagnostic},
            {"event_count", r.events.count()},
            {"miet", n(r.events.miet())},
            {"mean_iet", n(r.events.mean_iet())},
            {"t_end", r.t_end},
            {"sigma", sigma},
            {"dt", cfg.dt},
            {"t_final", cfg.t_final},
            {"certificate", certificate_json(cert)}};
}

inline Json batch_json(const BatchResult& b, const std::vector<StatePoint>& x0s) {
    auto n = report_detail::num;
    Json runs = Json::array();
    for (std::size_t i = 0; i < b.runs.size(); ++i) {
        const auto& r = b.runs[i];
        runs.push_back({{"index", i},
                        {"x0", {{"y", config_detail::to_json(x0s[i].y)}, {"z", config_detail::to_json(x0s[i].z)}}},
                        {"status", to_string(r.status)},
                        {"diagnostic", r.diagnostic},
                        {"event_count", r.events.count()},
                        {"miet", n(r.events.miet())},
                        {"mean_iet", n(r.events.mean_iet())}});
    }
    return {{"miet", n(b.miet)}, {"mean_iet", n(b.mean_iet)}, {"mean_iet_before_split", n(b.mean_before)},
            {"mean_iet_after_split", n(b.mean_after)}, {"event_count", b.events}, {"completed", b.completed},
            {"runs", runs}};
}

}  // namespace evtrig
