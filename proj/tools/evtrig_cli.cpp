// Command-line front end: manifold | certify | simulate | batch | compare.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "evtrig/evtrig.hpp"

namespace fs = std::filesystem;
using namespace evtrig;

namespace {

enum Exit : int {
    kOk = 0,
    kFailure = 1,
    kConfig = 2,
    kZeno = 3,
    kOverflow = 4,
    kLeftRegion = 5,
    kCertificate = 6,
    kUnsupported = 7,
};

int exit_code(SimStatus s) {
    switch (s) {
        case SimStatus::Completed: return kOk;
        case SimStatus::ZenoGuard: return kZeno;
        case SimStatus::Overflow: return kOverflow;
        case SimStatus::LeftValidityRegion: return kLeftRegion;
    }
    return kFailure;
}

struct Options {
    std::string preset;
    std::string config;
    std::string out = "out";
    std::optional<int> order;
    std::optional<double> sigma, dt, t_final;
    std::optional<std::uint64_t> seed;
    double radius = 0.1;
};

void add_common(CLI::App* cmd, Options& o) {
    auto* preset = cmd->add_option("--preset", o.preset, "Preset experiment: example1 | example2 | mip");
    auto* config = cmd->add_option("--config", o.config, "JSON config file (e.g. a manifest.json from a previous run)");
    preset->excludes(config);
    cmd->add_option("--order", o.order, "Center-manifold approximation order (>= 2)");
    cmd->add_option("--sigma", o.sigma, "Trigger threshold parameter");
    cmd->add_option("--dt", o.dt, "Integration step [s]");
    cmd->add_option("--t-final", o.t_final, "Horizon [s]");
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Seed for random initial conditions");
}

RunConfig load(const Options& o) {
    if (o.preset.empty() == o.config.empty()) throw ConfigError("give exactly one of --preset or --config");
    Json tree = o.preset.empty() ? load_json_file(o.config) : preset_config(o.preset);
    Overrides ov{o.order, o.sigma, o.dt, o.t_final, o.seed};
    return parse_config(apply_overrides(std::move(tree), ov));
}

void warn_sigma(const RunConfig& rc, const Certificate& cert) {
    if (rc.trigger.sigma > cert.sigma_max)
        std::cerr << "warning: sigma = " << rc.trigger.sigma << " exceeds the certified bound " << cert.sigma_max
                  << "\n";
    if (cert.unbounded) std::cerr << "notice: " << cert.notice << "\n";
}

int cmd_manifold(const Options& o) {
    const RunConfig rc = load(o);
    rc.model.validate();
    const Matrix E = solve_coupling(rc.model);
    const PolyManifold h = solve_series(rc.model, E, rc.order);
    const Matrix res = pde_residual(rc.model, E, h, rc.order);
    const ReducedDynamics rd = reduced_dynamics(rc.model, E, h);

    std::cout << "model " << rc.model.name << ", order " << h.order() << (h.exact() ? " (exact)" : "") << "\n";
    std::cout << "E = [" << E.transpose() << "]^T\n\n";
    std::cout << std::left << std::setw(12) << "component" << std::setw(8) << "degree" << "coefficient\n";
    std::cout << std::setprecision(12);
    const auto terms = h.terms(1e-14);
    for (std::size_t i = 0; i < h.dimension(); ++i)
        for (const auto& [d, c] : terms[i])
            std::cout << std::setw(12) << ("v" + std::to_string(i + 1)) << std::setw(8) << d << c << "\n";
    std::cout << "\n";
    for (std::size_t i = 0; i < h.dimension(); ++i) std::cout << "v" << i + 1 << " = " << h.to_string(i) << "\n";
    std::cout << "\nmax |residual coefficient| through degree " << rc.order << ": " << res.cwiseAbs().maxCoeff()
              << "\n";
    std::cout << "reduced dynamics leading term: " << rd.leading_coefficient() << " y^" << rd.leading_degree()
              << (rd.locally_stable() ? " (locally asymptotically stable)" : "") << "\n";

    Json j = manifold_json(h, E, res);
    j["model"] = rc.model.name;
    j["reduced_dynamics"] = rd.coeffs;
    write_json(fs::path(o.out) / "manifold.json", j);
    write_json(fs::path(o.out) / "manifest.json", rc.tree);
    return kOk;
}

int cmd_certify(const Options& o) {
    const RunConfig rc = load(o);
    const ClosedLoop cl = make_closed_loop(rc.model, rc.order, rc.cert);
    const double r_s = rc.trigger.r_s > 0.0 ? rc.trigger.r_s : 0.1 * o.radius;
    const AnalyticConstants c =
        estimate_constants(cl.model, cl.E, cl.h, cl.cert, rc.trigger.sigma, o.radius, r_s, 4000, rc.seed);
    Json j{{"model", cl.model.name},
           {"certificate", certificate_json(cl.cert)},
           {"sigma", rc.trigger.sigma},
           {"sigma_admissible", rc.trigger.sigma <= cl.cert.sigma_max},
           {"estimates", constants_json(c)}};
    std::cout << j.dump(2) << "\n";
    warn_sigma(rc, cl.cert);
    write_json(fs::path(o.out) / "certificate.json", j);
    write_json(fs::path(o.out) / "manifest.json", rc.tree);
    return kOk;
}

int cmd_simulate(const Options& o) {
    const RunConfig rc = load(o);
    const ClosedLoop cl = make_closed_loop(rc.model, rc.order, rc.cert);
    warn_sigma(rc, cl.cert);
    const TriggerRule rule = make_rule(rc.trigger, cl.cert);
    const SimResult r = simulate_event_triggered(cl, rule, rc.sim);
    const fs::path out(o.out);
    write_trajectory_csv(out / "trajectory.csv", r);
    write_events_csv(out / "events.csv", r.events);
    const Json summary = summary_json(r, rc.trigger.sigma, cl.cert, rc.sim);
    write_json(out / "summary.json", summary);
    write_json(out / "manifest.json", rc.tree);
    std::cout << summary.dump(2) << "\n";
    if (r.status != SimStatus::Completed) std::cerr << to_string(r.status) << ": " << r.diagnostic << "\n";
    return exit_code(r.status);
}

int cmd_batch(const Options& o) {
    const RunConfig rc = load(o);
    const ClosedLoop cl = make_closed_loop(rc.model, rc.order, rc.cert);
    warn_sigma(rc, cl.cert);
    const TriggerRule rule = make_rule(rc.trigger, cl.cert);
    const auto x0s = batch_initial_conditions(rc);
    SimConfig cfg = rc.sim;
    cfg.record_trajectory = false;
    const BatchResult b = batch_run(cl, rule, x0s, cfg, rc.batch.split_time);
    const fs::path out(o.out);
    for (std::size_t i = 0; i < b.runs.size(); ++i)
        write_events_csv(out / ("events_" + std::to_string(i) + ".csv"), b.runs[i].events);
    Json j = batch_json(b, x0s);
    j["split_time"] = report_detail::num(rc.batch.split_time);
    j["sigma"] = rc.trigger.sigma;
    j["dt"] = rc.sim.dt;
    j["t_final"] = rc.sim.t_final;
    j["certificate"] = certificate_json(cl.cert);
    write_json(out / "summary.json", j);
    write_json(out / "manifest.json", rc.tree);
    Json brief = j;
    brief.erase("runs");
    std::cout << brief.dump(2) << "\n";
    for (const auto& r : b.runs)
        if (r.status != SimStatus::Completed) return exit_code(r.status);
    return kOk;
}

int cmd_compare(const Options& o) {
    const RunConfig rc = load(o);
    const ClosedLoop cl = make_closed_loop(rc.model, rc.order, rc.cert);
    warn_sigma(rc, cl.cert);
    const TriggerRule rule = make_rule(rc.trigger, cl.cert);
    const SimResult et = simulate_event_triggered(cl, rule, rc.sim);
    double period = rc.compare_period;
    if (!(period > 0.0)) period = std::isfinite(et.events.miet()) ? et.events.miet() : rc.sim.t_final;
    const SimResult tt = simulate_time_triggered(cl, period, rc.sim);
    const double x0n = std::sqrt(rc.sim.x0.y.squaredNorm() + rc.sim.x0.z.squaredNorm());
    const double dev = sup_deviation(et, tt);
    auto n = report_detail::num;
    Json j{{"model", cl.model.name},
           {"period", period},
           {"event_triggered", {{"status", to_string(et.status)}, {"updates", et.events.count()},
                                {"miet", n(et.events.miet())}, {"mean_iet", n(et.events.mean_iet())}}},
           {"time_triggered", {{"status", to_string(tt.status)}, {"updates", tt.events.count()}}},
           {"update_ratio", n(static_cast<double>(tt.events.count()) / static_cast<double>(et.events.count()))},
           {"sup_deviation", dev},
           {"sup_deviation_relative", n(x0n > 0.0 ? dev / x0n : std::nan(""))}};
    const fs::path out(o.out);
    write_json(out / "compare.json", j);
    write_json(out / "manifest.json", rc.tree);
    write_trajectory_csv(out / "trajectory_event.csv", et);
    write_trajectory_csv(out / "trajectory_time.csv", tt);
    std::cout << j.dump(2) << "\n";
    if (et.status != SimStatus::Completed) return exit_code(et.status);
    return exit_code(tt.status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-triggered stabilization with center manifolds"};
    app.require_subcommand(1);
    Options o;
    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const Sub subs[] = {
        {"manifold", "Coupling matrix E and polynomial center-manifold approximation", cmd_manifold},
        {"certify", "Lyapunov certificate, sigma bound and inter-event estimates", cmd_certify},
        {"simulate", "Single event-triggered run with CSV/JSON output", cmd_simulate},
        {"batch", "Event-triggered runs over a set of initial conditions", cmd_batch},
        {"compare", "Event-triggered vs time-triggered at the measured MIET", cmd_compare},
    };
    int (*chosen)(const Options&) = nullptr;
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, o);
        if (std::string(s.name) == "certify")
            cmd->add_option("--radius", o.radius, "Sampling radius for the analytic constants")->capture_default_str();
        cmd->callback([&chosen, run = s.run] { chosen = run; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }
    try {
        return chosen(o);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const CertificateError& e) {
        std::cerr << "certificate error: " << e.what() << "\n";
        return kCertificate;
    } catch (const UnsupportedModelError& e) {
        std::cerr << "unsupported model: " << e.what() << "\n";
        return kUnsupported;
    } catch (const NumericOverflowError& e) {
        std::cerr << "numeric overflow: " << e.what() << "\n";
        return kOverflow;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
