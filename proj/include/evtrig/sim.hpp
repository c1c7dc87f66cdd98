#pragma once

// Fixed-step sample-and-hold simulation with grid-based event detection.
//
// The plant is integrated with classical RK4 in raw (y, z) coordinates while
// the input is held at the value computed from the last sampled state. After
// every step the trigger predicate is evaluated and, when it holds, the event
// is logged at the grid time and the state is re-sampled.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "evtrig/certificates.hpp"
#include "evtrig/dynamics.hpp"
#include "evtrig/errors.hpp"
#include "evtrig/manifold.hpp"
#include "evtrig/trigger.hpp"

namespace evtrig {

/// Everything a closed-loop run needs besides the trigger rule.
struct ClosedLoop {
    PlantModel model;
    Matrix E;
    PolyManifold h;
    Certificate cert;
};

inline ClosedLoop make_closed_loop(PlantModel model, int manifold_order, const CertificateOptions& opts = {}) {
    model.validate();
    ClosedLoop cl;
    cl.E = solve_coupling(model);
    cl.h = solve_series(model, cl.E, manifold_order);
    cl.cert = certify(model, cl.E, opts);
    cl.model = std::move(model);
    return cl;
}

struct SimConfig {
    double dt = 1e-4;
    double t_final = 25.0;
    StatePoint x0;
    double zeno_guard_min = 0.0;  // 0: use 2 dt
    int record_stride = 1;
    bool record_trajectory = true;
    double validity_radius = std::numeric_limits<double>::infinity();  // on ||(y; w)||

    [[nodiscard]] double zeno_guard() const { return zeno_guard_min > 0.0 ? zeno_guard_min : 2.0 * dt; }

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("dt must be positive");
        if (!(t_final >= dt)) throw ConfigError("t_final must be at least dt");
        if (zeno_guard_min != 0.0 && zeno_guard_min < dt) throw ConfigError("zeno_guard_min must be >= dt");
        if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
        if (!(validity_radius > 0.0)) throw ConfigError("validity_radius must be positive");
    }
};

class EventLog {
public:
    void push(double t) {
        if (!times_.empty() && !(t > times_.back())) throw std::logic_error("event times must increase");
        times_.push_back(t);
    }

    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] std::size_t count() const noexcept { return times_.size(); }

    [[nodiscard]] std::vector<double> inter_event_times() const {
        std::vector<double> d;
        for (std::size_t i = 1; i < times_.size(); ++i) d.push_back(times_[i] - times_[i - 1]);
        return d;
    }

    /// Minimum inter-event time; NaN with fewer than two events.
    [[nodiscard]] double miet() const {
        const auto d = inter_event_times();
        return d.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::min_element(d.begin(), d.end());
    }

    [[nodiscard]] double mean_iet() const {
        const auto d = inter_event_times();
        return d.empty() ? std::numeric_limits<double>::quiet_NaN()
                         : std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    }

private:
    std::vector<double> times_;
};

enum class SimStatus { Completed, ZenoGuard, Overflow, LeftValidityRegion };

inline const char* to_string(SimStatus s) {
    switch (s) {
        case SimStatus::Completed: return "completed";
        case SimStatus::ZenoGuard: return "zeno-guard";
        case SimStatus::Overflow: return "overflow";
        case SimStatus::LeftValidityRegion: return "left-validity-region";
    }
    return "unknown";
}

/// Recorded samples, stored row-major per quantity.
struct Trajectory {
    int k = 0, nz = 0, m = 0;
    std::vector<double> t, y, z, v, w, u, V;
    std::vector<std::uint8_t> event;

    [[nodiscard]] std::size_t size() const noexcept { return t.size(); }

    [[nodiscard]] Vector row(const std::vector<double>& data, int width, std::size_t i) const {
        return Eigen::Map<const Vector>(data.data() + i * static_cast<std::size_t>(width), width);
    }
    [[nodiscard]] Vector y_at(std::size_t i) const { return row(y, k, i); }
    [[nodiscard]] Vector z_at(std::size_t i) const { return row(z, nz, i); }
    [[nodiscard]] Vector v_at(std::size_t i) const { return row(v, nz, i); }
    [[nodiscard]] Vector w_at(std::size_t i) const { return row(w, nz, i); }
    [[nodiscard]] Vector u_at(std::size_t i) const { return row(u, m, i); }
};

struct SimResult {
    Trajectory traj;
    EventLog events;
    SimStatus status = SimStatus::Completed;
    std::string diagnostic;
    double t_end = 0.0;
    std::size_t steps = 0;
};

namespace detail {

inline StatePoint rk4_step(const PlantModel& model, const StatePoint& x, const Vector& u, double dt) {
    auto f = [&](const StatePoint& s) { return eval_dynamics(model, s, u); };
    auto shift = [](const StatePoint& s, const StateDerivative& d, double a) {
        return StatePoint{s.y + a * d.dy, s.z + a * d.dz};
    };
    const StateDerivative k1 = f(x);
    const StateDerivative k2 = f(shift(x, k1, 0.5 * dt));
    const StateDerivative k3 = f(shift(x, k2, 0.5 * dt));
    const StateDerivative k4 = f(shift(x, k3, dt));
    return {x.y + dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
            x.z + dt / 6.0 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz)};
}

inline TriggerView make_view(const ClosedLoop& cl, const StatePoint& x) {
    TriggerView s;
    s.y = x.y;
    s.v = to_v(cl.E, x);
    s.w = s.v - cl.h.eval(x.y(0));
    return s;
}

/// Decides whether to sample at step n; `held` is empty before the first sample.
using SamplePolicy =
    std::function<bool(std::size_t n, const TriggerView& view, const std::optional<TriggerView>& held)>;

inline void record(const ClosedLoop& cl, Trajectory& tr, double t, const StatePoint& x, const TriggerView& view,
                   const Vector& u, bool event) {
    tr.t.push_back(t);
    tr.y.insert(tr.y.end(), x.y.data(), x.y.data() + x.y.size());
    tr.z.insert(tr.z.end(), x.z.data(), x.z.data() + x.z.size());
    tr.v.insert(tr.v.end(), view.v.data(), view.v.data() + view.v.size());
    tr.w.insert(tr.w.end(), view.w.data(), view.w.data() + view.w.size());
    tr.u.insert(tr.u.end(), u.data(), u.data() + u.size());
    tr.V.push_back(v_value(view.y, view.w, cl.cert.P));
    tr.event.push_back(event ? 1 : 0);
}

inline SimResult run_loop(const ClosedLoop& cl, const SimConfig& cfg, bool sample_at_start,
                          const SamplePolicy& policy) {
    cfg.validate();
    const PlantModel& model = cl.model;
    detail::check_dims(model, cfg.x0.y, cfg.x0.z);
    if (!cfg.x0.finite()) throw ConfigError("initial state is not finite");

    SimResult res;
    res.traj.k = model.k;
    res.traj.nz = model.nz;
    res.traj.m = model.m;

    const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_final / cfg.dt));
    const double guard = cfg.zeno_guard();
    StatePoint x = cfg.x0;
    TriggerView view = make_view(cl, x);
    std::optional<TriggerView> held;
    Vector u = Vector::Zero(model.m);

    if (sample_at_start) {
        held = view;
        u = held_control(model, x);
        res.events.push(0.0);
    }
    if (cfg.record_trajectory) record(cl, res.traj, 0.0, x, view, u, sample_at_start);

    for (std::size_t n = 1; n <= n_steps; ++n) {
        const double t = static_cast<double>(n) * cfg.dt;
        try {
            x = rk4_step(model, x, u, cfg.dt);
        } catch (const NumericOverflowError& e) {
            res.status = SimStatus::Overflow;
            res.diagnostic = e.what();
            break;
        }
        res.steps = n;
        res.t_end = t;
        if (!x.finite()) {
            res.status = SimStatus::Overflow;
            res.diagnostic = "non-finite state at t = " + std::to_string(t);
            break;
        }
        view = make_view(cl, x);
        const double r = std::sqrt(view.y.squaredNorm() + view.w.squaredNorm());
        if (r > cfg.validity_radius || (model.in_domain && !model.in_domain(x))) {
            res.status = SimStatus::LeftValidityRegion;
            res.diagnostic = "||(y; w)|| = " + std::to_string(r) + " at t = " + std::to_string(t);
            if (cfg.record_trajectory) record(cl, res.traj, t, x, view, u, false);
            break;
        }

        const bool fire = policy(n, view, held);
        if (fire) {
            if (res.events.count() > 0 && t - res.events.times().back() < guard - 1e-12) {
                res.events.push(t);
                res.status = SimStatus::ZenoGuard;
                res.diagnostic = "events at t = " + std::to_string(res.events.times()[res.events.count() - 2]) +
                                 " and " + std::to_string(t) + " are closer than the guard " + std::to_string(guard);
                if (cfg.record_trajectory) record(cl, res.traj, t, x, view, u, true);
                break;
            }
            res.events.push(t);
            held = view;
            u = held_control(model, x);
        }
        if (cfg.record_trajectory && (fire || n % static_cast<std::size_t>(cfg.record_stride) == 0 || n == n_steps))
            record(cl, res.traj, t, x, view, u, fire);
    }
    return res;
}

}  // namespace detail

/// Event-triggered sample-and-hold run. Under a dead-zone rule with x0 inside
/// S2 the control is zero until the state first leaves S2, which is an event.
inline SimResult simulate_event_triggered(const ClosedLoop& cl, const TriggerRule& rule, const SimConfig& cfg) {
    const TriggerView v0 = detail::make_view(cl, cfg.x0);
    const bool start = !in_dead_zone(rule, v0);
    return detail::run_loop(cl, cfg, start,
                            [&rule](std::size_t, const TriggerView& view, const std::optional<TriggerView>& held) {
                                if (!held) return !in_dead_zone(rule, view);
                                const TriggerError e{held->y - view.y, held->v - view.v};
                                return should_fire(rule, e, view);
                            });
}

/// Periodic sampling every ceil(period / dt) steps.
inline SimResult simulate_time_triggered(const ClosedLoop& cl, double period, const SimConfig& cfg) {
    if (!(period >= cfg.dt)) throw ConfigError("period must be at least dt");
    const auto every = static_cast<std::size_t>(std::ceil(period / cfg.dt - 1e-9));
    const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_final / cfg.dt));
    SimConfig c = cfg;
    c.zeno_guard_min = cfg.dt;
    // an update at the horizon itself would never be applied
    return detail::run_loop(cl, c, true,
                            [every, n_steps](std::size_t n, const TriggerView&, const std::optional<TriggerView>&) {
                                return n % every == 0 && n < n_steps;
                            });
}

// ---------------------------------------------------------------------------
// Batches

/// Points (y, z1) = radius (cos 2 pi j / count, sin 2 pi j / count), other z zero.
inline std::vector<StatePoint> circle_initial_conditions(const PlantModel& model, double radius, int count) {
    if (count < 1) throw ConfigError("initial-condition count must be >= 1");
    std::vector<StatePoint> out;
    for (int j = 0; j < count; ++j) {
        const double a = 2.0 * std::numbers::pi * j / count;
        StatePoint s{Vector::Zero(model.k), Vector::Zero(model.nz)};
        s.y(0) = radius * std::cos(a);
        s.z(0) = radius * std::sin(a);
        out.push_back(std::move(s));
    }
    return out;
}

/// Uniform samples in the ball of the given radius in (y, z).
inline std::vector<StatePoint> random_initial_conditions(const PlantModel& model, double radius, int count,
                                                         std::uint64_t seed) {
    if (count < 1) throw ConfigError("initial-condition count must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = model.k + model.nz;
    std::vector<StatePoint> out;
    for (int j = 0; j < count; ++j) {
        Vector x(n);
        for (int i = 0; i < n; ++i) x(i) = gauss(rng);
        x *= radius * std::pow(unif(rng), 1.0 / n) / x.norm();
        out.push_back({x.head(model.k), x.tail(model.nz)});
    }
    return out;
}

struct BatchResult {
    std::vector<SimResult> runs;
    double miet = std::numeric_limits<double>::quiet_NaN();  // min over runs
    double mean_iet = std::numeric_limits<double>::quiet_NaN();  // pooled over runs
    double mean_before = std::numeric_limits<double>::quiet_NaN();
    double mean_after = std::numeric_limits<double>::quiet_NaN();
    std::size_t events = 0;
    std::size_t completed = 0;
};

/// Runs every initial condition (in parallel when threads > 1) and pools the
/// inter-event times. An interval counts as "before" when the event closing
/// it happens before split_time.
inline BatchResult batch_run(const ClosedLoop& cl, const TriggerRule& rule, const std::vector<StatePoint>& x0s,
                             const SimConfig& cfg, double split_time = std::numeric_limits<double>::infinity(),
                             unsigned threads = 0) {
    if (x0s.empty()) throw ConfigError("batch needs at least one initial condition");
    BatchResult out;
    out.runs.resize(x0s.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(x0s.size()));

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(x0s.size());
    auto worker = [&] {
        for (std::size_t i = next++; i < x0s.size(); i = next++) {
            try {
                SimConfig c = cfg;
                c.x0 = x0s[i];
                out.runs[i] = simulate_event_triggered(cl, rule, c);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    double sum = 0.0, sum_b = 0.0, sum_a = 0.0;
    std::size_t n = 0, n_b = 0, n_a = 0;
    double miet = std::numeric_limits<double>::infinity();
    for (const auto& r : out.runs) {
        out.events += r.events.count();
        if (r.status == SimStatus::Completed) ++out.completed;
        const auto& ts = r.events.times();
        for (std::size_t i = 1; i < ts.size(); ++i) {
            const double d = ts[i] - ts[i - 1];
            miet = std::min(miet, d);
            sum += d;
            ++n;
            if (ts[i] < split_time) {
                sum_b += d;
                ++n_b;
            } else {
                sum_a += d;
                ++n_a;
            }
        }
    }
    if (n > 0) {
        out.miet = miet;
        out.mean_iet = sum / static_cast<double>(n);
    }
    if (n_b > 0) out.mean_before = sum_b / static_cast<double>(n_b);
    if (n_a > 0) out.mean_after = sum_a / static_cast<double>(n_a);
    return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

struct DecayFit {
    double C1 = 0.0;
    double mu = 0.0;
    double r_squared = 0.0;
};

/// Least-squares fit of log ||w|| = log C1 - mu t.
inline DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& wnorm) {
    if (t.size() != wnorm.size()) throw FitError("decay_fit: size mismatch");
    if (t.size() < 3) throw FitError("decay_fit: fewer than three samples in the window");
    const std::size_t n = t.size();
    double st = 0.0, sl = 0.0;
    std::vector<double> l(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(wnorm[i] > 1e-14)) throw FitError("decay_fit: ||w|| vanishes in the window");
        l[i] = std::log(wnorm[i]);
        st += t[i];
        sl += l[i];
    }
    const double mt = st / n, ml = sl / n;
    double stt = 0.0, stl = 0.0, sll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - mt) * (t[i] - mt);
        stl += (t[i] - mt) * (l[i] - ml);
        sll += (l[i] - ml) * (l[i] - ml);
    }
    if (!(stt > 0.0)) throw FitError("decay_fit: degenerate time window");
    const double slope = stl / stt;
    DecayFit f;
    f.mu = -slope;
    f.C1 = std::exp(ml - slope * mt);
    f.r_squared = sll > 0.0 ? (stl * stl) / (stt * sll) : 1.0;
    return f;
}

/// Fit over the recorded samples with t in [t0, t1].
inline DecayFit decay_fit(const SimResult& r, double t0, double t1) {
    std::vector<double> t, wn;
    for (std::size_t i = 0; i < r.traj.size(); ++i) {
        if (r.traj.t[i] < t0 || r.traj.t[i] > t1) continue;
        t.push_back(r.traj.t[i]);
        wn.push_back(r.traj.w_at(i).norm());
    }
    return decay_fit(t, wn);
}

/// Largest raw-state distance between two runs on their common recorded grid.
inline double sup_deviation(const SimResult& a, const SimResult& b) {
    double sup = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < a.traj.size() && j < b.traj.size(); ++i) {
        while (j < b.traj.size() && b.traj.t[j] < a.traj.t[i] - 1e-12) ++j;
        if (j >= b.traj.size() || std::abs(b.traj.t[j] - a.traj.t[i]) > 1e-12) continue;
        const double dy = (a.traj.y_at(i) - b.traj.y_at(j)).squaredNorm();
        const double dz = (a.traj.z_at(i) - b.traj.z_at(j)).squaredNorm();
        sup = std::max(sup, std::sqrt(dy + dz));
    }
    return sup;
}

}  // namespace evtrig
