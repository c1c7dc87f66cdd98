#include "catch_amalgamated.hpp"

#include <cmath>
#include <stdexcept>

#include "evtrig/models.hpp"
#include "evtrig/sim.hpp"

using namespace evtrig;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ClosedLoop example1_loop() {
    CertificateOptions o;
    o.Q = Matrix::Constant(1, 1, 2.0);
    o.s_f = 0.75;
    return make_closed_loop(models::example1(), 2, o);
}

SimConfig config(double y0, double z0, double t_final, double dt = 1e-3) {
    SimConfig c;
    c.dt = dt;
    c.t_final = t_final;
    c.x0 = {Vector::Constant(1, y0), Vector::Constant(1, z0)};
    return c;
}

const TriggerRule kRule{ManifoldWeighted{0.0625}};

}  // namespace

TEST_CASE("event log", "[sim]") {
    EventLog log;
    CHECK(std::isnan(log.miet()));
    log.push(0.0);
    CHECK(std::isnan(log.mean_iet()));
    log.push(0.5);
    log.push(0.7);
    CHECK_THAT(log.miet(), WithinAbs(0.2, 1e-15));
    CHECK_THAT(log.mean_iet(), WithinAbs(0.35, 1e-15));
    CHECK_THROWS_AS(log.push(0.7), std::logic_error);
}

TEST_CASE("origin is an equilibrium with a single start event", "[sim]") {
    const ClosedLoop cl = example1_loop();
    const SimResult r = simulate_event_triggered(cl, kRule, config(0.0, 0.0, 1.0));
    CHECK(r.status == SimStatus::Completed);
    CHECK(r.events.count() == 1);
    CHECK(r.events.times()[0] == 0.0);
    for (std::size_t i = 0; i < r.traj.size(); ++i) {
        CHECK(r.traj.y[i] == 0.0);
        CHECK(r.traj.z[i] == 0.0);
    }
}

TEST_CASE("horizon edge cases", "[sim]") {
    const ClosedLoop cl = example1_loop();
    SECTION("time-triggered with period equal to the horizon updates once") {
        const SimResult r = simulate_time_triggered(cl, 1.0, config(0.1, 0.0, 1.0));
        CHECK(r.events.count() == 1);
        CHECK(r.status == SimStatus::Completed);
    }
    SECTION("one step") {
        const SimResult r = simulate_event_triggered(cl, kRule, config(0.1, 0.0, 1e-3));
        CHECK(r.steps == 1);
        CHECK(r.traj.size() == 2);
        CHECK_THAT(r.t_end, WithinAbs(1e-3, 1e-15));
    }
    SECTION("invalid settings") {
        SimConfig c = config(0.1, 0.0, 1.0);
        c.dt = 0.0;
        CHECK_THROWS_AS(simulate_event_triggered(cl, kRule, c), ConfigError);
        c = config(0.1, 0.0, 1e-4);
        CHECK_THROWS_AS(simulate_event_triggered(cl, kRule, c), ConfigError);
        c = config(0.1, 0.0, 1.0);
        c.x0.z = Vector::Zero(2);
        CHECK_THROWS_AS(simulate_event_triggered(cl, kRule, c), ConfigError);
        c = config(0.1, 0.0, 1.0);
        CHECK_THROWS_AS(simulate_time_triggered(cl, 1e-4, c), ConfigError);
    }
}

TEST_CASE("runs are deterministic", "[sim]") {
    const ClosedLoop cl = example1_loop();
    const SimConfig c = config(0.1, 0.05, 3.0);
    const SimResult a = simulate_event_triggered(cl, kRule, c);
    const SimResult b = simulate_event_triggered(cl, kRule, c);
    CHECK(a.events.times() == b.events.times());
    CHECK(a.traj.y == b.traj.y);
    CHECK(a.traj.z == b.traj.z);
    CHECK(sup_deviation(a, b) == 0.0);
}

TEST_CASE("control is held between events and the rule is respected", "[sim]") {
    const ClosedLoop cl = example1_loop();
    const SimResult r = simulate_event_triggered(cl, kRule, config(0.1, 0.0, 5.0));
    REQUIRE(r.status == SimStatus::Completed);
    REQUIRE(r.events.count() > 10);
    std::optional<TriggerView> held;
    Vector u_held;
    std::size_t events_seen = 0;
    for (std::size_t i = 0; i < r.traj.size(); ++i) {
        const StatePoint x{r.traj.y_at(i), r.traj.z_at(i)};
        const TriggerView view{x.y, r.traj.v_at(i), r.traj.w_at(i)};
        if (r.traj.event[i]) {
            if (held) {
                const TriggerError e{held->y - view.y, held->v - view.v};
                CHECK(should_fire(kRule, e, view));
            }
            ++events_seen;
            held = view;
            u_held = held_control(cl.model, x);
            CHECK((r.traj.u_at(i) - u_held).norm() == 0.0);
        } else {
            REQUIRE(held);
            CHECK((r.traj.u_at(i) - u_held).norm() == 0.0);
            const TriggerError e{held->y - view.y, held->v - view.v};
            CHECK_FALSE(should_fire(kRule, e, view));
        }
    }
    CHECK(events_seen == r.events.count());
}

TEST_CASE("event statistics converge under step refinement", "[sim]") {
    const ClosedLoop cl = example1_loop();
    SimConfig coarse = config(0.1, 0.0, 5.0, 2e-4);
    SimConfig fine = config(0.1, 0.0, 5.0, 1e-4);
    coarse.record_trajectory = fine.record_trajectory = false;
    const SimResult a = simulate_event_triggered(cl, kRule, coarse);
    const SimResult b = simulate_event_triggered(cl, kRule, fine);
    const double na = static_cast<double>(a.events.count()), nb = static_cast<double>(b.events.count());
    CHECK(std::abs(na - nb) / nb < 0.1);
    CHECK(std::abs(a.events.mean_iet() - b.events.mean_iet()) / b.events.mean_iet() < 0.1);
}

TEST_CASE("abnormal terminations", "[sim]") {
    SECTION("zeno guard") {
        const ClosedLoop cl = example1_loop();
        const SimResult r = simulate_event_triggered(cl, {RelativeFull{1e-9}}, config(0.1, 0.0, 1.0));
        CHECK(r.status == SimStatus::ZenoGuard);
        CHECK_FALSE(r.diagnostic.empty());
        CHECK(r.t_end < 0.01);
    }
    SECTION("overflow") {
        // y' = y^2 blows up at t = 0.1 from y = 10
        PolynomialField f;
        f.rows = {{{1.0, {2, 0, 0}}}, {}};
        const PlantModel m = make_polynomial_model("blowup", Matrix::Zero(1, 1), Matrix::Constant(1, 1, -1.0),
                                                   Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1),
                                                   Matrix::Zero(1, 1), std::move(f), 2.0);
        const ClosedLoop cl = make_closed_loop(m, 2);
        // a single update keeps the event rule out of the way
        const SimResult r = simulate_time_triggered(cl, 1.0, config(10.0, 0.0, 1.0));
        CHECK(r.status == SimStatus::Overflow);
        CHECK(r.t_end < 0.2);
    }
    SECTION("validity region") {
        const ClosedLoop cl = example1_loop();
        SimConfig c = config(0.1, 0.0, 1.0);
        c.validity_radius = 0.05;
        const SimResult r = simulate_event_triggered(cl, kRule, c);
        CHECK(r.status == SimStatus::LeftValidityRegion);
        CHECK(r.steps == 1);
    }
}

TEST_CASE("dead-zone run starts without control", "[sim]") {
    const ClosedLoop cl = make_closed_loop(models::example2(), 2);
    const TriggerRule rule = make_dead_zone({ManifoldWeighted{0.03}}, 0.05);
    SimConfig c;
    c.dt = 1e-3;
    c.t_final = 20.0;
    c.x0 = {Vector::Constant(1, 0.01), Vector::Zero(2)};
    const SimResult r = simulate_event_triggered(cl, rule, c);
    REQUIRE(r.events.count() > 0);
    const double first = r.events.times()[0];
    CHECK(first > 0.0);
    for (std::size_t i = 0; i < r.traj.size() && r.traj.t[i] < first; ++i) CHECK(r.traj.u_at(i).norm() == 0.0);
    // the first event is the exit from the dead zone
    for (std::size_t i = 0; i < r.traj.size(); ++i)
        if (r.traj.t[i] == first) {
            const double n = std::hypot(r.traj.y[i], r.traj.w_at(i).norm());
            CHECK(n >= 0.05);
        }
}

TEST_CASE("batches", "[sim]") {
    const ClosedLoop cl = example1_loop();
    SimConfig c = config(0.0, 0.0, 2.0);
    c.record_trajectory = false;
    const auto x0s = circle_initial_conditions(cl.model, 0.1, 4);

    const BatchResult one = batch_run(cl, kRule, {x0s[1]}, c);
    SimConfig single = c;
    single.x0 = x0s[1];
    CHECK(one.runs[0].events.times() == simulate_event_triggered(cl, kRule, single).events.times());
    CHECK_THAT(one.miet, WithinAbs(one.runs[0].events.miet(), 0.0));

    const BatchResult serial = batch_run(cl, kRule, x0s, c, 1.0, 1);
    const BatchResult parallel = batch_run(cl, kRule, x0s, c, 1.0, 3);
    double miet = std::numeric_limits<double>::infinity();
    std::size_t events = 0;
    for (std::size_t i = 0; i < x0s.size(); ++i) {
        CHECK(serial.runs[i].events.times() == parallel.runs[i].events.times());
        miet = std::min(miet, serial.runs[i].events.miet());
        events += serial.runs[i].events.count();
    }
    CHECK(serial.miet == miet);
    CHECK(serial.events == events);
    CHECK(serial.completed == 4);
    CHECK(serial.mean_before >= serial.miet);
    CHECK(serial.mean_after >= serial.miet);
    CHECK(std::isnan(batch_run(cl, kRule, x0s, c).mean_after));  // no split: everything is "before"
    CHECK_THROWS_AS(batch_run(cl, kRule, {}, c), ConfigError);
}

TEST_CASE("initial-condition generators", "[sim]") {
    const PlantModel m = models::example2();
    for (const auto& s : circle_initial_conditions(m, 0.3, 7)) {
        CHECK_THAT(std::hypot(s.y(0), s.z(0)), WithinAbs(0.3, 1e-15));
        CHECK(s.z(1) == 0.0);
    }
    const auto a = random_initial_conditions(m, 0.05, 50, 9);
    const auto b = random_initial_conditions(m, 0.05, 50, 9);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::sqrt(a[i].y.squaredNorm() + a[i].z.squaredNorm()) <= 0.05 + 1e-15);
        CHECK(a[i].z == b[i].z);
    }
    CHECK_THROWS_AS(circle_initial_conditions(m, 0.1, 0), ConfigError);
}

TEST_CASE("exponential decay fit", "[sim]") {
    std::vector<double> t, w;
    for (int i = 0; i <= 50; ++i) {
        t.push_back(0.1 * i);
        w.push_back(2.0 * std::exp(-3.0 * t.back()));
    }
    const DecayFit f = decay_fit(t, w);
    CHECK_THAT(f.C1, WithinRel(2.0, 1e-10));
    CHECK_THAT(f.mu, WithinRel(3.0, 1e-10));
    CHECK_THAT(f.r_squared, WithinAbs(1.0, 1e-12));

    CHECK_THROWS_AS(decay_fit({0.0, 1.0}, {1.0, 0.5}), FitError);
    CHECK_THROWS_AS(decay_fit({0.0, 1.0, 2.0}, {1.0, 0.0, 0.5}), FitError);
    CHECK_THROWS_AS(decay_fit({1.0, 1.0, 1.0}, {1.0, 0.7, 0.5}), FitError);
    CHECK_THROWS_AS(decay_fit({0.0, 1.0}, {1.0}), FitError);
}
