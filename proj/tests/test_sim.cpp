#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nlbode/sim.hpp"

using namespace nlbode;
using sim::ReferenceSignal;
using srg::InputSpace;

namespace {

double sens_mag(double w) {
    const auto g = sim::MotorParams{}.plant();
    return std::abs(1.0 / (1.0 + g.freq(w) * sim::default_controller().freq(w)));
}

sim::ClosedLoopModel motor(ReferenceSignal ref, double delta = 0.1) {
    sim::MotorParams p;
    p.delta = delta;
    return sim::ClosedLoopModel::dc_motor(p, sim::default_controller(), std::move(ref));
}

sim::SimRun synthetic(double t_end, double dt, const std::function<double(double)>& f) {
    sim::SimRun run;
    run.dt = dt;
    for (double t = 0.0; t <= t_end + 1e-12; t += dt) {
        run.t.push_back(t);
        run.e.push_back(f(t));
    }
    return run;
}

}  // namespace

TEST_CASE("motor parameters") {
    const auto g = sim::MotorParams{}.plant();
    const auto pc = lti::classify_poles(g);
    CHECK(pc.integrator_count == 1);
    sim::MotorParams bad;
    bad.J = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.delta = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("reference signals") {
    const auto step = ReferenceSignal::step(1.0, 2.0);
    CHECK(step(0.5) == 0.0);
    CHECK(step(1.5) == 2.0);
    CHECK_FALSE(step.period_hint().has_value());

    const auto ramp = ReferenceSignal::ramp(0.5);
    CHECK(ramp(4.0) == doctest::Approx(2.0));
    CHECK(*ramp.period_hint() == doctest::Approx(4.0 * std::numbers::pi));

    const auto sw = ReferenceSignal::switched_sine(5.0, 1.0, 10.0, 50.0);
    CHECK(sw(1.0) == doctest::Approx(5.0 * std::sin(1.0)));
    CHECK(sw(60.0) == doctest::Approx(5.0 * std::sin(600.0)));
    CHECK(*sw.period_hint() == doctest::Approx(2.0 * std::numbers::pi / 10.0));
    CHECK(sw.rms() == doctest::Approx(5.0 / std::sqrt(2.0)));

    const auto f = ReferenceSignal::fourier(2.0, {{0.0, -0.5}, {0.25, 0.0}});
    // 2 Re(c1 e^{j 2 t} + c2 e^{j 4 t}) = sin(2 t) + 0.5 cos(4 t)
    for (double t : {0.0, 0.3, 1.7}) {
        CHECK(f(t) == doctest::Approx(std::sin(2.0 * t) + 0.5 * std::cos(4.0 * t)));
    }
    CHECK(f.rms() == doctest::Approx(std::sqrt(0.5 + 0.125)));
    CHECK(*f.period_hint() == doctest::Approx(std::numbers::pi));
}

TEST_CASE("linear loop tracks a sinusoid with the sensitivity gain") {
    for (double w : {0.5, 1.0, 4.0}) {
        const auto m = motor(ReferenceSignal::switched_sine(1.0, w, w, 0.0), 0.0);
        const double T = 2.0 * std::numbers::pi / w;
        const auto run = sim::integrate(m, std::max(40.0, 25.0 * T), 1e-3);
        CHECK(run.amplitude_tail == doctest::Approx(sens_mag(w)).epsilon(0.01));
        CHECK(sim::rms_gain(run, 1.0 / std::sqrt(2.0)) == doctest::Approx(sens_mag(w)).epsilon(0.005));
    }
}

TEST_CASE("step response settles to a small bias") {
    const auto run = sim::integrate(motor(ReferenceSignal::step(1.0, 1.0)), 40.0, 1e-3);
    CHECK(std::abs(run.mean_tail) == doctest::Approx(0.0167).epsilon(0.03));
    CHECK(run.t.size() == run.e.size());
    CHECK(run.e.front() == 0.0);
}

TEST_CASE("ramp response is periodic in theta") {
    const auto run = sim::integrate(motor(ReferenceSignal::ramp(1.0)), 200.0, 1e-3);
    CHECK(sim::period_check(run, 2.0 * std::numbers::pi));
    REQUIRE(run.period_detected.has_value());
    CHECK(*run.period_detected == doctest::Approx(2.0 * std::numbers::pi));
}

TEST_CASE("halving the step changes the steady state by under 0.1%") {
    const auto ref = ReferenceSignal::switched_sine(5.0, 1.0, 10.0, 50.0);
    const auto a = sim::integrate(motor(ref), 100.0, 1e-3);
    const auto b = sim::integrate(motor(ref), 100.0, 5e-4);
    CHECK(std::abs(a.rms_tail - b.rms_tail) / b.rms_tail < 1e-3);
}

TEST_CASE("period check separates periodic signals from noise") {
    const double T = 2.0;
    CHECK(sim::period_check(synthetic(50.0, 1e-3, [&](double t) { return std::sin(2 * std::numbers::pi * t / T) + 0.3; }), T));
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    CHECK_FALSE(sim::period_check(synthetic(50.0, 1e-3, [&](double) { return n(rng); }), T));
    CHECK_FALSE(sim::period_check(synthetic(50.0, 1e-3, [&](double t) { return std::sin(std::sqrt(2.0) * t); }), T));
    // Too short to hold 20 periods.
    CHECK_THROWS_AS(sim::period_check(synthetic(10.0, 1e-3, [&](double t) { return std::sin(std::numbers::pi * t); }), T), std::invalid_argument);
}

TEST_CASE("window statistics") {
    const auto run = synthetic(20.0, 1e-3, [](double t) { return 2.0 * std::sin(std::numbers::pi * t); });
    const auto ws = sim::window_stats(run, run.e, 10.0, 20.0, 2.0, 5);
    CHECK(ws.rms == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
    CHECK(ws.amplitude == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(std::abs(ws.mean) < 1e-3);
    CHECK(ws.t_end - ws.t_begin == doctest::Approx(10.0).epsilon(1e-3));
}

TEST_CASE("step guard and divergence") {
    const auto m = motor(ReferenceSignal::step(0.0, 1.0));
    CHECK_THROWS_AS(sim::integrate(m, 1.0, 10.0 * m.max_step()), std::invalid_argument);

    const auto unstable = sim::ClosedLoopModel::from_loop(lti::TransferFunction({1.0}, {1.0, -1.0}),
                                                          lti::TransferFunction::gain(0.5), 0.0,
                                                          ReferenceSignal::step(0.0, 1.0));
    CHECK_THROWS_AS(sim::integrate(unstable, 2000.0, 1e-2), sim::SimError);
}

TEST_CASE("random inputs respect the input space") {
    const auto s = sim::random_input(InputSpace::sinusoidal(2.0), 1);
    CHECK(s.w_base == doctest::Approx(2.0));
    CHECK(s.coeffs.size() == 1);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto h = sim::random_input(InputSpace::harmonic(3.0), seed);
        CHECK(h.w_base == doctest::Approx(3.0));
        CHECK(h.coeffs.size() <= 8);
        const auto sub = sim::random_input(InputSpace::subharmonic(2.0), seed);
        CHECK(sub.w_base == doctest::Approx(0.25));
        for (std::size_t k = 1; k <= sub.coeffs.size(); ++k) {
            if (k != 1 && k != 2 && k != 4 && k != 8) {
                CHECK(sub.coeffs[k - 1] == std::complex<double>(0.0, 0.0));
            }
        }
        for (const auto& c : h.coeffs) {
            const double a = 2.0 * std::abs(c);
            CHECK((a == 0.0 || (a >= 1e-2 - 1e-12 && a <= 10.0 + 1e-12)));
        }
    }
    CHECK(sim::random_input(InputSpace::harmonic(3.0), 5).coeffs ==
          sim::random_input(InputSpace::harmonic(3.0), 5).coeffs);
}

TEST_CASE("probe on a linear loop recovers the sensitivity gain") {
    const auto m = motor(ReferenceSignal::step(0.0, 0.0), 0.0);
    const auto s = sim::incremental_gain_probe(m, InputSpace::sinusoidal(1.0), 4, 7);
    CHECK(s.ratios.size() == 4);
    for (double r : s.ratios) {
        CHECK(r == doctest::Approx(sens_mag(1.0)).epsilon(0.01));
    }

    const auto h = sim::incremental_gain_probe(m, InputSpace::harmonic(3.0), 6, 7);
    double peak = 0.0;
    for (int k = 1; k <= 8; ++k) {
        peak = std::max(peak, sens_mag(3.0 * k));
    }
    CHECK(h.max_ratio <= peak * 1.02);
    CHECK(h.max_ratio >= sens_mag(3.0) * 0.98);
}

TEST_CASE("probe is deterministic and independent of threading") {
    const auto m = motor(ReferenceSignal::step(0.0, 0.0));
    sim::ProbeOptions one;
    one.threads = 1;
    sim::ProbeOptions many;
    many.threads = 4;
    const auto a = sim::incremental_gain_probe(m, InputSpace::subharmonic(2.0), 6, 123, one);
    const auto b = sim::incremental_gain_probe(m, InputSpace::subharmonic(2.0), 6, 123, many);
    CHECK(a.ratios == b.ratios);
    CHECK(a.max_ratio == b.max_ratio);
    const auto c = sim::incremental_gain_probe(m, InputSpace::subharmonic(2.0), 6, 124, many);
    CHECK(c.ratios != a.ratios);
}

TEST_CASE("probe pass rule") {
    sim::ProbeResult r{InputSpace::sinusoidal(1.0), 1, 1.01, {1.01}, 1.0};
    CHECK(r.pass());
    r.max_ratio = 1.03;
    CHECK_FALSE(r.pass());
    r.bound = std::numeric_limits<double>::infinity();
    CHECK(r.pass());
    CHECK(r.json().find("\"max_ratio\"") != std::string::npos);
}

TEST_CASE("run CSV") {
    const auto run = sim::integrate(motor(ReferenceSignal::step(0.0, 1.0)), 1.0, 1e-3);
    std::ostringstream os;
    sim::write_run_csv(os, run, 100);
    const std::string s = os.str();
    CHECK(s.rfind("t,r,e,theta,u\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + static_cast<long>((run.t.size() + 99) / 100));
}
