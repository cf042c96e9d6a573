#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "nlbode/lfr.hpp"

using namespace nlbode;
using srg::InputSpace;
using C = std::complex<double>;

namespace {

lti::TransferFunction plant() {
    const double J = 0.1, b = 1.0044, L = 1.0, R = 0.96, Km = 0.2;
    return {{J, b}, {L * J, L * b + R * J, R * b + Km * Km, 0.0}};
}
lti::TransferFunction controller() { return {{5.0, 5.0}, {0.1, 1.0}}; }

const srg::SectorNonlinearity kSin{-0.1, 0.1, "0.1 sin"};

/// r -> e with the plant input reduced by c * theta.
C sens_with_gain(double c, double w) {
    const C g = plant().freq(w);
    const C k = controller().freq(w);
    return (1.0 + g * c) / (1.0 + g * (k + c));
}

/// e -> theta with the plant input reduced by c * theta.
C loop_with_gain(double c, double w) {
    const C g = plant().freq(w);
    return g * controller().freq(w) / (1.0 + g * c);
}

const lfr::BoundEvaluator& s_eval() {
    static const lfr::BoundEvaluator e(lfr::LfrSystem::sensitivity(plant(), controller(), kSin), {});
    return e;
}

}  // namespace

TEST_CASE("LFR with a linear gain reproduces the perturbed closed loop") {
    for (double c : {-0.1, 0.03, 0.1}) {
        const auto s = lfr::LfrSystem::sensitivity(plant(), controller(), {c, c, "gain"});
        const auto l = lfr::LfrSystem::loop_transfer(plant(), controller(), {c, c, "gain"});
        for (double w : {0.1, 1.0, 5.0, 30.0}) {
            const C e = s.out_w.freq(w) * C(c) / (1.0 - C(c) * s.zw.freq(w)) * s.z_in.freq(w) + s.out_in.freq(w);
            CHECK(std::abs(e - sens_with_gain(c, w)) < 1e-10);
            const C y = l.out_w.freq(w) * C(c) / (1.0 - C(c) * l.zw.freq(w)) * l.z_in.freq(w) + l.out_in.freq(w);
            CHECK(std::abs(y - loop_with_gain(c, w)) < 1e-9 * (1.0 + std::abs(y)));
        }
    }
}

TEST_CASE("bounds contain the responses of every linear gain in the sector") {
    for (double w : {0.05, 0.5, 1.0, 3.0, 10.0}) {
        const auto bs = s_eval().bound(InputSpace::sinusoidal(w));
        const auto bh = s_eval().bound(InputSpace::harmonic(w));
        const auto bf = s_eval().bound(InputSpace::full());
        for (int i = 0; i <= 20; ++i) {
            const double c = -0.1 + 0.01 * i;
            const C z = sens_with_gain(c, w);
            CHECK(bs.contains(z, 1e-6));
            CHECK(bf.contains(z, 1e-6));
            for (int n = 1; n <= 5; ++n) {
                CHECK(bh.contains(sens_with_gain(c, n * w), 1e-6));
            }
        }
    }
}

TEST_CASE("DC motor sensitivity gains") {
    CHECK(s_eval().gamma(InputSpace::full()) == doctest::Approx(1.29).epsilon(0.05));
    CHECK(s_eval().gamma(InputSpace::sinusoidal(1.0)) == doctest::Approx(0.213).epsilon(0.05));
    CHECK(s_eval().gamma(InputSpace::sinusoidal(10.0)) == doctest::Approx(1.27).epsilon(0.05));
}

TEST_CASE("gain ordering and limits on a sweep") {
    const auto grid = lfr::log_grid(1e-2, 1e2, 5);
    const auto c = lfr::sweep(s_eval(), grid, {});
    CHECK(c.ordering_violations.empty());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(c.gamma_sin[i] <= c.gamma_harm[i] * (1 + 1e-9));
        CHECK(c.gamma_sin[i] <= c.gamma_subharm[i] * (1 + 1e-9));
        CHECK(c.gamma_harm[i] <= c.gamma_full * (1 + 1e-9));
        CHECK(c.gamma_subharm[i] <= c.gamma_full * (1 + 1e-9));
        CHECK(c.lti_mag[i] <= c.gamma_sin[i] * (1 + 1e-9));
    }
    CHECK(c.gamma_harm.front() == doctest::Approx(c.gamma_full).epsilon(0.02));
    CHECK(c.gamma_subharm.back() == doctest::Approx(c.gamma_full).epsilon(0.02));
}

TEST_CASE("linear system reduces to the LTI magnitude") {
    const auto sys = lfr::LfrSystem::sensitivity(plant(), controller(), {0.0, 0.0, "zero"});
    CHECK(sys.linear());
    const auto grid = lfr::log_grid(1e-2, 1e2, 10);
    const auto c = lfr::sweep(sys, grid, {true, true, true, true});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double mag = std::abs(1.0 / (1.0 + plant().freq(grid[i]) * controller().freq(grid[i])));
        CHECK(c.gamma_sin[i] == doctest::Approx(mag).epsilon(1e-9));
    }
}

TEST_CASE("loop transfer divergence structure") {
    const lfr::BoundEvaluator l(lfr::LfrSystem::loop_transfer(plant(), controller(), kSin), {});
    CHECK(std::isinf(l.gamma(InputSpace::harmonic(0.05))));
    const double h1 = l.gamma(InputSpace::harmonic(1.0));
    CHECK(std::isfinite(h1));
    CHECK(h1 >= std::abs(plant().freq(1.0) * controller().freq(1.0)));
    CHECK(std::isinf(l.gamma(InputSpace::full())));
}

TEST_CASE("log grid") {
    const auto g = lfr::log_grid(1e-2, 1e2, 49.75);
    CHECK(g.size() == 200);
    CHECK(g.front() == doctest::Approx(1e-2));
    CHECK(g.back() == doctest::Approx(1e2));
    for (std::size_t i = 1; i < g.size(); ++i) {
        CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]));
    }
    CHECK(lfr::log_grid(2.0, 2.0, 10).size() == 1);
    CHECK_THROWS_AS(lfr::log_grid(0.0, 1.0, 10), std::invalid_argument);
}

TEST_CASE("first crossing interpolates in log-frequency and dB") {
    // |H| = w on a grid: the unit crossing is at exactly w = 1.
    const auto w = lfr::log_grid(0.1, 10.0, 3);
    std::vector<double> v(w.begin(), w.end());
    const auto up = lfr::first_crossing(w, v, 1.0, true);
    REQUIRE(up.has_value());
    CHECK(*up == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(lfr::first_crossing(w, v, 1.0, false).has_value());
    std::vector<double> flat(w.size(), 0.5);
    CHECK_FALSE(lfr::first_crossing(w, flat, 1.0, true).has_value());
}

TEST_CASE("bandwidths on a single-point grid are absent") {
    const auto c = lfr::sweep(s_eval(), {1.0}, {});
    CHECK(c.frequencies.size() == 1);
    CHECK_FALSE(lfr::closed_loop_bandwidth(c).has_value());
    CHECK_FALSE(lfr::open_loop_bandwidth(c).has_value());
}

TEST_CASE("stability certificate") {
    const auto s = lfr::LfrSystem::sensitivity(plant(), controller(), kSin);
    const auto cert = lfr::stability_certificate(kSin, -s.zw);
    CHECK(cert.certified);
    CHECK(std::isfinite(cert.gain_bound));
    CHECK(cert.r_m > 0.0);

    const auto lin = lfr::stability_certificate({0.0, 0.0, ""}, -s.zw);
    CHECK(lin.certified);
    CHECK(std::isinf(lin.r_m));

    // A sector reaching past -1/|P_zw| overlaps at tau = 1.
    const double peak = cgeom::radius(srg::lti_srg(s.zw, InputSpace::full()));
    const auto bad = lfr::stability_certificate({-3.0 / peak, 3.0 / peak, ""}, -s.zw);
    CHECK_FALSE(bad.certified);
    CHECK(bad.r_m == doctest::Approx(0.0));

    CHECK(lfr::default_tau_grid().size() == 20);
    CHECK(lfr::default_tau_grid().back() == doctest::Approx(1.0));
}

TEST_CASE("weighting filters") {
    const auto s = lfr::LfrSystem::sensitivity(plant(), controller(), kSin);
    const auto same = lfr::apply_weights(s, lti::TransferFunction::gain(1.0), lti::TransferFunction::gain(1.0));
    CHECK(std::abs(same.out_in.freq(2.0) - s.out_in.freq(2.0)) < 1e-12);
    const lti::TransferFunction wout({1.0}, {0.5, 1.0});
    const auto w = lfr::apply_weights(s, lti::TransferFunction::gain(1.0), wout);
    CHECK(std::abs(w.out_in.freq(2.0) - s.out_in.freq(2.0) * wout.freq(2.0)) < 1e-12);
    CHECK_THROWS_AS(lfr::apply_weights(s, lti::TransferFunction({1.0}, {1.0, 0.0}), wout), lti::LtiError);
    CHECK_THROWS_AS(lfr::apply_weights(s, lti::TransferFunction({1.0}, {1.0, -1.0}), wout), lti::LtiError);
}

TEST_CASE("curve CSV and JSON") {
    lfr::GainCurve c;
    c.label = "X";
    c.frequencies = {1.0, 2.0};
    c.gamma_sin = {0.5, std::numeric_limits<double>::infinity()};
    c.gamma_harm = {0.6, 0.7};
    c.gamma_subharm = {lfr::kNotComputed, lfr::kNotComputed};
    c.gamma_full = 1.0;
    c.lti_mag = {0.1, 0.2};
    std::ostringstream os;
    lfr::write_curve_csv(os, c);
    const std::string csv = os.str();
    CHECK(csv.rfind("omega_radps,gamma_sin,gamma_harm,gamma_subharm,gamma_full,s_lti_mag\n", 0) == 0);
    CHECK(csv.find("inf") != std::string::npos);
    CHECK(csv.find("nan") != std::string::npos);
    const std::string js = lfr::curve_json(c);
    CHECK(js.find("null") != std::string::npos);
    CHECK(js.find("\"inf\"") != std::string::npos);
}
