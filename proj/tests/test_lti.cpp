#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "nlbode/lti.hpp"

using namespace nlbode::lti;
using C = std::complex<double>;

namespace {

C horner(const Poly& p, C s) {
    C acc = 0.0;
    for (double c : p) {
        acc = acc * s + c;
    }
    return acc;
}

TransferFunction motor_plant() {
    const double J = 0.1, b = 1.0044, L = 1.0, R = 0.96, Km = 0.2;
    // s ((L s + R)(J s + b) + Km^2) expanded by hand.
    const Poly den{L * J, L * b + R * J, R * b + Km * Km, 0.0};
    return {{J, b}, den};
}

TransferFunction motor_controller() { return {{5.0, 5.0}, {0.1, 1.0}}; }

}  // namespace

TEST_CASE("polynomial arithmetic and evaluation") {
    const Poly a{1.0, 2.0};
    const Poly b{1.0, -3.0, 2.0};
    CHECK(poly_mul(a, b) == Poly{1.0, -1.0, -4.0, 4.0});
    CHECK(poly_add(a, b) == Poly{1.0, -2.0, 4.0});
    for (C s : {C(0.3, 1.7), C(-2.0, 0.5), C(0.0, 10.0)}) {
        CHECK(std::abs(poly_eval(b, s) - horner(b, s)) < 1e-12);
    }
}

TEST_CASE("roots of a product of known factors") {
    const Poly p = poly_mul(poly_mul({1.0, 1.0}, {1.0, 2.0}), {1.0, 2.0, 5.0});  // -1, -2, -1 +- 2j
    auto r = poly_roots(p);
    REQUIRE(r.size() == 4);
    std::vector<C> expect{{-1.0, 0.0}, {-2.0, 0.0}, {-1.0, 2.0}, {-1.0, -2.0}};
    for (C e : expect) {
        const double best = std::abs(*std::min_element(r.begin(), r.end(), [&](C x, C y) {
            return std::abs(x - e) < std::abs(y - e);
        }) - e);
        CHECK(best < 1e-9);
    }
}

TEST_CASE("frequency response matches Horner evaluation") {
    const auto g = motor_plant();
    for (double w : {0.01, 0.3, 1.0, 7.0, 100.0}) {
        const C s(0.0, w);
        const C expect = horner(g.num(), s) / horner(g.den(), s);
        CHECK(std::abs(g.freq(w) - expect) <= 1e-12 * std::abs(expect));
    }
}

TEST_CASE("pole classification, dc and high-frequency gains") {
    const auto g = motor_plant();
    const auto pc = classify_poles(g);
    CHECK(pc.integrator_count == 1);
    CHECK(pc.stable_pole_count == 2);
    CHECK(pc.unstable_pole_count == 0);
    CHECK(std::isinf(g.dc_gain()));
    CHECK(g.high_frequency_gain() == 0.0);

    const auto k = motor_controller();
    CHECK(k.dc_gain() == doctest::Approx(5.0));
    CHECK(k.high_frequency_gain() == doctest::Approx(50.0));

    const TransferFunction unstable({1.0}, {1.0, -1.0});
    CHECK(classify_poles(unstable).unstable_pole_count == 1);
}

TEST_CASE("realization reproduces the transfer function") {
    for (const auto& g : {motor_plant(), motor_controller(), TransferFunction({2.0, 0.0, 1.0}, {1.0, 3.0, 3.0, 1.0})}) {
        const auto ss = realize(g);
        CHECK(ss.order() == g.order());
        for (C s : {C(0.1, 0.5), C(0.0, 3.0), C(-0.3, 20.0)}) {
            const C a = ss.eval(s);
            const C b = g.eval(s);
            CHECK(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(b)));
        }
    }
    CHECK_THROWS_AS(realize(TransferFunction({1.0, 0.0, 0.0}, {1.0, 1.0})), LtiError);
}

TEST_CASE("sensitivity and LFR blocks") {
    const auto g = motor_plant();
    const auto k = motor_controller();
    const auto s = sensitivity(g, k);
    const auto blocks = lfr_blocks_sensitivity(g, k);
    for (double w : {0.05, 1.0, 4.0, 30.0}) {
        const C gk = g.freq(w) * k.freq(w);
        const C expect = 1.0 / (1.0 + gk);
        CHECK(std::abs(s.freq(w) - expect) < 1e-12);
        CHECK(std::abs(blocks.er.freq(w) - expect) < 1e-12);
        // e = S r + S G w with the disturbance w entering at the plant input.
        CHECK(std::abs(blocks.ew.freq(w) - expect * g.freq(w)) < 1e-12);
    }
    // Closed-loop poles: -10.04, -4.98 +- 5.02j, -0.999.
    const auto poles = s.poles();
    for (C p : poles) {
        CHECK(p.real() < -0.9);
    }
}

TEST_CASE("unstable closed loop is rejected") {
    const TransferFunction g({1.0}, {1.0, -2.0});
    CHECK_THROWS_AS(lfr_blocks_sensitivity(g, TransferFunction::gain(1.0)), LtiError);
}

TEST_CASE("loop transfer blocks") {
    const auto g = motor_plant();
    const auto k = motor_controller();
    const auto b = lfr_blocks_looptransfer(g, k);
    for (double w : {0.2, 2.0, 20.0}) {
        CHECK(std::abs(b.ye.freq(w) - g.freq(w) * k.freq(w)) < 1e-12 * std::abs(g.freq(w) * k.freq(w)));
    }
}

TEST_CASE("evaluation at a pole throws") {
    const TransferFunction g({1.0}, {1.0, 0.0});
    CHECK_THROWS_AS(g.eval(C(0.0, 0.0)), LtiError);
}
