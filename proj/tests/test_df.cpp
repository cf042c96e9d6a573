#include <cmath>

#include "doctest.h"
#include "nlbode/df.hpp"

using namespace nlbode;
using C = std::complex<double>;

namespace {

double j1_series(double x) {
    double term = x / 2.0;
    double sum = term;
    for (int k = 1; k < 50; ++k) {
        term *= -(x * x / 4.0) / (k * (k + 1.0));
        sum += term;
    }
    return sum;
}

lti::TransferFunction plant() {
    const double J = 0.1, b = 1.0044, L = 1.0, R = 0.96, Km = 0.2;
    return {{J, b}, {L * J, L * b + R * J, R * b + Km * Km, 0.0}};
}
lti::TransferFunction controller() { return {{5.0, 5.0}, {0.1, 1.0}}; }

}  // namespace

TEST_CASE("Bessel J1 against its power series") {
    for (double x : {1e-4, 0.1, 1.0, 2.5, 3.8, 7.0, 12.0, 20.0}) {
        CHECK(df::bessel_j1(x) == doctest::Approx(j1_series(x)).epsilon(1e-9).scale(1.0));
    }
    CHECK(df::bessel_j1(-2.0) == doctest::Approx(-df::bessel_j1(2.0)));
}

TEST_CASE("first zero of J1") {
    double lo = 3.0, hi = 4.5;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (df::bessel_j1(lo) * df::bessel_j1(mid) <= 0.0 ? hi : lo) = mid;
    }
    CHECK(lo == doctest::Approx(3.8317059702).epsilon(1e-9));
}

TEST_CASE("describing function limits") {
    CHECK(df::df_gain(0.1, 1e-6) == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(std::abs(df::df_gain(0.1, 3.8317059702)) < 1e-10);
    CHECK(df::df_gain(0.1, 1e4) < 1e-5);
    for (double a : df::default_amplitudes()) {
        CHECK(std::abs(df::df_gain(0.1, a)) <= 0.1 + 1e-12);
    }
    CHECK_THROWS_AS(df::df_gain(0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(df::df_gain(0.1, -1.0), std::invalid_argument);
}

TEST_CASE("amplitude grid") {
    const auto a = df::default_amplitudes();
    CHECK(a.size() == 500);
    CHECK(a.front() == doctest::Approx(1e-3));
    CHECK(a.back() == doctest::Approx(1e2));
}

TEST_CASE("describing-function gain of the DC motor loop") {
    const srg::SectorNonlinearity phi{-0.1, 0.1, "sin"};
    const auto sys = lfr::LfrSystem::sensitivity(plant(), controller(), phi);
    const std::vector<double> grid{0.1, 1.0, 10.0};
    const auto c = df::df_curve(sys, grid);
    REQUIRE(c.df_gain.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid[i];
        const C g = plant().freq(w), k = controller().freq(w);
        // Independent closed form: e / r = (1 + G N) / (1 + G (K + N)) maximized over N(A).
        double best = 0.0;
        for (double a : c.amplitude_grid) {
            const double n = df::df_gain(0.1, a);
            best = std::max(best, std::abs((1.0 + g * n) / (1.0 + g * (k + n))));
        }
        CHECK(c.df_gain[i] == doctest::Approx(best).epsilon(1e-9));
        // The nonlinear bound dominates every describing-function prediction.
        const lfr::BoundEvaluator ev(sys, {});
        CHECK(c.df_gain[i] <= ev.gamma(srg::InputSpace::sinusoidal(w)) * (1 + 1e-6));
    }
}

TEST_CASE("zero nonlinearity reduces to the LTI magnitude") {
    const auto sys = lfr::LfrSystem::sensitivity(plant(), controller(), {0.0, 0.0, "zero"});
    const auto c = df::df_curve(sys, {0.5, 5.0});
    for (std::size_t i = 0; i < 2; ++i) {
        const double w = c.frequencies[i];
        CHECK(c.df_gain[i] == doctest::Approx(std::abs(1.0 / (1.0 + plant().freq(w) * controller().freq(w)))));
    }
}
