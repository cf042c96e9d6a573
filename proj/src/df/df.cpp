#include "nlbode/df.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nlbode::df {

namespace {

long double j1_series(long double x) {
    const long double h = x / 2.0L;
    const long double h2 = h * h;
    long double term = h;
    long double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= -h2 / (static_cast<long double>(k) * (k + 1));
        sum += term;
        if (std::fabs(term) < 1e-22L * std::fabs(sum)) {
            break;
        }
    }
    return sum;
}

/// Hankel expansion J1(x) ~ sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - 3 pi / 4,
/// summed until the terms stop decreasing.
double j1_asymptotic(double x) {
    constexpr double mu = 4.0;
    const double chi = x - 0.75 * std::numbers::pi;
    double p = 0.0;
    double q = 0.0;
    double term = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 200; ++k) {
        if (k > 0) {
            const double odd = 2.0 * k - 1.0;
            term *= (mu - odd * odd) / (k * 8.0 * x);
        }
        if (std::abs(term) >= last || std::abs(term) < 1e-17) {
            break;
        }
        last = std::abs(term);
        switch (k % 4) {
            case 0: p += term; break;
            case 1: q += term; break;
            case 2: p -= term; break;
            case 3: q -= term; break;
        }
    }
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j1(double x) {
    if (x < 0.0) {
        return -bessel_j1(-x);
    }
    if (x < 12.0) {
        return static_cast<double>(j1_series(x));
    }
    return j1_asymptotic(x);
}

double df_gain(double delta, double amplitude) {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
        throw std::invalid_argument("describing function requires a positive finite amplitude");
    }
    if (amplitude < 12.0) {
        // J1(A)/A from the series directly keeps full precision as A -> 0.
        const long double a = amplitude;
        return delta * static_cast<double>(2.0L * j1_series(a) / a);
    }
    return delta * 2.0 * bessel_j1(amplitude) / amplitude;
}

std::vector<double> default_amplitudes() { return lfr::log_grid(1e-3, 1e2, 499.0 / 5.0); }

DfCurve df_curve(const lfr::LfrSystem& sys, const std::vector<double>& grid, const std::vector<double>& amplitudes) {
    DfCurve out{grid, std::vector<double>(grid.size(), 0.0), amplitudes};
    const double delta = sys.phi.beta;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid[i];
        const auto zw = sys.zw.freq(w);
        const auto ow = sys.out_w.freq(w);
        const auto zi = sys.z_in.freq(w);
        const auto oi = sys.out_in.freq(w);
        double best = std::abs(oi);
        if (delta != 0.0) {
            for (double a : amplitudes) {
                const double n = df_gain(delta, a);
                if (std::abs(n) < 1e-12) {
                    continue;  // loop term vanishes; |P_out_in| already counted
                }
                const auto den = 1.0 - n * zw;
                const double g = std::abs(den) == 0.0 ? std::numeric_limits<double>::infinity()
                                                      : std::abs(ow * (n / den) * zi + oi);
                best = std::max(best, g);
            }
        }
        out.df_gain[i] = best;
    }
    return out;
}

}  // namespace nlbode::df
