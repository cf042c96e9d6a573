#pragma once

#include <vector>

#include "nlbode/lfr.hpp"

namespace nlbode::df {

/// Bessel function of the first kind, order one.
double bessel_j1(double x);

/// delta * 2 J1(A) / A: describing function of delta * sin. Throws for A <= 0.
double df_gain(double delta, double amplitude);

struct DfCurve {
    std::vector<double> frequencies;
    std::vector<double> df_gain;
    std::vector<double> amplitude_grid;
};

/// 500 log-spaced amplitudes on [1e-3, 1e2].
std::vector<double> default_amplitudes();

/// sup over the amplitude grid of |P_out_w N (1 - N P_zw)^{-1} P_z_in + P_out_in| at each w,
/// with N = N(A) the describing function of beta * sin (beta = sys.phi.beta).
DfCurve df_curve(const lfr::LfrSystem& sys, const std::vector<double>& grid,
                 const std::vector<double>& amplitudes = default_amplitudes());

}  // namespace nlbode::df
