#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlbode/lti.hpp"
#include "nlbode/srg.hpp"

namespace nlbode::sim {

class SimError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// DC motor parameters (SI units); delta scales the sin(theta) disturbance torque.
struct MotorParams {
    double J = 0.1;
    double R = 0.96;
    double L = 1.0;
    double Km = 0.2;
    double b = 1.0044;
    double delta = 0.1;

    /// G(s) = (J s + b) / (s ((L s + R)(J s + b) + Km^2)).
    [[nodiscard]] lti::TransferFunction plant() const;
    /// Throws std::invalid_argument unless J, R, L, Km, b > 0 and delta >= 0.
    void validate() const;
};

/// K(s) = 5 (s + 1) / (s / 10 + 1).
lti::TransferFunction default_controller();

struct ReferenceSignal {
    enum class Kind { Step, Ramp, SwitchedSine, FourierSeries };

    Kind kind = Kind::Step;
    // Step
    double t0 = 0.0;
    double height = 1.0;
    // Ramp
    double slope = 1.0;
    // SwitchedSine: a sin(w1 t) for t <= t_switch, a sin(w2 t) after.
    double a = 1.0;
    double w1 = 1.0;
    double w2 = 1.0;
    double t_switch = 0.0;
    // FourierSeries: sum_k c_k e^{j k w_base t} + conj, k = 1..coeffs.size().
    double w_base = 1.0;
    std::vector<std::complex<double>> coeffs;

    static ReferenceSignal step(double t0, double height);
    static ReferenceSignal ramp(double slope);
    static ReferenceSignal switched_sine(double a, double w1, double w2, double t_switch);
    static ReferenceSignal fourier(double w_base, std::vector<std::complex<double>> coeffs);

    [[nodiscard]] double operator()(double t) const;
    /// Period of the steady-state response this signal is expected to produce, if any.
    /// A ramp gives 2 pi / slope because the disturbance is 2 pi periodic in theta.
    [[nodiscard]] std::optional<double> period_hint() const;
    /// RMS over one period for a FourierSeries; |a|/sqrt(2) for SwitchedSine.
    [[nodiscard]] double rms() const;
    [[nodiscard]] std::string name() const;
};

/// Unity feedback of plant G and controller K with u' = u - delta sin(theta)
/// entering the plant: theta = G u', e = r - theta, u = K e.
struct ClosedLoopModel {
    lti::StateSpace plant;
    lti::StateSpace controller;
    double delta = 0.0;
    ReferenceSignal reference;

    static ClosedLoopModel from_loop(const lti::TransferFunction& g, const lti::TransferFunction& k, double delta,
                                     ReferenceSignal ref);
    static ClosedLoopModel dc_motor(const MotorParams& p, const lti::TransferFunction& k, ReferenceSignal ref);

    /// Largest step for which the fastest linearized closed-loop mode gets 50 steps.
    [[nodiscard]] double max_step() const;
};

struct SimRun {
    std::vector<double> t;
    std::vector<double> r;
    std::vector<double> theta;
    std::vector<double> e;
    std::vector<double> u;
    /// RMS of e over the steady-state window.
    double rms_tail = 0.0;
    /// max |e| over the same window.
    double amplitude_tail = 0.0;
    double mean_tail = 0.0;
    std::optional<double> period_detected;
    double dt = 0.0;
};

struct WindowStats {
    double rms = 0.0;
    double amplitude = 0.0;
    double mean = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;
};

/// Fixed-step RK4. Throws SimError("integration diverged ...") on a non-finite state and
/// std::invalid_argument if dt exceeds model.max_step().
SimRun integrate(const ClosedLoopModel& model, double t_end, double dt);

/// Statistics of `x` over the last `periods` whole periods inside [t_lo, t_hi]; the whole
/// interval when `period` is empty or does not fit.
WindowStats window_stats(const SimRun& run, const std::vector<double>& x, double t_lo, double t_hi,
                         std::optional<double> period, int periods = 5);

/// rms_tail / reference_rms. Throws SimError when the last two periods differ in RMS by 0.5 % or more.
double rms_gain(const SimRun& run, double reference_rms);

/// True iff e over the last window of length T differs from its T-shifted copy by
/// less than 0.5 % of the window RMS (RMS of the difference). Throws std::invalid_argument for runs
/// shorter than 20 periods.
bool period_check(const SimRun& run, double period);

struct ProbeOptions {
    double dt = 1e-3;
    int min_periods = 20;
    /// Lower bound on the run length, so transients decay for short periods.
    double min_t_end = 30.0;
    unsigned threads = 0;
};

struct ProbeResult {
    srg::InputSpace space;
    int n_pairs = 0;
    double max_ratio = 0.0;
    std::vector<double> ratios;
    std::optional<double> bound;
    [[nodiscard]] bool pass(double slack = 0.02) const;
    [[nodiscard]] std::string json() const;
};

/// Random periodic input drawn from a frequency-indexed space: up to 8 components,
/// amplitudes log-uniform in [1e-2, 10], uniform phases. Harmonic spaces use k w
/// (k = 1..8), subharmonic spaces use w / n (n in {1, 2, 4, 8}).
ReferenceSignal random_input(srg::InputSpace space, std::uint64_t seed);

/// Max over n_pairs of RMS(e1 - e2) / RMS(r1 - r2) in steady state. The pair seeds
/// are derived from `seed` and the pair index, so results do not depend on threading.
ProbeResult incremental_gain_probe(const ClosedLoopModel& model, srg::InputSpace space, int n_pairs,
                                   std::uint64_t seed, const ProbeOptions& opts = {});

/// Columns t, r, e, theta, u; every `stride`-th sample.
void write_run_csv(std::ostream& os, const SimRun& run, std::size_t stride = 1);

}  // namespace nlbode::sim
