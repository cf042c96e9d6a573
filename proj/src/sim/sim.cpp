#include "nlbode/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "json.hpp"

#include "../common/parallel.hpp"

namespace nlbode::sim {

namespace {

using Complex = std::complex<double>;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// r at t = k h for k = 0..n. Fourier terms use a phasor recurrence,
/// renormalized periodically.
std::vector<double> sample_reference(const ReferenceSignal& ref, double h, std::size_t n) {
    std::vector<double> out(n + 1);
    if (ref.kind != ReferenceSignal::Kind::FourierSeries) {
        for (std::size_t k = 0; k <= n; ++k) {
            out[k] = ref(static_cast<double>(k) * h);
        }
        return out;
    }
    const std::size_t m = ref.coeffs.size();
    std::vector<Complex> phasor(ref.coeffs);
    std::vector<Complex> step(m);
    for (std::size_t i = 0; i < m; ++i) {
        step[i] = std::polar(1.0, static_cast<double>(i + 1) * ref.w_base * h);
    }
    for (std::size_t k = 0; k <= n; ++k) {
        if (k % 4096 == 0) {
            const double t = static_cast<double>(k) * h;
            for (std::size_t i = 0; i < m; ++i) {
                phasor[i] = ref.coeffs[i] * std::polar(1.0, static_cast<double>(i + 1) * ref.w_base * t);
            }
        }
        double v = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            v += 2.0 * phasor[i].real();
            phasor[i] *= step[i];
        }
        out[k] = v;
    }
    return out;
}

/// Closed-loop right-hand side on a flat state [plant | controller].
struct Dynamics {
    const ClosedLoopModel& m;
    int np;
    int nk;

    double theta(const double* x) const {
        double th = 0.0;
        for (int i = 0; i < np; ++i) {
            th += m.plant.c(i) * x[i];
        }
        return th;  // strictly proper plant: no feedthrough
    }

    /// Returns (theta, u) and writes dx.
    std::pair<double, double> operator()(const double* x, double r, double* dx) const {
        const double th = theta(x);
        const double e = r - th;
        double u = m.controller.d * e;
        for (int i = 0; i < nk; ++i) {
            u += m.controller.c(i) * x[np + i];
        }
        const double up = u - m.delta * std::sin(th);
        for (int i = 0; i < np; ++i) {
            double acc = m.plant.b(i) * up;
            for (int j = 0; j < np; ++j) {
                acc += m.plant.a(i, j) * x[j];
            }
            dx[i] = acc;
        }
        for (int i = 0; i < nk; ++i) {
            double acc = m.controller.b(i) * e;
            for (int j = 0; j < nk; ++j) {
                acc += m.controller.a(i, j) * x[np + j];
            }
            dx[np + i] = acc;
        }
        return {th, u};
    }
};

struct Recorded {
    std::vector<double> r;
    std::vector<double> theta;
    std::vector<double> e;
    std::vector<double> u;
};

Recorded run_rk4(const ClosedLoopModel& model, std::size_t steps, double dt, bool full) {
    const int np = model.plant.order();
    const int nk = model.controller.order();
    const Dynamics f{model, np, nk};
    const auto n = static_cast<std::size_t>(np + nk);
    const auto rs = sample_reference(model.reference, 0.5 * dt, 2 * steps);

    std::vector<double> x(n, 0.0);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    Recorded rec;
    rec.e.reserve(steps + 1);
    if (full) {
        rec.r.reserve(steps + 1);
        rec.theta.reserve(steps + 1);
        rec.u.reserve(steps + 1);
    }
    auto record = [&](std::size_t k, double th, double u) {
        rec.e.push_back(rs[2 * k] - th);
        if (full) {
            rec.r.push_back(rs[2 * k]);
            rec.theta.push_back(th);
            rec.u.push_back(u);
        }
    };
    for (std::size_t k = 0; k < steps; ++k) {
        const auto [th, u] = f(x.data(), rs[2 * k], k1.data());
        record(k, th, u);
        for (std::size_t i = 0; i < n; ++i) {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        f(tmp.data(), rs[2 * k + 1], k2.data());
        for (std::size_t i = 0; i < n; ++i) {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        f(tmp.data(), rs[2 * k + 1], k3.data());
        for (std::size_t i = 0; i < n; ++i) {
            tmp[i] = x[i] + dt * k3[i];
        }
        f(tmp.data(), rs[2 * k + 2], k4.data());
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            finite = finite && std::isfinite(x[i]);
        }
        if (!finite) {
            std::ostringstream os;
            os << "integration diverged at t=" << static_cast<double>(k + 1) * dt;
            throw SimError(os.str());
        }
    }
    const auto [th, u] = f(x.data(), rs[2 * steps], k1.data());
    record(steps, th, u);
    return rec;
}

/// Index range [i0, i1) of whole periods ending at t_hi.
std::pair<std::size_t, std::size_t> window_indices(double dt, std::size_t n, double t_lo, double t_hi,
                                                   std::optional<double> period, int periods) {
    const auto idx = [&](double t) {
        return static_cast<std::size_t>(std::clamp(std::llround(t / dt), 0LL, static_cast<long long>(n)));
    };
    const std::size_t i1 = idx(t_hi);
    std::size_t i0 = idx(t_lo);
    if (period && *period > 0.0) {
        const int fit = static_cast<int>(std::floor((t_hi - t_lo) / *period + 1e-9));
        const int use = std::min(periods, fit);
        if (use >= 1) {
            i0 = idx(t_hi - use * *period);
        }
    }
    return {std::min(i0, i1), i1};
}

double rms_range(const std::vector<double>& x, std::size_t i0, std::size_t i1) {
    if (i1 <= i0) {
        return 0.0;
    }
    double acc = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
        acc += x[i] * x[i];
    }
    return std::sqrt(acc / static_cast<double>(i1 - i0));
}

/// Linear interpolation of uniformly sampled x at time t.
double sample_at(const std::vector<double>& x, double dt, double t) {
    const double pos = t / dt;
    const auto i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(x.size() - 1)));
    if (i + 1 >= x.size()) {
        return x.back();
    }
    const double f = pos - static_cast<double>(i);
    return x[i] + f * (x[i + 1] - x[i]);
}

/// RMS of x(t) - x(t - T) over the last window of length T, relative to the window RMS.
double periodicity_defect(const std::vector<double>& x, double dt, double period) {
    const double t_end = dt * static_cast<double>(x.size() - 1);
    const auto i1 = x.size() - 1;
    const auto i0 = static_cast<std::size_t>(std::max(0.0, std::ceil((t_end - period) / dt)));
    double diff = 0.0;
    double ref = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = i0; i <= i1; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double d = x[i] - sample_at(x, dt, t - period);
        diff += d * d;
        ref += x[i] * x[i];
        ++cnt;
    }
    if (cnt == 0 || ref == 0.0) {
        return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return std::sqrt(diff / ref);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

lti::TransferFunction MotorParams::plant() const {
    const lti::Poly mech{J, b};
    const lti::Poly inner = lti::poly_add(lti::poly_mul({L, R}, mech), {Km * Km});
    return {mech, lti::poly_mul({1.0, 0.0}, inner)};
}

void MotorParams::validate() const {
    if (!(J > 0.0 && R > 0.0 && L > 0.0 && Km > 0.0 && b > 0.0)) {
        throw std::invalid_argument("motor parameters J, R, L, Km, b must be positive");
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw std::invalid_argument("delta must be nonnegative");
    }
}

lti::TransferFunction default_controller() { return {{5.0, 5.0}, {0.1, 1.0}}; }

ReferenceSignal ReferenceSignal::step(double t0, double height) {
    ReferenceSignal r;
    r.kind = Kind::Step;
    r.t0 = t0;
    r.height = height;
    return r;
}

ReferenceSignal ReferenceSignal::ramp(double slope) {
    ReferenceSignal r;
    r.kind = Kind::Ramp;
    r.slope = slope;
    return r;
}

ReferenceSignal ReferenceSignal::switched_sine(double a, double w1, double w2, double t_switch) {
    ReferenceSignal r;
    r.kind = Kind::SwitchedSine;
    r.a = a;
    r.w1 = w1;
    r.w2 = w2;
    r.t_switch = t_switch;
    return r;
}

ReferenceSignal ReferenceSignal::fourier(double w_base, std::vector<std::complex<double>> coeffs) {
    if (!(w_base > 0.0)) {
        throw std::invalid_argument("Fourier base frequency must be positive");
    }
    ReferenceSignal r;
    r.kind = Kind::FourierSeries;
    r.w_base = w_base;
    r.coeffs = std::move(coeffs);
    return r;
}

double ReferenceSignal::operator()(double t) const {
    switch (kind) {
        case Kind::Step:
            return t <= t0 ? 0.0 : height;
        case Kind::Ramp:
            return slope * t;
        case Kind::SwitchedSine:
            return t <= t_switch ? a * std::sin(w1 * t) : a * std::sin(w2 * t);
        case Kind::FourierSeries: {
            double v = 0.0;
            for (std::size_t k = 0; k < coeffs.size(); ++k) {
                v += 2.0 * (coeffs[k] * std::polar(1.0, static_cast<double>(k + 1) * w_base * t)).real();
            }
            return v;
        }
    }
    return 0.0;
}

std::optional<double> ReferenceSignal::period_hint() const {
    switch (kind) {
        case Kind::Step:
            return std::nullopt;
        case Kind::Ramp:
            return slope != 0.0 ? std::optional(2.0 * std::numbers::pi / std::abs(slope)) : std::nullopt;
        case Kind::SwitchedSine:
            return 2.0 * std::numbers::pi / w2;
        case Kind::FourierSeries:
            return 2.0 * std::numbers::pi / w_base;
    }
    return std::nullopt;
}

double ReferenceSignal::rms() const {
    switch (kind) {
        case Kind::SwitchedSine:
            return std::abs(a) / std::sqrt(2.0);
        case Kind::FourierSeries: {
            double acc = 0.0;
            for (Complex c : coeffs) {
                acc += 2.0 * std::norm(c);
            }
            return std::sqrt(acc);
        }
        default:
            throw std::invalid_argument("RMS is defined for periodic references only");
    }
}

std::string ReferenceSignal::name() const {
    switch (kind) {
        case Kind::Step:
            return "step";
        case Kind::Ramp:
            return "ramp";
        case Kind::SwitchedSine:
            return "switched_sine";
        case Kind::FourierSeries:
            return "fourier";
    }
    return "?";
}

ClosedLoopModel ClosedLoopModel::from_loop(const lti::TransferFunction& g, const lti::TransferFunction& k,
                                           double delta, ReferenceSignal ref) {
    if (!g.is_strictly_proper()) {
        throw std::invalid_argument("plant must be strictly proper");
    }
    return {lti::realize(g), lti::realize(k), delta, std::move(ref)};
}

ClosedLoopModel ClosedLoopModel::dc_motor(const MotorParams& p, const lti::TransferFunction& k, ReferenceSignal ref) {
    p.validate();
    return from_loop(p.plant(), k, p.delta, std::move(ref));
}

double ClosedLoopModel::max_step() const {
    const int np = plant.order();
    const int nk = controller.order();
    const int n = np + nk;
    // Linearization at delta = 0: theta = C_p x_p, e = -theta.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    a.topLeftCorner(np, np) = plant.a - controller.d * plant.b * plant.c;
    a.topRightCorner(np, nk) = plant.b * controller.c;
    a.bottomLeftCorner(nk, np) = -controller.b * plant.c;
    a.bottomRightCorner(nk, nk) = controller.a;
    double fastest = 0.0;
    const Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        fastest = std::max(fastest, std::abs(es.eigenvalues()(i)));
    }
    return fastest > 0.0 ? 1.0 / (50.0 * fastest) : std::numeric_limits<double>::infinity();
}

SimRun integrate(const ClosedLoopModel& model, double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end > 0.0)) {
        throw std::invalid_argument("dt and t_end must be positive");
    }
    if (dt > model.max_step() * (1.0 + 1e-12)) {
        throw std::invalid_argument("dt too large: the fastest closed-loop mode needs at least 50 steps");
    }
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    Recorded rec = run_rk4(model, steps, dt, true);
    SimRun run;
    run.dt = dt;
    run.t.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        run.t[k] = static_cast<double>(k) * dt;
    }
    run.r = std::move(rec.r);
    run.theta = std::move(rec.theta);
    run.e = std::move(rec.e);
    run.u = std::move(rec.u);

    const double t_last = run.t.back();
    const auto hint = model.reference.period_hint();
    double t_lo = 0.7 * t_last;
    if (model.reference.kind == ReferenceSignal::Kind::SwitchedSine) {
        t_lo = std::max(t_lo, model.reference.t_switch);
    }
    const WindowStats ws = window_stats(run, run.e, t_lo, t_last, hint);
    run.rms_tail = ws.rms;
    run.amplitude_tail = ws.amplitude;
    run.mean_tail = ws.mean;
    if (hint && t_last - t_lo >= 2.0 * *hint && periodicity_defect(run.e, dt, *hint) < 5e-3) {
        run.period_detected = hint;
    }
    return run;
}

WindowStats window_stats(const SimRun& run, const std::vector<double>& x, double t_lo, double t_hi,
                         std::optional<double> period, int periods) {
    if (x.size() != run.t.size() || x.empty()) {
        throw std::invalid_argument("signal length does not match the time grid");
    }
    const auto [i0, i1] = window_indices(run.dt, x.size() - 1, t_lo, t_hi, period, periods);
    WindowStats ws;
    ws.t_begin = static_cast<double>(i0) * run.dt;
    ws.t_end = static_cast<double>(i1) * run.dt;
    ws.rms = rms_range(x, i0, i1);
    double sum = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
        ws.amplitude = std::max(ws.amplitude, std::abs(x[i]));
        sum += x[i];
    }
    ws.mean = i1 > i0 ? sum / static_cast<double>(i1 - i0) : 0.0;
    return ws;
}

double rms_gain(const SimRun& run, double reference_rms) {
    if (!(reference_rms > 0.0)) {
        throw std::invalid_argument("reference RMS must be positive");
    }
    if (run.period_detected) {
        const double t_hi = run.t.back();
        const double p = *run.period_detected;
        const double last = window_stats(run, run.e, t_hi - p, t_hi, p, 1).rms;
        const double prev = window_stats(run, run.e, t_hi - 2 * p, t_hi - p, p, 1).rms;
        const double change = std::abs(last - prev) / std::max(last, 1e-300);
        if (change >= 5e-3) {
            std::ostringstream os;
            os << "steady state not reached: relative RMS change between the last two periods is " << change;
            throw SimError(os.str());
        }
    }
    return run.rms_tail / reference_rms;
}

bool period_check(const SimRun& run, double period) {
    if (!(period > 0.0)) {
        throw std::invalid_argument("period must be positive");
    }
    if (run.t.empty() || run.t.back() < 20.0 * period * (1.0 - 1e-9)) {
        throw std::invalid_argument("period check needs a run of at least 20 periods");
    }
    return periodicity_defect(run.e, run.dt, period) < 5e-3;
}

bool ProbeResult::pass(double slack) const { return !bound || max_ratio <= *bound * (1.0 + slack); }

std::string ProbeResult::json() const {
    nlohmann::json j;
    j["space"] = space.name();
    j["n_pairs"] = n_pairs;
    j["max_ratio"] = max_ratio;
    j["bound"] = bound ? nlohmann::json(*bound) : nlohmann::json(nullptr);
    j["pass"] = pass();
    return j.dump(2);
}

ReferenceSignal random_input(srg::InputSpace space, std::uint64_t seed) {
    using Kind = srg::InputSpace::Kind;
    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto amplitude = [&] { return std::pow(10.0, -2.0 + 3.0 * unit(rng)); };
    const auto phase = [&] { return 2.0 * std::numbers::pi * unit(rng); };
    // c_k = (A / 2) e^{j phi} gives A cos(k w t + phi).
    const auto coef = [&] { return std::polar(0.5 * amplitude(), phase()); };

    switch (space.kind) {
        case Kind::Sinusoidal:
            return ReferenceSignal::fourier(space.omega, {coef()});
        case Kind::Harmonic: {
            std::vector<Complex> c(8, 0.0);
            const int count = 1 + static_cast<int>(unit(rng) * 8.0) % 8;
            for (int i = 0; i < count; ++i) {
                c[static_cast<std::size_t>(std::min(7, static_cast<int>(unit(rng) * 8.0)))] += coef();
            }
            while (c.size() > 1 && c.back() == 0.0) {
                c.pop_back();
            }
            return ReferenceSignal::fourier(space.omega, std::move(c));
        }
        case Kind::Subharmonic: {
            // w / n for n in {1, 2, 4, 8} are the harmonics 8, 4, 2, 1 of w / 8.
            std::vector<Complex> c(8, 0.0);
            const int count = 1 + static_cast<int>(unit(rng) * 4.0) % 4;
            for (int i = 0; i < count; ++i) {
                const int n = 1 << std::min(3, static_cast<int>(unit(rng) * 4.0));
                c[static_cast<std::size_t>(8 / n - 1)] += coef();
            }
            return ReferenceSignal::fourier(space.omega / 8.0, std::move(c));
        }
        case Kind::FullL2:
            break;
    }
    throw std::invalid_argument("the probe needs a frequency-indexed input space");
}

ProbeResult incremental_gain_probe(const ClosedLoopModel& model, srg::InputSpace space, int n_pairs,
                                   std::uint64_t seed, const ProbeOptions& opts) {
    if (n_pairs <= 0) {
        throw std::invalid_argument("n_pairs must be positive");
    }
    if (opts.dt > model.max_step() * (1.0 + 1e-12)) {
        throw std::invalid_argument("dt too large: the fastest closed-loop mode needs at least 50 steps");
    }
    ProbeResult res;
    res.space = space;
    res.n_pairs = n_pairs;
    res.ratios.assign(static_cast<std::size_t>(n_pairs), 0.0);
    detail::parallel_for(static_cast<std::size_t>(n_pairs), opts.threads, [&](std::size_t i) {
        const std::uint64_t base = splitmix64(seed ^ (0x51ed2701ULL * (i + 1)));
        ReferenceSignal r1 = random_input(space, base);
        ReferenceSignal r2 = random_input(space, base + 1);
        // Pad both to a common base frequency: all draws of one space share it.
        const double period = 2.0 * std::numbers::pi / r1.w_base;
        const double per_step = std::round(period / opts.dt);
        const double dt = period / per_step;  // whole number of steps per period
        const double t_end = std::max(opts.min_periods * period, std::ceil(opts.min_t_end / period) * period);
        const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));

        ClosedLoopModel m1 = model;
        m1.reference = r1;
        ClosedLoopModel m2 = model;
        m2.reference = r2;
        const Recorded a = run_rk4(m1, steps, dt, false);
        const Recorded b = run_rk4(m2, steps, dt, false);

        const auto n = static_cast<std::size_t>(per_step);
        const std::size_t periods = std::min<std::size_t>(5, steps / n);
        const std::size_t i1 = steps;
        const std::size_t i0 = i1 - periods * n;
        double num = 0.0;
        double den = 0.0;
        for (std::size_t k = i0; k < i1; ++k) {
            const double t = static_cast<double>(k) * dt;
            const double de = a.e[k] - b.e[k];
            const double dr = r1(t) - r2(t);
            num += de * de;
            den += dr * dr;
        }
        res.ratios[i] = den > 0.0 ? std::sqrt(num / den) : 0.0;
    });
    res.max_ratio = *std::max_element(res.ratios.begin(), res.ratios.end());
    return res;
}

void write_run_csv(std::ostream& os, const SimRun& run, std::size_t stride) {
    stride = std::max<std::size_t>(stride, 1);
    os << "t,r,e,theta,u\n";
    for (std::size_t i = 0; i < run.t.size(); i += stride) {
        os << fmt(run.t[i]) << ',' << fmt(run.r[i]) << ',' << fmt(run.e[i]) << ',' << fmt(run.theta[i]) << ','
           << fmt(run.u[i]) << '\n';
    }
}

}  // namespace nlbode::sim
