#include "nlbode/srg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace nlbode::srg {

namespace {

using lti::Complex;
using lti::TransferFunction;

/// Smallest and largest modulus over the nonzero poles and zeros.
std::pair<double, double> characteristic_band(const TransferFunction& g) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    auto visit = [&](const std::vector<Complex>& roots) {
        for (Complex r : roots) {
            const double m = std::abs(r);
            if (m > 1e-9) {
                lo = std::min(lo, m);
                hi = std::max(hi, m);
            }
        }
    };
    visit(g.poles());
    visit(g.zeros());
    if (hi == 0.0) {
        lo = hi = 1.0;
    }
    return {lo, hi};
}

/// Golden-section maximization of |G(j w)| over log-frequency.
Complex refine_peak(const TransferFunction& g, double w_lo, double w_hi) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(w_lo);
    double b = std::log(w_hi);
    auto f = [&](double x) { return std::abs(g.freq(std::exp(x))); };
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return g.freq(std::exp(0.5 * (a + b)));
}

Region harmonic_srg(const TransferFunction& g, double w, const SrgOptions& opts) {
    const auto [lo, hi] = characteristic_band(g);
    (void)lo;
    const Complex limit = g.high_frequency_gain();
    std::vector<Complex> pts{limit};
    double rmax = std::abs(limit);
    for (int n = 1; n <= opts.n_max; ++n) {
        const Complex v = g.freq(w * n);
        pts.push_back(v);
        rmax = std::max(rmax, std::abs(v));
        if (w * n >= 10.0 * hi && std::abs(v - limit) < opts.tail_rel_eps * rmax) {
            break;
        }
    }
    return cgeom::hco(pts, opts.geometry);
}

Region subharmonic_srg(const TransferFunction& g, double w, const SrgOptions& opts) {
    const auto [lo, hi] = characteristic_band(g);
    (void)hi;
    const Complex limit = g.dc_gain();
    std::vector<Complex> pts{limit};
    double rmax = std::abs(limit);
    for (int n = 1; n <= opts.n_max; ++n) {
        const Complex v = g.freq(w / n);
        pts.push_back(v);
        rmax = std::max(rmax, std::abs(v));
        if (w / n <= 0.1 * lo && std::abs(v - limit) < opts.tail_rel_eps * rmax) {
            break;
        }
    }
    return cgeom::hco(pts, opts.geometry);
}

Region full_srg(const TransferFunction& g, const SrgOptions& opts) {
    const double decades = std::log10(opts.full_hi / opts.full_lo);
    const int n = std::max(2, static_cast<int>(std::ceil(decades * opts.full_points_per_decade)) + 1);
    std::vector<double> grid(static_cast<std::size_t>(n));
    std::vector<Complex> vals(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        grid[static_cast<std::size_t>(i)] = opts.full_lo * std::pow(10.0, decades * i / (n - 1));
        vals[static_cast<std::size_t>(i)] = g.freq(grid[static_cast<std::size_t>(i)]);
    }
    std::vector<Complex> pts = vals;
    pts.emplace_back(g.dc_gain());
    pts.emplace_back(g.high_frequency_gain());
    for (int i = 1; i + 1 < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double m = std::abs(vals[k]);
        if (m >= std::abs(vals[k - 1]) && m >= std::abs(vals[k + 1]) && m > 0.0) {
            pts.push_back(refine_peak(g, grid[k - 1], grid[k + 1]));
        }
    }
    return cgeom::hco(pts, opts.geometry);
}

}  // namespace

InputSpace InputSpace::make(Kind k, double w) {
    if (!(w > 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("input space frequency must be positive and finite");
    }
    return {k, w};
}

std::string InputSpace::name() const {
    char w[32];
    std::snprintf(w, sizeof w, "%g", omega);
    switch (kind) {
        case Kind::Sinusoidal:
            return std::string("sinusoidal(") + w + ")";
        case Kind::Harmonic:
            return std::string("harmonic(") + w + ")";
        case Kind::Subharmonic:
            return std::string("subharmonic(") + w + ")";
        case Kind::FullL2:
            return "full";
    }
    return "?";
}

InputSpace::Kind parse_space_kind(const std::string& s) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "sinusoidal" || l == "sin") {
        return InputSpace::Kind::Sinusoidal;
    }
    if (l == "harmonic" || l == "harm") {
        return InputSpace::Kind::Harmonic;
    }
    if (l == "subharmonic" || l == "subharm") {
        return InputSpace::Kind::Subharmonic;
    }
    if (l == "full" || l == "fulll2" || l == "l2") {
        return InputSpace::Kind::FullL2;
    }
    throw std::invalid_argument("unknown input space '" + s + "'");
}

Region lti_srg(const TransferFunction& g, InputSpace space, const SrgOptions& opts) {
    const lti::PoleClass pc = lti::classify_poles(g);
    if (pc.unstable_pole_count > 0) {
        throw lti::LtiError("SRG of a transfer function with unstable poles is out of scope");
    }
    if (g.order() == 0) {
        return Region::point(g.num()[0] / g.den()[0]);
    }
    if (!g.is_proper()) {
        throw lti::LtiError("SRG of an improper transfer function is unbounded");
    }
    switch (space.kind) {
        case InputSpace::Kind::Sinusoidal:
            return Region::point(g.freq(space.omega));
        case InputSpace::Kind::Harmonic:
            return harmonic_srg(g, space.omega, opts);
        case InputSpace::Kind::Subharmonic:
            if (pc.integrator_count > 0) {
                return Region::unbounded();
            }
            return subharmonic_srg(g, space.omega, opts);
        case InputSpace::Kind::FullL2:
            if (pc.integrator_count > 0) {
                return Region::unbounded();
            }
            return full_srg(g, opts);
    }
    return Region::unbounded();
}

Region nonlinearity_srg(const SectorNonlinearity& phi, const cgeom::GeometryOptions& opts) {
    if (phi.alpha > phi.beta) {
        throw std::invalid_argument("sector requires alpha <= beta");
    }
    return Region::disk_between(phi.alpha, phi.beta, opts);
}

InputSpace input_space_for_block(BlockRole role, InputSpace target) {
    const bool loop_block = role == BlockRole::Zw || role == BlockRole::OutW;
    switch (target.kind) {
        case InputSpace::Kind::Sinusoidal:
            return loop_block ? InputSpace::harmonic(target.omega) : target;
        case InputSpace::Kind::Harmonic:
            return target;
        case InputSpace::Kind::Subharmonic:
            return loop_block ? InputSpace::full() : target;
        case InputSpace::Kind::FullL2:
            return target;
    }
    return target;
}

}  // namespace nlbode::srg
