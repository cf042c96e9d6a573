#include "nlbode/lfr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "../common/parallel.hpp"

namespace nlbode::lfr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_tf(const TransferFunction& a, const TransferFunction& b) {
    return a.num() == b.num() && a.den() == b.den();
}

Region complete_sum_operand(const Region& r, const LfrOptions& opts) {
    if (r.kind() != Region::Kind::Bounded && r.kind() != Region::Kind::PointSet) {
        return r;
    }
    return opts.completion == Completion::ArcOnly ? cgeom::arc_complete(r, opts.srg.geometry)
                                                  : cgeom::chord_complete(r);
}

Region complete_product_operand(const Region& r, const LfrOptions& opts) {
    if (r.kind() != Region::Kind::Bounded && r.kind() != Region::Kind::PointSet) {
        return r;
    }
    return cgeom::arc_complete(r, opts.srg.geometry);
}

std::pair<double, double> real_extent(const Region& r) {
    double lo = kInf;
    double hi = -kInf;
    for (cgeom::Complex z : r.boundary_samples()) {
        lo = std::min(lo, z.real());
        hi = std::max(hi, z.real());
    }
    return {lo, hi};
}

/// With one sector endpoint at 0, SRG(phi)^{-1} is the half-plane
/// {Re z >= 1/beta} (alpha = 0) or {Re z <= 1/alpha} (beta = 0).
struct HalfPlane {
    double edge;
    bool right;
};

std::optional<HalfPlane> inverse_half_plane(const SectorNonlinearity& phi) {
    if (phi.alpha == 0.0 && phi.beta > 0.0) {
        return HalfPlane{1.0 / phi.beta, true};
    }
    if (phi.beta == 0.0 && phi.alpha < 0.0) {
        return HalfPlane{1.0 / phi.alpha, false};
    }
    return std::nullopt;
}

/// (SRG(phi)^{-1} - zw)^{-1}, or Region::unbounded().
Region loop_inverse(const SectorNonlinearity& phi, const Region& zw, const LfrOptions& opts) {
    const auto& geo = opts.srg.geometry;
    if (zw.is_unbounded()) {
        return Region::unbounded();
    }
    const Region neg = complete_sum_operand(cgeom::scale(zw, -1.0), opts);
    if (const auto hp = inverse_half_plane(phi)) {
        const auto [lo, hi] = real_extent(neg);
        if (hp->right) {
            const double h = hp->edge + lo;
            return h > geo.abs_tol ? Region::disk_between(0.0, 1.0 / h, geo) : Region::unbounded();
        }
        const double h = hp->edge + hi;
        return h < -geo.abs_tol ? Region::disk_between(1.0 / h, 0.0, geo) : Region::unbounded();
    }
    const Region inv_phi = cgeom::mobius_invert(srg::nonlinearity_srg(phi, geo), geo);
    const Region sum = cgeom::minkowski_sum(inv_phi, neg, geo);
    if (sum.kind() == Region::Kind::Unbounded) {
        return sum;
    }
    if (sum.kind() == Region::Kind::Bounded && sum.contains(0.0, 0.0)) {
        return Region::unbounded();
    }
    if (sum.kind() == Region::Kind::PointSet && sum.contains_zero()) {
        return Region::unbounded();
    }
    const Region m = cgeom::mobius_invert(sum, geo);
    return m.is_unbounded() ? Region::unbounded() : m;
}

/// Completed SRG(P_out_w) * M over the loop space.
Region loop_term(const LfrSystem& sys, InputSpace space, const LfrOptions& opts) {
    const Region zw = srg::lti_srg(sys.zw, space, opts.srg);
    const Region ow = same_tf(sys.zw, sys.out_w) ? zw : srg::lti_srg(sys.out_w, space, opts.srg);
    if (ow.is_unbounded()) {
        return Region::unbounded();
    }
    const Region m = loop_inverse(sys.phi, zw, opts);
    if (m.is_unbounded()) {
        return m;
    }
    return cgeom::minkowski_product(complete_product_operand(ow, opts), m, opts.srg.geometry);
}

Region assemble(const LfrSystem& sys, InputSpace target, const Region& loop, const LfrOptions& opts) {
    const InputSpace inj = srg::input_space_for_block(srg::BlockRole::ZIn, target);
    const Region oi = srg::lti_srg(sys.out_in, inj, opts.srg);
    if (oi.is_unbounded()) {
        return Region::unbounded();
    }
    if (sys.linear()) {
        return complete_sum_operand(oi, opts);
    }
    if (loop.is_unbounded()) {
        return Region::unbounded();
    }
    const Region zi = same_tf(sys.z_in, sys.out_in) ? oi : srg::lti_srg(sys.z_in, inj, opts.srg);
    if (zi.is_unbounded()) {
        return Region::unbounded();
    }
    const auto& geo = opts.srg.geometry;
    const Region prod = cgeom::minkowski_product(complete_product_operand(loop, opts), zi, geo);
    return cgeom::minkowski_sum(prod, complete_sum_operand(oi, opts), geo);
}

std::string fmt_num(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json json_num(double v) {
    if (std::isnan(v)) {
        return nullptr;
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

nlohmann::json json_array(const std::vector<double>& v) {
    auto arr = nlohmann::json::array();
    for (double x : v) {
        arr.push_back(json_num(x));
    }
    return arr;
}

}  // namespace

LfrSystem LfrSystem::sensitivity(const TransferFunction& g, const TransferFunction& k, SectorNonlinearity phi) {
    const auto b = lti::lfr_blocks_sensitivity(g, k);
    return {b.zw, b.ew, b.zr, b.er, std::move(phi), "S"};
}

LfrSystem LfrSystem::loop_transfer(const TransferFunction& g, const TransferFunction& k, SectorNonlinearity phi) {
    const auto b = lti::lfr_blocks_looptransfer(g, k);
    return {b.zw, b.yw, b.ze, b.ye, std::move(phi), "L"};
}

Region lfr_bound_region(const LfrSystem& sys, InputSpace target, const LfrOptions& opts) {
    const InputSpace loop_space = srg::input_space_for_block(srg::BlockRole::Zw, target);
    const Region loop = sys.linear() ? Region::empty() : loop_term(sys, loop_space, opts);
    return assemble(sys, target, loop, opts);
}

BoundEvaluator::BoundEvaluator(LfrSystem sys, LfrOptions opts) : sys_(std::move(sys)), opts_(std::move(opts)) {
    if (!sys_.linear()) {
        loop_full_ = loop_term(sys_, InputSpace::full(), opts_);
    }
}

Region BoundEvaluator::bound(InputSpace target) const {
    const InputSpace loop_space = srg::input_space_for_block(srg::BlockRole::Zw, target);
    if (sys_.linear()) {
        return assemble(sys_, target, Region::empty(), opts_);
    }
    if (loop_space.kind == InputSpace::Kind::FullL2) {
        return assemble(sys_, target, loop_full_, opts_);
    }
    return assemble(sys_, target, loop_term(sys_, loop_space, opts_), opts_);
}

std::array<double, 3> BoundEvaluator::gammas_at(double w, bool sin, bool harm, bool subharm) const {
    const auto safe = [](auto&& f) {
        try {
            return cgeom::radius(f());
        } catch (const cgeom::GeometryError&) {
            return kInf;
        } catch (const lti::LtiError&) {
            return kInf;
        }
    };
    std::array<double, 3> out{kNotComputed, kNotComputed, kNotComputed};
    if (sin || harm) {
        Region loop;
        bool loop_failed = false;
        if (!sys_.linear()) {
            try {
                loop = loop_term(sys_, InputSpace::harmonic(w), opts_);
            } catch (const cgeom::GeometryError&) {
                loop_failed = true;
            } catch (const lti::LtiError&) {
                loop_failed = true;
            }
        }
        if (sin) {
            out[0] = loop_failed ? kInf : safe([&] { return assemble(sys_, InputSpace::sinusoidal(w), loop, opts_); });
        }
        if (harm) {
            out[1] = loop_failed ? kInf : safe([&] { return assemble(sys_, InputSpace::harmonic(w), loop, opts_); });
        }
    }
    if (subharm) {
        out[2] = safe([&] { return bound(InputSpace::subharmonic(w)); });
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, double points_per_decade) {
    if (!(lo > 0.0) || !(hi >= lo) || !(points_per_decade > 0.0)) {
        throw std::invalid_argument("log grid requires 0 < lo <= hi and points_per_decade > 0");
    }
    if (hi == lo) {
        return {lo};
    }
    const double decades = std::log10(hi / lo);
    const auto n = static_cast<std::size_t>(std::llround(decades * points_per_decade)) + 1;
    std::vector<double> g(std::max<std::size_t>(n, 2));
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = lo * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(g.size() - 1));
    }
    g.back() = hi;
    return g;
}

GainCurve sweep(const LfrSystem& sys, const std::vector<double>& grid, SweepKinds kinds, const LfrOptions& opts,
                unsigned threads) {
    return sweep(BoundEvaluator(sys, opts), grid, kinds, threads);
}

GainCurve sweep(const BoundEvaluator& eval, const std::vector<double>& grid, SweepKinds kinds, unsigned threads) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
            throw std::invalid_argument("frequency grid must be positive and strictly increasing");
        }
    }
    const auto safe_gamma = [&](InputSpace space) {
        try {
            return eval.gamma(space);
        } catch (const cgeom::GeometryError&) {
            return kInf;
        } catch (const lti::LtiError&) {
            return kInf;
        }
    };

    GainCurve c;
    c.label = eval.system().label;
    c.frequencies = grid;
    const std::size_t n = grid.size();
    c.gamma_sin.assign(n, kNotComputed);
    c.gamma_harm.assign(n, kNotComputed);
    c.gamma_subharm.assign(n, kNotComputed);
    c.lti_mag.assign(n, kNotComputed);
    if (kinds.full) {
        c.gamma_full = safe_gamma(InputSpace::full());
    }
    detail::parallel_for(n, threads, [&](std::size_t i) {
        const double w = grid[i];
        const auto g = eval.gammas_at(w, kinds.sinusoidal, kinds.harmonic, kinds.subharmonic);
        c.gamma_sin[i] = g[0];
        c.gamma_harm[i] = g[1];
        c.gamma_subharm[i] = g[2];
        try {
            c.lti_mag[i] = std::abs(eval.system().out_in.freq(w));
        } catch (const lti::LtiError&) {
            c.lti_mag[i] = kInf;
        }
    });
    c.ordering_violations = check_ordering(c);
    return c;
}

std::vector<std::string> check_ordering(const GainCurve& c, double rel_tol) {
    std::vector<std::string> out;
    const auto le = [&](double a, double b) {
        if (std::isnan(a) || std::isnan(b) || std::isinf(b)) {
            return true;
        }
        return a <= b * (1.0 + rel_tol) + 1e-12;
    };
    auto report = [&](std::size_t i, const char* what, double a, double b) {
        std::ostringstream os;
        os << "w=" << fmt_num(c.frequencies[i]) << ": " << what << " (" << fmt_num(a) << " > " << fmt_num(b) << ")";
        out.push_back(os.str());
    };
    for (std::size_t i = 0; i < c.frequencies.size(); ++i) {
        if (!le(c.gamma_sin[i], c.gamma_harm[i])) {
            report(i, "gamma_sin > gamma_harm", c.gamma_sin[i], c.gamma_harm[i]);
        }
        if (!le(c.gamma_sin[i], c.gamma_subharm[i])) {
            report(i, "gamma_sin > gamma_subharm", c.gamma_sin[i], c.gamma_subharm[i]);
        }
        if (!le(c.gamma_harm[i], c.gamma_full)) {
            report(i, "gamma_harm > gamma_full", c.gamma_harm[i], c.gamma_full);
        }
        if (!le(c.gamma_subharm[i], c.gamma_full)) {
            report(i, "gamma_subharm > gamma_full", c.gamma_subharm[i], c.gamma_full);
        }
    }
    return out;
}

std::optional<double> first_crossing(const std::vector<double>& w, const std::vector<double>& values, double level,
                                     bool upward) {
    for (std::size_t i = 1; i < w.size() && i < values.size(); ++i) {
        const double a = values[i - 1];
        const double b = values[i];
        if (std::isnan(a) || std::isnan(b)) {
            continue;
        }
        const bool crossed = upward ? (a < level && b >= level) : (a > level && b <= level);
        if (!crossed) {
            continue;
        }
        if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0 || b <= 0.0 || a == b) {
            return w[i];
        }
        const double ya = 20.0 * std::log10(a);
        const double yb = 20.0 * std::log10(b);
        const double t = (20.0 * std::log10(level) - ya) / (yb - ya);
        return std::exp(std::log(w[i - 1]) + t * (std::log(w[i]) - std::log(w[i - 1])));
    }
    return std::nullopt;
}

std::optional<double> closed_loop_bandwidth(const GainCurve& curve) {
    return first_crossing(curve.frequencies, curve.gamma_subharm, 1.0 / std::sqrt(2.0), true);
}

std::optional<double> open_loop_bandwidth(const GainCurve& curve) {
    return first_crossing(curve.frequencies, curve.gamma_harm, 1.0, false);
}

std::vector<double> default_tau_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 20; ++i) {
        g.push_back(0.05 * i);
    }
    return g;
}

StabilityCertificate stability_certificate(const SectorNonlinearity& h1, const TransferFunction& h2,
                                           const std::vector<double>& tau_grid, const srg::SrgOptions& opts) {
    if (tau_grid.empty()) {
        throw std::invalid_argument("tau grid must not be empty");
    }
    const Region s2 = srg::lti_srg(h2, InputSpace::full(), opts);
    if (h1.alpha == 0.0 && h1.beta == 0.0) {
        return {true, kInf, 0.0, 1.0};
    }
    const auto& geo = opts.geometry;
    const auto hp = inverse_half_plane(h1);
    const Region inv = hp ? Region::empty() : cgeom::mobius_invert(srg::nonlinearity_srg(h1, geo), geo);

    StabilityCertificate cert{false, kInf, kInf, 1.0};
    for (double tau : tau_grid) {
        if (!(tau > 0.0 && tau <= 1.0)) {
            throw std::invalid_argument("tau grid values must lie in (0, 1]");
        }
        const Region scaled = cgeom::scale(s2, -tau);
        double d = 0.0;
        if (scaled.is_unbounded()) {
            d = 0.0;
        } else if (hp) {
            const auto [lo, hi] = real_extent(scaled);
            d = hp->right ? std::max(0.0, hp->edge - hi) : std::max(0.0, lo - hp->edge);
        } else {
            d = cgeom::set_distance(inv, scaled, geo);
        }
        if (d < cert.r_m) {
            cert.r_m = d;
            cert.worst_tau = tau;
        }
    }
    cert.certified = cert.r_m > geo.abs_tol;
    cert.gain_bound = cert.r_m > 0.0 ? 1.0 / cert.r_m : kInf;
    return cert;
}

LfrSystem apply_weights(const LfrSystem& sys, const TransferFunction& w_in, const TransferFunction& w_out) {
    for (const auto* w : {&w_in, &w_out}) {
        const auto pc = lti::classify_poles(*w);
        if (pc.unstable_pole_count > 0 || pc.integrator_count > 0) {
            throw lti::LtiError("weighting filter must be strictly stable");
        }
    }
    LfrSystem out = sys;
    out.out_w = w_out * sys.out_w;
    out.z_in = sys.z_in * w_in;
    out.out_in = w_out * sys.out_in * w_in;
    return out;
}

void write_curve_csv(std::ostream& os, const GainCurve& c) {
    const bool df = !c.df_gain.empty();
    os << "omega_radps,gamma_sin,gamma_harm,gamma_subharm,gamma_full,s_lti_mag" << (df ? ",df_gain" : "") << '\n';
    for (std::size_t i = 0; i < c.frequencies.size(); ++i) {
        os << fmt_num(c.frequencies[i]) << ',' << fmt_num(c.gamma_sin[i]) << ',' << fmt_num(c.gamma_harm[i]) << ','
           << fmt_num(c.gamma_subharm[i]) << ',' << fmt_num(c.gamma_full) << ',' << fmt_num(c.lti_mag[i]);
        if (df) {
            os << ',' << fmt_num(c.df_gain[i]);
        }
        os << '\n';
    }
}

std::string curve_json(const GainCurve& c) {
    nlohmann::json j;
    j["label"] = c.label;
    j["omega_radps"] = json_array(c.frequencies);
    j["gamma_sin"] = json_array(c.gamma_sin);
    j["gamma_harm"] = json_array(c.gamma_harm);
    j["gamma_subharm"] = json_array(c.gamma_subharm);
    j["gamma_full"] = json_num(c.gamma_full);
    j["s_lti_mag"] = json_array(c.lti_mag);
    if (!c.df_gain.empty()) {
        j["df_gain"] = json_array(c.df_gain);
    }
    j["bandwidth_closed"] = c.bandwidth_closed ? nlohmann::json(*c.bandwidth_closed) : nlohmann::json(nullptr);
    j["bandwidth_open"] = c.bandwidth_open ? nlohmann::json(*c.bandwidth_open) : nlohmann::json(nullptr);
    j["ordering_violations"] = c.ordering_violations;
    return j.dump(2);
}

}  // namespace nlbode::lfr
