#include "nlbode/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "json.hpp"
#include "nlbode/cgeom.hpp"
#include "nlbode/df.hpp"
#include "nlbode/lfr.hpp"
#include "nlbode/sim.hpp"

namespace nlbode::verify {

namespace {

using Complex = std::complex<double>;
using srg::InputSpace;
constexpr double kInf = std::numeric_limits<double>::infinity();

// DC-motor reference values.
constexpr double kGammaS = 1.29;
constexpr double kOmegaB = 3.3;
constexpr double kOmegaC = 4.58;
constexpr double kGamma1 = 0.213;
constexpr double kGamma10 = 1.27;
constexpr double kStepError = 0.0167;
constexpr double kAmp1 = 1.01;
constexpr double kAmp10 = 6.3;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string pct(double p) {
    std::ostringstream os;
    os << "+-" << p * 100 << "%";
    return os.str();
}

Check rel_check(std::string what, double measured, double expected, double rel) {
    const bool ok = std::isfinite(measured) && std::abs(measured - expected) <= rel * std::abs(expected);
    return {std::move(what), measured, expected, pct(rel), ok};
}

Check le_check(std::string what, double measured, double limit, std::string tol = "<=") {
    return {std::move(what), measured, limit, std::move(tol), measured <= limit};
}

Check bool_check(std::string what, bool ok) { return {std::move(what), ok ? 1.0 : 0.0, 1.0, "true", ok}; }

/// Lazily computed quantities shared between criteria.
class Context {
  public:
    explicit Context(const config::AnalysisConfig& cfg) : cfg_(cfg) {}

    const config::AnalysisConfig& cfg() const { return cfg_; }

    const lfr::BoundEvaluator& s_eval() {
        if (!s_eval_) {
            s_eval_.emplace(lfr::LfrSystem::sensitivity(cfg_.plant(), cfg_.controller(), cfg_.phi()),
                            cfg_.lfr_options());
        }
        return *s_eval_;
    }
    const lfr::BoundEvaluator& l_eval() {
        if (!l_eval_) {
            l_eval_.emplace(lfr::LfrSystem::loop_transfer(cfg_.plant(), cfg_.controller(), cfg_.phi()),
                            cfg_.lfr_options());
        }
        return *l_eval_;
    }
    const lfr::GainCurve& s_curve() {
        if (!s_curve_) {
            s_curve_ = lfr::sweep(s_eval(), cfg_.grid(), {}, cfg_.threads);
        }
        return *s_curve_;
    }
    const lfr::GainCurve& l_curve() {
        if (!l_curve_) {
            l_curve_ = lfr::sweep(l_eval(), cfg_.grid(), {true, true, false, true}, cfg_.threads);
        }
        return *l_curve_;
    }

  private:
    const config::AnalysisConfig& cfg_;
    std::optional<lfr::BoundEvaluator> s_eval_;
    std::optional<lfr::BoundEvaluator> l_eval_;
    std::optional<lfr::GainCurve> s_curve_;
    std::optional<lfr::GainCurve> l_curve_;
};

void criterion1(Context& ctx, CriterionResult& r) {
    const auto t0 = std::chrono::steady_clock::now();
    // Fresh evaluator so the timing covers the whole FullL2 computation.
    const lfr::BoundEvaluator s(lfr::LfrSystem::sensitivity(ctx.cfg().plant(), ctx.cfg().controller(),
                                                            ctx.cfg().phi()),
                                ctx.cfg().lfr_options());
    const double g = s.gamma(InputSpace::full());
    const double t = seconds_since(t0);
    r.checks.push_back(rel_check("gamma_full(S)", g, kGammaS, 0.05));
    r.checks.push_back(le_check("runtime_s", t, 30.0));
}

void criterion2(Context& ctx, CriterionResult& r) {
    const auto wb = lfr::closed_loop_bandwidth(ctx.s_curve());
    const auto wc = lfr::open_loop_bandwidth(ctx.l_curve());
    r.checks.push_back(rel_check("omega_B", wb.value_or(kInf), kOmegaB, 0.10));
    r.checks.push_back(rel_check("omega_c", wc.value_or(kInf), kOmegaC, 0.10));
}

void criterion3(Context& ctx, CriterionResult& r) {
    r.checks.push_back(rel_check("gamma_sin(S, 1)", ctx.s_eval().gamma(InputSpace::sinusoidal(1.0)), kGamma1, 0.05));
    r.checks.push_back(
        rel_check("gamma_sin(S, 10)", ctx.s_eval().gamma(InputSpace::sinusoidal(10.0)), kGamma10, 0.05));
}

/// Largest grid frequency at which `v` is infinite, +inf if none.
double divergence_frequency(const std::vector<double>& w, const std::vector<double>& v) {
    double last = -kInf;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (std::isinf(v[i])) {
            last = w[i];
        }
    }
    return last;
}

void criterion4(Context& ctx, CriterionResult& r) {
    const double h005 = ctx.l_eval().gamma(InputSpace::harmonic(0.05));
    const double h1 = ctx.l_eval().gamma(InputSpace::harmonic(1.0));
    r.checks.push_back(bool_check("gamma_harm(L, 0.05) unbounded", std::isinf(h005)));
    r.checks.push_back({"gamma_harm(L, 1) finite", h1, 0.0, "finite", std::isfinite(h1)});
    const auto& c = ctx.l_curve();
    const auto diverges = [&](const std::vector<double>& v) {
        const bool some_inf = std::any_of(v.begin(), v.end(), [](double x) { return std::isinf(x); });
        const bool some_fin = std::any_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
        return some_inf && some_fin;
    };
    const double ws = divergence_frequency(c.frequencies, c.gamma_sin);
    const double wh = divergence_frequency(c.frequencies, c.gamma_harm);
    r.checks.push_back({"gamma_sin(L) divergence frequency", ws, 0.0, "finite > 0", diverges(c.gamma_sin)});
    r.checks.push_back({"gamma_harm(L) divergence frequency", wh, 0.0, "finite > 0", diverges(c.gamma_harm)});
    r.note = "divergence frequency: largest grid point with an unbounded bound";
}

const config::ReferenceSpec* find_reference(const config::AnalysisConfig& cfg, const std::string& id) {
    for (const auto& ref : cfg.references) {
        if (ref.id == id) {
            return &ref;
        }
    }
    return nullptr;
}

void criterion5(Context& ctx, CriterionResult& r) {
    const auto& cfg = ctx.cfg();
    const auto* r1 = find_reference(cfg, "r1");
    const auto* r2 = find_reference(cfg, "r2");
    const auto* r3 = find_reference(cfg, "r3");
    if (!r1 || !r2 || !r3) {
        r.note = "config lacks references r1, r2 and r3";
        r.checks.push_back(bool_check("references present", false));
        return;
    }
    const auto run1 = sim::integrate(cfg.model(r1->signal), r1->t_end, cfg.dt);
    r.checks.push_back(rel_check("step steady-state error", std::abs(run1.mean_tail), kStepError, 0.05));

    const auto run2 = sim::integrate(cfg.model(r2->signal), r2->t_end, cfg.dt);
    r.checks.push_back(bool_check("ramp period_check(2 pi)", sim::period_check(run2, 2.0 * std::numbers::pi)));

    const auto& s3 = r3->signal;
    const auto run3 = sim::integrate(cfg.model(s3), r3->t_end, cfg.dt);
    const auto seg1 = sim::window_stats(run3, run3.e, 0.0, s3.t_switch, 2.0 * std::numbers::pi / s3.w1);
    const auto seg2 = sim::window_stats(run3, run3.e, s3.t_switch, run3.t.back(), 2.0 * std::numbers::pi / s3.w2);
    const auto trans = sim::window_stats(run3, run3.e, s3.t_switch, s3.t_switch + 5.0, std::nullopt);
    const double b1 = std::abs(s3.a) * ctx.s_eval().gamma(InputSpace::sinusoidal(s3.w1));
    const double b10 = std::abs(s3.a) * ctx.s_eval().gamma(InputSpace::sinusoidal(s3.w2));
    r.checks.push_back(rel_check("r3 error amplitude at w1", seg1.amplitude, kAmp1, 0.05));
    r.checks.push_back(rel_check("r3 error amplitude at w2", seg2.amplitude, kAmp10, 0.05));
    r.checks.push_back(le_check("r3 amplitude w1 vs a*gamma_sin", seg1.amplitude, b1 * 1.02, "<= bound +2%"));
    r.checks.push_back(le_check("r3 amplitude w2 vs a*gamma_sin", seg2.amplitude, b10 * 1.02, "<= bound +2%"));
    r.checks.push_back(
        le_check("r3 max|e| after switch / steady amplitude", trans.amplitude / seg2.amplitude, 1.5, "<= 1.5"));
}

void criterion6(Context& ctx, CriterionResult& r) {
    const auto& cfg = ctx.cfg();
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = cfg.model(sim::ReferenceSignal::step(0.0, 0.0));
    sim::ProbeOptions po;
    po.dt = cfg.dt;
    po.threads = cfg.threads;
    std::ostringstream note;
    for (const auto& ps : cfg.probe_spaces) {
        const InputSpace space = ps.kind == srg::InputSpace::Kind::Sinusoidal ? InputSpace::sinusoidal(ps.omega)
                                 : ps.kind == srg::InputSpace::Kind::Harmonic ? InputSpace::harmonic(ps.omega)
                                                                              : InputSpace::subharmonic(ps.omega);
        auto res = sim::incremental_gain_probe(model, space, cfg.probe_pairs, cfg.seed, po);
        res.bound = ctx.s_eval().gamma(space);
        const auto violations =
            std::count_if(res.ratios.begin(), res.ratios.end(), [&](double x) { return x > *res.bound * 1.02; });
        r.checks.push_back(le_check("probe " + space.name() + " max ratio", res.max_ratio, *res.bound * 1.02,
                                    "<= gamma +2%"));
        note << space.name() << ": " << violations << " violations of " << cfg.probe_pairs << "; ";
    }
    r.checks.push_back(le_check("runtime_s", seconds_since(t0), 600.0));
    r.note = note.str();
}

void criterion7(Context& ctx, CriterionResult& r) {
    const auto& s = ctx.s_curve();
    const auto& l = ctx.l_curve();
    r.checks.push_back(le_check("ordering violations (S)", static_cast<double>(s.ordering_violations.size()), 0.0));
    r.checks.push_back(le_check("ordering violations (L)", static_cast<double>(l.ordering_violations.size()), 0.0));
    r.checks.push_back(rel_check("gamma_harm(S) at lowest w vs gamma_full", s.gamma_harm.front(), s.gamma_full, 0.02));
    r.checks.push_back(
        rel_check("gamma_subharm(S) at highest w vs gamma_full", s.gamma_subharm.back(), s.gamma_full, 0.02));
    if (!s.ordering_violations.empty()) {
        r.note = s.ordering_violations.front();
    }
}

/// Largest relative deviation of a from b, ignoring points where b is not finite.
double max_rel_dev(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isfinite(b[i]) && b[i] != 0.0) {
            worst = std::max(worst, std::abs(a[i] - b[i]) / std::abs(b[i]));
        } else if (a[i] != b[i]) {
            worst = kInf;
        }
    }
    return worst;
}

void criterion8(Context& ctx, CriterionResult& r) {
    const auto& cfg = ctx.cfg();
    const srg::SectorNonlinearity zero{0.0, 0.0, "zero"};
    const auto grid = cfg.grid();
    const auto s = lfr::sweep(lfr::LfrSystem::sensitivity(cfg.plant(), cfg.controller(), zero), grid,
                              {true, true, true, false}, cfg.lfr_options(), cfg.threads);
    const auto l = lfr::sweep(lfr::LfrSystem::loop_transfer(cfg.plant(), cfg.controller(), zero), grid,
                              {true, true, false, false}, cfg.lfr_options(), cfg.threads);
    // Reference magnitudes straight from the closed-loop and loop polynomials.
    const auto g = cfg.plant();
    const auto k = cfg.controller();
    std::vector<double> s_mag;
    std::vector<double> l_mag;
    for (double w : grid) {
        const Complex gk = g.freq(w) * k.freq(w);
        s_mag.push_back(std::abs(1.0 / (1.0 + gk)));
        l_mag.push_back(std::abs(gk));
    }
    r.checks.push_back(le_check("max rel |gamma_sin(S) - |S_LTI||", max_rel_dev(s.gamma_sin, s_mag), 1e-6));
    r.checks.push_back(le_check("max rel |gamma_sin(L) - |L_LTI||", max_rel_dev(l.gamma_sin, l_mag), 1e-6));

    const double step = grid.size() > 1 ? grid[1] / grid[0] : 1.0;
    const auto wb = lfr::closed_loop_bandwidth(s);
    const auto wb_lti = lfr::first_crossing(grid, s_mag, 1.0 / std::sqrt(2.0), true);
    const auto wc = lfr::open_loop_bandwidth(l);
    const auto wc_lti = lfr::first_crossing(grid, l_mag, 1.0, false);
    const auto ratio = [](std::optional<double> a, std::optional<double> b) {
        return a && b ? std::max(*a / *b, *b / *a) : kInf;
    };
    r.checks.push_back(le_check("omega_B / LTI crossing", ratio(wb, wb_lti), step, "<= one grid step"));
    r.checks.push_back(le_check("omega_c / LTI crossing", ratio(wc, wc_lti), step, "<= one grid step"));
}

/// Random points of a bounded region: boundary samples plus rejection-sampled interior points.
std::vector<Complex> dense_points(const cgeom::Region& reg, std::mt19937_64& rng, int interior) {
    std::vector<Complex> pts = reg.boundary_samples();
    double xmin = kInf;
    double xmax = -kInf;
    double ymax = 0.0;
    for (Complex z : pts) {
        xmin = std::min(xmin, z.real());
        xmax = std::max(xmax, z.real());
        ymax = std::max(ymax, std::abs(z.imag()));
    }
    std::uniform_real_distribution<double> ux(xmin, xmax);
    std::uniform_real_distribution<double> uy(-ymax, ymax);
    for (int got = 0, tries = 0; got < interior && tries < 100 * interior; ++tries) {
        const Complex z(ux(rng), uy(rng));
        if (reg.contains(z)) {
            pts.push_back(z);
            ++got;
        }
    }
    return pts;
}

cgeom::Region random_hull(std::mt19937_64& rng, Complex center, double spread, int n,
                          const cgeom::GeometryOptions& go) {
    std::normal_distribution<double> nd(0.0, spread);
    std::vector<Complex> pts;
    for (int i = 0; i < n; ++i) {
        pts.emplace_back(center.real() + nd(rng), std::abs(center.imag() + nd(rng)));
    }
    return cgeom::hco(pts, go);
}

void criterion9(Context& ctx, CriterionResult& r) {
    const auto& cfg = ctx.cfg();
    cgeom::GeometryOptions go;
    go.resolution = cfg.resolution;
    std::mt19937_64 rng(cfg.seed);

    double idem = 0.0;
    double sum_excess = 0.0;
    double prod_dev = 0.0;
    long violations = 0;
    for (int trial = 0; trial < 8; ++trial) {
        std::uniform_real_distribution<double> uc(-2.0, 2.0);
        const auto a = random_hull(rng, {uc(rng), std::abs(uc(rng))}, 0.6, 12, go);
        const auto b = random_hull(rng, {uc(rng), std::abs(uc(rng))}, 0.6, 12, go);
        const auto a2 = cgeom::hco(a.boundary_samples(), go);
        idem = std::max(idem, cgeom::hausdorff_distance(a, a2) / std::max(1e-12, cgeom::radius(a)));

        const auto sum = cgeom::minkowski_sum(a, b, go);
        const auto prod = cgeom::minkowski_product(a, b, go);
        sum_excess = std::max(sum_excess, cgeom::radius(sum) - (cgeom::radius(a) + cgeom::radius(b)));
        const double rp = cgeom::radius(a) * cgeom::radius(b);
        prod_dev = std::max(prod_dev, std::abs(cgeom::radius(prod) - rp) / rp);

        const auto pa = dense_points(a, rng, 150);
        const auto pb = dense_points(b, rng, 150);
        for (std::size_t i = 0; i < pa.size(); i += 3) {
            for (std::size_t j = 0; j < pb.size(); j += 3) {
                const Complex s = pa[i] + pb[j];
                const Complex p = pa[i] * pb[j];
                violations += !sum.contains(s, cgeom::tolerance(cgeom::radius(sum), go));
                violations += !prod.contains(p, cgeom::tolerance(cgeom::radius(prod), go));
            }
        }
    }
    r.checks.push_back(le_check("hull idempotence (rel Hausdorff)", idem, 1e-3));
    const auto d13 = cgeom::Region::disk_between(1.0, 3.0, go);
    const auto inv = cgeom::mobius_invert(d13, go);
    const auto inv2 = cgeom::mobius_invert(inv, go);
    r.checks.push_back(le_check("inversion D[1,3] -> D[1/3,1] (Hausdorff)",
                                cgeom::hausdorff_distance(inv, cgeom::Region::disk_between(1.0 / 3.0, 1.0, go)),
                                1e-3));
    r.checks.push_back(le_check("inversion involution (Hausdorff)", cgeom::hausdorff_distance(inv2, d13), 1e-3));
    r.checks.push_back(le_check("product radius deviation", prod_dev, 0.01));
    r.checks.push_back(le_check("sum radius excess over sub-additivity", sum_excess, 1e-9));
    r.checks.push_back(le_check("Minkowski containment violations", static_cast<double>(violations), 0.0));

    auto hi = cfg.lfr_options();
    hi.srg.geometry.resolution = 2 * cfg.resolution;
    const lfr::BoundEvaluator s2(lfr::LfrSystem::sensitivity(cfg.plant(), cfg.controller(), cfg.phi()), hi);
    const double g1 = ctx.s_eval().gamma(InputSpace::full());
    const double g2 = s2.gamma(InputSpace::full());
    r.checks.push_back(le_check("resolution doubling rel change of gamma_full(S)", std::abs(g2 - g1) / g1, 0.01));
}

void criterion10(Context& ctx, CriterionResult& r) {
    const auto& cfg = ctx.cfg();
    const auto grid = cfg.grid();
    const srg::SectorNonlinearity zero{0.0, 0.0, "zero"};
    const auto lin = lfr::LfrSystem::sensitivity(cfg.plant(), cfg.controller(), zero);
    const auto d0 = df::df_curve(lin, grid);
    std::vector<double> s_mag;
    for (double w : grid) {
        s_mag.push_back(std::abs(lin.out_in.freq(w)));
    }
    r.checks.push_back(le_check("delta=0 DF vs |S_LTI| (max rel)", max_rel_dev(d0.df_gain, s_mag), 1e-12));

    std::vector<double> sample;
    const std::size_t n = grid.size();
    for (int i = 0; i < 10; ++i) {
        sample.push_back(grid[std::min(n - 1, static_cast<std::size_t>(i) * (n - 1) / 9)]);
    }
    const auto d = df::df_curve(ctx.s_eval().system(), sample);
    double above_sin = -kInf;
    double below_lti = -kInf;
    std::ostringstream dev;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double gs = ctx.s_eval().gamma(InputSpace::sinusoidal(sample[i]));
        const double lm = std::abs(ctx.s_eval().system().out_in.freq(sample[i]));
        above_sin = std::max(above_sin, d.df_gain[i] / gs - 1.0);
        below_lti = std::max(below_lti, 1.0 - d.df_gain[i] / lm);
        if (d.df_gain[i] > gs * 1.02 || d.df_gain[i] < lm * 0.98) {
            dev << "w=" << sample[i] << " df=" << d.df_gain[i] << " sin=" << gs << " lti=" << lm << "; ";
        }
    }
    r.checks.push_back(le_check("max (DF / gamma_sin - 1) over 10 frequencies", above_sin, 0.02));
    r.checks.push_back(le_check("max (1 - DF / |S_LTI|) over 10 frequencies", below_lti, 0.02));
    r.note = dev.str().empty() ? "no deviations" : "deviations: " + dev.str();
}

const char* kTitles[] = {
    "",
    "gamma_full(S) reproduction",
    "bandwidths",
    "pointwise gains",
    "divergence structure of L",
    "simulation cross-checks",
    "empirical incremental gain probe",
    "gain ordering",
    "LTI reductions",
    "geometry properties",
    "describing function comparison",
};

}  // namespace

bool CriterionResult::pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<CriterionResult> run_acceptance(const config::AnalysisConfig& cfg, const VerifyOptions& opts) {
    using Fn = std::function<void(Context&, CriterionResult&)>;
    const Fn fns[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                      criterion6, criterion7, criterion8, criterion9, criterion10};
    Context ctx(cfg);
    std::vector<CriterionResult> out;
    for (int id = 1; id <= 10; ++id) {
        if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end()) {
            continue;
        }
        CriterionResult r;
        r.id = id;
        r.title = kTitles[id];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fns[id - 1](ctx, r);
        } catch (const std::exception& e) {
            r.checks.push_back(bool_check("completed without error", false));
            r.note = e.what();
        }
        r.seconds = seconds_since(t0);
        out.push_back(std::move(r));
    }
    return out;
}

std::string report_json(const std::vector<CriterionResult>& results) {
    using nlohmann::json;
    const auto num = [](double v) -> json {
        if (std::isnan(v)) {
            return nullptr;
        }
        if (std::isinf(v)) {
            return v > 0 ? "inf" : "-inf";
        }
        return v;
    };
    json arr = json::array();
    bool all = true;
    for (const auto& r : results) {
        json checks = json::array();
        for (const auto& c : r.checks) {
            checks.push_back({{"what", c.what},
                              {"measured", num(c.measured)},
                              {"expected", num(c.expected)},
                              {"tolerance", c.tolerance},
                              {"pass", c.pass}});
        }
        arr.push_back({{"id", r.id},
                       {"title", r.title},
                       {"pass", r.pass()},
                       {"seconds", r.seconds},
                       {"checks", checks},
                       {"note", r.note}});
        all = all && r.pass();
    }
    return json{{"all_pass", all}, {"criteria", arr}}.dump(2);
}

std::string summary_line(const CriterionResult& r) {
    std::ostringstream os;
    os << (r.pass() ? "PASS " : "FAIL ") << r.id << ' ' << r.title << ':';
    for (const auto& c : r.checks) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", c.measured);
        os << ' ' << c.what << '=' << buf;
    }
    if (!r.note.empty()) {
        os << " [" << r.note << ']';
    }
    return os.str();
}

}  // namespace nlbode::verify
