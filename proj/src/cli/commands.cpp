#include "nlbode/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "json.hpp"
#include "nlbode/df.hpp"
#include "nlbode/lfr.hpp"
#include "nlbode/sim.hpp"
#include "nlbode/verify.hpp"

namespace nlbode::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json num(double v) {
    if (std::isnan(v)) {
        return nullptr;
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

json opt(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) {
        throw std::runtime_error("cannot write '" + p.string() + "'");
    }
    return f;
}

void emit_summary(const json& summary, Streams io) {
    if (io.json) {
        io.out << summary.dump(2) << '\n';
    } else {
        for (const auto& [k, v] : summary.items()) {
            io.out << k << ": " << v.dump() << '\n';
        }
    }
}

srg::InputSpace make_space(const std::string& name, double omega) {
    const auto kind = srg::parse_space_kind(name);
    switch (kind) {
        case srg::InputSpace::Kind::Sinusoidal:
            return srg::InputSpace::sinusoidal(omega);
        case srg::InputSpace::Kind::Harmonic:
            return srg::InputSpace::harmonic(omega);
        case srg::InputSpace::Kind::Subharmonic:
            return srg::InputSpace::subharmonic(omega);
        case srg::InputSpace::Kind::FullL2:
            break;
    }
    return srg::InputSpace::full();
}

}  // namespace

int cmd_bode(const config::AnalysisConfig& cfg, Streams io) {
    std::optional<lfr::LfrSystem> s_sys;
    try {
        s_sys = lfr::LfrSystem::sensitivity(cfg.plant(), cfg.controller(), cfg.phi());
    } catch (const lti::LtiError& e) {
        io.err << "error: " << e.what() << '\n';
        return kExitUnstable;
    }
    const auto l_sys = lfr::LfrSystem::loop_transfer(cfg.plant(), cfg.controller(), cfg.phi());
    const auto grid = cfg.grid();
    const lfr::BoundEvaluator s_eval(*s_sys, cfg.lfr_options());
    const lfr::BoundEvaluator l_eval(l_sys, cfg.lfr_options());

    auto s = lfr::sweep(s_eval, grid, {}, cfg.threads);
    s.df_gain = df::df_curve(*s_sys, grid).df_gain;
    s.bandwidth_closed = lfr::closed_loop_bandwidth(s);
    auto l = lfr::sweep(l_eval, grid, {true, true, false, true}, cfg.threads);
    l.df_gain = df::df_curve(l_sys, grid).df_gain;
    l.bandwidth_open = lfr::open_loop_bandwidth(l);

    const fs::path dir(cfg.out_dir);
    for (const auto* c : {&s, &l}) {
        auto csv = open_out(dir / (c->label + "_curve.csv"));
        lfr::write_curve_csv(csv, *c);
        auto js = open_out(dir / (c->label + "_curve.json"));
        js << lfr::curve_json(*c) << '\n';
    }
    const auto cert = lfr::stability_certificate(cfg.phi(), -s_sys->zw, cfg.tau_grid(), cfg.lfr_options().srg);
    for (const auto& v : s.ordering_violations) {
        io.err << "warning: ordering violation (S): " << v << '\n';
    }
    for (const auto& v : l.ordering_violations) {
        io.err << "warning: ordering violation (L): " << v << '\n';
    }
    const json summary{
        {"gamma_full_S", num(s.gamma_full)},
        {"gamma_full_L", num(l.gamma_full)},
        {"modulus_margin_lower_bound", num(1.0 / s.gamma_full)},
        {"wB", opt(s.bandwidth_closed)},
        {"wc", opt(l.bandwidth_open)},
        {"points", grid.size()},
        {"stability", {{"certified", cert.certified}, {"r_m", num(cert.r_m)}, {"gain_bound", num(cert.gain_bound)}}},
        {"ordering_violations", s.ordering_violations.size() + l.ordering_violations.size()},
        {"out_dir", cfg.out_dir},
    };
    auto sj = open_out(dir / "summary.json");
    sj << summary.dump(2) << '\n';
    emit_summary(summary, io);
    return kExitOk;
}

int cmd_srg(const config::AnalysisConfig& cfg, const std::string& system, const std::string& block,
            const std::string& space, double omega, Streams io) {
    if (system != "S" && system != "L") {
        io.err << "error: unknown system '" << system << "' (expected S or L)\n";
        return kExitConfig;
    }
    srg::InputSpace sp;
    try {
        sp = make_space(space, omega);
    } catch (const std::invalid_argument& e) {
        io.err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    std::optional<lfr::LfrSystem> sys;
    try {
        sys = system == "S" ? lfr::LfrSystem::sensitivity(cfg.plant(), cfg.controller(), cfg.phi())
                            : lfr::LfrSystem::loop_transfer(cfg.plant(), cfg.controller(), cfg.phi());
    } catch (const lti::LtiError& e) {
        io.err << "error: " << e.what() << '\n';
        return kExitUnstable;
    }
    const auto opts = cfg.lfr_options();
    const auto& geo = opts.srg.geometry;
    cgeom::Region region;
    if (block == "zw" || block == "out_w" || block == "z_in" || block == "out_in") {
        const auto& tf = block == "zw" ? sys->zw : block == "out_w" ? sys->out_w : block == "z_in" ? sys->z_in : sys->out_in;
        const auto role = block == "zw"      ? srg::BlockRole::Zw
                          : block == "out_w" ? srg::BlockRole::OutW
                          : block == "z_in"  ? srg::BlockRole::ZIn
                                             : srg::BlockRole::OutIn;
        region = srg::lti_srg(tf, srg::input_space_for_block(role, sp), opts.srg);
    } else if (block == "phi") {
        region = srg::nonlinearity_srg(cfg.phi(), geo);
    } else if (block == "phi_inv") {
        region = cgeom::mobius_invert(srg::nonlinearity_srg(cfg.phi(), geo), geo);
    } else if (block == "bound") {
        region = lfr::lfr_bound_region(*sys, sp, opts);
    } else {
        io.err << "error: unknown block '" << block << "' (expected zw, out_w, z_in, out_in, phi, phi_inv, bound)\n";
        return kExitConfig;
    }
    std::string name = "srg_" + system + "_" + block + "_" + space;
    if (sp.kind != srg::InputSpace::Kind::FullL2) {
        name += "_" + json(omega).dump();
    }
    name += ".csv";
    const fs::path path = fs::path(cfg.out_dir) / name;
    auto f = open_out(path);
    cgeom::write_boundary_csv(f, region);
    const json summary{{"file", path.string()}, {"kind", region.kind_name()}, {"radius", num(cgeom::radius(region))}};
    emit_summary(summary, io);
    return kExitOk;
}

int cmd_simulate(const config::AnalysisConfig& cfg, const std::string& reference_id, Streams io) {
    const config::ReferenceSpec* ref = nullptr;
    for (const auto& r : cfg.references) {
        if (r.id == reference_id) {
            ref = &r;
        }
    }
    if (!ref) {
        io.err << "error: unknown reference '" << reference_id << "'\n";
        return kExitConfig;
    }
    const auto run = sim::integrate(cfg.model(ref->signal), ref->t_end, cfg.dt);
    const fs::path path = fs::path(cfg.out_dir) / ("sim_" + ref->id + ".csv");
    auto f = open_out(path);
    sim::write_run_csv(f, run);
    const json summary{
        {"file", path.string()},
        {"reference", ref->id},
        {"rms_tail", num(run.rms_tail)},
        {"mean_tail", num(run.mean_tail)},
        {"amplitude_tail", num(run.amplitude_tail)},
        {"period_detected", opt(run.period_detected)},
    };
    emit_summary(summary, io);
    return kExitOk;
}

int cmd_verify(const config::AnalysisConfig& cfg, Streams io) {
    const auto results = verify::run_acceptance(cfg);
    const std::string report = verify::report_json(results);
    auto f = open_out(fs::path(cfg.out_dir) / "verify.json");
    f << report << '\n';
    bool all = true;
    for (const auto& r : results) {
        all = all && r.pass();
        if (!io.json) {
            io.out << verify::summary_line(r) << '\n';
        }
    }
    if (io.json) {
        io.out << report << '\n';
    }
    return all ? kExitOk : kExitFailure;
}

}  // namespace nlbode::cli
