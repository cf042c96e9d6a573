#include "nlbode/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace nlbode::config {

namespace {

using nlohmann::json;
using Kind = srg::InputSpace::Kind;

/// Line of the last component of `path`, found by scanning for each quoted key in turn.
int locate(const std::string& text, const std::vector<std::string>& path) {
    std::size_t pos = 0;
    for (const auto& key : path) {
        const auto hit = text.find('"' + key + '"', pos);
        if (hit == std::string::npos) {
            break;
        }
        pos = hit + 1;
    }
    if (pos == 0) {
        return 0;
    }
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

std::string join(const std::vector<std::string>& path) {
    std::string s;
    for (const auto& p : path) {
        s += (s.empty() ? "" : ".") + p;
    }
    return s;
}

/// Walks the document, keeping the key path for diagnostics.
class Reader {
  public:
    explicit Reader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
        const int line = locate(text_, path);
        std::ostringstream os;
        os << "config: " << (path.empty() ? std::string("document") : join(path)) << ": " << what;
        if (line > 0) {
            os << " (line " << line << ")";
        }
        throw ConfigError(os.str(), line);
    }

    void only_keys(const json& obj, const std::vector<std::string>& path, std::set<std::string> allowed) const {
        if (!obj.is_object()) {
            fail(path, "expected an object");
        }
        for (const auto& [k, v] : obj.items()) {
            if (!allowed.contains(k)) {
                auto p = path;
                p.push_back(k);
                fail(p, "unknown key");
            }
        }
    }

    double number(const json& obj, const std::vector<std::string>& path, const std::string& key, double def) const {
        if (!obj.contains(key)) {
            return def;
        }
        const json& v = obj.at(key);
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
            fail(extend(path, key), "expected a finite number");
        }
        return v.get<double>();
    }

    int integer(const json& obj, const std::vector<std::string>& path, const std::string& key, int def) const {
        if (!obj.contains(key)) {
            return def;
        }
        const json& v = obj.at(key);
        if (!v.is_number_integer()) {
            fail(extend(path, key), "expected an integer");
        }
        return v.get<int>();
    }

    std::string string(const json& obj, const std::vector<std::string>& path, const std::string& key,
                       const std::string& def) const {
        if (!obj.contains(key)) {
            return def;
        }
        if (!obj.at(key).is_string()) {
            fail(extend(path, key), "expected a string");
        }
        return obj.at(key).get<std::string>();
    }

    lti::Poly poly(const json& obj, const std::vector<std::string>& path, const std::string& key,
                   const lti::Poly& def) const {
        if (!obj.contains(key)) {
            return def;
        }
        const json& v = obj.at(key);
        if (!v.is_array() || v.empty()) {
            fail(extend(path, key), "expected a non-empty coefficient array (descending powers)");
        }
        lti::Poly p;
        for (const auto& c : v) {
            if (!c.is_number()) {
                fail(extend(path, key), "coefficients must be numbers");
            }
            p.push_back(c.get<double>());
        }
        return p;
    }

    static std::vector<std::string> extend(std::vector<std::string> path, const std::string& key) {
        path.push_back(key);
        return path;
    }

  private:
    const std::string& text_;
};

std::string completion_name(lfr::Completion c) {
    return c == lfr::Completion::ArcOnly ? "arc_only" : "chord_sum_arc_product";
}

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::Sinusoidal:
            return "sinusoidal";
        case Kind::Harmonic:
            return "harmonic";
        case Kind::Subharmonic:
            return "subharmonic";
        case Kind::FullL2:
            return "full";
    }
    return "?";
}

json reference_json(const ReferenceSpec& r) {
    const auto& s = r.signal;
    json j{{"id", r.id}, {"kind", s.name()}, {"t_end", r.t_end}};
    switch (s.kind) {
        case sim::ReferenceSignal::Kind::Step:
            j["t0"] = s.t0;
            j["height"] = s.height;
            break;
        case sim::ReferenceSignal::Kind::Ramp:
            j["slope"] = s.slope;
            break;
        case sim::ReferenceSignal::Kind::SwitchedSine:
            j["a"] = s.a;
            j["w1"] = s.w1;
            j["w2"] = s.w2;
            j["t_switch"] = s.t_switch;
            break;
        case sim::ReferenceSignal::Kind::FourierSeries: {
            j["w_base"] = s.w_base;
            json cs = json::array();
            for (auto c : s.coeffs) {
                cs.push_back({c.real(), c.imag()});
            }
            j["coeffs"] = cs;
            break;
        }
    }
    return j;
}

ReferenceSpec parse_reference(const Reader& rd, const json& j, std::vector<std::string> path) {
    if (!j.is_object()) {
        rd.fail(path, "expected an object");
    }
    ReferenceSpec r;
    r.id = rd.string(j, path, "id", "");
    if (r.id.empty()) {
        rd.fail(path, "reference needs a non-empty id");
    }
    path.push_back(r.id);
    const std::string kind = rd.string(j, path, "kind", "");
    r.t_end = rd.number(j, path, "t_end", 0.0);
    if (!(r.t_end > 0.0)) {
        rd.fail(Reader::extend(path, "t_end"), "t_end must be positive");
    }
    if (kind == "step") {
        rd.only_keys(j, path, {"id", "kind", "t_end", "t0", "height"});
        r.signal = sim::ReferenceSignal::step(rd.number(j, path, "t0", 0.0), rd.number(j, path, "height", 1.0));
    } else if (kind == "ramp") {
        rd.only_keys(j, path, {"id", "kind", "t_end", "slope"});
        r.signal = sim::ReferenceSignal::ramp(rd.number(j, path, "slope", 1.0));
    } else if (kind == "switched_sine") {
        rd.only_keys(j, path, {"id", "kind", "t_end", "a", "w1", "w2", "t_switch"});
        r.signal = sim::ReferenceSignal::switched_sine(rd.number(j, path, "a", 1.0), rd.number(j, path, "w1", 1.0),
                                                       rd.number(j, path, "w2", 1.0),
                                                       rd.number(j, path, "t_switch", 0.0));
    } else if (kind == "fourier") {
        rd.only_keys(j, path, {"id", "kind", "t_end", "w_base", "coeffs"});
        const double w = rd.number(j, path, "w_base", 1.0);
        if (!(w > 0.0)) {
            rd.fail(Reader::extend(path, "w_base"), "must be positive");
        }
        std::vector<std::complex<double>> cs;
        if (j.contains("coeffs")) {
            const json& a = j.at("coeffs");
            if (!a.is_array()) {
                rd.fail(Reader::extend(path, "coeffs"), "expected an array of [re, im] pairs");
            }
            for (const auto& c : a) {
                if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
                    rd.fail(Reader::extend(path, "coeffs"), "expected an array of [re, im] pairs");
                }
                cs.emplace_back(c[0].get<double>(), c[1].get<double>());
            }
        }
        r.signal = sim::ReferenceSignal::fourier(w, std::move(cs));
    } else {
        rd.fail(Reader::extend(path, "kind"), "unknown reference kind '" + kind + "'");
    }
    return r;
}

bool same_signal(const sim::ReferenceSignal& a, const sim::ReferenceSignal& b) {
    return a.kind == b.kind && a.t0 == b.t0 && a.height == b.height && a.slope == b.slope && a.a == b.a &&
           a.w1 == b.w1 && a.w2 == b.w2 && a.t_switch == b.t_switch && a.w_base == b.w_base && a.coeffs == b.coeffs;
}

}  // namespace

ConfigError::ConfigError(const std::string& msg, int line) : std::runtime_error(msg), line_(line) {}

AnalysisConfig AnalysisConfig::defaults() {
    AnalysisConfig c;
    const auto g = c.motor.plant();
    c.plant_num = g.num();
    c.plant_den = g.den();
    c.alpha = -c.motor.delta;
    c.beta = c.motor.delta;
    c.references = {
        {"r1", sim::ReferenceSignal::step(1.0, 1.0), 40.0},
        {"r2", sim::ReferenceSignal::ramp(1.0), 200.0},
        {"r3", sim::ReferenceSignal::switched_sine(5.0, 1.0, 10.0, 50.0), 100.0},
    };
    c.probe_spaces = {{Kind::Sinusoidal, 1.0}, {Kind::Harmonic, 3.0}, {Kind::Subharmonic, 2.0}};
    return c;
}

srg::SectorNonlinearity AnalysisConfig::phi() const { return {alpha, beta, "sector"}; }

lfr::LfrOptions AnalysisConfig::lfr_options() const {
    lfr::LfrOptions o;
    o.srg.geometry.resolution = resolution;
    o.srg.tail_rel_eps = tail_rel_eps;
    o.srg.n_max = n_max;
    o.srg.full_lo = full_lo;
    o.srg.full_hi = full_hi;
    o.srg.full_points_per_decade = full_ppd;
    o.completion = completion;
    return o;
}

std::vector<double> AnalysisConfig::grid() const { return lfr::log_grid(grid_lo, grid_hi, grid_ppd); }

std::vector<double> AnalysisConfig::tau_grid() const {
    std::vector<double> g;
    for (int i = 1; i <= tau_points; ++i) {
        g.push_back(std::min(1.0, tau_step * i));
    }
    return g;
}

const ReferenceSpec& AnalysisConfig::reference(const std::string& id) const {
    for (const auto& r : references) {
        if (r.id == id) {
            return r;
        }
    }
    throw std::out_of_range("unknown reference '" + id + "'");
}

sim::ClosedLoopModel AnalysisConfig::model(const sim::ReferenceSignal& ref) const {
    motor.validate();
    return sim::ClosedLoopModel::from_loop(plant(), controller(), motor.delta, ref);
}

bool AnalysisConfig::operator==(const AnalysisConfig& o) const {
    const auto& m = motor;
    const auto& n = o.motor;
    const bool motor_eq = m.J == n.J && m.R == n.R && m.L == n.L && m.Km == n.Km && m.b == n.b && m.delta == n.delta;
    const bool refs_eq = std::equal(references.begin(), references.end(), o.references.begin(), o.references.end(),
                                    [](const ReferenceSpec& a, const ReferenceSpec& b) {
                                        return a.id == b.id && a.t_end == b.t_end && same_signal(a.signal, b.signal);
                                    });
    const bool spaces_eq =
        std::equal(probe_spaces.begin(), probe_spaces.end(), o.probe_spaces.begin(), o.probe_spaces.end(),
                   [](const ProbeSpace& a, const ProbeSpace& b) { return a.kind == b.kind && a.omega == b.omega; });
    return motor_eq && refs_eq && spaces_eq && plant_num == o.plant_num && plant_den == o.plant_den &&
           controller_num == o.controller_num && controller_den == o.controller_den && alpha == o.alpha &&
           beta == o.beta && grid_lo == o.grid_lo && grid_hi == o.grid_hi && grid_ppd == o.grid_ppd &&
           resolution == o.resolution && tail_rel_eps == o.tail_rel_eps && n_max == o.n_max &&
           full_lo == o.full_lo && full_hi == o.full_hi && full_ppd == o.full_ppd && completion == o.completion &&
           tau_step == o.tau_step && tau_points == o.tau_points && dt == o.dt && probe_pairs == o.probe_pairs &&
           seed == o.seed && out_dir == o.out_dir && threads == o.threads;
}

AnalysisConfig parse(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
        throw ConfigError("config: invalid JSON (line " + std::to_string(line) + "): " + e.what(), line);
    }
    const Reader rd(text);
    rd.only_keys(doc, {}, {"motor", "plant", "controller", "nonlinearity", "grid", "geometry", "srg", "completion",
                           "tau", "simulation", "probe", "output", "threads"});

    AnalysisConfig c = AnalysisConfig::defaults();
    const json empty = json::object();
    const auto section = [&](const std::string& key, std::set<std::string> allowed) -> const json& {
        if (!doc.contains(key)) {
            return empty;
        }
        rd.only_keys(doc.at(key), {key}, std::move(allowed));
        return doc.at(key);
    };

    const json& mo = section("motor", {"J", "R", "L", "Km", "b", "delta"});
    c.motor.J = rd.number(mo, {"motor"}, "J", c.motor.J);
    c.motor.R = rd.number(mo, {"motor"}, "R", c.motor.R);
    c.motor.L = rd.number(mo, {"motor"}, "L", c.motor.L);
    c.motor.Km = rd.number(mo, {"motor"}, "Km", c.motor.Km);
    c.motor.b = rd.number(mo, {"motor"}, "b", c.motor.b);
    c.motor.delta = rd.number(mo, {"motor"}, "delta", c.motor.delta);
    try {
        c.motor.validate();
    } catch (const std::invalid_argument& e) {
        rd.fail({"motor"}, e.what());
    }
    const auto g = c.motor.plant();
    const json& pl = section("plant", {"num", "den"});
    c.plant_num = rd.poly(pl, {"plant"}, "num", g.num());
    c.plant_den = rd.poly(pl, {"plant"}, "den", g.den());
    const json& co = section("controller", {"num", "den"});
    c.controller_num = rd.poly(co, {"controller"}, "num", c.controller_num);
    c.controller_den = rd.poly(co, {"controller"}, "den", c.controller_den);
    for (const char* key : {"plant", "controller"}) {
        const auto& den = std::string(key) == "plant" ? c.plant_den : c.controller_den;
        const auto& num = std::string(key) == "plant" ? c.plant_num : c.controller_num;
        if (std::all_of(den.begin(), den.end(), [](double v) { return v == 0.0; })) {
            rd.fail({key, "den"}, "denominator is zero");
        }
        if (std::string(key) == "plant" && num.size() >= den.size()) {
            rd.fail({key, "num"}, "plant must be strictly proper");
        }
    }

    const json& nl = section("nonlinearity", {"alpha", "beta"});
    c.alpha = rd.number(nl, {"nonlinearity"}, "alpha", -c.motor.delta);
    c.beta = rd.number(nl, {"nonlinearity"}, "beta", c.motor.delta);
    if (c.alpha > c.beta) {
        rd.fail({"nonlinearity"}, "alpha must not exceed beta");
    }

    const json& gr = section("grid", {"lo", "hi", "points_per_decade"});
    c.grid_lo = rd.number(gr, {"grid"}, "lo", c.grid_lo);
    c.grid_hi = rd.number(gr, {"grid"}, "hi", c.grid_hi);
    c.grid_ppd = rd.number(gr, {"grid"}, "points_per_decade", c.grid_ppd);
    if (!(c.grid_lo > 0.0 && c.grid_hi >= c.grid_lo && c.grid_ppd > 0.0)) {
        rd.fail({"grid"}, "requires 0 < lo <= hi and points_per_decade > 0");
    }

    const json& ge = section("geometry", {"resolution"});
    c.resolution = rd.integer(ge, {"geometry"}, "resolution", c.resolution);
    if (c.resolution < 16) {
        rd.fail({"geometry", "resolution"}, "must be at least 16");
    }

    const json& sr = section("srg", {"tail_rel_eps", "n_max", "full_lo", "full_hi", "full_points_per_decade"});
    c.tail_rel_eps = rd.number(sr, {"srg"}, "tail_rel_eps", c.tail_rel_eps);
    c.n_max = rd.integer(sr, {"srg"}, "n_max", c.n_max);
    c.full_lo = rd.number(sr, {"srg"}, "full_lo", c.full_lo);
    c.full_hi = rd.number(sr, {"srg"}, "full_hi", c.full_hi);
    c.full_ppd = rd.integer(sr, {"srg"}, "full_points_per_decade", c.full_ppd);
    if (!(c.tail_rel_eps > 0.0 && c.n_max > 0 && c.full_lo > 0.0 && c.full_hi > c.full_lo && c.full_ppd > 0)) {
        rd.fail({"srg"}, "truncation settings must be positive with full_lo < full_hi");
    }

    const std::string comp = rd.string(doc, {}, "completion", completion_name(c.completion));
    if (comp == "chord_sum_arc_product") {
        c.completion = lfr::Completion::ChordSumArcProduct;
    } else if (comp == "arc_only") {
        c.completion = lfr::Completion::ArcOnly;
    } else {
        rd.fail({"completion"}, "unknown completion '" + comp + "'");
    }

    const json& ta = section("tau", {"step", "points"});
    c.tau_step = rd.number(ta, {"tau"}, "step", c.tau_step);
    c.tau_points = rd.integer(ta, {"tau"}, "points", c.tau_points);
    if (!(c.tau_step > 0.0 && c.tau_points > 0)) {
        rd.fail({"tau"}, "step and points must be positive");
    }

    const json& si = section("simulation", {"dt", "references"});
    c.dt = rd.number(si, {"simulation"}, "dt", c.dt);
    if (!(c.dt > 0.0)) {
        rd.fail({"simulation", "dt"}, "must be positive");
    }
    if (si.contains("references")) {
        const json& refs = si.at("references");
        if (!refs.is_array()) {
            rd.fail({"simulation", "references"}, "expected an array");
        }
        c.references.clear();
        std::set<std::string> ids;
        for (const auto& r : refs) {
            c.references.push_back(parse_reference(rd, r, {"simulation", "references"}));
            if (!ids.insert(c.references.back().id).second) {
                rd.fail({"simulation", "references", c.references.back().id}, "duplicate reference id");
            }
        }
    }

    const json& pr = section("probe", {"pairs", "spaces", "seed"});
    c.probe_pairs = rd.integer(pr, {"probe"}, "pairs", c.probe_pairs);
    if (c.probe_pairs <= 0) {
        rd.fail({"probe", "pairs"}, "must be positive");
    }
    if (pr.contains("seed")) {
        if (!pr.at("seed").is_number_unsigned()) {
            rd.fail({"probe", "seed"}, "expected a nonnegative integer");
        }
        c.seed = pr.at("seed").get<std::uint64_t>();
    }
    if (pr.contains("spaces")) {
        const json& sp = pr.at("spaces");
        if (!sp.is_array()) {
            rd.fail({"probe", "spaces"}, "expected an array");
        }
        c.probe_spaces.clear();
        for (const auto& s : sp) {
            rd.only_keys(s, {"probe", "spaces"}, {"kind", "omega"});
            ProbeSpace ps;
            try {
                ps.kind = srg::parse_space_kind(rd.string(s, {"probe", "spaces"}, "kind", ""));
            } catch (const std::invalid_argument& e) {
                rd.fail({"probe", "spaces", "kind"}, e.what());
            }
            if (ps.kind == Kind::FullL2) {
                rd.fail({"probe", "spaces", "kind"}, "the probe needs a frequency-indexed space");
            }
            ps.omega = rd.number(s, {"probe", "spaces"}, "omega", 1.0);
            if (!(ps.omega > 0.0)) {
                rd.fail({"probe", "spaces", "omega"}, "must be positive");
            }
            c.probe_spaces.push_back(ps);
        }
    }

    const json& ou = section("output", {"dir"});
    c.out_dir = rd.string(ou, {"output"}, "dir", c.out_dir);
    const int th = rd.integer(doc, {}, "threads", static_cast<int>(c.threads));
    if (th < 0) {
        rd.fail({"threads"}, "must be nonnegative");
    }
    c.threads = static_cast<unsigned>(th);
    return c;
}

AnalysisConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'", 0);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string emit(const AnalysisConfig& c) {
    json refs = json::array();
    for (const auto& r : c.references) {
        refs.push_back(reference_json(r));
    }
    json spaces = json::array();
    for (const auto& s : c.probe_spaces) {
        spaces.push_back({{"kind", kind_name(s.kind)}, {"omega", s.omega}});
    }
    const json doc{
        {"motor",
         {{"J", c.motor.J}, {"R", c.motor.R}, {"L", c.motor.L}, {"Km", c.motor.Km}, {"b", c.motor.b},
          {"delta", c.motor.delta}}},
        {"plant", {{"num", c.plant_num}, {"den", c.plant_den}}},
        {"controller", {{"num", c.controller_num}, {"den", c.controller_den}}},
        {"nonlinearity", {{"alpha", c.alpha}, {"beta", c.beta}}},
        {"grid", {{"lo", c.grid_lo}, {"hi", c.grid_hi}, {"points_per_decade", c.grid_ppd}}},
        {"geometry", {{"resolution", c.resolution}}},
        {"srg",
         {{"tail_rel_eps", c.tail_rel_eps},
          {"n_max", c.n_max},
          {"full_lo", c.full_lo},
          {"full_hi", c.full_hi},
          {"full_points_per_decade", c.full_ppd}}},
        {"completion", completion_name(c.completion)},
        {"tau", {{"step", c.tau_step}, {"points", c.tau_points}}},
        {"simulation", {{"dt", c.dt}, {"references", refs}}},
        {"probe", {{"pairs", c.probe_pairs}, {"spaces", spaces}, {"seed", c.seed}}},
        {"output", {{"dir", c.out_dir}}},
        {"threads", c.threads},
    };
    return doc.dump(2) + "\n";
}

void apply_grid_spec(AnalysisConfig& c, const std::string& spec) {
    double lo = 0.0;
    double hi = 0.0;
    double ppd = 0.0;
    char c1 = 0;
    char c2 = 0;
    std::istringstream is(spec);
    if (!(is >> lo >> c1 >> hi >> c2 >> ppd) || c1 != ':' || c2 != ':' || !(is >> std::ws).eof()) {
        throw ConfigError("--grid expects LO:HI:PPD, got '" + spec + "'", 0);
    }
    if (!(lo > 0.0 && hi >= lo && ppd > 0.0)) {
        throw ConfigError("--grid requires 0 < LO <= HI and PPD > 0", 0);
    }
    c.grid_lo = lo;
    c.grid_hi = hi;
    c.grid_ppd = ppd;
}

}  // namespace nlbode::config
