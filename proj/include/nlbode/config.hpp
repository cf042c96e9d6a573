#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlbode/lfr.hpp"
#include "nlbode/lti.hpp"
#include "nlbode/sim.hpp"
#include "nlbode/srg.hpp"

namespace nlbode::config {

/// Invalid configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& msg, int line);
    [[nodiscard]] int line() const { return line_; }

  private:
    int line_;
};

struct ReferenceSpec {
    std::string id;
    sim::ReferenceSignal signal;
    double t_end = 0.0;
};

struct ProbeSpace {
    srg::InputSpace::Kind kind = srg::InputSpace::Kind::Sinusoidal;
    double omega = 1.0;
};

struct AnalysisConfig {
    sim::MotorParams motor;
    lti::Poly plant_num;
    lti::Poly plant_den;
    lti::Poly controller_num{5.0, 5.0};
    lti::Poly controller_den{0.1, 1.0};
    double alpha = -0.1;
    double beta = 0.1;

    double grid_lo = 1e-2;
    double grid_hi = 1e2;
    /// 49.75 gives 200 points on four decades.
    double grid_ppd = 49.75;

    int resolution = 720;
    double tail_rel_eps = 1e-4;
    int n_max = 100000;
    double full_lo = 1e-4;
    double full_hi = 1e4;
    int full_ppd = 2000;
    lfr::Completion completion = lfr::Completion::ChordSumArcProduct;

    double tau_step = 0.05;
    int tau_points = 20;

    double dt = 1e-3;
    std::vector<ReferenceSpec> references;

    int probe_pairs = 200;
    std::vector<ProbeSpace> probe_spaces;
    std::uint64_t seed = 1;

    std::string out_dir = "nlbode_out";
    unsigned threads = 0;

    /// The DC-motor setup: printed plant from `motor`, sector [-delta, delta], references r1..r3.
    static AnalysisConfig defaults();

    [[nodiscard]] lti::TransferFunction plant() const { return {plant_num, plant_den}; }
    [[nodiscard]] lti::TransferFunction controller() const { return {controller_num, controller_den}; }
    [[nodiscard]] srg::SectorNonlinearity phi() const;
    [[nodiscard]] lfr::LfrOptions lfr_options() const;
    [[nodiscard]] std::vector<double> grid() const;
    [[nodiscard]] std::vector<double> tau_grid() const;
    [[nodiscard]] const ReferenceSpec& reference(const std::string& id) const;
    [[nodiscard]] sim::ClosedLoopModel model(const sim::ReferenceSignal& ref) const;

    bool operator==(const AnalysisConfig&) const;
};

/// Missing keys take their defaults. Throws ConfigError with the offending line.
AnalysisConfig parse(const std::string& text);
AnalysisConfig load(const std::string& path);
/// Full document with every field explicit; parse(emit(c)) == c.
std::string emit(const AnalysisConfig& c);

/// "LO:HI:PPD".
void apply_grid_spec(AnalysisConfig& c, const std::string& spec);

}  // namespace nlbode::config
