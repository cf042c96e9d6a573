#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlbode/cgeom.hpp"
#include "nlbode/lti.hpp"
#include "nlbode/srg.hpp"

namespace nlbode::lfr {

using cgeom::Region;
using lti::TransferFunction;
using srg::InputSpace;
using srg::SectorNonlinearity;

/// out = P_out_w (phi^{-1} - P_zw)^{-1} P_z_in in + P_out_in in.
struct LfrSystem {
    TransferFunction zw;
    TransferFunction out_w;
    TransferFunction z_in;
    TransferFunction out_in;
    SectorNonlinearity phi;
    std::string label;

    /// Sensitivity LFR r -> e of the loop G, K with phi entering at the plant input.
    static LfrSystem sensitivity(const TransferFunction& g, const TransferFunction& k, SectorNonlinearity phi);
    /// Loop-transfer LFR e -> y.
    static LfrSystem loop_transfer(const TransferFunction& g, const TransferFunction& k, SectorNonlinearity phi);

    [[nodiscard]] bool linear() const { return phi.alpha == 0.0 && phi.beta == 0.0; }
};

/// Where chord/arc completions are inserted in the bound formula.
enum class Completion {
    /// Chord-complete the second operand of each sum, arc-complete the first operand of each product.
    ChordSumArcProduct,
    /// Arc-complete both.
    ArcOnly,
};

struct LfrOptions {
    srg::SrgOptions srg;
    Completion completion = Completion::ChordSumArcProduct;
};

/// Set bound of the LFR for inputs in `target`. Returns Region::unbounded()
/// when the loop term cannot be bounded (overlap of phi^{-1} with P_zw, or an
/// unbounded block SRG).
Region lfr_bound_region(const LfrSystem& sys, InputSpace target, const LfrOptions& opts = {});

/// Evaluates bound regions for one system, reusing the FullL2 loop term
/// between calls. Immutable after construction; safe to share across threads.
class BoundEvaluator {
  public:
    BoundEvaluator(LfrSystem sys, LfrOptions opts);

    [[nodiscard]] Region bound(InputSpace target) const;
    [[nodiscard]] double gamma(InputSpace target) const { return cgeom::radius(bound(target)); }
    /// Gains for the sinusoidal, harmonic and subharmonic targets at w, sharing
    /// the harmonic loop term. Kinds not requested are NaN.
    [[nodiscard]] std::array<double, 3> gammas_at(double w, bool sin, bool harm, bool subharm) const;
    [[nodiscard]] const LfrSystem& system() const { return sys_; }
    [[nodiscard]] const LfrOptions& options() const { return opts_; }

  private:
    LfrSystem sys_;
    LfrOptions opts_;
    Region loop_full_;  // completed srg(P_out_w) * M over FullL2
};

struct SweepKinds {
    bool sinusoidal = true;
    bool harmonic = true;
    bool subharmonic = true;
    bool full = true;
};

inline constexpr double kNotComputed = std::numeric_limits<double>::quiet_NaN();

struct GainCurve {
    std::string label;
    std::vector<double> frequencies;
    /// NaN marks a kind that was not computed; +inf an unbounded bound.
    std::vector<double> gamma_sin;
    std::vector<double> gamma_harm;
    std::vector<double> gamma_subharm;
    double gamma_full = kNotComputed;
    /// |P_out_in(j w)|: the LTI operator obtained with phi = 0.
    std::vector<double> lti_mag;
    /// Optional describing-function column.
    std::vector<double> df_gain;
    std::optional<double> bandwidth_closed;
    std::optional<double> bandwidth_open;
    /// Human-readable descriptions of gain-ordering violations found after the sweep.
    std::vector<std::string> ordering_violations;
};

/// Log-spaced grid on [lo, hi] with `points_per_decade` points per decade (both ends included).
std::vector<double> log_grid(double lo, double hi, double points_per_decade);

/// Evaluates all requested kinds on `grid`; frequencies are processed in parallel.
GainCurve sweep(const LfrSystem& sys, const std::vector<double>& grid, SweepKinds kinds,
                const LfrOptions& opts = {}, unsigned threads = 0);
GainCurve sweep(const BoundEvaluator& eval, const std::vector<double>& grid, SweepKinds kinds,
                unsigned threads = 0);

/// Rechecks the gain-ordering inequalities with relative tolerance `rel_tol`.
std::vector<std::string> check_ordering(const GainCurve& c, double rel_tol = 1e-6);

/// First upward crossing of 1/sqrt(2) by gamma_subharm.
std::optional<double> closed_loop_bandwidth(const GainCurve& curve);
/// First downward crossing of 1 by gamma_harm.
std::optional<double> open_loop_bandwidth(const GainCurve& curve);

/// First crossing of `level` by `values` in the given direction, interpolated
/// linearly in (log w, dB). Exposed for LTI reference curves.
std::optional<double> first_crossing(const std::vector<double>& w, const std::vector<double>& values, double level,
                                     bool upward);

struct StabilityCertificate {
    bool certified = false;
    double r_m = 0.0;
    /// 1 / r_m.
    double gain_bound = std::numeric_limits<double>::infinity();
    double worst_tau = 1.0;
};

/// Default grid {0.05, 0.10, ..., 1.0}.
std::vector<double> default_tau_grid();

/// Feedback of H1 (sector) with H2 (stable LTI). Throws lti::LtiError if H2 is unstable.
StabilityCertificate stability_certificate(const SectorNonlinearity& h1, const TransferFunction& h2,
                                           const std::vector<double>& tau_grid = default_tau_grid(),
                                           const srg::SrgOptions& opts = {});

/// Attaches input/output weights. Throws lti::LtiError if a weight is not strictly stable.
LfrSystem apply_weights(const LfrSystem& sys, const TransferFunction& w_in, const TransferFunction& w_out);

void write_curve_csv(std::ostream& os, const GainCurve& c);
std::string curve_json(const GainCurve& c);

}  // namespace nlbode::lfr
