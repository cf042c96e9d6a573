#pragma once

#include <string>

#include "nlbode/cgeom.hpp"
#include "nlbode/lti.hpp"

namespace nlbode::srg {

using cgeom::Region;

/// Input spaces indexed by a base frequency (rad/s), plus the unrestricted space.
struct InputSpace {
    enum class Kind { Sinusoidal, Harmonic, Subharmonic, FullL2 };

    Kind kind = Kind::FullL2;
    double omega = 0.0;

    static InputSpace sinusoidal(double w) { return make(Kind::Sinusoidal, w); }
    static InputSpace harmonic(double w) { return make(Kind::Harmonic, w); }
    static InputSpace subharmonic(double w) { return make(Kind::Subharmonic, w); }
    static InputSpace full() { return {Kind::FullL2, 0.0}; }

    [[nodiscard]] std::string name() const;
    friend bool operator==(const InputSpace&, const InputSpace&) = default;

  private:
    static InputSpace make(Kind k, double w);
};

/// Parses "sinusoidal", "harmonic", "subharmonic", "full" (case-insensitive).
InputSpace::Kind parse_space_kind(const std::string& s);

/// Static nonlinearity with incremental slopes in [alpha, beta].
struct SectorNonlinearity {
    double alpha = 0.0;
    double beta = 0.0;
    std::string description;
};

struct SrgOptions {
    cgeom::GeometryOptions geometry;
    /// Harmonic/subharmonic families stop once within tail_rel_eps * (radius so far) of their limit.
    double tail_rel_eps = 1e-4;
    int n_max = 100000;
    double full_lo = 1e-4;
    double full_hi = 1e4;
    int full_points_per_decade = 2000;
};

/// Role of an LTI block inside an LFR; the names follow the sensitivity LFR
/// (zw, ew, zr, er) and the loop-transfer LFR (zw, yw, ze, ye).
enum class BlockRole { Zw, OutW, ZIn, OutIn };

/// SRG of G restricted to `space`. Returns Region::unbounded() when the
/// restricted SRG is unbounded (integrator with subharmonic or full inputs).
/// Throws lti::LtiError if G has unstable poles.
Region lti_srg(const lti::TransferFunction& g, InputSpace space, const SrgOptions& opts = {});

/// D_[alpha, beta]; a PointSet when alpha == beta.
Region nonlinearity_srg(const SectorNonlinearity& phi, const cgeom::GeometryOptions& opts = {});

/// Which input space each LFR block sees when the LFR input lives in `target`.
InputSpace input_space_for_block(BlockRole role, InputSpace target);

}  // namespace nlbode::srg
