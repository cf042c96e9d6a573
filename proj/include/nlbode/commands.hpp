#pragma once

#include <iosfwd>
#include <string>

#include "nlbode/config.hpp"

namespace nlbode::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitUnstable = 3;

struct Streams {
    std::ostream& out;
    std::ostream& err;
    /// When set, `out` receives only the summary JSON.
    bool json = false;
};

/// S and L sweeps: {S,L}_curve.csv/json and summary.json in cfg.out_dir.
int cmd_bode(const config::AnalysisConfig& cfg, Streams io);

/// Boundary CSV of one region. system: S | L. block: zw | out_w | z_in | out_in | phi | phi_inv | bound.
/// space: sinusoidal | harmonic | subharmonic | full.
int cmd_srg(const config::AnalysisConfig& cfg, const std::string& system, const std::string& block,
            const std::string& space, double omega, Streams io);

/// SimRun CSV for the reference with the given id.
int cmd_simulate(const config::AnalysisConfig& cfg, const std::string& reference_id, Streams io);

/// Acceptance matrix; verify.json in cfg.out_dir. Exit 0 iff all criteria pass.
int cmd_verify(const config::AnalysisConfig& cfg, Streams io);

}  // namespace nlbode::cli
