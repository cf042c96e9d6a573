#pragma once

#include <string>
#include <vector>

#include "nlbode/config.hpp"

namespace nlbode::verify {

struct Check {
    std::string what;
    double measured = 0.0;
    double expected = 0.0;
    std::string tolerance;
    bool pass = false;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<Check> checks;
    std::string note;
    double seconds = 0.0;

    [[nodiscard]] bool pass() const;
};

struct VerifyOptions {
    /// Criterion ids to run; empty runs all ten.
    std::vector<int> only;
};

/// Runs the acceptance matrix on `cfg`. Expected values refer to the DC-motor defaults.
std::vector<CriterionResult> run_acceptance(const config::AnalysisConfig& cfg, const VerifyOptions& opts = {});

std::string report_json(const std::vector<CriterionResult>& results);

/// "PASS 3 pointwise gains: ..." style one-line summary.
std::string summary_line(const CriterionResult& r);

}  // namespace nlbode::verify
