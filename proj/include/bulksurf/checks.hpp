#pragma once

#include <string>
#include <vector>

#include "bulksurf/config.hpp"

namespace bulksurf {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// max_n |m_n - m_0| / scale with scale = max(|m_0|, 1e-300) where m is the
/// boundary mass (use_total = false) or eps-weighted total mass.
double relative_mass_drift(const std::vector<DiagnosticsRecord>& records, bool use_total);

/// Invariant suite behind `bulksurf check`: graph calculus and domination,
/// Poincare constants, the eps-projection, and conservation plus energy decay
/// on a short run of the configured problem.
std::vector<CheckResult> run_checks(const RunConfig& cfg, std::size_t short_steps = 20);

}  // namespace bulksurf
