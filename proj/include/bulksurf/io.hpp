#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bulksurf/diagnostics.hpp"
#include "bulksurf/mesh.hpp"

namespace bulksurf {

inline constexpr const char* kRunCsvVersion = "# bulksurf run csv v1";

/// Version line plus the column header.
void write_run_csv_header(std::ostream& out);
/// One row, all reals printed with %.17g.
void write_run_csv_row(const DiagnosticsRecord& r, std::ostream& out);

/// Rows of a run CSV; throws ConfigError on a version or header mismatch.
std::vector<DiagnosticsRecord> read_run_csv(std::istream& in);

/// `t=<value>`, `id x y u mu` per node, then `boundary:` and `id u_G mu_G xi_G`.
void write_snapshot(const State& state, const MeshBundle& mesh, std::ostream& out);

}  // namespace bulksurf
