#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/solver.hpp"
#include "mfg/theta_scheme.hpp"

namespace mfg {

inline constexpr const char* kArtifactVersion = "mfg-theta 1.0.0";

/// Shortest round-trip decimal representation ("%.17g").
std::string format_double(double v);

/// Writes `content` to `path`, creating parent directories.
void write_text(const std::string& path, const std::string& content);

/// `t,i0[,i1[,i2]],value`, one row per (t, node).
std::string scalar_series_csv(const ScalarSeries& series);
/// Same layout for one component of a vector series.
std::string vector_component_csv(const VectorSeries& series, int component);
/// `t,mass,min_m,max_abs_v,active_truncation`
std::string diagnostics_csv(const std::vector<FpStepDiagnostics>& diag, const std::vector<std::size_t>& active);
/// `k,omega,residual,max_abs_v,min_m`
std::string iteration_log_csv(const std::vector<IterationRecord>& history);

struct Manifest {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> extra;
};
/// key=value lines: config_hash, seed, generator, artifact and library versions, extras.
std::string manifest_text(const Manifest& m);

/// u.csv, m.csv, v_<i>.csv, diagnostics.csv and iterations.csv under `dir`.
void write_solution(const std::string& dir, const MfgSolution& sol);

}  // namespace mfg
