#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/problem.hpp"
#include "mfg/solver.hpp"

namespace mfg {

/// Experiment-level settings from the [campaign] section.
struct CampaignConfig {
    std::string kind = "solve";  // solve | convergence | energy | fundamental | check-numham
    std::string problem_path;    // optional file supplying the problem sections
    std::vector<int> levels;     // convergence / energy ladders
    int reference = 0;           // convergence reference N
    std::vector<double> thetas;
    std::vector<std::uint64_t> seeds;
    std::vector<double> magnitudes;  // fundamental-test perturbation sizes
    std::size_t samples = 10000;     // check-numham
    std::string output_dir;
};

/// Parsed configuration. Sections: grid, cost, coupling, terminal, initial,
/// constants, tolerances, solver, campaign (see configs/README.md).
struct RunConfig {
    int d = 1;
    int n = 16;
    int steps = 0;  // 0 selects the smallest T satisfying the CFL time-step bound
    double theta = 0.75;
    double sigma = 0.2;
    std::string cost_kind = "quadratic";  // quadratic | quartic | double_well
    ProblemSpec spec;
    SolveOptions solve;
    double hamiltonian_tolerance = 1e-10;
    CampaignConfig campaign;
    std::string text;        // raw text of every file read, in order
    std::uint64_t hash = 0;  // FNV-1a of `text`

    int resolved_steps(int cells, double th) const;
    Grid grid() const { return grid_for(n, 0, theta); }
    /// Grid with the configured d and sigma; steps <= 0 falls back to the configured/CFL value.
    Grid grid_for(int cells, int steps_override, double th) const;
    /// True when the running cost is strongly convex, i.e. usable by the scheme.
    bool cost_is_convex() const { return cost_kind != "double_well"; }
};

std::uint64_t fnv1a64(std::string_view data);

/// Parses TOML text. `base_dir` resolves campaign.problem. Throws ValidationError.
RunConfig parse_config(std::string_view text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Builds the problem on a grid with the configured solver tolerances.
DiscreteProblem make_problem(const RunConfig& cfg, const Grid& grid);

}  // namespace mfg
