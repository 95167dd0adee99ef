#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfg/config.hpp"

namespace mfg {

/// Worker count: MFG_THREADS when set to a positive integer, else hardware concurrency.
int worker_count();

/// Runs fn(0..count-1) on up to worker_count() threads; rethrows the first exception.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// Time-step counts for a nested ladder. The reference count is the smallest
/// T_ref >= its CFL minimum such that every level has a divisor of T_ref in
/// [T_min(N), 2 T_min(N)]; each level takes the smallest such divisor.
struct TimeLadder {
    std::vector<int> level_steps;
    int reference_steps = 0;
};
TimeLadder select_time_ladder(int d, const std::vector<int>& levels, int reference, double theta, double sigma);

/// Least-squares slope of log(err) against log(h).
double fitted_rate(const std::vector<double>& h, const std::vector<double>& err);

struct ConvergenceRow {
    int n = 0;
    double h = 0.0;
    int steps = 0;
    double dt = 0.0;
    double err_u = 0.0;  // max over shared (t, x) of |u_h - u_ref|
    double err_m = 0.0;  // max over shared t of sum_x |m_h - (N_ref/N)^d m_ref|
    int outer_iters = 0;
    double residual = 0.0;
    bool converged = false;
};

struct ConvergenceReport {
    int d = 1;
    double theta = 0.0;
    double sigma = 0.0;
    int reference_n = 0;
    int reference_steps = 0;
    std::vector<ConvergenceRow> rows;
    double fitted_rate_u = 0.0;
    double fitted_rate_m = 0.0;

    bool errors_strictly_decreasing() const;
    std::string to_csv() const;
};

/// Self-convergence study against a nested reference grid.
ConvergenceReport run_convergence(const RunConfig& cfg, double theta);

struct EnergyRow {
    int n = 0;
    double h = 0.0;
    int steps = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    double scale = 1.0;
    double max_mu = 0.0;     // max_t |mu(t)|_2
    double forcing = 0.0;    // (sum_t dt (|delta_v(t)|_2^2 + |delta(t)|_2^2))^{1/2}
    std::optional<double> amplification;  // empty when forcing == 0
    double linearity_error = 0.0;         // |max_mu(2 delta) - 2 max_mu(delta)|
};

struct EnergyReport {
    double theta = 0.0;
    double sigma = 0.0;
    std::vector<EnergyRow> rows;

    /// Largest ratio max(A_k, A_{k+1}) / min(A_k, A_{k+1}) between adjacent levels.
    double max_adjacent_ratio() const;
    std::string to_csv() const;
};

/// Perturbed forward pass with mu(0) = 0 and the fixed control v_i = 0.9 M sin(2 pi x_i).
/// Each perturbation field is a seeded sum of four random low-frequency waves
/// (|k_i| <= 3) with a smooth time profile, sampled on the grid and normalized
/// to l2 norm `scale` per slice.
EnergyRow energy_level(const RunConfig& cfg, int n, double theta, std::uint64_t seed, double scale = 1.0);
/// Rejects theta <= 1/2.
EnergyReport run_energy_test(const RunConfig& cfg, double theta, std::uint64_t seed, double scale = 1.0);

struct FundamentalRow {
    std::uint64_t seed = 0;
    double magnitude = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    int iterations = 0;
    bool converged = false;
    double margin() const { return rhs - lhs; }
    bool pass(double slack = 1e-8) const { return converged && lhs <= rhs + slack; }
};

struct FundamentalReport {
    int d = 1;
    int n = 0;
    int steps = 0;
    double theta = 0.0;
    double exact_residual = 0.0;
    std::vector<FundamentalRow> rows;

    bool all_pass(double slack = 1e-8) const;
    std::string to_csv() const;
};

inline constexpr double kExactTolerance = 1e-12;
inline constexpr double kPerturbedTolerance = 1e-11;

/// Solves the unperturbed system and, per (seed, magnitude a), the system
/// perturbed by eta = a xi and delta = a h^d xi' with xi, xi' ~ U[-1, 1].
FundamentalReport run_fundamental_test(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                       const std::vector<double>& magnitudes);

}  // namespace mfg
