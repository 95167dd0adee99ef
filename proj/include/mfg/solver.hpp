#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mfg/discrete_mfg.hpp"
#include "mfg/grid.hpp"
#include "mfg/problem.hpp"
#include "mfg/theta_scheme.hpp"

namespace mfg {

/// Averaging weights of the outer iteration m_{k+1} = (1 - w_k) m_k + w_k phi(m_k).
struct Damping {
    enum class Kind { Fictitious, Fixed, Plain };
    Kind kind = Kind::Fictitious;
    double omega = 0.5;  // used by Fixed

    static Damping fictitious() { return {Kind::Fictitious, 0.0}; }
    static Damping fixed(double w) { return {Kind::Fixed, w}; }
    static Damping plain() { return {Kind::Plain, 1.0}; }

    /// w_k: 1/(k+1), omega, or 1.
    double weight(int k) const;
};

enum class InitKind {
    Uniform,        // m(0) = m0, later slices uniform
    DiffusionOnly,  // m0 rolled forward with v = 0
    Random,         // m(0) = m0, later slices seeded random probability vectors
};

struct IterationRecord {
    int k = 0;
    double omega = 0.0;
    double residual = 0.0;   // |m_k - phi(m_k)|_{inf,1}
    double max_abs_v = 0.0;  // max |v| of HJB(m_k)
    double min_m = 0.0;      // min of phi(m_k)
};

struct SolveOptions {
    Damping damping = Damping::fictitious();
    double tol = 1e-9;
    int max_outer = 5000;
    InitKind init = InitKind::Uniform;
    std::uint64_t seed = 0;  // used by InitKind::Random
    bool override_cfl = false;
    /// Called after every residual evaluation.
    std::function<void(const IterationRecord&)> observer;

    void validate() const;
};

struct MfgSolution : MfgState {
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    double control_bound = 0.0;
    std::vector<IterationRecord> history;
    /// Forward-pass diagnostics of phi(m) at the returned m.
    std::vector<FpStepDiagnostics> diagnostics;
    /// Per step, nodes where |v| <= M was binding in the returned HJB pass.
    std::vector<std::size_t> active_truncation;
};

/// One evaluation of phi = fp_forward o HJB(., D = M) together with its parts.
struct PhiEvaluation {
    HjbResult hjb;
    FpResult fp;
};
PhiEvaluation evaluate_phi(const ScalarSeries& m, const DiscreteProblem& problem, const ScalarSeries& eta = {},
                           const ScalarSeries& delta = {});

/// |m - phi(m)|_{inf,1}.
double residual(const ScalarSeries& m, const DiscreteProblem& problem);

/// Initial curve for the outer loop.
ScalarSeries initial_curve(const DiscreteProblem& problem, InitKind init, std::uint64_t seed);

/// Damped fixed-point iteration on phi. The returned (u, v) come from HJB(m)
/// at the returned m, which is the final (or, without convergence, the best)
/// iterate. Throws ValidationError when the CFL condition fails without override.
MfgSolution solve_mfg(const DiscreteProblem& problem, const SolveOptions& opts = {});

/// Same iteration for the system perturbed by eta (added to u(t)) and delta
/// (added to m(t+1) after the implicit solve).
PerturbedSolution solve_perturbed_mfg(const DiscreteProblem& problem, const ScalarSeries& eta,
                                      const ScalarSeries& delta, const SolveOptions& opts = {});

}  // namespace mfg
