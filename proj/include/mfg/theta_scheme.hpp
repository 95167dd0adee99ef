#pragma once

#include <cstddef>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/problem.hpp"

namespace mfg {

/// Output of the backward pass. u has T+1 slices, u_half and v have T.
struct HjbResult {
    ScalarSeries u;
    ScalarSeries u_half;  // u(t+1/2) = B1^{-1} u(t+1)
    VectorSeries v;
    /// Per time step, number of nodes where the ball constraint |v| <= D was binding.
    std::vector<std::size_t> active_truncation;

    std::size_t total_active_truncation() const;
};

/// Backward HJB pass of the theta-scheme, for t = T-1 down to 0:
///   (Id - theta sigma dt lap_h) u(t+1/2) = u(t+1)
///   u(t) = dt (-H^D[grad_h u(t+1/2)] + f(t, ., m(t))) + (Id + (1-theta) sigma dt lap_h) u(t+1/2)
///   v(t) = -H^D_p[grad_h u(t+1/2)]
/// with u(T) = g. `eta`, when non-empty, is added to u(t) (perturbed discrete MFG).
HjbResult hjb_backward(const ScalarSeries& m, const DiscreteProblem& problem, double truncation,
                       const ScalarSeries& eta = {});

/// Perturbation terms of the forward pass:
///   m(t+1/2) += -dt div_h(delta_v(t)) + dt delta(t)     (before the implicit solve)
///   m(t+1)   += jump(t)                                  (after the implicit solve)
/// Empty series mean zero.
struct FpPerturbation {
    VectorSeries delta_v;
    ScalarSeries delta;
    ScalarSeries jump;

    bool empty() const { return delta_v.empty() && delta.empty() && jump.empty(); }
};

/// Per-step record of the forward pass for the step t -> t+1.
struct FpStepDiagnostics {
    int t = 0;
    double mass = 0.0;       // sum_x m(t+1, x)
    double min_m = 0.0;      // min_x m(t+1, x)
    double max_abs_v = 0.0;  // max_x |v(t, x)|
};

struct FpResult {
    ScalarSeries m;
    std::vector<FpStepDiagnostics> diagnostics;
};

/// Forward Fokker-Planck pass:
///   m(t+1/2) = (Id + (1-theta) sigma dt lap_h) m(t) - dt div_h(v(t) m(t)) [+ perturbation]
///   (Id - theta sigma dt lap_h) m(t+1) = m(t+1/2)
/// The explicit half-step is evaluated in stencil form, whose coefficients
///   1 - 2d(1-theta) sigma dt/h^2,   dt((1-theta) sigma/h^2 -+ v_i(x +- h e_i)/(2h))
/// are nonnegative under the CFL condition when |v| <= M.
FpResult fp_forward(const VectorSeries& v, const ScalarField& m0, const Grid& grid,
                    const FpPerturbation& pert = {});

/// Smallest coefficient of the explicit stencil over all (t, x, i); nonnegative
/// exactly when the explicit half-step is monotone for these controls.
double min_stencil_coefficient(const VectorSeries& v, const Grid& grid);

}  // namespace mfg
