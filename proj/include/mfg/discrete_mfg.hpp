#pragma once

#include <cstddef>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/problem.hpp"

namespace mfg {

/// A triple (u, v, m) on the time-space lattice: u, m with T+1 slices, v with T.
struct MfgState {
    ScalarSeries u;
    VectorSeries v;
    ScalarSeries m;
};

/// Solution of the discrete MFG perturbed by eta (added to the dynamic
/// programming equation) and delta (added to the Kolmogorov equation).
struct PerturbedSolution : MfgState {
    ScalarSeries eta;    // T slices
    ScalarSeries delta;  // T slices
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Transition kernel pi(t,x,y,w) = pi0(x,y) + dt <pi1(x,y), w> realising the
/// theta-scheme as a discrete MFG. Both parts are time-independent here.
///
///   pi0(x,y) = B1^{-1}(y,x) + dt (B1^{-1} B2)(y,x)
///   pi1(x,y) = (B1^{-1}(y, x + h e_i) - B1^{-1}(y, x - h e_i)) / (2h)
///
/// with B1 = Id - theta sigma dt lap_h and B2 = (1-theta) sigma lap_h.
struct TransitionModel {
    Torus torus;
    double dt = 0.0;
    double control_bound = 0.0;
    std::vector<double> pi0;  // [x*n + y]
    std::vector<double> pi1;  // [(x*n + y)*d + i]

    std::size_t nodes() const { return torus.size(); }
    double p0(std::size_t x, std::size_t y) const { return pi0[x * nodes() + y]; }
    double p1(std::size_t x, std::size_t y, int i) const {
        return pi1[(x * nodes() + y) * static_cast<std::size_t>(torus.dim()) + i];
    }
};

inline constexpr std::size_t kMaxDenseNodes = 4096;

/// Builds the dense kernels from N^d spectral unit solves. Throws
/// ValidationError above kMaxDenseNodes nodes.
TransitionModel build_transition(const Grid& grid, double control_bound);

/// Worst-case deviations from the transition-process conditions.
struct TransitionAudit {
    double max_pi0_row_error = 0.0;  // max_x |sum_y pi0(x,y) - 1|
    double max_pi1_row_error = 0.0;  // max_x |sum_y pi1(x,y)|
    double min_pi0 = 0.0;
    /// min over (x,y) of pi0(x,y) - dt * D * |pi1(x,y)|
    double min_domination_margin = 0.0;
};
TransitionAudit audit_transition(const TransitionModel& model);

/// Kolmogorov recursion m(t+1,y) = sum_x (pi0(x,y) + dt <pi1(x,y), v(t,x)>) m(t,x) [+ delta(t,y)].
/// Rejects controls above the model's control bound.
ScalarSeries kolmogorov_roll(const TransitionModel& model, const VectorSeries& v, const ScalarField& m0,
                             const ScalarSeries& delta = {});

/// p0(x) = sum_s pi0(x,s) u(s),  p1(x) = sum_s pi1(x,s) u(s).
struct Continuation {
    ScalarField p0;
    VectorField p1;
};
Continuation continuation(const TransitionModel& model, const ScalarField& u_next);

struct DpResult {
    ScalarSeries u;
    VectorSeries v;
    std::size_t active_truncation = 0;
};

/// Dynamic programming in kernel form with truncation D = model.control_bound:
///   u(t,x) = (-H^D(t,x,p1) + f(t,x,m(t))) dt + p0(t,x) [+ eta(t,x)],  v = -H^D_p(t,x,p1),  u(T) = g.
DpResult dp_roll(const TransitionModel& model, const ScalarSeries& m, const DiscreteProblem& problem,
                 const ScalarSeries& eta = {});

struct FundamentalGap {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Both sides of the a-posteriori bound between a solution (u-bar, v-bar, m-bar)
/// and a perturbed solution (u, v, m; eta, delta):
///   lhs = (dt alpha / 2) sum_{t<T, x} |v - v-bar|^2 (m + m-bar)
///   rhs = sum_{t<T, x} (u - u-bar)(t+1, x) delta(t, x) + (m-bar - m)(t, x) eta(t, x)
/// Throws ValidationError if the perturbed density has negative entries.
FundamentalGap fundamental_gap(const MfgState& exact, const PerturbedSolution& perturbed, double alpha,
                               double dt, double negativity_tol = 1e-12);

}  // namespace mfg
