#pragma once

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/quadrature.hpp"

namespace mfg {

using Vec = std::array<double, kMaxDim>;

using TimeSpaceFunction = std::function<double(double time, const Point& x)>;
using TimeSpaceVectorFunction = std::function<Vec(double time, const Point& x)>;

inline constexpr double kNoTruncation = std::numeric_limits<double>::infinity();

/// l(t,x,v) = (alpha/2)|v|^2 + <b(t,x), v> + c(t,x).
struct QuadraticCost {
    double alpha = 1.0;
    TimeSpaceVectorFunction drift;  // b; empty means zero
    TimeSpaceFunction offset;       // c; empty means zero
};

/// Arbitrary alpha-strongly convex cost given by value and v-gradient.
struct GenericCost {
    double alpha = 1.0;
    std::function<double(double time, const Point& x, std::span<const double> v)> value;
    std::function<void(double time, const Point& x, std::span<const double> v, std::span<double> grad)>
        gradient;
    /// Estimate of the Lipschitz constant of the v-gradient; 0 selects 10*alpha.
    double inner_lipschitz = 0.0;
};

using RunningCost = std::variant<QuadraticCost, GenericCost>;

/// f(t,x,m) = F(m(x)) on the density; Lasry-Lions monotone when F is nondecreasing.
struct LocalCoupling {
    std::function<double(double)> F;
};

/// f(t,x,m) = (K * m)(x); monotone when K has a nonnegative Fourier symbol.
struct NonlocalCoupling {
    SpaceFunction kernel;
};

using Coupling = std::variant<LocalCoupling, NonlocalCoupling>;

/// Continuous problem data and the constants entering the control bound M.
struct ProblemSpec {
    RunningCost running_cost = QuadraticCost{};
    Coupling coupling = LocalCoupling{};
    SpaceFunction terminal_cost;     // g
    SpaceFunction initial_density;   // m0, nonnegative with unit mass
    double alpha = 1.0;
    double L_ell = 0.0;
    double L_f = 0.0;
    double L_g = 0.0;
    /// Replaces the sampled M when set.
    std::optional<double> control_bound_override;
    /// Gauss points per axis used by I_h and the coupling cell averages.
    int quadrature_points = 3;

    /// Checks the constant ranges, the cost/alpha consistency, the gradient of a
    /// generic cost against finite differences and the unit mass of m0.
    void validate(int d) const;
};

/// Result of the truncated Legendre transform
///   H^D(t,x,p) = sup_{|v| <= D} <-p, v> - l(t,x,v).
struct HamiltonianEval {
    double value = 0.0;
    Vec control{0.0, 0.0, 0.0};  // maximiser v* = -H^D_p(t,x,p)
    double truncation = kNoTruncation;
    bool truncated = false;  // the ball constraint is binding at v*
};

struct HamiltonianOptions {
    double tolerance = 1e-10;  // gradient-map norm for the generic inner solver
    int max_iterations = 200000;
};

/// Evaluates l(t,x,v) at a continuous time.
double running_cost_value(const RunningCost& cost, double time, const Point& x, std::span<const double> v);
/// Evaluates l_v(t,x,v) at a continuous time.
void running_cost_gradient(const RunningCost& cost, double time, const Point& x, std::span<const double> v,
                           std::span<double> grad);

/// H^D at a continuous time. Throws SolverError if the generic inner solver
/// does not converge.
HamiltonianEval hamiltonian(const RunningCost& cost, double time, const Point& x, std::span<const double> p,
                            double truncation, const HamiltonianOptions& opts = {});

/// (1/alpha)(2 max_lv0 + sqrt(d)(L_ell + L_f + L_g)) for any d >= 1.
double control_bound_formula(double max_lv0, double alpha, int d, double L_ell, double L_f, double L_g);

/// M = (1/alpha)(2 max_{t,x} |l_v(t,x,0)| + sqrt(d)(L_ell + L_f + L_g)), with
/// the max taken over `samples_per_axis`^d points times 17 time samples.
double control_bound_M(const ProblemSpec& spec, int d, int samples_per_axis = 16);

struct CflReport {
    bool ok = false;
    double dt = 0.0;
    double h = 0.0;
    double dt_max = 0.0;
    double h_max = 0.0;
};

/// dt <= h^2 / (2d(1-theta)sigma) and h <= 2(1-theta)sigma/M. Throws for theta = 1.
CflReport cfl_check(const Grid& grid, double M);

/// Smallest T with 1/T satisfying the time-step half of the CFL condition.
int cfl_min_steps(int d, int n, double theta, double sigma);

/// The problem data discretized on a grid: g(x) = g^c(x), m0 = I_h(m0^c),
/// running costs sampled at (t dt, x), coupling cell-averaged over B_h(x).
class DiscreteProblem {
public:
    DiscreteProblem(ProblemSpec spec, Grid grid);

    const ProblemSpec& spec() const { return spec_; }
    const Grid& grid() const { return grid_; }
    const Torus& torus() const { return grid_.torus(); }
    double alpha() const { return spec_.alpha; }
    double control_bound() const { return control_bound_; }

    const ScalarField& terminal() const { return terminal_; }
    const ScalarField& initial() const { return initial_; }

    /// H^D at time index t and lattice node x.
    HamiltonianEval hamiltonian(int t, std::size_t node, std::span<const double> p, double truncation) const;

    /// f(t,x,m) at one node.
    double coupling_f(int t, std::size_t node, const ScalarField& m) const;
    /// f(t,.,m) on the whole slice.
    ScalarField coupling_field(int t, const ScalarField& m) const;

    /// l(t,x,v) at time index t.
    double running_cost(int t, std::size_t node, std::span<const double> v) const;

    HamiltonianOptions& hamiltonian_options() { return ham_opts_; }

private:
    ProblemSpec spec_;
    Grid grid_;
    double control_bound_ = 0.0;
    ScalarField terminal_;
    ScalarField initial_;
    // Quadratic costs: b and c tabulated per (t, node).
    bool quadratic_ = false;
    std::vector<double> drift_;   // [(t*nodes + x)*d + i]
    std::vector<double> offset_;  // [t*nodes + x]
    // Nonlocal coupling: double-cell averages of the kernel per lattice offset.
    std::vector<double> kernel_table_;
    HamiltonianOptions ham_opts_;
};

/// Built-in expressions for g^c and m0^c: "zero", "cos_sum" (sum_i cos 2 pi x_i),
/// "uniform" (constant 1) and "gaussian_bump" (periodized Gaussian with unit mass).
struct ExpressionParams {
    Point center{0.5, 0.5, 0.5};
    double width = 0.1;
    double scale = 1.0;
};
SpaceFunction make_expression(const std::string& id, int d, const ExpressionParams& params = {});

}  // namespace mfg
