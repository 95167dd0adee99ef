#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfg/problem.hpp"

namespace mfg {

using SplitVec = std::array<double, 2 * kMaxDim>;

/// Split-variable numerical Hamiltonian built from l = l0 + (alpha/2)|w|^2:
///   NH(t,x,q) = sup_{v >= 0, u <= 0} -<v, q_a> - <u, q_b> - l0(t,x,v+u) - (alpha/2)(|v|^2 + |u|^2)
/// where q_a = (q[0], q[2], ...) and q_b = (q[1], q[3], ...). The gradient is
/// (-v*_0, -u*_0, -v*_1, -u*_1, ...).
struct NumHamiltonianEval {
    double value = 0.0;
    Vec v{0.0, 0.0, 0.0};  // >= 0
    Vec u{0.0, 0.0, 0.0};  // <= 0
    SplitVec gradient{};
};

class NumHamiltonian {
public:
    NumHamiltonian(RunningCost cost, int d, HamiltonianOptions opts = {});

    int dim() const { return d_; }
    double alpha() const { return alpha_; }
    const RunningCost& cost() const { return cost_; }
    /// True for quadratic costs, which have a per-axis closed form.
    bool closed_form() const;

    /// Throws SolverError if the generic inner solver does not converge.
    NumHamiltonianEval eval(double time, const Point& x, std::span<const double> q) const;
    double value(double time, const Point& x, std::span<const double> q) const { return eval(time, x, q).value; }

    /// Untruncated H(t,x,p) of the running cost.
    double continuous(double time, const Point& x, std::span<const double> p) const;

private:
    RunningCost cost_;
    int d_;
    double alpha_;
    HamiltonianOptions opts_;
};

struct AxiomResult {
    std::string name;
    std::size_t samples = 0;
    double max_violation = 0.0;
    double tolerance = 0.0;
    std::vector<double> witness;  // q (and the second point for pairwise checks) at the worst sample
    bool pass() const { return max_violation <= tolerance; }
};

struct AxiomReport {
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::vector<AxiomResult> axioms;  // g1..g5 in order
    /// Fitted witnesses of the growth bounds:
    ///   <NH_q, q> - NH >= c1 |NH_q|^2 - c2,   |NH_q| <= c3 |q| + c4.
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;

    bool all_pass() const;
    const AxiomResult& get(const std::string& name) const;
    /// `axiom,samples,max_violation,witness...`
    std::string to_csv() const;
};

struct AxiomCheckOptions {
    double q_range = 3.0;   // q sampled in [-q_range, q_range]^{2d}
    double tolerance = 1e-8;
    double fd_step = 1e-6;  // central differences
};

/// Samples (t, x, q) from a counter-based stream and audits the five axioms:
///   g1 monotonicity (nonincreasing in q_a, nondecreasing in q_b), g2 diagonal
///   consistency with H, g3 C^1 regularity (gradient matches central differences
///   and is 1/alpha-Lipschitz), g4 midpoint convexity, g5 growth bounds with
///   c1 = alpha/4, c3 = 1/alpha and c2, c4 fitted at q = 0.
AxiomReport check_axioms(const NumHamiltonian& nh, std::size_t samples, std::uint64_t seed,
                         const AxiomCheckOptions& opts = {});

}  // namespace mfg
