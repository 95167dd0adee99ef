#include "mfg/solver.hpp"

#include <algorithm>
#include <string>

#include "mfg/rng.hpp"

namespace mfg {

double Damping::weight(int k) const {
    switch (kind) {
        case Kind::Fictitious: return 1.0 / (k + 1.0);
        case Kind::Fixed: return omega;
        case Kind::Plain: break;
    }
    return 1.0;
}

void SolveOptions::validate() const {
    if (!(tol > 0.0)) throw ValidationError("solver tolerance must be positive");
    if (max_outer < 0) throw ValidationError("max_outer must be nonnegative");
    if (damping.kind == Damping::Kind::Fixed && !(damping.omega > 0.0 && damping.omega <= 1.0)) {
        throw ValidationError("fixed damping weight must lie in (0, 1]");
    }
}

PhiEvaluation evaluate_phi(const ScalarSeries& m, const DiscreteProblem& problem, const ScalarSeries& eta,
                           const ScalarSeries& delta) {
    PhiEvaluation out;
    out.hjb = hjb_backward(m, problem, problem.control_bound(), eta);
    FpPerturbation pert;
    pert.jump = delta;
    out.fp = fp_forward(out.hjb.v, problem.initial(), problem.grid(), pert);
    return out;
}

double residual(const ScalarSeries& m, const DiscreteProblem& problem) {
    return distance_inf_1(m, evaluate_phi(m, problem).fp.m);
}

ScalarSeries initial_curve(const DiscreteProblem& problem, InitKind init, std::uint64_t seed) {
    const Grid& grid = problem.grid();
    const Torus& g = grid.torus();
    const int steps = grid.steps();
    switch (init) {
        case InitKind::DiffusionOnly:
            return fp_forward(make_vector_series(g, steps), problem.initial(), grid).m;
        case InitKind::Random: {
            ScalarSeries m = make_series(g, steps + 1);
            m[0] = problem.initial();
            CounterRng rng(seed);
            for (int t = 1; t <= steps; ++t) {
                for (std::size_t x = 0; x < g.size(); ++x) m[t][x] = rng.uniform(0.5, 1.5);
                m[t] *= 1.0 / m[t].sum();
            }
            return m;
        }
        case InitKind::Uniform: break;
    }
    ScalarSeries m(steps + 1, ScalarField::uniform_probability(g));
    m[0] = problem.initial();
    return m;
}

namespace {

void enforce_cfl(const DiscreteProblem& problem, const SolveOptions& opts) {
    const CflReport cfl = cfl_check(problem.grid(), problem.control_bound());
    if (!cfl.ok && !opts.override_cfl) {
        throw ValidationError("CFL condition violated: dt=" + std::to_string(cfl.dt) + " (max " +
                              std::to_string(cfl.dt_max) + "), h=" + std::to_string(cfl.h) + " (max " +
                              std::to_string(cfl.h_max) + ")");
    }
}

struct LoopResult {
    ScalarSeries m;
    PhiEvaluation phi;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<IterationRecord> history;
};

LoopResult fixed_point(const DiscreteProblem& problem, const SolveOptions& opts, const ScalarSeries& eta,
                       const ScalarSeries& delta) {
    opts.validate();
    enforce_cfl(problem, opts);
    LoopResult best;
    ScalarSeries m = initial_curve(problem, opts.init, opts.seed);
    for (int k = 0;; ++k) {
        PhiEvaluation phi = evaluate_phi(m, problem, eta, delta);
        const double res = distance_inf_1(m, phi.fp.m);
        const double omega = opts.damping.weight(k);
        double min_m = phi.fp.m.front().min();
        for (const auto& slice : phi.fp.m) min_m = std::min(min_m, slice.min());
        const IterationRecord rec{k, omega, res, norm_inf_inf(phi.hjb.v), min_m};
        best.history.push_back(rec);
        if (opts.observer) opts.observer(rec);

        const bool done = res <= opts.tol;
        if (k == 0 || res < best.residual || done) {
            best.residual = res;
            best.iterations = k;
            best.m = m;
            best.phi = phi;
            best.converged = done;
        }
        if (done || k >= opts.max_outer) break;
        for (std::size_t t = 0; t < m.size(); ++t) {
            ScalarField& cur = m[t];
            const ScalarField& target = phi.fp.m[t];
            for (std::size_t x = 0; x < cur.size(); ++x) cur[x] = (1.0 - omega) * cur[x] + omega * target[x];
        }
    }
    return best;
}

}  // namespace

MfgSolution solve_mfg(const DiscreteProblem& problem, const SolveOptions& opts) {
    LoopResult r = fixed_point(problem, opts, {}, {});
    MfgSolution sol;
    sol.u = std::move(r.phi.hjb.u);
    sol.v = std::move(r.phi.hjb.v);
    sol.m = std::move(r.m);
    sol.residual = r.residual;
    sol.iterations = r.iterations;
    sol.converged = r.converged;
    sol.control_bound = problem.control_bound();
    sol.history = std::move(r.history);
    sol.diagnostics = std::move(r.phi.fp.diagnostics);
    sol.active_truncation = std::move(r.phi.hjb.active_truncation);
    return sol;
}

PerturbedSolution solve_perturbed_mfg(const DiscreteProblem& problem, const ScalarSeries& eta,
                                      const ScalarSeries& delta, const SolveOptions& opts) {
    const auto steps = static_cast<std::size_t>(problem.grid().steps());
    if (eta.size() != steps || delta.size() != steps) {
        throw ValidationError("perturbations need T slices each");
    }
    LoopResult r = fixed_point(problem, opts, eta, delta);
    PerturbedSolution sol;
    sol.u = std::move(r.phi.hjb.u);
    sol.v = std::move(r.phi.hjb.v);
    sol.m = std::move(r.m);
    sol.eta = eta;
    sol.delta = delta;
    sol.residual = r.residual;
    sol.iterations = r.iterations;
    sol.converged = r.converged;
    return sol;
}

}  // namespace mfg
