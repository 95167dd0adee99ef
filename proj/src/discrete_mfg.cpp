#include "mfg/discrete_mfg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfg/implicit_heat.hpp"
#include "mfg/operators.hpp"

namespace mfg {

TransitionModel build_transition(const Grid& grid, double control_bound) {
    const Torus& g = grid.torus();
    const std::size_t n = g.size();
    const int d = g.dim();
    if (n > kMaxDenseNodes) {
        throw ValidationError("dense transition model limited to " + std::to_string(kMaxDenseNodes) +
                              " nodes, got " + std::to_string(n));
    }
    const double dt = grid.dt();
    const double h = grid.h();
    const ImplicitHeatSolver implicit(g, grid.theta() * grid.sigma() * dt);

    // binv[a*n + b] = B1^{-1}(a, b); prod[a*n + b] = (B1^{-1} B2)(a, b).
    std::vector<double> binv(n * n);
    std::vector<double> prod(n * n);
    ScalarField unit(g);
    ScalarField col(g);
    for (std::size_t b = 0; b < n; ++b) {
        unit[b] = 1.0;
        implicit.solve(unit, col);
        for (std::size_t a = 0; a < n; ++a) binv[a * n + b] = col[a];
        ScalarField b2 = laplacian_h(unit);
        b2 *= (1.0 - grid.theta()) * grid.sigma();
        implicit.solve(b2, col);
        for (std::size_t a = 0; a < n; ++a) prod[a * n + b] = col[a];
        unit[b] = 0.0;
    }

    TransitionModel model;
    model.torus = g;
    model.dt = dt;
    model.control_bound = control_bound;
    model.pi0.resize(n * n);
    model.pi1.resize(n * n * d);
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            model.pi0[x * n + y] = binv[y * n + x] + dt * prod[y * n + x];
            for (int i = 0; i < d; ++i) {
                const std::size_t xp = g.shift(x, i, 1);
                const std::size_t xm = g.shift(x, i, -1);
                model.pi1[(x * n + y) * d + i] = (binv[y * n + xp] - binv[y * n + xm]) / (2.0 * h);
            }
        }
    }
    return model;
}

TransitionAudit audit_transition(const TransitionModel& model) {
    const std::size_t n = model.nodes();
    const int d = model.torus.dim();
    TransitionAudit audit;
    audit.min_pi0 = model.pi0.empty() ? 0.0 : model.pi0[0];
    audit.min_domination_margin = audit.min_pi0;
    for (std::size_t x = 0; x < n; ++x) {
        double s0 = 0.0;
        std::array<double, kMaxDim> s1{0.0, 0.0, 0.0};
        for (std::size_t y = 0; y < n; ++y) {
            const double p0 = model.p0(x, y);
            s0 += p0;
            double n1 = 0.0;
            for (int i = 0; i < d; ++i) {
                const double p1 = model.p1(x, y, i);
                s1[i] += p1;
                n1 += p1 * p1;
            }
            audit.min_pi0 = std::min(audit.min_pi0, p0);
            audit.min_domination_margin =
                std::min(audit.min_domination_margin, p0 - model.dt * model.control_bound * std::sqrt(n1));
        }
        audit.max_pi0_row_error = std::max(audit.max_pi0_row_error, std::abs(s0 - 1.0));
        double row1 = 0.0;
        for (int i = 0; i < d; ++i) row1 += s1[i] * s1[i];
        audit.max_pi1_row_error = std::max(audit.max_pi1_row_error, std::sqrt(row1));
    }
    return audit;
}

ScalarSeries kolmogorov_roll(const TransitionModel& model, const VectorSeries& v, const ScalarField& m0,
                             const ScalarSeries& delta) {
    const Torus& g = model.torus;
    const std::size_t n = g.size();
    const int d = g.dim();
    require_same_torus(g, m0.torus(), "kolmogorov_roll");
    if (!delta.empty() && delta.size() != v.size()) throw ValidationError("kolmogorov_roll: delta needs T slices");
    if (norm_inf_inf(v) > model.control_bound * (1.0 + 1e-12) + 1e-14) {
        throw ValidationError("kolmogorov_roll: control exceeds the model's control bound");
    }
    ScalarSeries m = make_series(g, v.size() + 1);
    m[0] = m0;
    for (std::size_t t = 0; t < v.size(); ++t) {
        ScalarField& next = m[t + 1];
        for (std::size_t x = 0; x < n; ++x) {
            const double mx = m[t][x];
            if (mx == 0.0) continue;
            const auto vx = v[t].vec(x);
            for (std::size_t y = 0; y < n; ++y) {
                double w = model.p0(x, y);
                for (int i = 0; i < d; ++i) w += model.dt * model.p1(x, y, i) * vx[i];
                next[y] += w * mx;
            }
        }
        if (!delta.empty()) next += delta[t];
    }
    return m;
}

Continuation continuation(const TransitionModel& model, const ScalarField& u_next) {
    const Torus& g = model.torus;
    const std::size_t n = g.size();
    const int d = g.dim();
    Continuation c{ScalarField(g), VectorField(g)};
    for (std::size_t x = 0; x < n; ++x) {
        double s0 = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            s0 += model.p0(x, y) * u_next[y];
            for (int i = 0; i < d; ++i) c.p1.at(x, i) += model.p1(x, y, i) * u_next[y];
        }
        c.p0[x] = s0;
    }
    return c;
}

DpResult dp_roll(const TransitionModel& model, const ScalarSeries& m, const DiscreteProblem& problem,
                 const ScalarSeries& eta) {
    const Torus& g = model.torus;
    const int steps = problem.grid().steps();
    const int d = g.dim();
    require_same_torus(g, problem.torus(), "dp_roll");
    if (m.size() != static_cast<std::size_t>(steps + 1)) throw ValidationError("dp_roll expects T+1 density slices");
    if (!eta.empty() && eta.size() != static_cast<std::size_t>(steps)) {
        throw ValidationError("dp_roll expects T slices of eta");
    }
    DpResult out;
    out.u = make_series(g, steps + 1);
    out.v = make_vector_series(g, steps);
    out.u[steps] = problem.terminal();
    for (int t = steps - 1; t >= 0; --t) {
        const Continuation c = continuation(model, out.u[t + 1]);
        const ScalarField f = problem.coupling_field(t, m[t]);
        for (std::size_t x = 0; x < g.size(); ++x) {
            const HamiltonianEval ham = problem.hamiltonian(t, x, c.p1.vec(x), model.control_bound);
            out.u[t][x] = (-ham.value + f[x]) * model.dt + c.p0[x];
            for (int i = 0; i < d; ++i) out.v[t].at(x, i) = ham.control[i];
            if (ham.truncated) ++out.active_truncation;
        }
        if (!eta.empty()) out.u[t] += eta[t];
    }
    return out;
}

FundamentalGap fundamental_gap(const MfgState& exact, const PerturbedSolution& perturbed, double alpha,
                               double dt, double negativity_tol) {
    const std::size_t steps = exact.v.size();
    if (exact.u.size() != steps + 1 || exact.m.size() != steps + 1 || perturbed.u.size() != steps + 1 ||
        perturbed.m.size() != steps + 1 || perturbed.v.size() != steps || perturbed.eta.size() != steps ||
        perturbed.delta.size() != steps) {
        throw ValidationError("fundamental_gap: inconsistent series lengths");
    }
    for (const auto& slice : perturbed.m) {
        if (slice.min() < -negativity_tol) {
            throw ValidationError("fundamental_gap: perturbed density must be nonnegative");
        }
    }
    FundamentalGap gap;
    for (std::size_t t = 0; t < steps; ++t) {
        const Torus& g = exact.m[t].torus();
        for (std::size_t x = 0; x < g.size(); ++x) {
            double dv2 = 0.0;
            for (int i = 0; i < g.dim(); ++i) {
                const double dv = perturbed.v[t].at(x, i) - exact.v[t].at(x, i);
                dv2 += dv * dv;
            }
            gap.lhs += dv2 * (perturbed.m[t][x] + exact.m[t][x]);
            gap.rhs += (perturbed.u[t + 1][x] - exact.u[t + 1][x]) * perturbed.delta[t][x] +
                       (exact.m[t][x] - perturbed.m[t][x]) * perturbed.eta[t][x];
        }
    }
    gap.lhs *= 0.5 * dt * alpha;
    return gap;
}

}  // namespace mfg
