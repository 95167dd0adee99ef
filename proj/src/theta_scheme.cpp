#include "mfg/theta_scheme.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mfg/implicit_heat.hpp"
#include "mfg/operators.hpp"

namespace mfg {

std::size_t HjbResult::total_active_truncation() const {
    return std::accumulate(active_truncation.begin(), active_truncation.end(), std::size_t{0});
}

HjbResult hjb_backward(const ScalarSeries& m, const DiscreteProblem& problem, double truncation,
                       const ScalarSeries& eta) {
    const Grid& grid = problem.grid();
    const Torus& g = grid.torus();
    const int steps = grid.steps();
    const int d = g.dim();
    if (m.size() != static_cast<std::size_t>(steps + 1)) {
        throw ValidationError("hjb_backward expects T+1 density slices");
    }
    if (!eta.empty() && eta.size() != static_cast<std::size_t>(steps)) {
        throw ValidationError("hjb_backward expects T slices of eta");
    }

    HjbResult out;
    out.u = make_series(g, steps + 1);
    out.u_half = make_series(g, steps);
    out.v = make_vector_series(g, steps);
    out.active_truncation.assign(steps, 0);
    out.u[steps] = problem.terminal();

    const double dt = grid.dt();
    const double explicit_weight = (1.0 - grid.theta()) * grid.sigma() * dt;
    const ImplicitHeatSolver implicit(g, grid.theta() * grid.sigma() * dt);
    VectorField grad(g);
    ScalarField lap(g);

    for (int t = steps - 1; t >= 0; --t) {
        ScalarField& half = out.u_half[t];
        implicit.solve(out.u[t + 1], half);
        gradient_into(half, grad);
        laplacian_into(half, lap);
        const ScalarField coupling = problem.coupling_field(t, m[t]);
        ScalarField& ut = out.u[t];
        VectorField& vt = out.v[t];
        for (std::size_t x = 0; x < g.size(); ++x) {
            const HamiltonianEval ham = problem.hamiltonian(t, x, grad.vec(x), truncation);
            ut[x] = dt * (-ham.value + coupling[x]) + half[x] + explicit_weight * lap[x];
            for (int i = 0; i < d; ++i) vt.at(x, i) = ham.control[i];
            if (ham.truncated) ++out.active_truncation[t];
        }
        if (!eta.empty()) ut += eta[t];
    }
    return out;
}

FpResult fp_forward(const VectorSeries& v, const ScalarField& m0, const Grid& grid, const FpPerturbation& pert) {
    const Torus& g = grid.torus();
    const int steps = grid.steps();
    const int d = g.dim();
    require_same_torus(g, m0.torus(), "fp_forward");
    if (v.size() != static_cast<std::size_t>(steps)) throw ValidationError("fp_forward expects T control slices");
    auto check_len = [steps](std::size_t n, const char* what) {
        if (n != 0 && n != static_cast<std::size_t>(steps)) {
            throw ValidationError(std::string("fp_forward: perturbation '") + what + "' needs T slices");
        }
    };
    check_len(pert.delta_v.size(), "delta_v");
    check_len(pert.delta.size(), "delta");
    check_len(pert.jump.size(), "jump");

    const double dt = grid.dt();
    const double h = grid.h();
    const double diff = (1.0 - grid.theta()) * grid.sigma() / (h * h);
    const double centre = 1.0 - 2.0 * d * diff * dt;
    const double inv_2h = 0.5 / h;
    const ImplicitHeatSolver implicit(g, grid.theta() * grid.sigma() * dt);

    FpResult out;
    out.m = make_series(g, steps + 1);
    out.m[0] = m0;
    out.diagnostics.reserve(steps);
    ScalarField half(g);
    ScalarField div(g);

    for (int t = 0; t < steps; ++t) {
        const ScalarField& cur = out.m[t];
        const VectorField& vt = v[t];
        for (std::size_t x = 0; x < g.size(); ++x) {
            double acc = centre * cur[x];
            for (int i = 0; i < d; ++i) {
                const std::size_t xp = g.shift(x, i, 1);
                const std::size_t xm = g.shift(x, i, -1);
                acc += dt * (diff - vt.at(xp, i) * inv_2h) * cur[xp];
                acc += dt * (diff + vt.at(xm, i) * inv_2h) * cur[xm];
            }
            half[x] = acc;
        }
        if (!pert.delta_v.empty()) {
            divergence_into(pert.delta_v[t], div);
            for (std::size_t x = 0; x < g.size(); ++x) half[x] -= dt * div[x];
        }
        if (!pert.delta.empty()) {
            for (std::size_t x = 0; x < g.size(); ++x) half[x] += dt * pert.delta[t][x];
        }
        ScalarField& next = out.m[t + 1];
        implicit.solve(half, next);
        if (!pert.jump.empty()) next += pert.jump[t];

        out.diagnostics.push_back({t, next.sum(), next.min(), vt.max_norm()});
    }
    return out;
}

double min_stencil_coefficient(const VectorSeries& v, const Grid& grid) {
    const Torus& g = grid.torus();
    const double dt = grid.dt();
    const double h = grid.h();
    const double diff = (1.0 - grid.theta()) * grid.sigma() / (h * h);
    double worst = 1.0 - 2.0 * g.dim() * diff * dt;
    for (const VectorField& vt : v) {
        for (std::size_t x = 0; x < g.size(); ++x) {
            for (int i = 0; i < g.dim(); ++i) {
                const double vi = vt.at(x, i);
                worst = std::min({worst, dt * (diff - vi / (2.0 * h)), dt * (diff + vi / (2.0 * h))});
            }
        }
    }
    return worst;
}

}  // namespace mfg
