#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/problem.hpp"
#include "mfg/rng.hpp"

namespace mfg::test {

inline ScalarField random_field(const Torus& g, CounterRng& rng, double lo = -1.0, double hi = 1.0) {
    ScalarField f(g);
    for (double& a : f.values()) a = rng.uniform(lo, hi);
    return f;
}

inline VectorField random_vector_field(const Torus& g, CounterRng& rng, double lo = -1.0, double hi = 1.0) {
    VectorField f(g);
    for (double& a : f.raw()) a = rng.uniform(lo, hi);
    return f;
}

inline ScalarField random_probability(const Torus& g, CounterRng& rng) {
    ScalarField f = random_field(g, rng, 0.0, 1.0);
    f *= 1.0 / f.sum();
    return f;
}

// Dense Gaussian elimination on (Id - c dt lap_h) y = x.
inline ScalarField dense_b1_solve(const ScalarField& x, double c, const Grid& grid) {
    const Torus& g = grid.torus();
    const std::size_t n = g.size();
    const double r = c * grid.dt() / (grid.h() * grid.h());
    std::vector<double> a(n * n, 0.0);
    std::vector<double> b(x.values().begin(), x.values().end());
    for (std::size_t p = 0; p < n; ++p) {
        a[p * n + p] += 1.0 + 2.0 * g.dim() * r;
        for (int i = 0; i < g.dim(); ++i) {
            a[p * n + g.shift(p, i, 1)] -= r;
            a[p * n + g.shift(p, i, -1)] -= r;
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t row = k + 1; row < n; ++row) {
            const double f = a[row * n + k] / a[k * n + k];
            for (std::size_t col = k; col < n; ++col) a[row * n + col] -= f * a[k * n + col];
            b[row] -= f * b[k];
        }
    }
    std::vector<double> y(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t col = k + 1; col < n; ++col) s -= a[k * n + col] * y[col];
        y[k] = s / a[k * n + k];
    }
    return ScalarField(g, y);
}

/// Quadratic cost (alpha/2)|v|^2, local identity coupling, g = cos 2 pi x, uniform m0.
inline ProblemSpec smooth_problem(double alpha = 10.0) {
    ProblemSpec s;
    s.running_cost = QuadraticCost{alpha, {}, {}};
    s.alpha = alpha;
    s.coupling = LocalCoupling{[](double m) { return m; }};
    s.terminal_cost = make_expression("cos_sum", 1);
    s.initial_density = make_expression("uniform", 1);
    s.L_f = 1.0;
    s.L_g = 2.0 * std::numbers::pi;
    return s;
}

/// No coupling, no terminal cost, quadratic cost without drift.
inline ProblemSpec null_problem(int d = 1) {
    ProblemSpec s;
    s.running_cost = QuadraticCost{1.0, {}, {}};
    s.alpha = 1.0;
    s.coupling = LocalCoupling{[](double) { return 0.0; }};
    s.terminal_cost = make_expression("zero", d);
    s.initial_density = make_expression("uniform", d);
    s.L_g = 0.1;  // keeps M positive
    return s;
}

}  // namespace mfg::test
