#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfg/operators.hpp"
#include "mfg/theta_scheme.hpp"
#include "support.hpp"

using namespace mfg;
using mfg::test::dense_b1_solve;

namespace {

// Straight-line backward pass for (alpha/2)|v|^2 without truncation.
ScalarSeries naive_hjb(const ScalarSeries& m, const DiscreteProblem& p) {
    const Grid& grid = p.grid();
    const Torus& g = grid.torus();
    const double dt = grid.dt();
    const double h = grid.h();
    const double c = grid.theta() * grid.sigma();
    ScalarSeries u(grid.steps() + 1, ScalarField(g));
    u[grid.steps()] = p.terminal();
    for (int t = grid.steps() - 1; t >= 0; --t) {
        const ScalarField half = dense_b1_solve(u[t + 1], c, grid);
        for (std::size_t x = 0; x < g.size(); ++x) {
            double p2 = 0.0;
            double lap = -2.0 * g.dim() * half[x];
            for (int i = 0; i < g.dim(); ++i) {
                const double gi = (half[g.shift(x, i, 1)] - half[g.shift(x, i, -1)]) / (2.0 * h);
                p2 += gi * gi;
                lap += half[g.shift(x, i, 1)] + half[g.shift(x, i, -1)];
            }
            lap /= h * h;
            const double ham = p2 / (2.0 * p.alpha());
            u[t][x] = dt * (-ham + m[t][x] / g.cell_volume()) + half[x] + (1.0 - grid.theta()) * grid.sigma() * dt * lap;
        }
    }
    return u;
}

// Dense matrix of the explicit half-step m -> (Id + (1-theta) sigma dt lap) m - dt div(v m).
std::vector<double> explicit_matrix(const VectorField& v, const Grid& grid) {
    const Torus& g = grid.torus();
    const std::size_t n = g.size();
    const double dt = grid.dt();
    const double h = grid.h();
    const double k = (1.0 - grid.theta()) * grid.sigma() * dt / (h * h);
    std::vector<double> a(n * n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        a[x * n + x] += 1.0 - 2.0 * g.dim() * k;
        for (int i = 0; i < g.dim(); ++i) {
            const std::size_t xp = g.shift(x, i, 1);
            const std::size_t xm = g.shift(x, i, -1);
            a[x * n + xp] += k - dt * v.at(xp, i) / (2.0 * h);
            a[x * n + xm] += k + dt * v.at(xm, i) / (2.0 * h);
        }
    }
    return a;
}

ScalarSeries naive_fp(const VectorSeries& v, const ScalarField& m0, const Grid& grid) {
    const Torus& g = grid.torus();
    const std::size_t n = g.size();
    ScalarSeries m{m0};
    for (int t = 0; t < grid.steps(); ++t) {
        const std::vector<double> a = explicit_matrix(v[t], grid);
        ScalarField half(g);
        for (std::size_t x = 0; x < n; ++x) {
            for (std::size_t y = 0; y < n; ++y) half[x] += a[x * n + y] * m.back()[y];
        }
        m.push_back(dense_b1_solve(half, grid.theta() * grid.sigma(), grid));
    }
    return m;
}

VectorSeries bounded_controls(const Torus& g, int steps, double bound, CounterRng& rng) {
    VectorSeries v;
    for (int t = 0; t < steps; ++t) {
        VectorField f = mfg::test::random_vector_field(g, rng, -1.0, 1.0);
        f *= bound / std::max(f.max_norm(), 1e-300);
        v.push_back(f);
    }
    return v;
}

}  // namespace

TEST_CASE("constant terminal cost with no coupling propagates unchanged") {
    ProblemSpec s = mfg::test::null_problem(2);
    s.terminal_cost = [](const Point&) { return 5.0; };
    const DiscreteProblem p(s, Grid(2, 6, 8, 0.75, 0.5));
    const ScalarSeries m = make_series(p.torus(), 9, 1.0 / 36.0);
    const HjbResult r = hjb_backward(m, p, kNoTruncation);
    for (const ScalarField& ut : r.u) CHECK(norm_inf(ut - ScalarField(p.torus(), 5.0)) <= 1e-12);
    CHECK(norm_inf_inf(r.v) <= 1e-12);
    CHECK(r.total_active_truncation() == 0);
}

TEST_CASE("null problem gives a zero value function") {
    const DiscreteProblem p(mfg::test::null_problem(1), Grid(1, 8, 6, 0.75, 0.5));
    const HjbResult r = hjb_backward(make_series(p.torus(), 7, 0.125), p, kNoTruncation);
    for (const ScalarField& ut : r.u) CHECK(norm_inf(ut) == 0.0);
}

TEST_CASE("backward pass matches a straight-line implementation") {
    CounterRng rng(11);
    for (int d = 1; d <= 2; ++d) {
        ProblemSpec s = mfg::test::smooth_problem(2.0);
        s.terminal_cost = make_expression("cos_sum", d);
        s.initial_density = make_expression("uniform", d);
        const DiscreteProblem p(s, Grid(d, 8, 4, 0.7, 0.3));
        ScalarSeries m;
        for (int t = 0; t <= 4; ++t) m.push_back(mfg::test::random_probability(p.torus(), rng));
        const HjbResult r = hjb_backward(m, p, kNoTruncation);
        const ScalarSeries ref = naive_hjb(m, p);
        CHECK(distance_inf_inf(r.u, ref) <= 1e-12);
        for (int t = 0; t < 4; ++t) {
            const VectorField grad = gradient_h(r.u_half[t]);
            for (std::size_t x = 0; x < p.torus().size(); ++x) {
                for (int i = 0; i < d; ++i) CHECK(r.v[t].at(x, i) == doctest::Approx(-grad.at(x, i) / 2.0));
            }
        }
    }
}

TEST_CASE("truncation caps the control and is counted") {
    const DiscreteProblem p(mfg::test::smooth_problem(0.1), Grid(1, 16, 40, 0.75, 0.2));
    const ScalarSeries m = make_series(p.torus(), 41, 1.0 / 16.0);
    const HjbResult r = hjb_backward(m, p, 0.5);
    CHECK(norm_inf_inf(r.v) <= 0.5 + 1e-12);
    CHECK(r.total_active_truncation() > 0);
}

TEST_CASE("forward pass matches dense matrices") {
    CounterRng rng(12);
    for (int d = 1; d <= 2; ++d) {
        const Grid grid(d, 6, 5, 0.6, 0.4);
        const VectorSeries v = bounded_controls(grid.torus(), 5, 1.5, rng);
        const ScalarField m0 = mfg::test::random_probability(grid.torus(), rng);
        const FpResult r = fp_forward(v, m0, grid);
        CHECK(distance_inf_inf(r.m, naive_fp(v, m0, grid)) <= 1e-13);
    }
}

TEST_CASE("mass, positivity and stencil coefficients under the CFL condition") {
    CounterRng rng(13);
    const double bound = 3.0;
    const int n = 12;
    const int steps = cfl_min_steps(1, n, 0.75, 0.5);
    const Grid grid(1, n, steps, 0.75, 0.5);
    REQUIRE(cfl_check(grid, bound).ok);
    for (int rep = 0; rep < 10; ++rep) {
        const VectorSeries v = bounded_controls(grid.torus(), steps, bound, rng);
        CHECK(min_stencil_coefficient(v, grid) >= -1e-15);
        const FpResult r = fp_forward(v, mfg::test::random_probability(grid.torus(), rng), grid);
        for (const FpStepDiagnostics& dg : r.diagnostics) {
            CHECK(dg.mass == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(dg.min_m >= 0.0);
            CHECK(dg.max_abs_v <= bound + 1e-12);
        }
    }
}

TEST_CASE("value function stays Lipschitz with a bound independent of h") {
    for (int n : {16, 32}) {
        const Grid grid(1, n, cfl_min_steps(1, n, 0.75, 0.2), 0.75, 0.2);
        const DiscreteProblem p(mfg::test::smooth_problem(10.0), grid);
        const ScalarSeries m = make_series(p.torus(), grid.steps() + 1, 1.0 / n);
        const HjbResult r = hjb_backward(m, p, p.control_bound());
        for (const ScalarField& ut : r.u) CHECK(lipschitz_seminorm(ut) <= 2.0 * std::numbers::pi * 1.001);
    }
}

TEST_CASE("forward pass is linear in the initial density and the perturbations") {
    CounterRng rng(14);
    const Grid grid(2, 6, 4, 0.75, 0.5);
    const Torus& g = grid.torus();
    const VectorSeries v = bounded_controls(g, 4, 1.0, rng);
    const ScalarField a = mfg::test::random_field(g, rng);
    const ScalarField b = mfg::test::random_field(g, rng);
    const FpResult ra = fp_forward(v, a, grid);
    const FpResult rb = fp_forward(v, b, grid);
    const FpResult rab = fp_forward(v, 2.0 * a + (-3.0) * b, grid);
    for (int t = 0; t <= 4; ++t) CHECK(norm_inf(rab.m[t] - (2.0 * ra.m[t] + (-3.0) * rb.m[t])) <= 1e-13);

    FpPerturbation pert;
    for (int t = 0; t < 4; ++t) {
        pert.delta_v.push_back(mfg::test::random_vector_field(g, rng));
        pert.delta.push_back(mfg::test::random_field(g, rng));
        pert.jump.push_back(mfg::test::random_field(g, rng));
    }
    const FpResult rp = fp_forward(v, a, grid, pert);
    const FpResult r0 = fp_forward(v, ScalarField(g), grid, pert);
    for (int t = 0; t <= 4; ++t) CHECK(norm_inf(rp.m[t] - (ra.m[t] + r0.m[t])) <= 1e-13);

    // A single jump at the last step lands unchanged.
    FpPerturbation last;
    last.jump = make_series(g, 4);
    last.jump[3] = b;
    CHECK(norm_inf(fp_forward(v, a, grid, last).m[4] - (ra.m[4] + b)) <= 1e-14);
    CHECK_THROWS_AS(fp_forward(VectorSeries(v.begin(), v.begin() + 3), a, grid), ValidationError);
}
