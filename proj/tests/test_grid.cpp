#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mfg/operators.hpp"
#include "mfg/quadrature.hpp"
#include "support.hpp"

using namespace mfg;
using mfg::test::random_field;
using mfg::test::random_vector_field;

namespace {
constexpr double kPi = std::numbers::pi;

ScalarField indicator0(const Torus& g) {
    ScalarField f(g);
    f[0] = 1.0;
    return f;
}
}  // namespace

TEST_CASE("torus indexing wraps per axis") {
    const Torus g(2, 4);
    CHECK(g.size() == 16);
    CHECK(g.h() * g.cells_per_axis() == 1.0);
    const std::size_t node = g.node_at({3, 1, 0});
    CHECK(g.coord(node, 0) == 3);
    CHECK(g.coord(node, 1) == 1);
    CHECK(g.coord(g.shift(node, 0, 1), 0) == 0);
    CHECK(g.coord(g.shift(node, 1, -2), 1) == 3);
    CHECK(g.node_at({-1, 5, 0}) == g.node_at({3, 1, 0}));
}

TEST_CASE("grid validates its parameters") {
    CHECK_THROWS_AS(Grid(1, 8, 1, 0.75, 0.2), ValidationError);
    CHECK_THROWS_AS(Grid(1, 8, 4, 1.5, 0.2), ValidationError);
    CHECK_THROWS_AS(Grid(1, 8, 4, 0.75, 0.0), ValidationError);
    const Grid g(1, 8, 16, 0.75, 0.2);
    CHECK(g.dt() * g.steps() == 1.0);
    CHECK(g.nodes() == 8);
}

TEST_CASE("laplacian stencil") {
    const Torus g(1, 4);
    CHECK(norm_inf(laplacian_h(ScalarField(g, 3.0))) == 0.0);
    const ScalarField lap = laplacian_h(indicator0(g));
    CHECK(lap[0] == doctest::Approx(-32.0));
    CHECK(lap[1] == doctest::Approx(16.0));
    CHECK(lap[2] == doctest::Approx(0.0));
    CHECK(lap[3] == doctest::Approx(16.0));

    const Torus fine(1, 16);
    ScalarField c(fine);
    for (std::size_t x = 0; x < fine.size(); ++x) c[x] = std::cos(2.0 * kPi * fine.position(x)[0]);
    const double h = fine.h();
    const double eig = -(2.0 / (h * h)) * (1.0 - std::cos(2.0 * kPi * h));
    const ScalarField lc = laplacian_h(c);
    for (std::size_t x = 0; x < fine.size(); ++x) CHECK(lc[x] == doctest::Approx(eig * c[x]).epsilon(1e-12));
}

TEST_CASE("centred and forward gradients") {
    const Torus g(1, 4);
    const VectorField gr = gradient_h(indicator0(g));
    CHECK(gr.at(0, 0) == doctest::Approx(0.0));
    CHECK(gr.at(1, 0) == doctest::Approx(-2.0));
    CHECK(gr.at(2, 0) == doctest::Approx(0.0));
    CHECK(gr.at(3, 0) == doctest::Approx(2.0));
    const VectorField fg = forward_gradient_h(indicator0(g));
    CHECK(fg.at(0, 0) == doctest::Approx(-4.0));
    CHECK(fg.at(1, 0) == doctest::Approx(0.0));
    CHECK(fg.at(3, 0) == doctest::Approx(4.0));
    CHECK(gradient_h(ScalarField(g, 2.0)).max_norm() == 0.0);

    const Torus fine(1, 32);
    ScalarField s(fine);
    for (std::size_t x = 0; x < fine.size(); ++x) s[x] = std::sin(2.0 * kPi * fine.position(x)[0]);
    const VectorField gs = gradient_h(s);
    const double h = fine.h();
    for (std::size_t x = 0; x < fine.size(); ++x) {
        CHECK(gs.at(x, 0) ==
              doctest::Approx(std::sin(2.0 * kPi * h) / h * std::cos(2.0 * kPi * fine.position(x)[0])).epsilon(1e-12));
    }
}

TEST_CASE("divergence in 1-D equals the gradient of the single component") {
    CounterRng rng(3);
    const Torus g(1, 12);
    const VectorField w = random_vector_field(g, rng);
    const ScalarField div = divergence_h(w);
    const VectorField gr = gradient_h(w.component(0));
    for (std::size_t x = 0; x < g.size(); ++x) CHECK(div[x] == doctest::Approx(gr.at(x, 0)));
    CHECK(norm_inf(divergence_h(VectorField(Torus(2, 5), 1.5))) == doctest::Approx(0.0));
}

TEST_CASE("summation by parts and norm comparison on random fields") {
    CounterRng rng(11);
    for (int d = 1; d <= 2; ++d) {
        const Torus g(d, d == 1 ? 16 : 8);
        for (int rep = 0; rep < 20; ++rep) {
            const ScalarField mu = random_field(g, rng);
            const ScalarField nu = random_field(g, rng);
            const VectorField w = random_vector_field(g, rng);
            const double lhs1 = -inner(mu, divergence_h(w));
            const double rhs1 = inner(gradient_h(mu), w);
            CHECK(std::abs(lhs1 - rhs1) <= 1e-12 * std::max(1.0, std::abs(rhs1)));
            const double lhs2 = -inner(nu, laplacian_h(mu));
            const double rhs2 = inner(forward_gradient_h(nu), forward_gradient_h(mu));
            CHECK(std::abs(lhs2 - rhs2) <= 1e-12 * std::max(1.0, std::abs(rhs2)));
            const double sym = inner(laplacian_h(mu), nu) - inner(mu, laplacian_h(nu));
            CHECK(std::abs(sym) <= 1e-12 * std::max(1.0, std::abs(lhs2)));
            const double gc = norm2(gradient_h(mu));
            const double gf = norm2(forward_gradient_h(mu));
            CHECK(gc * gc <= gf * gf * (1.0 + 1e-14));
        }
    }
}

TEST_CASE("operators commute with translations") {
    CounterRng rng(5);
    const Torus g(2, 6);
    const ScalarField f = random_field(g, rng);
    for (int axis = 0; axis < 2; ++axis) {
        const ScalarField shifted = translate(f, axis, 2);
        const ScalarField a = laplacian_h(shifted);
        const ScalarField b = translate(laplacian_h(f), axis, 2);
        for (std::size_t x = 0; x < g.size(); ++x) CHECK(a[x] == doctest::Approx(b[x]));
        const VectorField ga = gradient_h(shifted);
        const VectorField gb = gradient_h(f);
        for (int i = 0; i < 2; ++i) {
            const ScalarField ci = translate(gb.component(i), axis, 2);
            for (std::size_t x = 0; x < g.size(); ++x) CHECK(ga.at(x, i) == doctest::Approx(ci[x]));
        }
    }
}

TEST_CASE("in-place operators match the allocating ones") {
    CounterRng rng(8);
    const Torus g(2, 5);
    const ScalarField f = random_field(g, rng);
    ScalarField lap(g);
    laplacian_into(f, lap);
    VectorField gr(g);
    gradient_into(f, gr);
    ScalarField div(g);
    divergence_into(gr, div);
    CHECK(distance_inf_inf({lap}, {laplacian_h(f)}) == 0.0);
    CHECK(distance_inf_inf({div}, {divergence_h(gradient_h(f))}) == 0.0);
}

TEST_CASE("field norms use unweighted sums") {
    const Torus g(1, 4);
    const ScalarField f(g, std::vector<double>{1.0, -2.0, 2.0, 0.0});
    CHECK(norm1(f) == doctest::Approx(5.0));
    CHECK(norm2(f) == doctest::Approx(3.0));
    CHECK(norm_inf(f) == doctest::Approx(2.0));
    CHECK(lipschitz_seminorm(f) == doctest::Approx(16.0));
    CHECK_THROWS_AS(require_same_torus(Torus(1, 4), Torus(1, 5), "test"), ValidationError);
}

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
    for (int pts = 1; pts <= 5; ++pts) {
        const GaussRule r = gauss_legendre(pts);
        double wsum = 0.0;
        for (double w : r.weights) wsum += w;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-15));
        for (int deg = 0; deg <= 2 * pts - 1; ++deg) {
            double q = 0.0;
            for (int k = 0; k < pts; ++k) q += r.weights[k] * std::pow(r.nodes[k], deg);
            // Average of y^deg over [-1/2, 1/2].
            const double exact = deg % 2 == 1 ? 0.0 : std::pow(0.5, deg) / (deg + 1);
            CHECK(q == doctest::Approx(exact).epsilon(1e-14));
        }
    }
}

TEST_CASE("cell restriction and reconstruction") {
    const Torus g(1, 4);
    const ScalarField one = restrict_Ih([](const Point&) { return 1.0; }, g);
    for (std::size_t x = 0; x < g.size(); ++x) CHECK(one[x] == doctest::Approx(0.25));
    CHECK(one.sum() == doctest::Approx(1.0));

    // Linear function integrates to x h on interior cells by midpoint symmetry.
    const ScalarField lin = restrict_Ih([](const Point& y) { return y[0]; }, g);
    CHECK(lin[1] == doctest::Approx(0.25 * 0.25));
    CHECK(lin[2] == doctest::Approx(0.5 * 0.25));

    const Torus g2(2, 5);
    CounterRng rng(2);
    const ScalarField m = mfg::test::random_probability(g2, rng);
    const PiecewiseConstant rh = reconstruct_Rh(m);
    const ScalarField back = restrict_Ih([&](const Point& y) { return rh(y); }, g2);
    for (std::size_t x = 0; x < g2.size(); ++x) CHECK(back[x] == doctest::Approx(m[x]).epsilon(1e-13));
    const ScalarField uni = ScalarField::uniform_probability(g2);
    CHECK(reconstruct_Rh(uni)(Point{0.31, 0.77, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("L2 distance of reconstructions scales by h^{-d/2}") {
    CounterRng rng(4);
    const Torus g(1, 8);
    const ScalarField a = random_field(g, rng);
    const ScalarField b = random_field(g, rng);
    const PiecewiseConstant ra = reconstruct_Rh(a);
    const PiecewiseConstant rb = reconstruct_Rh(b);
    // Exact cell-wise integration of the squared difference.
    const ScalarField sq = restrict_Ih(
        [&](const Point& y) {
            const double d = ra(y) - rb(y);
            return d * d;
        },
        g, 1);
    const double l2 = std::sqrt(sq.sum());
    CHECK(l2 == doctest::Approx(std::pow(g.h(), -0.5) * norm2(a - b)).epsilon(1e-12));
}
