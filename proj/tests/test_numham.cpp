#include <doctest.h>

#include <cmath>
#include <limits>

#include "mfg/numerical_hamiltonian.hpp"
#include "support.hpp"

using namespace mfg;

namespace {

const Point kOrigin{0.0, 0.0, 0.0};

GenericCost quartic(double alpha, double beta) {
    GenericCost c;
    c.alpha = alpha;
    c.value = [alpha, beta](double, const Point&, std::span<const double> v) {
        double s = 0.0;
        for (double a : v) s += a * a;
        return 0.5 * alpha * s + beta * s * s;
    };
    c.gradient = [alpha, beta](double, const Point&, std::span<const double> v, std::span<double> g) {
        double s = 0.0;
        for (double a : v) s += a * a;
        for (std::size_t i = 0; i < v.size(); ++i) g[i] = alpha * v[i] + 4.0 * beta * s * v[i];
    };
    c.inner_lipschitz = alpha + 108.0 * beta;
    return c;
}

GenericCost as_generic(const QuadraticCost& q) {
    GenericCost c;
    c.alpha = q.alpha;
    c.value = [q](double t, const Point& x, std::span<const double> v) { return running_cost_value(q, t, x, v); };
    c.gradient = [q](double t, const Point& x, std::span<const double> v, std::span<double> g) {
        running_cost_gradient(q, t, x, v, g);
    };
    c.inner_lipschitz = q.alpha;
    return c;
}

GenericCost double_well(double beta) {
    GenericCost c;
    c.alpha = 1.0;
    c.value = [beta](double, const Point&, std::span<const double> v) {
        double s = 0.0;
        for (double a : v) s += beta * (a * a - 1.0) * (a * a - 1.0);
        return s;
    };
    c.gradient = [beta](double, const Point&, std::span<const double> v, std::span<double> g) {
        for (std::size_t i = 0; i < v.size(); ++i) g[i] = 4.0 * beta * v[i] * (v[i] * v[i] - 1.0);
    };
    c.inner_lipschitz = 20.0 * beta + 2.0;
    return c;
}

}  // namespace

TEST_CASE("quadratic examples") {
    const NumHamiltonian nh(QuadraticCost{1.0, {}, {}}, 1);
    CHECK(nh.closed_form());
    for (double p : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
        const double q[2] = {p, p};
        CHECK(nh.value(0.0, kOrigin, q) == doctest::Approx(0.5 * p * p));
        CHECK(nh.continuous(0.0, kOrigin, std::span<const double>(q, 1)) == doctest::Approx(0.5 * p * p));
    }
    const double q[2] = {1.0, -1.0};
    const NumHamiltonianEval e = nh.eval(0.0, kOrigin, q);
    CHECK(e.value == 0.0);
    CHECK(e.v[0] == 0.0);
    CHECK(e.u[0] == 0.0);
    const double r[2] = {-2.0, 3.0};
    const NumHamiltonianEval f = nh.eval(0.0, kOrigin, r);
    CHECK(f.v[0] == doctest::Approx(2.0));
    CHECK(f.u[0] == doctest::Approx(-3.0));
    CHECK(f.value == doctest::Approx(6.5));
    CHECK(f.gradient[0] == doctest::Approx(-2.0));
    CHECK(f.gradient[1] == doctest::Approx(3.0));
}

TEST_CASE("generic solver matches a grid search") {
    const NumHamiltonian nh(quartic(1.0, 0.1), 1);
    CHECK_FALSE(nh.closed_form());
    const double qs[][2] = {{-1.0, 0.5}, {0.3, 2.0}, {-2.5, -0.4}, {1.2, -1.1}, {-0.7, 0.9}};
    for (const auto& q : qs) {
        double best = -std::numeric_limits<double>::infinity();
        const double step = 2e-3;
        for (int a = 0; a <= 1500; ++a) {
            const double v = a * step;
            for (int b = 0; b <= 1500; ++b) {
                const double u = -b * step;
                const double w = v + u;
                const double l0 = 0.1 * w * w * w * w;
                best = std::max(best, -v * q[0] - u * q[1] - l0 - 0.5 * (v * v + u * u));
            }
        }
        CHECK(std::abs(nh.value(0.0, kOrigin, q) - best) <= 1e-3);
    }
}

TEST_CASE("closed form agrees with the generic solver") {
    QuadraticCost q;
    q.alpha = 2.0;
    q.drift = [](double t, const Point& x) { return Vec{std::sin(6.0 * x[0]) + t, -0.4, 0.0}; };
    q.offset = [](double, const Point& x) { return x[1]; };
    const NumHamiltonian exact(q, 2);
    const NumHamiltonian generic(as_generic(q), 2);
    CounterRng rng(31);
    for (int s = 0; s < 100; ++s) {
        const Point x{rng.uniform(), rng.uniform(), 0.0};
        double z[4];
        for (double& a : z) a = rng.uniform(-3, 3);
        const NumHamiltonianEval a = exact.eval(0.3, x, z);
        const NumHamiltonianEval b = generic.eval(0.3, x, z);
        CHECK(a.value == doctest::Approx(b.value).epsilon(1e-8));
        for (int i = 0; i < 4; ++i) CHECK(std::abs(a.gradient[i] - b.gradient[i]) <= 1e-7);
    }
}

TEST_CASE("axiom audit passes for convex costs") {
    QuadraticCost q;
    q.alpha = 1.5;
    q.drift = [](double, const Point& x) { return Vec{0.5 * std::cos(6.0 * x[0]), 0.2, 0.0}; };
    for (int d = 1; d <= 2; ++d) {
        const AxiomReport r = check_axioms(NumHamiltonian(q, d), 2000, 7);
        CHECK(r.all_pass());
        CHECK(r.axioms.size() == 5);
        CHECK(r.c1 == doctest::Approx(1.5 / 4.0));
        CHECK(r.c3 == doctest::Approx(1.0 / 1.5));
        CHECK(r.get("g4").max_violation <= 1e-12);
    }
    const AxiomReport g = check_axioms(NumHamiltonian(quartic(1.0, 0.1), 1), 200, 8);
    for (const AxiomResult& a : g.axioms) CHECK_MESSAGE(a.pass(), a.name << " " << a.max_violation);
}

TEST_CASE("audit is deterministic and serializes") {
    const NumHamiltonian nh(QuadraticCost{1.0, {}, {}}, 1);
    const AxiomReport a = check_axioms(nh, 300, 42);
    const AxiomReport b = check_axioms(nh, 300, 42);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.to_csv().rfind("axiom,samples,max_violation,witness", 0) == 0);
    CHECK(a.get("g1").samples == 300);
    CHECK_THROWS(a.get("g9"));
}

TEST_CASE("nonconvex double well is caught by the convexity axiom") {
    const AxiomReport r = check_axioms(NumHamiltonian(double_well(1.0), 1), 300, 3);
    CHECK_FALSE(r.all_pass());
    CHECK_FALSE(r.get("g4").pass());
    CHECK_FALSE(r.get("g4").witness.empty());
}
