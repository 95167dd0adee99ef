#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "mfg/config.hpp"
#include "mfg/harness.hpp"
#include "mfg/io.hpp"
#include "mfg/rng.hpp"

using namespace mfg;

namespace {

const char* kSmall = R"(
[grid]
d = 1
n = 16
theta = 0.75
sigma = 0.2

[cost]
kind = "quadratic"
alpha = 10.0

[coupling]
kind = "local"
function = "identity"

[terminal]
expression = "cos_sum"

[initial]
expression = "uniform"

[constants]
L_f = 1.0
L_g = 6.283185307179586

[solver]
damping = "fixed"
omega = 0.5

[campaign]
levels = [8, 16]
reference = 32
)";

std::string with(const std::string& base, const std::string& extra) { return base + "\n" + extra; }

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig cfg = parse_config(kSmall);
    CHECK(cfg.d == 1);
    CHECK(cfg.n == 16);
    CHECK(cfg.theta == 0.75);
    CHECK(cfg.solve.damping.kind == Damping::Kind::Fixed);
    CHECK(cfg.campaign.levels == std::vector<int>{8, 16});
    CHECK(cfg.resolved_steps(16, 0.75) == cfl_min_steps(1, 16, 0.75, 0.2));
    CHECK(cfg.hash == fnv1a64(kSmall));
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(parse_config(kSmall).hash == cfg.hash);
    CHECK(make_problem(cfg, cfg.grid()).control_bound() > 0.0);
}

TEST_CASE("config errors are validation errors") {
    const std::string base = kSmall;
    CHECK_THROWS_AS(parse_config("[grid\n"), ValidationError);
    CHECK_THROWS_AS(parse_config(with(base, "[bogus]\nx = 1")), ValidationError);
    std::string bad = base;
    bad.replace(bad.find("kind = \"quadratic\""), 18, "kind = \"cubic\"");
    CHECK_THROWS_AS(parse_config(bad), ValidationError);
    bad = base;
    bad.replace(bad.find("levels = [8, 16]"), 16, "levels = [16, 8]");
    CHECK_THROWS_AS(parse_config(bad), ValidationError);
    bad = base;
    bad.replace(bad.find("reference = 32"), 14, "reference = 24");
    CHECK_THROWS_AS(parse_config(bad), ValidationError);
    bad = base;
    bad.replace(bad.find("kind = \"quadratic\""), 18, "kind = \"double_well\"");
    const RunConfig dw = parse_config(bad);
    CHECK_FALSE(dw.cost_is_convex());
    CHECK_THROWS_AS(make_problem(dw, dw.grid()), ValidationError);
}

TEST_CASE("referenced problem files are overridden key by key") {
    const auto dir = std::filesystem::temp_directory_path() / "mfg_config_merge";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "base.toml") << kSmall << "\n[tolerances]\nsolver = 1e-7\n";
    const RunConfig cfg = parse_config("[campaign]\nproblem = \"base.toml\"\nlevels = [4]\n"
                                       "[grid]\nn = 12\n[solver]\nmax_outer = 7\n",
                                       dir.string());
    CHECK(cfg.n == 12);
    CHECK(cfg.theta == 0.75);
    CHECK(cfg.spec.alpha == 10.0);
    CHECK(cfg.spec.L_f == 1.0);
    CHECK(cfg.solve.damping.kind == Damping::Kind::Fixed);
    CHECK(cfg.solve.max_outer == 7);
    CHECK(cfg.solve.tol == 1e-7);
    CHECK(cfg.campaign.levels == std::vector<int>{4});
    CHECK(cfg.campaign.reference == 32);
    CHECK(cfg.text.find("base.toml") != std::string::npos);
    CHECK_THROWS_AS(parse_config("[campaign]\nproblem = \"missing.toml\"\n", dir.string()), ValidationError);
}

TEST_CASE("time ladder with coincident reference levels") {
    const TimeLadder t = select_time_ladder(1, {8, 16, 32}, 64, 0.75, 0.2);
    CHECK(t.level_steps == std::vector<int>{10, 41, 205});
    CHECK(t.reference_steps == 410);
    for (int s : t.level_steps) CHECK(t.reference_steps % s == 0);
}

TEST_CASE("fitted rate") {
    CHECK(fitted_rate({0.1, 0.05, 0.025}, {0.01, 0.0025, 0.000625}) == doctest::Approx(2.0));
    CHECK(fitted_rate({0.1, 0.05}, {3.0, 1.5}) == doctest::Approx(1.0));
}

TEST_CASE("parallel_for visits every index once") {
    std::vector<std::atomic<int>> hits(37);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK(worker_count() >= 1);
}

TEST_CASE("convergence campaign is deterministic and has the documented header") {
    const RunConfig cfg = parse_config(kSmall);
    const ConvergenceReport a = run_convergence(cfg, 0.75);
    const ConvergenceReport b = run_convergence(cfg, 0.75);
    CHECK(a.to_csv() == b.to_csv());
    REQUIRE(a.rows.size() == 2);
    CHECK(a.reference_n == 32);
    CHECK(a.errors_strictly_decreasing());
    CHECK(a.to_csv().rfind("d,N,h,T,dt,theta,sigma,ref_N,ref_T,err_u,err_m,", 0) == 0);
}

TEST_CASE("energy test") {
    const RunConfig cfg = parse_config(kSmall);
    CHECK_THROWS_AS(energy_level(cfg, 8, 0.5, 1), ValidationError);
    const EnergyRow z = energy_level(cfg, 8, 0.75, 1, 0.0);
    CHECK(z.forcing == 0.0);
    CHECK_FALSE(z.amplification.has_value());
    CHECK(z.max_mu == 0.0);
    const EnergyRow r = energy_level(cfg, 8, 0.75, 1);
    REQUIRE(r.amplification.has_value());
    CHECK(r.linearity_error <= 1e-12 * r.max_mu + 1e-15);
    CHECK(energy_level(cfg, 8, 0.75, 1).max_mu == r.max_mu);

    EnergyReport rep;
    rep.rows = {z};
    CHECK(rep.to_csv().find("0/0") != std::string::npos);
}

TEST_CASE("fundamental test with zero magnitude") {
    const RunConfig cfg = parse_config(kSmall);
    const FundamentalReport r = run_fundamental_test(cfg, {1}, {0.0, 1e-3});
    REQUIRE(r.rows.size() == 2);
    CHECK(std::abs(r.rows[0].lhs) <= 1e-20);
    CHECK(std::abs(r.rows[0].rhs) <= 1e-20);
    CHECK(r.all_pass());
    CHECK(r.exact_residual <= kExactTolerance);
}

TEST_CASE("io formats") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    Manifest m;
    m.config_hash = 0xabcULL;
    m.seed = 9;
    m.extra = {{"kind", "solve"}};
    const std::string t = manifest_text(m);
    CHECK(t.find("config_hash=0000000000000abc") != std::string::npos);
    CHECK(t.find("seed=9") != std::string::npos);
    CHECK(t.find("generator=" + std::string(CounterRng::kGeneratorId)) != std::string::npos);
    CHECK(t.find("kind=solve") != std::string::npos);

    const Torus g(2, 2);
    const ScalarSeries s = make_series(g, 1, 0.5);
    CHECK(scalar_series_csv(s).rfind("t,i0,i1,value\n0,0,0,0.5\n", 0) == 0);
    CHECK(iteration_log_csv({}).rfind("k,omega,residual,max_abs_v,min_m", 0) == 0);
    CHECK(diagnostics_csv({}, {}).rfind("t,mass,min_m,max_abs_v,active_truncation", 0) == 0);
}

TEST_CASE("counter RNG is reproducible and splittable") {
    CounterRng a(5);
    CounterRng b(5);
    for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
    CHECK(CounterRng(5).at(3) == [] {
        CounterRng r(5);
        r.next();
        r.next();
        r.next();
        return r.next();
    }());
    CHECK(CounterRng(5).split(1).next() != CounterRng(5).split(2).next());
    CounterRng u(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        CHECK((x >= 0.0 && x < 1.0));
    }
}
