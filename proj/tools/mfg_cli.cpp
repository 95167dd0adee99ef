// Command-line front end: solve, campaigns and audits driven by a TOML config.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mfg/config.hpp"
#include "mfg/harness.hpp"
#include "mfg/io.hpp"
#include "mfg/numerical_hamiltonian.hpp"
#include "mfg/rng.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kValidation = 2;
constexpr int kAssertion = 3;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool override_cfl = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "TOML configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory (defaults to campaign.output)");
    sub->add_option("--seed", c.seed, "seed overriding the configured ones");
    sub->add_flag("--override-cfl", c.override_cfl, "run even if the CFL condition or theta range fails");
}

std::string out_dir(const Common& c, const mfg::RunConfig& cfg) {
    return c.out.empty() ? cfg.campaign.output_dir : c.out;
}

void write_manifest(const std::string& dir, const mfg::RunConfig& cfg, std::uint64_t seed, const std::string& kind) {
    mfg::Manifest m;
    m.config_hash = cfg.hash;
    m.seed = seed;
    m.extra = {{"experiment", kind}};
    mfg::write_text((std::filesystem::path(dir) / "manifest.txt").string(), mfg::manifest_text(m));
}

void check_theta(double theta, const Common& c) {
    if (theta > 0.5 && theta < 1.0) return;
    if (!c.override_cfl) throw mfg::ValidationError("theta must lie in (1/2, 1); pass --override-cfl to force");
    std::cerr << "warning: theta=" << theta << " outside (1/2, 1); convergence guarantees do not apply\n";
}

std::vector<double> thetas_of(const mfg::RunConfig& cfg) {
    return cfg.campaign.thetas.empty() ? std::vector<double>{cfg.theta} : cfg.campaign.thetas;
}

std::vector<std::uint64_t> seeds_of(const mfg::RunConfig& cfg, const Common& c) {
    if (c.seed) return {*c.seed};
    return cfg.campaign.seeds.empty() ? std::vector<std::uint64_t>{0} : cfg.campaign.seeds;
}

mfg::RunConfig load(const Common& c) {
    mfg::RunConfig cfg = mfg::load_config(c.config);
    if (c.override_cfl) cfg.solve.override_cfl = true;
    if (c.seed) cfg.solve.seed = *c.seed;
    return cfg;
}

int cmd_solve(const Common& c) {
    const mfg::RunConfig cfg = load(c);
    check_theta(cfg.theta, c);
    const mfg::Grid grid = cfg.grid();
    const mfg::DiscreteProblem problem = mfg::make_problem(cfg, grid);
    const mfg::MfgSolution sol = mfg::solve_mfg(problem, cfg.solve);
    std::printf("N=%d T=%d M=%.6g iterations=%d residual=%.3e converged=%s max_abs_v=%.6g\n",
                grid.cells_per_axis(), grid.steps(), problem.control_bound(), sol.iterations, sol.residual,
                sol.converged ? "true" : "false", mfg::norm_inf_inf(sol.v));
    if (const std::string dir = out_dir(c, cfg); !dir.empty()) {
        mfg::write_solution(dir, sol);
        write_manifest(dir, cfg, cfg.solve.seed, "solve");
    }
    if (!sol.converged) {
        std::cerr << "error: no convergence within " << cfg.solve.max_outer << " outer iterations\n";
        return kFailure;
    }
    return kOk;
}

int cmd_convergence(const Common& c) {
    const mfg::RunConfig cfg = load(c);
    std::string csv;
    bool ok = true;
    for (double theta : thetas_of(cfg)) {
        check_theta(theta, c);
        const mfg::ConvergenceReport rep = mfg::run_convergence(cfg, theta);
        const std::string part = rep.to_csv();
        csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
        std::printf("theta=%.4g fitted_rate_u=%.4f fitted_rate_m=%.4f decreasing=%s\n", theta, rep.fitted_rate_u,
                    rep.fitted_rate_m, rep.errors_strictly_decreasing() ? "yes" : "no");
        for (const auto& r : rep.rows) ok = ok && r.converged;
        ok = ok && rep.errors_strictly_decreasing();
    }
    std::fputs(csv.c_str(), stdout);
    if (const std::string dir = out_dir(c, cfg); !dir.empty()) {
        mfg::write_text((std::filesystem::path(dir) / "convergence.csv").string(), csv);
        write_manifest(dir, cfg, cfg.solve.seed, "convergence");
    }
    return ok ? kOk : kAssertion;
}

int cmd_energy(const Common& c) {
    const mfg::RunConfig cfg = load(c);
    std::string csv;
    bool ok = true;
    const auto seeds = seeds_of(cfg, c);
    for (double theta : thetas_of(cfg)) {
        for (auto seed : seeds) {
            const mfg::EnergyReport rep = mfg::run_energy_test(cfg, theta, seed);
            const std::string part = rep.to_csv();
            csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
            const double ratio = rep.max_adjacent_ratio();
            std::printf("theta=%.4g seed=%llu max_adjacent_ratio=%.4f %s\n", theta,
                        static_cast<unsigned long long>(seed), ratio, ratio < 2.0 ? "PASS" : "FAIL");
            ok = ok && ratio < 2.0;
        }
    }
    std::fputs(csv.c_str(), stdout);
    if (const std::string dir = out_dir(c, cfg); !dir.empty()) {
        mfg::write_text((std::filesystem::path(dir) / "energy.csv").string(), csv);
        write_manifest(dir, cfg, seeds.front(), "energy");
    }
    return ok ? kOk : kAssertion;
}

int cmd_fundamental(const Common& c) {
    const mfg::RunConfig cfg = load(c);
    check_theta(cfg.theta, c);
    const auto seeds = seeds_of(cfg, c);
    const auto mags = cfg.campaign.magnitudes.empty() ? std::vector<double>{1e-2, 1e-3, 1e-4} : cfg.campaign.magnitudes;
    const mfg::FundamentalReport rep = mfg::run_fundamental_test(cfg, seeds, mags);
    const std::string csv = rep.to_csv();
    std::fputs(csv.c_str(), stdout);
    std::printf("%s\n", rep.all_pass() ? "PASS" : "FAIL");
    if (const std::string dir = out_dir(c, cfg); !dir.empty()) {
        mfg::write_text((std::filesystem::path(dir) / "fundamental.csv").string(), csv);
        write_manifest(dir, cfg, seeds.front(), "fundamental");
    }
    return rep.all_pass() ? kOk : kAssertion;
}

int cmd_check_cfl(const Common& c) {
    const mfg::RunConfig cfg = load(c);
    const mfg::Grid grid = cfg.grid();
    const double M = mfg::control_bound_M(cfg.spec, cfg.d);
    const double Mx = cfg.spec.control_bound_override.value_or(M);
    const mfg::CflReport rep = mfg::cfl_check(grid, Mx);
    std::printf("M=%g h=%g h_max=%g dt=%g dt_max=%g\n%s\n", Mx, rep.h, rep.h_max, rep.dt, rep.dt_max,
                rep.ok ? "PASS" : "FAIL");
    return rep.ok ? kOk : kAssertion;
}

int cmd_check_numham(const Common& c) {
    const mfg::RunConfig cfg = load(c);
    mfg::HamiltonianOptions opts;
    opts.tolerance = cfg.hamiltonian_tolerance;
    const mfg::NumHamiltonian nh(cfg.spec.running_cost, cfg.d, opts);
    const std::uint64_t seed = c.seed.value_or(cfg.campaign.seeds.empty() ? 42 : cfg.campaign.seeds.front());
    const mfg::AxiomReport rep = mfg::check_axioms(nh, cfg.campaign.samples, seed);
    for (const auto& a : rep.axioms) {
        std::printf("%s samples=%zu max_violation=%.3e %s\n", a.name.c_str(), a.samples, a.max_violation,
                    a.pass() ? "PASS" : "FAIL");
    }
    std::printf("c1=%g c2=%g c3=%g c4=%g\n", rep.c1, rep.c2, rep.c3, rep.c4);
    if (const std::string dir = out_dir(c, cfg); !dir.empty()) {
        mfg::write_text((std::filesystem::path(dir) / "axioms.csv").string(), rep.to_csv());
        write_manifest(dir, cfg, seed, "check-numham");
    }
    return rep.all_pass() ? kOk : kAssertion;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Theta-scheme mean field game solver"};
    app.require_subcommand(1);
    Common common;
    struct Entry {
        const char* name;
        const char* help;
        int (*run)(const Common&);
    };
    const Entry entries[] = {
        {"solve", "solve the equilibrium and write fields and logs", cmd_solve},
        {"convergence", "self-convergence ladder against a nested reference", cmd_convergence},
        {"energy", "l2 stability of the perturbed forward pass across levels", cmd_energy},
        {"fundamental", "a-posteriori inequality for perturbed systems", cmd_fundamental},
        {"check-cfl", "evaluate the CFL condition for the configured grid", cmd_check_cfl},
        {"check-numham", "audit the split numerical Hamiltonian axioms", cmd_check_numham},
    };
    std::vector<std::pair<CLI::App*, const Entry*>> subs;
    for (const Entry& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        add_common(sub, common);
        subs.emplace_back(sub, &e);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }
    try {
        for (const auto& [sub, entry] : subs) {
            if (sub->parsed()) return entry->run(common);
        }
    } catch (const mfg::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
