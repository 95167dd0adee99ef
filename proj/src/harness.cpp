#include "mfg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "mfg/io.hpp"
#include "mfg/rng.hpp"
#include "mfg/theta_scheme.hpp"

namespace mfg {

int worker_count() {
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("MFG_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = cap;
    }
    return n;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(worker_count()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

TimeLadder select_time_ladder(int d, const std::vector<int>& levels, int reference, double theta, double sigma) {
    std::vector<int> mins;
    for (int n : levels) mins.push_back(cfl_min_steps(d, n, theta, sigma));
    const int ref_min = cfl_min_steps(d, reference, theta, sigma);
    for (int tref = ref_min; tref <= 64 * ref_min; ++tref) {
        TimeLadder ladder;
        ladder.reference_steps = tref;
        bool ok = true;
        for (int tmin : mins) {
            int pick = 0;
            for (int t = tmin; t <= 2 * tmin && t <= tref; ++t) {
                if (tref % t == 0) {
                    pick = t;
                    break;
                }
            }
            if (pick == 0) {
                ok = false;
                break;
            }
            ladder.level_steps.push_back(pick);
        }
        if (ok) return ladder;
    }
    throw ValidationError("no nested time ladder found for the configured levels");
}

double fitted_rate(const std::vector<double>& h, const std::vector<double>& err) {
    if (h.size() != err.size() || h.size() < 2) throw ValidationError("fitted_rate needs >= 2 matching points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool ConvergenceReport::errors_strictly_decreasing() const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!(rows[i].err_u < rows[i - 1].err_u) || !(rows[i].err_m < rows[i - 1].err_m)) return false;
    }
    return !rows.empty();
}

std::string ConvergenceReport::to_csv() const {
    std::ostringstream os;
    os << "d,N,h,T,dt,theta,sigma,ref_N,ref_T,err_u,err_m,outer_iters,residual,converged,fitted_rate_u,"
          "fitted_rate_m\n";
    for (const auto& r : rows) {
        os << d << ',' << r.n << ',' << format_double(r.h) << ',' << r.steps << ',' << format_double(r.dt) << ','
           << format_double(theta) << ',' << format_double(sigma) << ',' << reference_n << ',' << reference_steps
           << ',' << format_double(r.err_u) << ',' << format_double(r.err_m) << ',' << r.outer_iters << ','
           << format_double(r.residual) << ',' << (r.converged ? 1 : 0) << ',' << format_double(fitted_rate_u)
           << ',' << format_double(fitted_rate_m) << '\n';
    }
    return os.str();
}

ConvergenceReport run_convergence(const RunConfig& cfg, double theta) {
    const auto& levels = cfg.campaign.levels;
    const int ref_n = cfg.campaign.reference;
    if (levels.size() < 2 || ref_n <= 0) throw ValidationError("convergence needs >= 2 levels and a reference");
    for (int n : levels) {
        if (n >= ref_n || ref_n % n != 0) throw ValidationError("reference N must be a strict multiple of every level");
    }
    const TimeLadder ladder = select_time_ladder(cfg.d, levels, ref_n, theta, cfg.sigma);

    std::vector<Grid> grids;
    for (std::size_t i = 0; i < levels.size(); ++i) grids.push_back(cfg.grid_for(levels[i], ladder.level_steps[i], theta));
    grids.push_back(cfg.grid_for(ref_n, ladder.reference_steps, theta));
    std::vector<MfgSolution> sols(grids.size());
    parallel_for(grids.size(), [&](std::size_t i) { sols[i] = solve_mfg(make_problem(cfg, grids[i]), cfg.solve); });

    ConvergenceReport report;
    report.d = cfg.d;
    report.theta = theta;
    report.sigma = cfg.sigma;
    report.reference_n = ref_n;
    report.reference_steps = ladder.reference_steps;
    const MfgSolution& ref = sols.back();
    const Torus& fine = grids.back().torus();
    std::vector<double> hs, eu, em;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const Grid& grid = grids[i];
        const MfgSolution& sol = sols[i];
        const int ratio = ref_n / levels[i];
        const int tratio = ladder.reference_steps / grid.steps();
        const double mass_scale = std::pow(static_cast<double>(ratio), cfg.d);
        const Torus& coarse = grid.torus();
        std::vector<std::size_t> map(coarse.size());
        for (std::size_t x = 0; x < coarse.size(); ++x) {
            auto c = coarse.coords(x);
            for (int k = 0; k < cfg.d; ++k) c[k] *= ratio;
            map[x] = fine.node_at(c);
        }
        ConvergenceRow row;
        row.n = levels[i];
        row.h = grid.h();
        row.steps = grid.steps();
        row.dt = grid.dt();
        for (int t = 0; t <= grid.steps(); ++t) {
            const ScalarField& u = sol.u[t];
            const ScalarField& ur = ref.u[static_cast<std::size_t>(t) * tratio];
            const ScalarField& m = sol.m[t];
            const ScalarField& mr = ref.m[static_cast<std::size_t>(t) * tratio];
            double l1 = 0.0;
            for (std::size_t x = 0; x < coarse.size(); ++x) {
                row.err_u = std::max(row.err_u, std::abs(u[x] - ur[map[x]]));
                l1 += std::abs(m[x] - mass_scale * mr[map[x]]);
            }
            row.err_m = std::max(row.err_m, l1);
        }
        row.outer_iters = sol.iterations;
        row.residual = sol.residual;
        row.converged = sol.converged;
        hs.push_back(row.h);
        eu.push_back(row.err_u);
        em.push_back(row.err_m);
        report.rows.push_back(row);
    }
    report.fitted_rate_u = fitted_rate(hs, eu);
    report.fitted_rate_m = fitted_rate(hs, em);
    return report;
}

double EnergyReport::max_adjacent_ratio() const {
    double worst = 1.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!rows[i].amplification || !rows[i - 1].amplification) continue;
        const double a = *rows[i - 1].amplification;
        const double b = *rows[i].amplification;
        worst = std::max(worst, std::max(a, b) / std::min(a, b));
    }
    return worst;
}

std::string EnergyReport::to_csv() const {
    std::ostringstream os;
    os << "N,h,T,dt,theta,sigma,seed,scale,max_mu,forcing,amplification,linearity_error\n";
    for (const auto& r : rows) {
        os << r.n << ',' << format_double(r.h) << ',' << r.steps << ',' << format_double(r.dt) << ','
           << format_double(theta) << ',' << format_double(sigma) << ',' << r.seed << ',' << format_double(r.scale)
           << ',' << format_double(r.max_mu) << ',' << format_double(r.forcing) << ','
           << (r.amplification ? format_double(*r.amplification) : std::string("0/0")) << ','
           << format_double(r.linearity_error) << '\n';
    }
    return os.str();
}

namespace {

double max_slice_norm(const ScalarSeries& mu) {
    double worst = 0.0;
    for (const auto& s : mu) worst = std::max(worst, norm2(s));
    return worst;
}

// a (1 + 0.5 sin(2 pi (t + psi))) cos(2 pi <k, x> + phi)
struct Wave {
    std::array<int, kMaxDim> k{};
    double amplitude = 0.0;
    double phase = 0.0;
    double time_phase = 0.0;
};

std::vector<Wave> random_waves(CounterRng rng, int d) {
    std::vector<Wave> out(4);
    for (auto& w : out) {
        bool nonzero = false;
        while (!nonzero) {
            for (int i = 0; i < d; ++i) {
                w.k[i] = static_cast<int>(rng.next() % 7) - 3;
                nonzero = nonzero || w.k[i] != 0;
            }
        }
        w.amplitude = rng.uniform(-1.0, 1.0);
        w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        w.time_phase = rng.uniform();
    }
    return out;
}

double eval_waves(const std::vector<Wave>& waves, double time, const Point& x, int d) {
    double s = 0.0;
    for (const auto& w : waves) {
        double arg = w.phase;
        for (int i = 0; i < d; ++i) arg += 2.0 * std::numbers::pi * w.k[i] * x[i];
        s += w.amplitude * (1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * (time + w.time_phase))) * std::cos(arg);
    }
    return s;
}

}  // namespace

EnergyRow energy_level(const RunConfig& cfg, int n, double theta, std::uint64_t seed, double scale) {
    if (!(theta > 0.5)) throw ValidationError("the energy test requires theta > 1/2");
    const Grid grid = cfg.grid_for(n, 0, theta);
    const DiscreteProblem problem = make_problem(cfg, grid);
    const Torus& g = grid.torus();
    const int steps = grid.steps();
    const double M = problem.control_bound();

    VectorSeries v = make_vector_series(g, steps);
    for (auto& slice : v) {
        for (std::size_t x = 0; x < g.size(); ++x) {
            const Point p = g.position(x);
            for (int i = 0; i < g.dim(); ++i) slice.at(x, i) = 0.9 * M * std::sin(2.0 * std::numbers::pi * p[i]);
        }
    }
    // The same continuous random field is sampled at every level so that A(h)
    // reflects the scheme rather than the roughness of the forcing.
    const int fields = g.dim() + 1;  // delta_v components, then delta
    std::vector<std::vector<Wave>> waves;
    for (int f = 0; f < fields; ++f) waves.push_back(random_waves(CounterRng(seed).split(f), g.dim()));
    FpPerturbation pert;
    pert.delta_v = make_vector_series(g, steps);
    pert.delta = make_series(g, steps);
    double forcing2 = 0.0;
    for (int t = 0; t < steps; ++t) {
        const double time = t * grid.dt();
        for (std::size_t x = 0; x < g.size(); ++x) {
            const Point p = g.position(x);
            for (int i = 0; i < g.dim(); ++i) pert.delta_v[t].at(x, i) = eval_waves(waves[i], time, p, g.dim());
            pert.delta[t][x] = eval_waves(waves[g.dim()], time, p, g.dim());
        }
        pert.delta_v[t] *= scale / norm2(pert.delta_v[t]);
        pert.delta[t] *= scale / norm2(pert.delta[t]);
        const double a = norm2(pert.delta_v[t]);
        const double b = norm2(pert.delta[t]);
        forcing2 += grid.dt() * (a * a + b * b);
    }
    const ScalarField zero(g);
    const double max_mu = max_slice_norm(fp_forward(v, zero, grid, pert).m);
    for (int t = 0; t < steps; ++t) {
        pert.delta_v[t] *= 2.0;
        pert.delta[t] *= 2.0;
    }
    const double max_mu2 = max_slice_norm(fp_forward(v, zero, grid, pert).m);

    EnergyRow row;
    row.n = n;
    row.h = grid.h();
    row.steps = steps;
    row.dt = grid.dt();
    row.seed = seed;
    row.scale = scale;
    row.max_mu = max_mu;
    row.forcing = std::sqrt(forcing2);
    if (row.forcing > 0.0) row.amplification = max_mu / row.forcing;
    row.linearity_error = std::abs(max_mu2 - 2.0 * max_mu);
    return row;
}

EnergyReport run_energy_test(const RunConfig& cfg, double theta, std::uint64_t seed, double scale) {
    if (!(theta > 0.5)) throw ValidationError("the energy test requires theta > 1/2");
    const auto& levels = cfg.campaign.levels;
    if (levels.empty()) throw ValidationError("energy test needs campaign.levels");
    EnergyReport report;
    report.theta = theta;
    report.sigma = cfg.sigma;
    report.rows.resize(levels.size());
    parallel_for(levels.size(), [&](std::size_t i) { report.rows[i] = energy_level(cfg, levels[i], theta, seed, scale); });
    return report;
}

bool FundamentalReport::all_pass(double slack) const {
    return !rows.empty() && std::all_of(rows.begin(), rows.end(), [slack](const auto& r) { return r.pass(slack); });
}

std::string FundamentalReport::to_csv() const {
    std::ostringstream os;
    os << "d,N,T,theta,seed,magnitude,lhs,rhs,margin,iterations,converged,pass\n";
    for (const auto& r : rows) {
        os << d << ',' << n << ',' << steps << ',' << format_double(theta) << ',' << r.seed << ','
           << format_double(r.magnitude) << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
           << format_double(r.margin()) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
           << (r.pass() ? 1 : 0) << '\n';
    }
    return os.str();
}

FundamentalReport run_fundamental_test(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                       const std::vector<double>& magnitudes) {
    const Grid grid = cfg.grid();
    const DiscreteProblem problem = make_problem(cfg, grid);
    const Torus& g = grid.torus();
    const int steps = grid.steps();

    SolveOptions exact_opts = cfg.solve;
    exact_opts.tol = std::min(cfg.solve.tol, kExactTolerance);
    const MfgSolution exact = solve_mfg(problem, exact_opts);
    if (!exact.converged) {
        throw SolverError("unperturbed solve did not reach " + format_double(exact_opts.tol));
    }

    FundamentalReport report;
    report.d = grid.dim();
    report.n = grid.cells_per_axis();
    report.steps = steps;
    report.theta = grid.theta();
    report.exact_residual = exact.residual;

    struct Job {
        std::uint64_t seed;
        double magnitude;
    };
    std::vector<Job> jobs;
    for (auto s : seeds) {
        for (double a : magnitudes) jobs.push_back({s, a});
    }
    report.rows.resize(jobs.size());
    SolveOptions pert_opts = cfg.solve;
    pert_opts.tol = std::min(cfg.solve.tol, kPerturbedTolerance);
    parallel_for(jobs.size(), [&](std::size_t j) {
        const Job job = jobs[j];
        CounterRng rng(job.seed);
        ScalarSeries eta = make_series(g, steps);
        ScalarSeries delta = make_series(g, steps);
        for (auto& s : eta) {
            for (double& a : s.values()) a = job.magnitude * rng.uniform(-1.0, 1.0);
        }
        for (auto& s : delta) {
            for (double& a : s.values()) a = job.magnitude * g.cell_volume() * rng.uniform(-1.0, 1.0);
        }
        const PerturbedSolution pert = solve_perturbed_mfg(problem, eta, delta, pert_opts);
        FundamentalRow row;
        row.seed = job.seed;
        row.magnitude = job.magnitude;
        row.iterations = pert.iterations;
        row.converged = pert.converged;
        const FundamentalGap gap = fundamental_gap(exact, pert, problem.alpha(), grid.dt());
        row.lhs = gap.lhs;
        row.rhs = gap.rhs;
        report.rows[j] = row;
    });
    return report;
}

}  // namespace mfg
