#include "mfg/implicit_heat.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "mfg/operators.hpp"

namespace mfg {

namespace {
// FFTW planning is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct ImplicitHeatSolver::Impl {
    Torus torus;
    std::size_t spectral_size = 0;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    std::vector<double> inv_symbol;  // 1 / (N^d * symbol), normalisation folded in

    Impl(const Torus& t, double c_dt) : torus(t) {
        const int d = t.dim();
        const int n = t.cells_per_axis();
        std::array<int, kMaxDim> dims{n, n, n};
        spectral_size = t.size() / static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
        real = fftw_alloc_real(t.size());
        spec = fftw_alloc_complex(spectral_size);
        {
            std::lock_guard lock(planner_mutex());
            forward = fftw_plan_dft_r2c(d, dims.data(), real, spec, FFTW_ESTIMATE);
            backward = fftw_plan_dft_c2r(d, dims.data(), spec, real, FFTW_ESTIMATE);
        }
        // r2c layout: row-major with the last axis truncated to n/2+1 entries.
        const double h = t.h();
        const double scale = 1.0 / static_cast<double>(t.size());
        inv_symbol.resize(spectral_size);
        const int last = n / 2 + 1;
        for (std::size_t k = 0; k < spectral_size; ++k) {
            std::size_t rem = k;
            double acc = 0.0;
            for (int i = d - 1; i >= 0; --i) {
                const int extent = (i == d - 1) ? last : n;
                const int ki = static_cast<int>(rem % static_cast<std::size_t>(extent));
                rem /= static_cast<std::size_t>(extent);
                acc += 1.0 - std::cos(2.0 * std::numbers::pi * ki / n);
            }
            const double symbol = 1.0 + c_dt * (2.0 / (h * h)) * acc;
            inv_symbol[k] = scale / symbol;
        }
    }

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
        fftw_free(real);
        fftw_free(spec);
    }
};

ImplicitHeatSolver::ImplicitHeatSolver(const Torus& torus, double c_dt) {
    if (!(c_dt >= 0.0)) throw ValidationError("implicit heat weight must be nonnegative");
    impl_ = std::make_unique<Impl>(torus, c_dt);
}

ImplicitHeatSolver::~ImplicitHeatSolver() = default;
ImplicitHeatSolver::ImplicitHeatSolver(ImplicitHeatSolver&&) noexcept = default;
ImplicitHeatSolver& ImplicitHeatSolver::operator=(ImplicitHeatSolver&&) noexcept = default;

const Torus& ImplicitHeatSolver::torus() const { return impl_->torus; }

void ImplicitHeatSolver::solve(const ScalarField& x, ScalarField& y) const {
    Impl& s = *impl_;
    require_same_torus(s.torus, x.torus(), "ImplicitHeatSolver::solve");
    require_same_torus(s.torus, y.torus(), "ImplicitHeatSolver::solve");
    std::copy(x.values().begin(), x.values().end(), s.real);
    fftw_execute(s.forward);
    for (std::size_t k = 0; k < s.spectral_size; ++k) {
        s.spec[k][0] *= s.inv_symbol[k];
        s.spec[k][1] *= s.inv_symbol[k];
    }
    fftw_execute(s.backward);
    std::copy(s.real, s.real + x.size(), y.values().begin());
}

double contraction_factor(double c, const Grid& grid) {
    const double r = c * grid.dt() / (grid.h() * grid.h());
    const double two_dr = 2.0 * grid.dim() * r;
    return two_dr / (1.0 + two_dr);
}

double b1_residual(const ScalarField& x, const ScalarField& y, double c, const Grid& grid) {
    const ScalarField lap = laplacian_h(y);
    double worst = 0.0;
    const double c_dt = c * grid.dt();
    for (std::size_t i = 0; i < x.size(); ++i) {
        worst = std::max(worst, std::abs(y[i] - c_dt * lap[i] - x[i]));
    }
    return worst;
}

HeatSolveReport solve_b1_contraction(const ScalarField& x, double c, const Grid& grid,
                                     const HeatSolveOptions& opts,
                                     const std::function<void(const ScalarField&)>& observer) {
    if (!(c >= 0.0)) throw ValidationError("implicit heat weight must be nonnegative");
    if (!(opts.tol > 0.0)) throw ValidationError("heat solve tolerance must be positive");
    const Torus& g = grid.torus();
    require_same_torus(g, x.torus(), "solve_b1_contraction");
    const double r = c * grid.dt() / (grid.h() * grid.h());
    const double denom = 1.0 + 2.0 * g.dim() * r;
    int max_iter = opts.max_iter;
    if (max_iter <= 0) {
        max_iter = static_cast<int>(std::min(1e6, std::ceil(50.0 * denom) + 50.0));
    }

    HeatSolveReport report;
    report.solution = x;
    ScalarField next(g);
    report.residual = b1_residual(x, report.solution, c, grid);
    while (report.residual > opts.tol) {
        if (report.iterations >= max_iter) {
            throw SolverError("implicit heat contraction exceeded " + std::to_string(max_iter) +
                              " iterations (residual " + std::to_string(report.residual) + ")");
        }
        const ScalarField& cur = report.solution;
        for (std::size_t p = 0; p < g.size(); ++p) {
            double nb = 0.0;
            for (int i = 0; i < g.dim(); ++i) nb += cur[g.shift(p, i, 1)] + cur[g.shift(p, i, -1)];
            next[p] = (r * nb + x[p]) / denom;
        }
        std::swap(report.solution, next);
        ++report.iterations;
        if (observer) observer(report.solution);
        report.residual = b1_residual(x, report.solution, c, grid);
    }
    return report;
}

ScalarField solve_b1(const ScalarField& x, double c, const Grid& grid, const HeatSolveOptions& opts) {
    if (!(c >= 0.0)) throw ValidationError("implicit heat weight must be nonnegative");
    if (opts.method == HeatMethod::Contraction) return solve_b1_contraction(x, c, grid, opts).solution;
    if (c == 0.0) return x;
    return ImplicitHeatSolver(grid.torus(), c * grid.dt()).solve(x);
}

VectorField solve_b1_vector(const VectorField& x, double c, const Grid& grid, const HeatSolveOptions& opts) {
    VectorField out(x.torus());
    for (int i = 0; i < x.dim(); ++i) out.set_component(i, solve_b1(x.component(i), c, grid, opts));
    return out;
}

}  // namespace mfg
