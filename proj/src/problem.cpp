#include "mfg/problem.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

namespace mfg {

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

void project_to_ball(std::span<double> v, double radius) {
    if (!std::isfinite(radius)) return;
    const double n = norm(v);
    if (n > radius) {
        for (double& c : v) c *= radius / n;
    }
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Projected gradient ascent with backtracking on v -> <-p,v> - l(v) over the ball.
HamiltonianEval generic_hamiltonian(const GenericCost& cost, double time, const Point& x,
                                    std::span<const double> p, double truncation,
                                    const HamiltonianOptions& opts) {
    const std::size_t d = p.size();
    const double lip = cost.inner_lipschitz > 0.0 ? cost.inner_lipschitz : 10.0 * cost.alpha;
    auto objective = [&](std::span<const double> v) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s -= p[i] * v[i];
        return s - cost.value(time, x, v);
    };

    Vec v{0.0, 0.0, 0.0};
    Vec trial{0.0, 0.0, 0.0};
    Vec grad{0.0, 0.0, 0.0};
    std::span<double> vs(v.data(), d);
    std::span<double> ts(trial.data(), d);
    std::span<double> gs(grad.data(), d);
    for (std::size_t i = 0; i < d; ++i) v[i] = -p[i] / cost.alpha;
    project_to_ball(vs, truncation);
    double value = objective(vs);
    double step = 1.0 / lip;

    for (int it = 0; it < opts.max_iterations; ++it) {
        cost.gradient(time, x, vs, gs);
        for (std::size_t i = 0; i < d; ++i) grad[i] = -p[i] - grad[i];
        double trial_value = 0.0;
        double map_norm = 0.0;
        while (true) {
            for (std::size_t i = 0; i < d; ++i) trial[i] = v[i] + step * grad[i];
            project_to_ball(ts, truncation);
            double diff2 = 0.0;
            double ascent = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double dv = trial[i] - v[i];
                diff2 += dv * dv;
                ascent += grad[i] * dv;
            }
            map_norm = std::sqrt(diff2) / step;
            trial_value = objective(ts);
            // Sufficient-increase test for an L-smooth concave objective.
            if (trial_value >= value + ascent - diff2 / (2.0 * step) - 1e-15 * (1.0 + std::abs(value)) ||
                step < 1e-14) {
                break;
            }
            step *= 0.5;
        }
        v = trial;
        value = trial_value;
        if (map_norm <= opts.tolerance) {
            HamiltonianEval out;
            out.value = value;
            out.control = v;
            out.truncation = truncation;
            out.truncated = std::isfinite(truncation) && norm(vs) >= truncation * (1.0 - 1e-12);
            return out;
        }
    }
    throw SolverError("Hamiltonian inner solver did not converge; check that the declared alpha and "
                      "inner Lipschitz estimate match the running cost");
}

}  // namespace

double running_cost_value(const RunningCost& cost, double time, const Point& x, std::span<const double> v) {
    return std::visit(overloaded{
                          [&](const QuadraticCost& c) {
                              double s = 0.0;
                              Vec b = c.drift ? c.drift(time, x) : Vec{0.0, 0.0, 0.0};
                              for (std::size_t i = 0; i < v.size(); ++i) {
                                  s += 0.5 * c.alpha * v[i] * v[i] + b[i] * v[i];
                              }
                              return s + (c.offset ? c.offset(time, x) : 0.0);
                          },
                          [&](const GenericCost& c) { return c.value(time, x, v); },
                      },
                      cost);
}

void running_cost_gradient(const RunningCost& cost, double time, const Point& x, std::span<const double> v,
                           std::span<double> grad) {
    std::visit(overloaded{
                   [&](const QuadraticCost& c) {
                       Vec b = c.drift ? c.drift(time, x) : Vec{0.0, 0.0, 0.0};
                       for (std::size_t i = 0; i < v.size(); ++i) grad[i] = c.alpha * v[i] + b[i];
                   },
                   [&](const GenericCost& c) { c.gradient(time, x, v, grad); },
               },
               cost);
}

namespace {

HamiltonianEval quadratic_hamiltonian(double alpha, std::span<const double> b, double c,
                                      std::span<const double> p, double truncation) {
    const std::size_t d = p.size();
    HamiltonianEval out;
    out.truncation = truncation;
    // The objective is -(alpha/2)|v - w|^2 + const with w = -(p+b)/alpha, so the
    // constrained maximiser is the projection of w onto the ball.
    double wn2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        out.control[i] = -(p[i] + b[i]) / alpha;
        wn2 += out.control[i] * out.control[i];
    }
    const double wn = std::sqrt(wn2);
    if (std::isfinite(truncation) && wn > truncation) {
        for (std::size_t i = 0; i < d; ++i) out.control[i] *= truncation / wn;
        out.truncated = true;
    }
    double value = -c;
    for (std::size_t i = 0; i < d; ++i) {
        const double vi = out.control[i];
        value += -(p[i] + b[i]) * vi - 0.5 * alpha * vi * vi;
    }
    out.value = value;
    return out;
}

}  // namespace

HamiltonianEval hamiltonian(const RunningCost& cost, double time, const Point& x, std::span<const double> p,
                            double truncation, const HamiltonianOptions& opts) {
    if (!(truncation > 0.0)) throw ValidationError("Hamiltonian truncation D must be positive");
    return std::visit(overloaded{
                          [&](const QuadraticCost& c) {
                              const Vec b = c.drift ? c.drift(time, x) : Vec{0.0, 0.0, 0.0};
                              const double off = c.offset ? c.offset(time, x) : 0.0;
                              return quadratic_hamiltonian(c.alpha, std::span<const double>(b.data(), p.size()),
                                                           off, p, truncation);
                          },
                          [&](const GenericCost& c) {
                              return generic_hamiltonian(c, time, x, p, truncation, opts);
                          },
                      },
                      cost);
}

void ProblemSpec::validate(int d) const {
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    if (L_ell < 0.0 || L_f < 0.0 || L_g < 0.0) throw ValidationError("Lipschitz constants must be nonnegative");
    if (!terminal_cost) throw ValidationError("terminal cost is missing");
    if (!initial_density) throw ValidationError("initial density is missing");
    if (quadrature_points < 1) throw ValidationError("quadrature_points must be positive");
    if (control_bound_override && !(*control_bound_override > 0.0)) {
        throw ValidationError("control bound override must be positive");
    }

    if (const auto* q = std::get_if<QuadraticCost>(&running_cost)) {
        if (std::abs(q->alpha - alpha) > 1e-14 * alpha) {
            throw ValidationError("quadratic cost alpha differs from the declared strong-convexity modulus");
        }
    } else {
        const auto& g = std::get<GenericCost>(running_cost);
        if (!g.value || !g.gradient) throw ValidationError("generic cost needs value and gradient");
        if (!(g.alpha > 0.0)) throw ValidationError("generic cost alpha must be positive");
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_real_distribution<double> ctrl(-2.0, 2.0);
        for (int s = 0; s < 32; ++s) {
            const double time = unit(rng);
            Point x{unit(rng), unit(rng), unit(rng)};
            Vec v{0, 0, 0};
            Vec grad{0, 0, 0};
            for (int i = 0; i < d; ++i) v[i] = ctrl(rng);
            g.gradient(time, x, std::span<const double>(v.data(), d), std::span<double>(grad.data(), d));
            for (int i = 0; i < d; ++i) {
                const double eps = 1e-5;
                Vec vp = v;
                Vec vm = v;
                vp[i] += eps;
                vm[i] -= eps;
                const double fd = (g.value(time, x, std::span<const double>(vp.data(), d)) -
                                   g.value(time, x, std::span<const double>(vm.data(), d))) /
                                  (2.0 * eps);
                if (std::abs(fd - grad[i]) > 1e-6 * std::max(1.0, std::abs(grad[i]))) {
                    throw ValidationError("generic cost gradient disagrees with finite differences");
                }
            }
        }
        if (std::abs(g.alpha - alpha) > 1e-14 * alpha) {
            throw ValidationError("generic cost alpha differs from the declared strong-convexity modulus");
        }
    }

    if (const auto* loc = std::get_if<LocalCoupling>(&coupling)) {
        if (!loc->F) throw ValidationError("local coupling needs F");
        double prev = loc->F(0.0);
        for (int k = 1; k <= 200; ++k) {
            const double cur = loc->F(0.05 * k);
            if (cur < prev - 1e-12 * (1.0 + std::abs(prev))) {
                throw ValidationError("local coupling F is not nondecreasing");
            }
            prev = cur;
        }
    } else if (!std::get<NonlocalCoupling>(coupling).kernel) {
        throw ValidationError("nonlocal coupling needs a kernel");
    }

    const Torus fine(d, d == 1 ? 256 : (d == 2 ? 64 : 16));
    const double mass = restrict_Ih(initial_density, fine, 5).sum();
    if (std::abs(mass - 1.0) > 1e-6) {
        throw ValidationError("initial density must have unit mass, got " + std::to_string(mass));
    }
}

double control_bound_formula(double max_lv0, double alpha, int d, double L_ell, double L_f, double L_g) {
    if (d < 1) throw ValidationError("dimension must be positive");
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    return (2.0 * max_lv0 + std::sqrt(static_cast<double>(d)) * (L_ell + L_f + L_g)) / alpha;
}

double control_bound_M(const ProblemSpec& spec, int d, int samples_per_axis) {
    if (spec.control_bound_override) return *spec.control_bound_override;
    if (d < 1 || d > kMaxDim) throw ValidationError("control_bound_M samples fields of dimension 1..3");
    const Torus sample(d, samples_per_axis);
    double max_grad = 0.0;
    const Vec zero{0.0, 0.0, 0.0};
    for (int k = 0; k <= 16; ++k) {
        const double time = k / 16.0;
        for (std::size_t x = 0; x < sample.size(); ++x) {
            Vec grad{0.0, 0.0, 0.0};
            running_cost_gradient(spec.running_cost, time, sample.position(x),
                                  std::span<const double>(zero.data(), d), std::span<double>(grad.data(), d));
            max_grad = std::max(max_grad, norm(std::span<const double>(grad.data(), d)));
        }
    }
    return control_bound_formula(max_grad, spec.alpha, d, spec.L_ell, spec.L_f, spec.L_g);
}

CflReport cfl_check(const Grid& grid, double M) {
    if (grid.theta() >= 1.0) {
        throw ValidationError("CFL bounds are undefined for theta = 1 (no explicit diffusion part)");
    }
    CflReport r;
    r.dt = grid.dt();
    r.h = grid.h();
    const double explicit_diffusion = (1.0 - grid.theta()) * grid.sigma();
    r.dt_max = r.h * r.h / (2.0 * grid.dim() * explicit_diffusion);
    r.h_max = M > 0.0 ? 2.0 * explicit_diffusion / M : kNoTruncation;
    constexpr double slack = 1.0 + 1e-12;
    r.ok = r.dt <= r.dt_max * slack && r.h <= r.h_max * slack;
    return r;
}

int cfl_min_steps(int d, int n, double theta, double sigma) {
    if (theta >= 1.0) throw ValidationError("CFL bounds are undefined for theta = 1");
    const double h = 1.0 / n;
    const double dt_max = h * h / (2.0 * d * (1.0 - theta) * sigma);
    return std::max(2, static_cast<int>(std::ceil(1.0 / dt_max - 1e-9)));
}

DiscreteProblem::DiscreteProblem(ProblemSpec spec, Grid grid) : spec_(std::move(spec)), grid_(std::move(grid)) {
    const Torus& g = grid_.torus();
    const int d = g.dim();
    spec_.validate(d);
    control_bound_ = control_bound_M(spec_, d);

    terminal_ = ScalarField(g);
    for (std::size_t x = 0; x < g.size(); ++x) terminal_[x] = spec_.terminal_cost(g.position(x));

    initial_ = restrict_Ih(spec_.initial_density, g, spec_.quadrature_points);
    if (initial_.min() < 0.0) throw ValidationError("initial density is negative somewhere");
    // Quadrature of m0 is only approximately mass-preserving; renormalize into P(S).
    initial_ *= 1.0 / initial_.sum();

    const std::size_t n = g.size();
    const int steps = grid_.steps();
    if (const auto* q = std::get_if<QuadraticCost>(&spec_.running_cost)) {
        quadratic_ = true;
        drift_.assign(static_cast<std::size_t>(steps) * n * d, 0.0);
        offset_.assign(static_cast<std::size_t>(steps) * n, 0.0);
        for (int t = 0; t < steps; ++t) {
            const double time = t * grid_.dt();
            for (std::size_t x = 0; x < n; ++x) {
                const Point pos = g.position(x);
                if (q->drift) {
                    const Vec b = q->drift(time, pos);
                    for (int i = 0; i < d; ++i) drift_[(t * n + x) * d + i] = b[i];
                }
                if (q->offset) offset_[t * n + x] = q->offset(time, pos);
            }
        }
    }

    if (const auto* nl = std::get_if<NonlocalCoupling>(&spec_.coupling)) {
        const GaussRule rule = gauss_legendre(spec_.quadrature_points);
        const int pts = spec_.quadrature_points;
        const double h = g.h();
        kernel_table_.assign(n, 0.0);
        for (std::size_t o = 0; o < n; ++o) {
            const Point base = g.position(o);
            // Average of K(y - w) over y in B_h(o), w in B_h(0): tensor rule in 2d variables.
            std::array<int, 2 * kMaxDim> idx{};
            double acc = 0.0;
            while (true) {
                Point z{0.0, 0.0, 0.0};
                double w = 1.0;
                for (int i = 0; i < d; ++i) {
                    z[i] = base[i] + h * (rule.nodes[idx[i]] - rule.nodes[idx[d + i]]);
                    w *= rule.weights[idx[i]] * rule.weights[idx[d + i]];
                }
                acc += w * nl->kernel(z);
                int axis = 0;
                while (axis < 2 * d && ++idx[axis] == pts) idx[axis++] = 0;
                if (axis == 2 * d) break;
            }
            kernel_table_[o] = acc;
        }
        // Nonnegative discrete symbol on (a sample of) the wavenumbers.
        const std::size_t stride = n > 4096 ? n / 64 : 1;
        double scale = 0.0;
        for (double k : kernel_table_) scale = std::max(scale, std::abs(k));
        for (std::size_t k = 0; k < n; k += stride) {
            const auto kc = g.coords(k);
            std::complex<double> sym = 0.0;
            for (std::size_t o = 0; o < n; ++o) {
                const auto oc = g.coords(o);
                double phase = 0.0;
                for (int i = 0; i < d; ++i) phase += static_cast<double>(kc[i]) * oc[i];
                phase *= 2.0 * std::numbers::pi / g.cells_per_axis();
                sym += kernel_table_[o] * std::polar(1.0, -phase);
            }
            if (sym.real() < -1e-10 * (1.0 + scale * n)) {
                throw ValidationError("nonlocal kernel is not positive semidefinite (negative Fourier symbol)");
            }
        }
    }
}

HamiltonianEval DiscreteProblem::hamiltonian(int t, std::size_t node, std::span<const double> p,
                                             double truncation) const {
    if (quadratic_) {
        if (!(truncation > 0.0)) throw ValidationError("Hamiltonian truncation D must be positive");
        const std::size_t n = torus().size();
        const int d = torus().dim();
        return quadratic_hamiltonian(
            spec_.alpha, std::span<const double>(drift_.data() + (t * n + node) * d, static_cast<std::size_t>(d)),
            offset_[t * n + node], p, truncation);
    }
    return mfg::hamiltonian(spec_.running_cost, t * grid_.dt(), torus().position(node), p, truncation, ham_opts_);
}

double DiscreteProblem::running_cost(int t, std::size_t node, std::span<const double> v) const {
    return running_cost_value(spec_.running_cost, t * grid_.dt(), torus().position(node), v);
}

double DiscreteProblem::coupling_f(int /*t*/, std::size_t node, const ScalarField& m) const {
    const Torus& g = torus();
    if (const auto* loc = std::get_if<LocalCoupling>(&spec_.coupling)) {
        return loc->F(m[node] / g.cell_volume());
    }
    const auto xc = g.coords(node);
    double acc = 0.0;
    for (std::size_t z = 0; z < g.size(); ++z) {
        const auto zc = g.coords(z);
        std::array<int, kMaxDim> diff{0, 0, 0};
        for (int i = 0; i < g.dim(); ++i) diff[i] = xc[i] - zc[i];
        acc += kernel_table_[g.node_at(diff)] * m[z];
    }
    return acc;
}

ScalarField DiscreteProblem::coupling_field(int t, const ScalarField& m) const {
    require_same_torus(torus(), m.torus(), "coupling_field");
    ScalarField out(torus());
    if (const auto* loc = std::get_if<LocalCoupling>(&spec_.coupling)) {
        const double inv_vol = 1.0 / torus().cell_volume();
        for (std::size_t x = 0; x < out.size(); ++x) out[x] = loc->F(m[x] * inv_vol);
        return out;
    }
    for (std::size_t x = 0; x < out.size(); ++x) out[x] = coupling_f(t, x, m);
    return out;
}

SpaceFunction make_expression(const std::string& id, int d, const ExpressionParams& params) {
    const double scale = params.scale;
    if (id == "zero") return [](const Point&) { return 0.0; };
    if (id == "uniform") return [scale](const Point&) { return scale; };
    if (id == "cos_sum") {
        return [d, scale](const Point& x) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += std::cos(2.0 * std::numbers::pi * x[i]);
            return scale * s;
        };
    }
    if (id == "gaussian_bump") {
        if (!(params.width > 0.0)) throw ValidationError("gaussian_bump width must be positive");
        const double w = params.width;
        const Point c = params.center;
        const double norm_const = std::pow(2.0 * std::numbers::pi * w * w, 0.5 * d);
        const int images = std::max(2, static_cast<int>(std::ceil(8.0 * w)) + 1);
        return [d, w, c, norm_const, images, scale](const Point& x) {
            double prod = 1.0;
            for (int i = 0; i < d; ++i) {
                double s = 0.0;
                for (int k = -images; k <= images; ++k) {
                    const double r = x[i] - c[i] - k;
                    s += std::exp(-r * r / (2.0 * w * w));
                }
                prod *= s;
            }
            return scale * prod / norm_const;
        };
    }
    throw ValidationError("unknown expression id '" + id + "'");
}

}  // namespace mfg
