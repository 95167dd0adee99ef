#include "mfg/numerical_hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "mfg/rng.hpp"

namespace mfg {

namespace {

double quadratic_alpha_or_generic(const RunningCost& cost) {
    return std::visit([](const auto& c) { return c.alpha; }, cost);
}

NumHamiltonianEval closed_form_eval(const QuadraticCost& c, int d, double time, const Point& x,
                                    std::span<const double> q) {
    const Vec b = c.drift ? c.drift(time, x) : Vec{0.0, 0.0, 0.0};
    NumHamiltonianEval out;
    double value = 0.0;
    for (int i = 0; i < d; ++i) {
        // Each coordinate is a 1-D concave quadratic clamped to its half-line.
        out.v[i] = std::max(0.0, -(q[2 * i] + b[i]) / c.alpha);
        out.u[i] = std::min(0.0, -(q[2 * i + 1] + b[i]) / c.alpha);
        value += 0.5 * c.alpha * (out.v[i] * out.v[i] + out.u[i] * out.u[i]);
        out.gradient[2 * i] = -out.v[i];
        out.gradient[2 * i + 1] = -out.u[i];
    }
    out.value = value - (c.offset ? c.offset(time, x) : 0.0);
    return out;
}

// Projected gradient ascent over the product orthant {v >= 0} x {u <= 0} of
//   J(v,u) = -<v,qa> - <u,qb> - l(v+u) + alpha <v,u>,
// which equals the defining objective after expanding l0 = l - (alpha/2)|w|^2.
NumHamiltonianEval generic_eval(const GenericCost& c, int d, double time, const Point& x,
                                std::span<const double> q, const HamiltonianOptions& opts) {
    const double lip = c.inner_lipschitz > 0.0 ? c.inner_lipschitz : 10.0 * c.alpha;
    Vec w{};
    Vec gl{};
    auto sum = [&](const Vec& v, const Vec& u) {
        for (int i = 0; i < d; ++i) w[i] = v[i] + u[i];
        return std::span<const double>(w.data(), static_cast<std::size_t>(d));
    };
    auto objective = [&](const Vec& v, const Vec& u) {
        double s = -c.value(time, x, sum(v, u));
        for (int i = 0; i < d; ++i) s += -v[i] * q[2 * i] - u[i] * q[2 * i + 1] + c.alpha * v[i] * u[i];
        return s;
    };

    Vec v{}, u{}, tv{}, tu{}, gv{}, gu{};
    double value = objective(v, u);
    double step = 1.0 / (2.0 * lip + c.alpha);
    for (int it = 0; it < opts.max_iterations; ++it) {
        c.gradient(time, x, sum(v, u), std::span<double>(gl.data(), static_cast<std::size_t>(d)));
        for (int i = 0; i < d; ++i) {
            gv[i] = -q[2 * i] - gl[i] + c.alpha * u[i];
            gu[i] = -q[2 * i + 1] - gl[i] + c.alpha * v[i];
        }
        double trial_value = 0.0;
        double map_norm = 0.0;
        while (true) {
            double diff2 = 0.0;
            double ascent = 0.0;
            for (int i = 0; i < d; ++i) {
                tv[i] = std::max(0.0, v[i] + step * gv[i]);
                tu[i] = std::min(0.0, u[i] + step * gu[i]);
                const double dv = tv[i] - v[i];
                const double du = tu[i] - u[i];
                diff2 += dv * dv + du * du;
                ascent += gv[i] * dv + gu[i] * du;
            }
            map_norm = std::sqrt(diff2) / step;
            trial_value = objective(tv, tu);
            if (trial_value >= value + ascent - diff2 / (2.0 * step) - 1e-15 * (1.0 + std::abs(value)) ||
                step < 1e-14) {
                break;
            }
            step *= 0.5;
        }
        v = tv;
        u = tu;
        value = trial_value;
        if (map_norm <= opts.tolerance) {
            NumHamiltonianEval out;
            out.value = value;
            out.v = v;
            out.u = u;
            for (int i = 0; i < d; ++i) {
                out.gradient[2 * i] = -v[i];
                out.gradient[2 * i + 1] = -u[i];
            }
            return out;
        }
    }
    throw SolverError("numerical Hamiltonian inner solver did not converge");
}

}  // namespace

NumHamiltonian::NumHamiltonian(RunningCost cost, int d, HamiltonianOptions opts)
    : cost_(std::move(cost)), d_(d), alpha_(quadratic_alpha_or_generic(cost_)), opts_(opts) {
    if (d < 1 || d > kMaxDim) throw ValidationError("numerical Hamiltonian dimension must be in [1, 3]");
    if (!(alpha_ > 0.0)) throw ValidationError("numerical Hamiltonian needs alpha > 0");
    if (const auto* g = std::get_if<GenericCost>(&cost_); g && (!g->value || !g->gradient)) {
        throw ValidationError("generic cost needs value and gradient");
    }
}

bool NumHamiltonian::closed_form() const { return std::holds_alternative<QuadraticCost>(cost_); }

NumHamiltonianEval NumHamiltonian::eval(double time, const Point& x, std::span<const double> q) const {
    if (q.size() != static_cast<std::size_t>(2 * d_)) throw ValidationError("q must have 2d entries");
    if (const auto* c = std::get_if<QuadraticCost>(&cost_)) return closed_form_eval(*c, d_, time, x, q);
    return generic_eval(std::get<GenericCost>(cost_), d_, time, x, q, opts_);
}

double NumHamiltonian::continuous(double time, const Point& x, std::span<const double> p) const {
    return hamiltonian(cost_, time, x, p, kNoTruncation, opts_).value;
}

bool AxiomReport::all_pass() const {
    return std::all_of(axioms.begin(), axioms.end(), [](const AxiomResult& a) { return a.pass(); });
}

const AxiomResult& AxiomReport::get(const std::string& name) const {
    for (const auto& a : axioms) {
        if (a.name == name) return a;
    }
    throw ValidationError("unknown axiom '" + name + "'");
}

std::string AxiomReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "axiom,samples,max_violation,witness...\n";
    for (const auto& a : axioms) {
        os << a.name << ',' << a.samples << ',' << a.max_violation;
        for (double w : a.witness) os << ',' << w;
        os << '\n';
    }
    return os.str();
}

namespace {

struct Sample {
    double time = 0.0;
    Point x{0.0, 0.0, 0.0};
    SplitVec q{};
    SplitVec q2{};
    int slot = 0;
    double step = 0.0;
};

Sample draw(const CounterRng& base, std::size_t index, int d, double range) {
    CounterRng rng = base.split(index);
    Sample s;
    s.time = rng.uniform();
    for (int i = 0; i < d; ++i) s.x[i] = rng.uniform();
    for (int j = 0; j < 2 * d; ++j) s.q[j] = rng.uniform(-range, range);
    for (int j = 0; j < 2 * d; ++j) s.q2[j] = rng.uniform(-range, range);
    s.slot = static_cast<int>(rng.next() % static_cast<std::uint64_t>(2 * d));
    s.step = rng.uniform(0.0, range);
    return s;
}

class Tracker {
public:
    Tracker(std::string name, double tol, std::size_t samples) {
        result_.name = std::move(name);
        result_.tolerance = tol;
        result_.samples = samples;
    }
    void offer(double violation, std::span<const double> a, std::span<const double> b = {}) {
        if (!(violation > result_.max_violation) && !std::isnan(violation)) return;
        result_.max_violation = std::isnan(violation) ? std::numeric_limits<double>::infinity() : violation;
        result_.witness.assign(a.begin(), a.end());
        result_.witness.insert(result_.witness.end(), b.begin(), b.end());
    }
    AxiomResult take() { return std::move(result_); }

private:
    AxiomResult result_;
};

double norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

}  // namespace

AxiomReport check_axioms(const NumHamiltonian& nh, std::size_t samples, std::uint64_t seed,
                         const AxiomCheckOptions& opts) {
    if (samples < 1) throw ValidationError("check_axioms needs at least one sample");
    const int d = nh.dim();
    const auto n2 = static_cast<std::size_t>(2 * d);
    const double alpha = nh.alpha();
    const double h = opts.fd_step;
    const double eps = std::numeric_limits<double>::epsilon();
    const CounterRng base(seed);
    auto span_of = [n2](const SplitVec& a) { return std::span<const double>(a.data(), n2); };

    // Gradient used by g5: closed form for quadratic costs, central differences otherwise.
    auto fd_gradient = [&](double t, const Point& x, const SplitVec& q) {
        SplitVec g{};
        for (std::size_t j = 0; j < n2; ++j) {
            SplitVec qp = q, qm = q;
            qp[j] += h;
            qm[j] -= h;
            g[j] = (nh.value(t, x, span_of(qp)) - nh.value(t, x, span_of(qm))) / (2.0 * h);
        }
        return g;
    };
    auto g5_gradient = [&](double t, const Point& x, const SplitVec& q) {
        return nh.closed_form() ? nh.eval(t, x, span_of(q)).gradient : fd_gradient(t, x, q);
    };

    AxiomReport report;
    report.seed = seed;
    report.samples = samples;
    report.c1 = alpha / 4.0;
    report.c3 = 1.0 / alpha;
    const SplitVec zero{};
    for (std::size_t s = 0; s < samples; ++s) {
        const Sample smp = draw(base, s, d, opts.q_range);
        const double h0 = nh.value(smp.time, smp.x, span_of(zero));
        const SplitVec g0 = g5_gradient(smp.time, smp.x, zero);
        const double g0n = norm(span_of(g0));
        report.c2 = std::max(report.c2, 0.5 * alpha * g0n * g0n + h0);
        report.c4 = std::max(report.c4, g0n);
    }

    Tracker g1("g1", opts.tolerance, samples);
    Tracker g2("g2", opts.tolerance, samples);
    Tracker g3("g3", opts.tolerance, samples);
    Tracker g4("g4", opts.tolerance, samples);
    Tracker g5("g5", opts.tolerance, samples);
    for (std::size_t s = 0; s < samples; ++s) {
        const Sample smp = draw(base, s, d, opts.q_range);
        const double t = smp.time;
        const Point& x = smp.x;
        const NumHamiltonianEval at_q = nh.eval(t, x, span_of(smp.q));

        // g1: moving slot 2i up must not increase NH; moving slot 2i+1 up must not decrease it.
        {
            SplitVec moved = smp.q;
            moved[smp.slot] += smp.step;
            const double diff = nh.value(t, x, span_of(moved)) - at_q.value;
            g1.offer(smp.slot % 2 == 0 ? std::max(0.0, diff) : std::max(0.0, -diff), span_of(smp.q),
                     span_of(moved));
        }
        // g2: diagonal points reproduce H(p).
        {
            SplitVec diag{};
            Vec p{};
            for (int i = 0; i < d; ++i) {
                p[i] = smp.q[2 * i + 1];
                diag[2 * i] = diag[2 * i + 1] = p[i];
            }
            const double hc = nh.continuous(t, x, std::span<const double>(p.data(), static_cast<std::size_t>(d)));
            g2.offer(std::abs(nh.value(t, x, span_of(diag)) - hc), span_of(diag));
        }
        // g3: the gradient matches central differences within the C^{1,1} bound h/(2 alpha)
        // plus rounding, and is 1/alpha-Lipschitz.
        {
            const SplitVec fd = fd_gradient(t, x, smp.q);
            const double allowance = h / (2.0 * alpha) + 4.0 * eps * (1.0 + std::abs(at_q.value)) / h;
            double worst = 0.0;
            for (std::size_t j = 0; j < n2; ++j) worst = std::max(worst, std::abs(fd[j] - at_q.gradient[j]) - allowance);
            const NumHamiltonianEval at_q2 = nh.eval(t, x, span_of(smp.q2));
            SplitVec dg{}, dq{};
            for (std::size_t j = 0; j < n2; ++j) {
                dg[j] = at_q2.gradient[j] - at_q.gradient[j];
                dq[j] = smp.q2[j] - smp.q[j];
            }
            worst = std::max(worst, norm(span_of(dg)) - norm(span_of(dq)) / alpha);
            g3.offer(std::max(0.0, worst), span_of(smp.q), span_of(smp.q2));

            // g4: midpoint convexity.
            SplitVec mid{};
            for (std::size_t j = 0; j < n2; ++j) mid[j] = 0.5 * (smp.q[j] + smp.q2[j]);
            const double gap = nh.value(t, x, span_of(mid)) - 0.5 * (at_q.value + at_q2.value);
            g4.offer(std::max(0.0, gap), span_of(smp.q), span_of(smp.q2));
        }
        // g5: growth bounds with the fitted constants.
        {
            const SplitVec g = g5_gradient(t, x, smp.q);
            double gq = 0.0;
            for (std::size_t j = 0; j < n2; ++j) gq += g[j] * smp.q[j];
            const double gn = norm(span_of(g));
            const double e1 = report.c1 * gn * gn - report.c2 - (gq - at_q.value);
            const double e2 = gn - report.c3 * norm(span_of(smp.q)) - report.c4;
            g5.offer(std::max({0.0, e1, e2}), span_of(smp.q));
        }
    }
    report.axioms.push_back(g1.take());
    report.axioms.push_back(g2.take());
    report.axioms.push_back(g3.take());
    report.axioms.push_back(g4.take());
    report.axioms.push_back(g5.take());
    return report;
}

}  // namespace mfg
