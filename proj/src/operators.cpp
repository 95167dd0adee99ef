#include "mfg/operators.hpp"

namespace mfg {

void laplacian_into(const ScalarField& f, ScalarField& out) {
    const Torus& g = f.torus();
    require_same_torus(g, out.torus(), "laplacian_h");
    const double inv_h2 = 1.0 / (g.h() * g.h());
    for (std::size_t x = 0; x < g.size(); ++x) {
        double acc = 0.0;
        for (int i = 0; i < g.dim(); ++i) {
            acc += f[g.shift(x, i, 1)] + f[g.shift(x, i, -1)] - 2.0 * f[x];
        }
        out[x] = acc * inv_h2;
    }
}

void gradient_into(const ScalarField& f, VectorField& out) {
    const Torus& g = f.torus();
    require_same_torus(g, out.torus(), "gradient_h");
    const double inv_2h = 0.5 / g.h();
    for (std::size_t x = 0; x < g.size(); ++x) {
        for (int i = 0; i < g.dim(); ++i) {
            out.at(x, i) = (f[g.shift(x, i, 1)] - f[g.shift(x, i, -1)]) * inv_2h;
        }
    }
}

void divergence_into(const VectorField& w, ScalarField& out) {
    const Torus& g = w.torus();
    require_same_torus(g, out.torus(), "divergence_h");
    const double inv_2h = 0.5 / g.h();
    for (std::size_t x = 0; x < g.size(); ++x) {
        double acc = 0.0;
        for (int i = 0; i < g.dim(); ++i) {
            acc += w.at(g.shift(x, i, 1), i) - w.at(g.shift(x, i, -1), i);
        }
        out[x] = acc * inv_2h;
    }
}

ScalarField laplacian_h(const ScalarField& f) {
    ScalarField out(f.torus());
    laplacian_into(f, out);
    return out;
}

VectorField gradient_h(const ScalarField& f) {
    VectorField out(f.torus());
    gradient_into(f, out);
    return out;
}

ScalarField divergence_h(const VectorField& w) {
    ScalarField out(w.torus());
    divergence_into(w, out);
    return out;
}

VectorField forward_gradient_h(const ScalarField& f) {
    const Torus& g = f.torus();
    VectorField out(g);
    const double inv_h = 1.0 / g.h();
    for (std::size_t x = 0; x < g.size(); ++x) {
        for (int i = 0; i < g.dim(); ++i) out.at(x, i) = (f[g.shift(x, i, 1)] - f[x]) * inv_h;
    }
    return out;
}

ScalarField translate(const ScalarField& f, int axis, int steps) {
    const Torus& g = f.torus();
    ScalarField out(g);
    for (std::size_t x = 0; x < g.size(); ++x) out[g.shift(x, axis, steps)] = f[x];
    return out;
}

}  // namespace mfg
