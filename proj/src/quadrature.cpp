#include "mfg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace mfg {

GaussRule gauss_legendre(int points) {
    if (points < 1 || points > 64) throw ValidationError("Gauss rule needs 1..64 points");
    GaussRule rule;
    rule.nodes.resize(points);
    rule.weights.resize(points);
    if (points == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 1.0;
        return rule;
    }
    // Legendre P_n and its derivative at z by the three-term recurrence.
    auto legendre = [points](double z) {
        double p0 = 1.0;
        double p1 = z;
        for (int j = 2; j <= points; ++j) {
            const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        return std::pair{p1, points * (z * p1 - p0) / (z * z - 1.0)};
    };
    for (int k = 0; k < points; ++k) {
        double z = std::cos(std::numbers::pi * (k + 0.75) / (points + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(z);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double dp = legendre(z).second;
        rule.nodes[k] = 0.5 * z;
        // Standard weight 2/((1-z^2) P'^2), halved for the unit-length interval.
        rule.weights[k] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    return rule;
}

double cell_average(const SpaceFunction& fc, const Torus& torus, std::size_t node, int points) {
    const GaussRule rule = gauss_legendre(points);
    const int d = torus.dim();
    const double h = torus.h();
    const Point centre = torus.position(node);
    std::array<int, kMaxDim> idx{0, 0, 0};
    double acc = 0.0;
    while (true) {
        Point y{0.0, 0.0, 0.0};
        double w = 1.0;
        for (int i = 0; i < d; ++i) {
            y[i] = centre[i] + h * rule.nodes[idx[i]];
            w *= rule.weights[idx[i]];
        }
        acc += w * fc(y);
        int axis = 0;
        while (axis < d && ++idx[axis] == points) idx[axis++] = 0;
        if (axis == d) break;
    }
    return acc;
}

ScalarField restrict_Ih(const SpaceFunction& fc, const Torus& torus, int points) {
    ScalarField out(torus);
    for (std::size_t x = 0; x < torus.size(); ++x) {
        out[x] = torus.cell_volume() * cell_average(fc, torus, x, points);
    }
    return out;
}

std::size_t PiecewiseConstant::cell_of(const Point& y) const {
    const Torus& g = masses_.torus();
    std::array<int, kMaxDim> c{0, 0, 0};
    for (int i = 0; i < g.dim(); ++i) {
        // Cell x covers [x - h/2, x + h/2).
        c[i] = static_cast<int>(std::floor(y[i] * g.cells_per_axis() + 0.5));
    }
    return g.node_at(c);
}

double PiecewiseConstant::operator()(const Point& y) const {
    return masses_[cell_of(y)] / masses_.torus().cell_volume();
}

PiecewiseConstant reconstruct_Rh(const ScalarField& m) { return PiecewiseConstant(m); }

}  // namespace mfg
