#pragma once

#include <functional>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

/// Function on the continuous torus, evaluated at points of [0,1)^d.
using SpaceFunction = std::function<double(const Point&)>;

struct GaussRule {
    std::vector<double> nodes;    // on [-1/2, 1/2]
    std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule with `points` nodes rescaled to the unit interval
/// centred at 0; exact for polynomials of degree 2*points-1.
GaussRule gauss_legendre(int points);

/// Cell integrals I_h(fc)(x) = integral of fc over B_h(x) = prod_i [x_i - h/2, x_i + h/2),
/// by tensor-product Gauss quadrature with `points` nodes per axis.
ScalarField restrict_Ih(const SpaceFunction& fc, const Torus& torus, int points = 3);

/// Average of fc over the cell of `node` (same rule as restrict_Ih).
double cell_average(const SpaceFunction& fc, const Torus& torus, std::size_t node, int points = 3);

/// Piecewise-constant reconstruction R_h(m)(y) = m(x) / h^d for y in B_h(x).
class PiecewiseConstant {
public:
    explicit PiecewiseConstant(ScalarField masses) : masses_(std::move(masses)) {}
    double operator()(const Point& y) const;
    /// Index of the cell containing y.
    std::size_t cell_of(const Point& y) const;
    const ScalarField& masses() const { return masses_; }

private:
    ScalarField masses_;
};

PiecewiseConstant reconstruct_Rh(const ScalarField& m);

}  // namespace mfg
