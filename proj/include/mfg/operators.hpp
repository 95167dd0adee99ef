#pragma once

#include "mfg/grid.hpp"

namespace mfg {

// Centered finite-difference operators on the periodic lattice.
//
//   laplacian_h(f)(x)        = sum_i (f(x+he_i) + f(x-he_i) - 2f(x)) / h^2
//   gradient_h(f)(x)_i       = (f(x+he_i) - f(x-he_i)) / (2h)
//   divergence_h(w)(x)       = sum_i (w_i(x+he_i) - w_i(x-he_i)) / (2h)
//   forward_gradient_h(f)_i  = (f(x+he_i) - f(x)) / h
//
// They satisfy the summation-by-parts identities
//   -<mu, div_h w> = <grad_h mu, w>,   -<nu, lap_h mu> = <grad+_h nu, grad+_h mu>.

ScalarField laplacian_h(const ScalarField& f);
VectorField gradient_h(const ScalarField& f);
ScalarField divergence_h(const VectorField& w);
VectorField forward_gradient_h(const ScalarField& f);

// In-place variants for the time-stepping loops; `out` must already have the
// right shape.
void laplacian_into(const ScalarField& f, ScalarField& out);
void gradient_into(const ScalarField& f, VectorField& out);
void divergence_into(const VectorField& w, ScalarField& out);

/// Translate a field by `steps` cells along `axis`: out(x) = f(x - steps*h*e_axis).
ScalarField translate(const ScalarField& f, int axis, int steps);

}  // namespace mfg
