#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

// Implicit heat half-step: find Y with (Id - c dt lap_h) Y = X.

enum class HeatMethod { Spectral, Contraction };

struct HeatSolveOptions {
    HeatMethod method = HeatMethod::Spectral;
    double tol = 1e-12;  // sup-norm residual target
    /// 0 selects ceil(50 (1 + 2dr)) + 50 iterations, capped at 1e6.
    int max_iter = 0;
};

struct HeatSolveReport {
    ScalarField solution;
    int iterations = 0;
    double residual = 0.0;
};

/// Reusable spectral solver for one (torus, c dt) pair. The operator is
/// circulant, so the solve divides the DFT of X by the symbol
///   1 + c dt (2/h^2) sum_i (1 - cos(2 pi k_i / N)).
/// Not safe for concurrent use of one instance; separate instances are fine.
class ImplicitHeatSolver {
public:
    ImplicitHeatSolver(const Torus& torus, double c_dt);
    ~ImplicitHeatSolver();
    ImplicitHeatSolver(const ImplicitHeatSolver&) = delete;
    ImplicitHeatSolver& operator=(const ImplicitHeatSolver&) = delete;
    ImplicitHeatSolver(ImplicitHeatSolver&&) noexcept;
    ImplicitHeatSolver& operator=(ImplicitHeatSolver&&) noexcept;

    void solve(const ScalarField& x, ScalarField& y) const;
    ScalarField solve(const ScalarField& x) const {
        ScalarField y(x.torus());
        solve(x, y);
        return y;
    }
    const Torus& torus() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// sup-norm of (Id - c dt lap_h) Y - X.
double b1_residual(const ScalarField& x, const ScalarField& y, double c, const Grid& grid);

/// Solves the half-step with diffusion weight c (theta*sigma in the scheme).
/// Throws SolverError when the contraction iteration exhausts max_iter.
ScalarField solve_b1(const ScalarField& x, double c, const Grid& grid, const HeatSolveOptions& opts = {});

/// Fixed-point iteration Y <- S_X(Y) started at Y0 = X, with
///   S_X(mu)(x) = (r sum_{j,+-} mu(x +- h e_j) + X(x)) / (1 + 2dr),   r = c dt / h^2,
/// a contraction of factor 2dr/(1+2dr) in sup-norm. `observer` sees every iterate.
HeatSolveReport solve_b1_contraction(const ScalarField& x, double c, const Grid& grid,
                                     const HeatSolveOptions& opts = {},
                                     const std::function<void(const ScalarField&)>& observer = {});

VectorField solve_b1_vector(const VectorField& x, double c, const Grid& grid, const HeatSolveOptions& opts = {});

/// 2dr/(1+2dr) for the given diffusion weight.
double contraction_factor(double c, const Grid& grid);

}  // namespace mfg
