#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfg {

/// Thrown for malformed inputs: bad grid parameters, inconsistent shapes,
/// violated preconditions, rejected configurations.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterative inner solver fails to reach its tolerance.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kMaxDim = 3;

/// A point of the torus [0,1)^d; entries beyond d are zero.
using Point = std::array<double, kMaxDim>;

/// Uniform periodic lattice S = (hZ/Z)^d with N nodes per axis.
///
/// Nodes are stored row-major over the axis indices (axis 0 slowest) and
/// every neighbour lookup wraps modulo N.
class Torus {
public:
    Torus() = default;
    Torus(int d, int n);

    int dim() const { return d_; }
    int cells_per_axis() const { return n_; }
    double h() const { return 1.0 / n_; }
    /// Cell volume h^d.
    double cell_volume() const { return cell_volume_; }
    std::size_t size() const { return size_; }

    std::size_t stride(int axis) const { return strides_[axis]; }
    int coord(std::size_t node, int axis) const {
        return static_cast<int>((node / strides_[axis]) % static_cast<std::size_t>(n_));
    }
    std::array<int, kMaxDim> coords(std::size_t node) const;
    std::size_t node_at(const std::array<int, kMaxDim>& c) const;

    /// Node reached from `node` by `steps` cells along `axis`, with periodic wrap.
    std::size_t shift(std::size_t node, int axis, int steps) const {
        const int c = coord(node, axis);
        int w = (c + steps) % n_;
        if (w < 0) w += n_;
        return node + static_cast<std::size_t>(w) * strides_[axis] -
               static_cast<std::size_t>(c) * strides_[axis];
    }

    /// Physical position of the node (cell centre).
    Point position(std::size_t node) const;

    bool operator==(const Torus& o) const { return d_ == o.d_ && n_ == o.n_; }

private:
    int d_ = 1;
    int n_ = 1;
    std::size_t size_ = 1;
    double cell_volume_ = 1.0;
    std::array<std::size_t, kMaxDim> strides_{1, 1, 1};
};

/// Space-time geometry and theta-scheme parameters.
///
/// Invariants: h = 1/N, dt = 1/T with T > 1, theta in [0,1], sigma > 0.
class Grid {
public:
    Grid(int d, int n, int t, double theta, double sigma);

    const Torus& torus() const { return torus_; }
    int dim() const { return torus_.dim(); }
    int cells_per_axis() const { return torus_.cells_per_axis(); }
    int steps() const { return steps_; }
    double h() const { return torus_.h(); }
    double dt() const { return 1.0 / steps_; }
    double theta() const { return theta_; }
    double sigma() const { return sigma_; }
    std::size_t nodes() const { return torus_.size(); }

private:
    Torus torus_;
    int steps_;
    double theta_;
    double sigma_;
};

/// Real function on one time slice of the lattice.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Torus& torus, double fill = 0.0)
        : torus_(torus), values_(torus.size(), fill) {}
    ScalarField(const Torus& torus, std::vector<double> values);

    static ScalarField uniform_probability(const Torus& torus) {
        return ScalarField(torus, 1.0 / static_cast<double>(torus.size()));
    }

    const Torus& torus() const { return torus_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double a);

    double sum() const;
    double min() const;
    double max() const;

private:
    Torus torus_;
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// R^d-valued function on one time slice; component i of node x lives at
/// index x*d + i.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const Torus& torus, double fill = 0.0)
        : torus_(torus), values_(torus.size() * static_cast<std::size_t>(torus.dim()), fill) {}

    const Torus& torus() const { return torus_; }
    int dim() const { return torus_.dim(); }
    std::size_t nodes() const { return torus_.size(); }

    double& at(std::size_t node, int i) { return values_[node * torus_.dim() + i]; }
    double at(std::size_t node, int i) const { return values_[node * torus_.dim() + i]; }
    std::span<double> vec(std::size_t node) {
        return {values_.data() + node * torus_.dim(), static_cast<std::size_t>(torus_.dim())};
    }
    std::span<const double> vec(std::size_t node) const {
        return {values_.data() + node * torus_.dim(), static_cast<std::size_t>(torus_.dim())};
    }
    std::span<double> raw() { return values_; }
    std::span<const double> raw() const { return values_; }

    ScalarField component(int i) const;
    void set_component(int i, const ScalarField& f);

    VectorField& operator+=(const VectorField& o);
    VectorField& operator*=(double a);

    /// max_x ||w(x)|| (Euclidean in R^d).
    double max_norm() const;

private:
    Torus torus_;
    std::vector<double> values_;
};

/// One field per time index. Value functions and densities carry T+1
/// slices, controls and half-step buffers carry T.
using ScalarSeries = std::vector<ScalarField>;
using VectorSeries = std::vector<VectorField>;

ScalarSeries make_series(const Torus& torus, std::size_t slices, double fill = 0.0);
VectorSeries make_vector_series(const Torus& torus, std::size_t slices, double fill = 0.0);

// Norms with the unweighted sums used throughout: ||mu||_p = (sum_x |mu(x)|^p)^(1/p).
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);
double norm1(const ScalarField& f);
double norm2(const ScalarField& f);
double norm2(const VectorField& f);
double norm_inf(const ScalarField& f);

/// max_t ||a(t) - b(t)||_1
double distance_inf_1(const ScalarSeries& a, const ScalarSeries& b);
/// max_t ||a(t) - b(t)||_inf
double distance_inf_inf(const ScalarSeries& a, const ScalarSeries& b);
/// max_{t,x} ||v(t,x)||
double norm_inf_inf(const VectorSeries& v);

/// max_{x,i} |f(x+h e_i) - f(x)| / h
double lipschitz_seminorm(const ScalarField& f);

void require_same_torus(const Torus& a, const Torus& b, const char* what);

}  // namespace mfg
