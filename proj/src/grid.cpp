#include "mfg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfg {

Torus::Torus(int d, int n) : d_(d), n_(n) {
    if (d < 1 || d > kMaxDim) {
        throw ValidationError("torus dimension must be in [1," + std::to_string(kMaxDim) +
                              "], got " + std::to_string(d));
    }
    if (n < 1) throw ValidationError("cells per axis must be positive, got " + std::to_string(n));
    size_ = 1;
    for (int i = d - 1; i >= 0; --i) {
        strides_[i] = size_;
        size_ *= static_cast<std::size_t>(n);
    }
    cell_volume_ = std::pow(1.0 / n, d);
}

std::array<int, kMaxDim> Torus::coords(std::size_t node) const {
    std::array<int, kMaxDim> c{0, 0, 0};
    for (int i = 0; i < d_; ++i) c[i] = coord(node, i);
    return c;
}

std::size_t Torus::node_at(const std::array<int, kMaxDim>& c) const {
    std::size_t node = 0;
    for (int i = 0; i < d_; ++i) {
        int w = c[i] % n_;
        if (w < 0) w += n_;
        node += static_cast<std::size_t>(w) * strides_[i];
    }
    return node;
}

Point Torus::position(std::size_t node) const {
    Point p{0.0, 0.0, 0.0};
    for (int i = 0; i < d_; ++i) p[i] = coord(node, i) * h();
    return p;
}

Grid::Grid(int d, int n, int t, double theta, double sigma)
    : torus_(d, n), steps_(t), theta_(theta), sigma_(sigma) {
    if (t <= 1) throw ValidationError("number of time steps T must exceed 1, got " + std::to_string(t));
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in [0,1]");
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
}

void require_same_torus(const Torus& a, const Torus& b, const char* what) {
    if (!(a == b)) throw ValidationError(std::string("field shape mismatch in ") + what);
}

ScalarField::ScalarField(const Torus& torus, std::vector<double> values)
    : torus_(torus), values_(std::move(values)) {
    if (values_.size() != torus_.size()) throw ValidationError("scalar field size does not match torus");
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same_torus(torus_, o.torus_, "ScalarField +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same_torus(torus_, o.torus_, "ScalarField -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double a) {
    for (double& x : values_) x *= a;
    return *this;
}

double ScalarField::sum() const {
    double s = 0.0;
    for (double x : values_) s += x;
    return s;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField VectorField::component(int i) const {
    ScalarField out(torus_);
    for (std::size_t x = 0; x < nodes(); ++x) out[x] = at(x, i);
    return out;
}

void VectorField::set_component(int i, const ScalarField& f) {
    require_same_torus(torus_, f.torus(), "VectorField::set_component");
    for (std::size_t x = 0; x < nodes(); ++x) at(x, i) = f[x];
}

VectorField& VectorField::operator+=(const VectorField& o) {
    require_same_torus(torus_, o.torus_, "VectorField +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

VectorField& VectorField::operator*=(double a) {
    for (double& x : values_) x *= a;
    return *this;
}

double VectorField::max_norm() const {
    double best = 0.0;
    for (std::size_t x = 0; x < nodes(); ++x) {
        double s = 0.0;
        for (double c : vec(x)) s += c * c;
        best = std::max(best, std::sqrt(s));
    }
    return best;
}

ScalarSeries make_series(const Torus& torus, std::size_t slices, double fill) {
    return ScalarSeries(slices, ScalarField(torus, fill));
}

VectorSeries make_vector_series(const Torus& torus, std::size_t slices, double fill) {
    return VectorSeries(slices, VectorField(torus, fill));
}

double inner(const ScalarField& a, const ScalarField& b) {
    require_same_torus(a.torus(), b.torus(), "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double inner(const VectorField& a, const VectorField& b) {
    require_same_torus(a.torus(), b.torus(), "inner");
    double s = 0.0;
    auto ra = a.raw();
    auto rb = b.raw();
    for (std::size_t i = 0; i < ra.size(); ++i) s += ra[i] * rb[i];
    return s;
}

double norm1(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.values()) s += std::abs(x);
    return s;
}

double norm2(const ScalarField& f) { return std::sqrt(inner(f, f)); }
double norm2(const VectorField& f) { return std::sqrt(inner(f, f)); }

double norm_inf(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.values()) s = std::max(s, std::abs(x));
    return s;
}

double distance_inf_1(const ScalarSeries& a, const ScalarSeries& b) {
    if (a.size() != b.size()) throw ValidationError("series length mismatch");
    double best = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) best = std::max(best, norm1(a[t] - b[t]));
    return best;
}

double distance_inf_inf(const ScalarSeries& a, const ScalarSeries& b) {
    if (a.size() != b.size()) throw ValidationError("series length mismatch");
    double best = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) best = std::max(best, norm_inf(a[t] - b[t]));
    return best;
}

double norm_inf_inf(const VectorSeries& v) {
    double best = 0.0;
    for (const auto& s : v) best = std::max(best, s.max_norm());
    return best;
}

double lipschitz_seminorm(const ScalarField& f) {
    const Torus& g = f.torus();
    double best = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) {
        for (int i = 0; i < g.dim(); ++i) {
            best = std::max(best, std::abs(f[g.shift(x, i, 1)] - f[x]));
        }
    }
    return best / g.h();
}

}  // namespace mfg
