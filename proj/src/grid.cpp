#include "dnls/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid::Grid(int dim, std::array<std::size_t, 3> n, Vec3 extent) : dim_(dim), n_{1, 1, 1}, extent_{1, 1, 1} {
  if (dim < 1 || dim > 3) throw InvalidGrid("dimension must be 1, 2 or 3, got " + std::to_string(dim));
  size_ = 1;
  for (int k = 0; k < dim; ++k) {
    if (n[k] < 8 || !is_power_of_two(n[k]))
      throw InvalidGrid("axis " + std::to_string(k) + ": point count must be a power of two >= 8");
    if (!(extent[k] > 0.0) || !std::isfinite(extent[k]))
      throw InvalidGrid("axis " + std::to_string(k) + ": extent must be positive");
    n_[k] = n[k];
    extent_[k] = extent[k];
    size_ *= n[k];
  }
}

Grid Grid::cube(int dim, std::size_t n, double extent) { return Grid(dim, {n, n, n}, {extent, extent, extent}); }

double Grid::min_spacing() const {
  double h = spacing(0);
  for (int k = 1; k < dim_; ++k) h = std::min(h, spacing(k));
  return h;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int k = 0; k < dim_; ++k) v *= spacing(k);
  return v;
}

long Grid::mode(int axis, std::size_t i) const {
  const auto n = static_cast<long>(n_[axis]);
  const auto m = static_cast<long>(i);
  return m < n / 2 ? m : m - n;
}

double Grid::wavenumber(int axis, std::size_t i) const {
  return 2.0 * std::numbers::pi * static_cast<double>(mode(axis, i)) / extent_[axis];
}

double Grid::resolved_wavenumber(int axis, std::size_t i) const {
  if (i == n_[axis] / 2) return 0.0;
  return wavenumber(axis, i);
}

std::array<std::size_t, 3> Grid::unflatten(std::size_t flat) const {
  std::array<std::size_t, 3> idx{0, 0, 0};
  for (int k = dim_ - 1; k >= 0; --k) {
    idx[k] = flat % n_[k];
    flat /= n_[k];
  }
  return idx;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (a != b) throw GridMismatch("fields live on different grids");
}

// ---------------------------------------------------------------- ScalarField

ScalarField::ScalarField(const Grid& g, std::vector<cplx> values) : grid_(g), values_(std::move(values)) {
  if (values_.size() != g.size()) throw GridMismatch("value count does not match grid size");
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(cplx s) {
  for (auto& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::axpy(cplx s, const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
  return *this;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(cplx s, ScalarField a) { return a *= s; }

ScalarField conj(const ScalarField& f) {
  ScalarField out(f);
  for (auto& v : out.values()) v = std::conj(v);
  return out;
}

// ---------------------------------------------------------------- VectorField

VectorField::VectorField(const Grid& g) : comps_(static_cast<std::size_t>(g.dim()), ScalarField(g)) {}

VectorField::VectorField(std::vector<ScalarField> components) : comps_(std::move(components)) {
  if (comps_.empty()) throw GridMismatch("vector field needs at least one component");
  const Grid& g = comps_.front().grid();
  if (static_cast<int>(comps_.size()) != g.dim())
    throw GridMismatch("vector field must have exactly d components");
  for (const auto& c : comps_) require_same_grid(g, c.grid());
}

VectorField& VectorField::operator+=(const VectorField& o) {
  for (int k = 0; k < dim(); ++k) comps_[k] += o.comps_[k];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  for (int k = 0; k < dim(); ++k) comps_[k] -= o.comps_[k];
  return *this;
}

VectorField& VectorField::operator*=(cplx s) {
  for (auto& c : comps_) c *= s;
  return *this;
}

VectorField& VectorField::axpy(cplx s, const VectorField& o) {
  for (int k = 0; k < dim(); ++k) comps_[k].axpy(s, o.comps_[k]);
  return *this;
}

ScalarField dot_conj(const VectorField& u, const VectorField& v) {
  require_same_grid(u.grid(), v.grid());
  ScalarField out(u.grid());
  for (int k = 0; k < u.dim(); ++k) {
    const cplx* a = u[k].data();
    const cplx* b = v[k].data();
    cplx* o = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) o[i] += a[i] * std::conj(b[i]);
  }
  return out;
}

// ---------------------------------------------------------------------- State

State::State(VectorField u1, VectorField u2, VectorField u3) : u_{std::move(u1), std::move(u2), std::move(u3)} {
  require_same_grid(u_[0].grid(), u_[1].grid());
  require_same_grid(u_[0].grid(), u_[2].grid());
}

State& State::operator+=(const State& o) {
  for (int j = 0; j < 3; ++j) u_[j] += o.u_[j];
  return *this;
}

State& State::operator-=(const State& o) {
  for (int j = 0; j < 3; ++j) u_[j] -= o.u_[j];
  return *this;
}

State& State::operator*=(cplx s) {
  for (auto& u : u_) u *= s;
  return *this;
}

State& State::axpy(cplx s, const State& o) {
  for (int j = 0; j < 3; ++j) u_[j].axpy(s, o.u_[j]);
  return *this;
}

bool State::all_finite() const {
  bool ok = true;
  for_each_component([&](int, int, const ScalarField& f) { ok = ok && f.all_finite(); });
  return ok;
}

State operator+(State a, const State& b) { return a += b; }
State operator-(State a, const State& b) { return a -= b; }
State operator*(cplx s, State a) { return a *= s; }

}  // namespace dnls
