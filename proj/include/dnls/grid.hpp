#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dnls {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

/// Uniform periodic grid on the box [-extent/2, extent/2)^d, row-major with
/// axis 0 varying slowest.
class Grid {
 public:
  Grid(int dim, std::array<std::size_t, 3> n, Vec3 extent);
  static Grid cube(int dim, std::size_t n, double extent);

  int dim() const { return dim_; }
  std::size_t points(int axis) const { return n_[axis]; }
  double extent(int axis) const { return extent_[axis]; }
  double spacing(int axis) const { return extent_[axis] / static_cast<double>(n_[axis]); }
  double min_spacing() const;
  std::size_t size() const { return size_; }
  double cell_volume() const;

  double coordinate(int axis, std::size_t i) const {
    return -0.5 * extent_[axis] + static_cast<double>(i) * spacing(axis);
  }
  /// Signed mode number in [-n/2, n/2) for storage index i (FFT order).
  long mode(int axis, std::size_t i) const;
  /// 2*pi*m/extent for the mode stored at index i.
  double wavenumber(int axis, std::size_t i) const;
  /// Wavenumber used by derivative operators: zero for the Nyquist mode.
  double resolved_wavenumber(int axis, std::size_t i) const;

  /// Multi-index of a flat offset (unused axes are 0).
  std::array<std::size_t, 3> unflatten(std::size_t flat) const;

  bool operator==(const Grid& o) const { return dim_ == o.dim_ && n_ == o.n_ && extent_ == o.extent_; }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  int dim_;
  std::array<std::size_t, 3> n_;
  Vec3 extent_;
  std::size_t size_;
};

class ScalarField {
 public:
  explicit ScalarField(const Grid& g) : grid_(g), values_(g.size()) {}
  ScalarField(const Grid& g, std::vector<cplx> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  cplx* data() { return values_.data(); }
  const cplx* data() const { return values_.data(); }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(cplx s);
  /// this += s * o
  ScalarField& axpy(cplx s, const ScalarField& o);

  bool all_finite() const;

 private:
  Grid grid_;
  std::vector<cplx> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(cplx s, ScalarField a);
ScalarField conj(const ScalarField& f);

/// One u_j: exactly d components on a shared grid.
class VectorField {
 public:
  explicit VectorField(const Grid& g);
  explicit VectorField(std::vector<ScalarField> components);

  const Grid& grid() const { return comps_.front().grid(); }
  int dim() const { return static_cast<int>(comps_.size()); }
  ScalarField& operator[](int k) { return comps_[k]; }
  const ScalarField& operator[](int k) const { return comps_[k]; }

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(cplx s);
  VectorField& axpy(cplx s, const VectorField& o);

 private:
  std::vector<ScalarField> comps_;
};

/// Pointwise u.conj(v) summed over vector components.
ScalarField dot_conj(const VectorField& u, const VectorField& v);

/// U = (u1, u2, u3), indexed 0..2.
class State {
 public:
  explicit State(const Grid& g) : u_{VectorField(g), VectorField(g), VectorField(g)} {}
  State(VectorField u1, VectorField u2, VectorField u3);

  const Grid& grid() const { return u_[0].grid(); }
  VectorField& operator[](int j) { return u_[j]; }
  const VectorField& operator[](int j) const { return u_[j]; }

  State& operator+=(const State& o);
  State& operator-=(const State& o);
  State& operator*=(cplx s);
  State& axpy(cplx s, const State& o);

  bool all_finite() const;

  /// Visit every scalar component in storage order u1^(1..d), u2^(1..d), u3^(1..d).
  template <class F>
  void for_each_component(F&& f) {
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < u_[j].dim(); ++k) f(j, k, u_[j][k]);
  }
  template <class F>
  void for_each_component(F&& f) const {
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < u_[j].dim(); ++k) f(j, k, u_[j][k]);
  }

 private:
  std::array<VectorField, 3> u_;
};

State operator+(State a, const State& b);
State operator-(State a, const State& b);
State operator*(cplx s, State a);

void require_same_grid(const Grid& a, const Grid& b);

}  // namespace dnls
