#include "dnls/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

using GridKey = std::tuple<int, std::array<std::size_t, 3>, Vec3>;

GridKey key_of(const Grid& g) {
  return {g.dim(), {g.points(0), g.points(1), g.points(2)}, {g.extent(0), g.extent(1), g.extent(2)}};
}

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are made with FFTW_ESTIMATE so the chosen algorithm, and
// therefore every output bit, does not depend on timing measurements.
class PlanCache {
 public:
  fftw_plan get(const Grid& g, int sign) {
    std::lock_guard lock(mu_);
    auto key = std::make_tuple(g.dim(), std::array<std::size_t, 3>{g.points(0), g.points(1), g.points(2)}, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    int n[3];
    for (int k = 0; k < g.dim(); ++k) n[k] = static_cast<int>(g.points(k));
    std::vector<cplx> a(g.size()), b(g.size());
    fftw_plan p = fftw_plan_dft(g.dim(), n, reinterpret_cast<fftw_complex*>(a.data()),
                                reinterpret_cast<fftw_complex*>(b.data()), sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, std::array<std::size_t, 3>, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(const Grid& g, int sign, const cplx* in, cplx* out) {
  fftw_plan p = plan_cache().get(g, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)), reinterpret_cast<fftw_complex*>(out));
  const double s = 1.0 / std::sqrt(static_cast<double>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) out[i] *= s;
}

std::shared_ptr<const SpectralTables> build_tables(const Grid& g) {
  auto t = std::make_shared<SpectralTables>();
  const std::size_t N = g.size();
  t->xi2.assign(N, 0.0);
  t->nyquist.assign(N, 0);
  for (int k = 0; k < g.dim(); ++k) t->xi[k].resize(N);
  for (std::size_t f = 0; f < N; ++f) {
    const auto idx = g.unflatten(f);
    for (int k = 0; k < g.dim(); ++k) {
      const double xi = g.resolved_wavenumber(k, idx[k]);
      t->xi[k][f] = xi;
      t->xi2[f] += xi * xi;
      if (idx[k] == g.points(k) / 2) t->nyquist[f] = 1;
    }
  }
  return t;
}

// Per-mode factor for a shift by y: exp(-i xi.y), with the Nyquist mode
// shifted as the real cosine it represents.
cplx shift_factor(const Grid& g, const std::array<std::size_t, 3>& idx, const Vec3& y) {
  cplx f = 1.0;
  for (int k = 0; k < g.dim(); ++k) {
    const double phase = g.wavenumber(k, idx[k]) * y[k];
    if (idx[k] == g.points(k) / 2)
      f *= std::cos(phase);
    else
      f *= std::polar(1.0, -phase);
  }
  return f;
}

// Dirichlet-type interpolation weight of grid node x_m for evaluation point
// s = y - x_m on an axis with n nodes and period L.
double interp_weight(std::size_t n, double L, double s) {
  const double theta = 2.0 * std::numbers::pi * s / L;
  const double K = static_cast<double>(n) / 2.0 - 1.0;
  const double half = std::sin(0.5 * theta);
  double dirichlet;
  if (std::abs(half) < 1e-12) {
    dirichlet = 2.0 * K + 1.0;
  } else {
    dirichlet = std::sin((K + 0.5) * theta) / half;
  }
  return (dirichlet + std::cos(0.5 * static_cast<double>(n) * theta)) / static_cast<double>(n);
}

}  // namespace

const SpectralTables& spectral_tables(const Grid& g) {
  static std::mutex mu;
  static std::map<GridKey, std::shared_ptr<const SpectralTables>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[key_of(g)];
  if (!slot) slot = build_tables(g);
  return *slot;
}

void fft_forward(const Grid& g, const cplx* in, cplx* out) { execute(g, FFTW_FORWARD, in, out); }
void fft_inverse(const Grid& g, const cplx* in, cplx* out) { execute(g, FFTW_BACKWARD, in, out); }

ScalarField forward_transform(const ScalarField& f) {
  ScalarField out(f.grid());
  fft_forward(f.grid(), f.data(), out.data());
  return out;
}

ScalarField inverse_transform(const ScalarField& f_hat) {
  ScalarField out(f_hat.grid());
  fft_inverse(f_hat.grid(), f_hat.data(), out.data());
  return out;
}

ScalarField partial_derivative(const ScalarField& f, int axis) {
  const Grid& g = f.grid();
  if (axis < 0 || axis >= g.dim())
    throw AxisOutOfRange("axis " + std::to_string(axis) + " outside 0.." + std::to_string(g.dim() - 1));
  const auto& xi = spectral_tables(g).xi[axis];
  ScalarField hat = forward_transform(f);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= cplx(0.0, xi[i]);
  return inverse_transform(hat);
}

VectorField gradient(const ScalarField& f) {
  const Grid& g = f.grid();
  const auto& t = spectral_tables(g);
  ScalarField hat = forward_transform(f);
  std::vector<ScalarField> comps;
  ScalarField tmp(g);
  for (int k = 0; k < g.dim(); ++k) {
    for (std::size_t i = 0; i < hat.size(); ++i) tmp[i] = cplx(0.0, t.xi[k][i]) * hat[i];
    comps.push_back(inverse_transform(tmp));
  }
  return VectorField(std::move(comps));
}

ScalarField divergence(const VectorField& v) {
  const Grid& g = v.grid();
  const auto& t = spectral_tables(g);
  ScalarField acc(g), hat(g);
  for (int k = 0; k < v.dim(); ++k) {
    require_same_grid(g, v[k].grid());
    fft_forward(g, v[k].data(), hat.data());
    for (std::size_t i = 0; i < hat.size(); ++i) acc[i] += cplx(0.0, t.xi[k][i]) * hat[i];
  }
  return inverse_transform(acc);
}

ScalarField laplacian(const ScalarField& f) {
  const auto& xi2 = spectral_tables(f.grid()).xi2;
  ScalarField hat = forward_transform(f);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= -xi2[i];
  return inverse_transform(hat);
}

VectorField laplacian(const VectorField& v) {
  std::vector<ScalarField> comps;
  for (int k = 0; k < v.dim(); ++k) comps.push_back(laplacian(v[k]));
  return VectorField(std::move(comps));
}

std::vector<cplx> tabulate_multiplier(const Grid& g, const Multiplier& m) {
  const auto& t = spectral_tables(g);
  std::vector<cplx> sym(g.size());
  std::vector<double> xi(static_cast<std::size_t>(g.dim()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (int k = 0; k < g.dim(); ++k) xi[k] = t.xi[k][i];
    sym[i] = m(xi);
    if (!std::isfinite(sym[i].real()) || !std::isfinite(sym[i].imag()))
      throw NonFiniteMultiplier("multiplier is not finite at flat mode index " + std::to_string(i));
  }
  return sym;
}

ScalarField apply_symbol(const ScalarField& f, std::span<const cplx> symbol) {
  if (symbol.size() != f.size()) throw GridMismatch("symbol size does not match grid");
  ScalarField hat = forward_transform(f);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= symbol[i];
  return inverse_transform(hat);
}

ScalarField apply_multiplier(const ScalarField& f, const Multiplier& m) {
  return apply_symbol(f, tabulate_multiplier(f.grid(), m));
}

cplx inner_l2(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid());
  cplx s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * std::conj(g[i]);
  return s * f.grid().cell_volume();
}

cplx inner_l2(const VectorField& f, const VectorField& g) {
  cplx s = 0.0;
  for (int k = 0; k < f.dim(); ++k) s += inner_l2(f[k], g[k]);
  return s;
}

cplx inner_l2(const State& f, const State& g) {
  cplx s = 0.0;
  for (int j = 0; j < 3; ++j) s += inner_l2(f[j], g[j]);
  return s;
}

double norm_l2(const ScalarField& f) { return std::sqrt(inner_l2(f, f).real()); }
double norm_l2(const VectorField& f) { return std::sqrt(inner_l2(f, f).real()); }
double norm_l2(const State& U) { return std::sqrt(inner_l2(U, U).real()); }

double gradient_norm2(const ScalarField& f) {
  const auto& xi2 = spectral_tables(f.grid()).xi2;
  ScalarField hat = forward_transform(f);
  double s = 0.0;
  for (std::size_t i = 0; i < hat.size(); ++i) s += xi2[i] * std::norm(hat[i]);
  return s * f.grid().cell_volume();
}

double gradient_norm2(const State& U) {
  double s = 0.0;
  U.for_each_component([&](int, int, const ScalarField& f) { s += gradient_norm2(f); });
  return s;
}

double norm_h1(const State& U) {
  const double l2 = norm_l2(U);
  return std::sqrt(l2 * l2 + gradient_norm2(U));
}

cplx inner_h1(const State& f, const State& g) {
  require_same_grid(f.grid(), g.grid());
  const Grid& grid = f.grid();
  const auto& xi2 = spectral_tables(grid).xi2;
  ScalarField a(grid), b(grid);
  cplx s = 0.0;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < f[j].dim(); ++k) {
      fft_forward(grid, f[j][k].data(), a.data());
      fft_forward(grid, g[j][k].data(), b.data());
      for (std::size_t i = 0; i < a.size(); ++i) s += (1.0 + xi2[i]) * a[i] * std::conj(b[i]);
    }
  return s * grid.cell_volume();
}

void remove_nyquist(const Grid& g, cplx* f_hat) {
  const auto& nyq = spectral_tables(g).nyquist;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (nyq[i]) f_hat[i] = 0.0;
}

void remove_nyquist(State& U) {
  const Grid& g = U.grid();
  ScalarField hat(g);
  U.for_each_component([&](int, int, ScalarField& f) {
    fft_forward(g, f.data(), hat.data());
    remove_nyquist(g, hat.data());
    fft_inverse(g, hat.data(), f.data());
  });
}

void dealias_spectrum(const Grid& g, cplx* f_hat) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    for (int k = 0; k < g.dim(); ++k) {
      if (3 * std::abs(g.mode(k, idx[k])) > static_cast<long>(g.points(k))) {
        f_hat[i] = 0.0;
        break;
      }
    }
  }
}

ScalarField dealias(const ScalarField& f) {
  ScalarField hat = forward_transform(f);
  dealias_spectrum(f.grid(), hat.data());
  return inverse_transform(hat);
}

ScalarField translate(const ScalarField& f, const Vec3& y) {
  const Grid& g = f.grid();
  ScalarField hat = forward_transform(f);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= shift_factor(g, g.unflatten(i), y);
  return inverse_transform(hat);
}

State translate(const State& U, const Vec3& y) {
  State out(U);
  out.for_each_component([&](int j, int k, ScalarField& f) { f = translate(U[j][k], y); });
  return out;
}

ScalarField resample_dilated(const ScalarField& f, double lambda, double* lost_fraction) {
  const Grid& g = f.grid();
  const int d = g.dim();
  const double total = std::max(inner_l2(f, f).real(), 1e-300);

  double lost = 0.0;
  if (lambda > 1.0) {
    ScalarField hat = forward_transform(f);
    for (std::size_t i = 0; i < hat.size(); ++i) {
      const auto idx = g.unflatten(i);
      for (int k = 0; k < d; ++k) {
        const double limit = 0.5 * static_cast<double>(g.points(k)) / lambda;
        if (static_cast<double>(std::abs(g.mode(k, idx[k]))) > limit) {
          lost += std::norm(hat[i]);
          break;
        }
      }
    }
    lost *= g.cell_volume();
  } else if (lambda < 1.0) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto idx = g.unflatten(i);
      for (int k = 0; k < d; ++k) {
        if (std::abs(g.coordinate(k, idx[k])) >= 0.5 * lambda * g.extent(k)) {
          lost += std::norm(f[i]);
          break;
        }
      }
    }
    lost *= g.cell_volume();
  }
  if (lost_fraction) *lost_fraction = lost / total;

  // Separable evaluation: one dense interpolation matrix per axis.
  std::vector<cplx> cur(f.values().begin(), f.values().end());
  std::vector<cplx> next(cur.size());
  for (int axis = 0; axis < d; ++axis) {
    const std::size_t n = g.points(axis);
    const double L = g.extent(axis);
    std::vector<double> M(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = lambda * g.coordinate(axis, i);
      if (y < -0.5 * L || y >= 0.5 * L) continue;
      for (std::size_t m = 0; m < n; ++m) M[i * n + m] = interp_weight(n, L, y - g.coordinate(axis, m));
    }
    std::size_t stride = 1;
    for (int k = axis + 1; k < d; ++k) stride *= g.points(k);
    const std::size_t outer = g.size() / (n * stride);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t s = 0; s < stride; ++s) {
        const std::size_t base = o * n * stride + s;
        for (std::size_t i = 0; i < n; ++i) {
          cplx acc = 0.0;
          const double* row = &M[i * n];
          for (std::size_t m = 0; m < n; ++m) acc += row[m] * cur[base + m * stride];
          next[base + i * stride] = acc;
        }
      }
    std::swap(cur, next);
  }
  return ScalarField(g, std::move(cur));
}

}  // namespace dnls
