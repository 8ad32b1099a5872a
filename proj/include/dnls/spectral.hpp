#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dnls/grid.hpp"

namespace dnls {

// Transforms are unitary: forward and inverse both carry 1/sqrt(N), so
// sum |f|^2 == sum |f_hat|^2. Spectral fields reuse ScalarField with values
// stored in FFT order (mode 0 first, negative modes in the upper half).

ScalarField forward_transform(const ScalarField& f);
ScalarField inverse_transform(const ScalarField& f_hat);

/// Raw transforms for hot loops; `in` and `out` must not alias.
void fft_forward(const Grid& g, const cplx* in, cplx* out);
void fft_inverse(const Grid& g, const cplx* in, cplx* out);

/// Per-grid wavenumber tables, shared and immutable once built.
struct SpectralTables {
  /// resolved wavenumber of axis k at each flat index (Nyquist zeroed)
  std::array<std::vector<double>, 3> xi;
  /// |xi|^2 built from the resolved wavenumbers, so div(grad) == laplacian
  std::vector<double> xi2;
  /// 1 where some axis sits on its Nyquist index
  std::vector<unsigned char> nyquist;
};
const SpectralTables& spectral_tables(const Grid& g);

ScalarField partial_derivative(const ScalarField& f, int axis);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
ScalarField laplacian(const ScalarField& f);
VectorField laplacian(const VectorField& v);

/// Fourier multiplier m(xi). The wavenumber vector handed to m has length d
/// and uses the resolved convention (Nyquist component zero), which keeps
/// multipliers consistent with the derivative operators.
using Multiplier = std::function<cplx(std::span<const double>)>;

/// Tabulated multiplier; throws NonFiniteMultiplier if any value is not finite.
std::vector<cplx> tabulate_multiplier(const Grid& g, const Multiplier& m);
ScalarField apply_multiplier(const ScalarField& f, const Multiplier& m);
ScalarField apply_symbol(const ScalarField& f, std::span<const cplx> symbol);

/// Rectangle-rule inner products, conjugate-linear in the second slot.
cplx inner_l2(const ScalarField& f, const ScalarField& g);
cplx inner_l2(const VectorField& f, const VectorField& g);
cplx inner_l2(const State& f, const State& g);
double norm_l2(const ScalarField& f);
double norm_l2(const VectorField& f);
double norm_l2(const State& U);
/// sum over axes of ||d_k f||^2, evaluated through Parseval.
double gradient_norm2(const ScalarField& f);
double gradient_norm2(const State& U);
double norm_h1(const State& U);
/// H^1 inner product <f,g>_{L2} + <grad f, grad g>_{L2}.
cplx inner_h1(const State& f, const State& g);

/// Zero every mode that sits on a Nyquist index of some axis. The derivative
/// convention gives those modes no kinetic cost, so iterative solvers and the
/// time stepper keep them out of the state.
void remove_nyquist(const Grid& g, cplx* f_hat);
void remove_nyquist(State& U);

/// 2/3-rule truncation: zero every mode with |m_k| > n_k/3 on some axis.
ScalarField dealias(const ScalarField& f);
void dealias_spectrum(const Grid& g, cplx* f_hat);

/// f(x - y) by Fourier phase shift.
ScalarField translate(const ScalarField& f, const Vec3& y);
State translate(const State& U, const Vec3& y);

/// Evaluate the trigonometric interpolant of f at lambda * x for every grid
/// point x, treating the field as zero outside the box. `lost_fraction`
/// receives the fraction of spectral and spatial L^2 mass that the map cannot
/// represent (modes pushed past Nyquist, or mass outside the sampled region).
ScalarField resample_dilated(const ScalarField& f, double lambda, double* lost_fraction);

}  // namespace dnls
