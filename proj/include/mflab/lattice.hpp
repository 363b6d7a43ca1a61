#pragma once

#include <array>
#include <functional>

#include "mflab/common.hpp"

namespace mflab {

/// Periodic d-dimensional grid on [0,L)^d with M points per axis.
///
/// Fields are stored as flat complex vectors of length M^d, row-major over
/// axes. All inner products carry the quadrature weight (L/M)^d so that
/// discrete norms approximate continuum L^2 norms.
struct Lattice {
  int d = 1;
  double L = 1.0;
  int M = 2;

  int sites() const;
  double weight() const;   // (L/M)^d
  double spacing() const;  // L/M

  /// Fourier index along one axis for grid index j: n in [-floor(M/2), ceil(M/2)-1].
  int axis_freq(int j) const;
  /// |k|^2 of the flattened Fourier index (k = 2 pi n / L per axis).
  double momentum_sq(int flat) const;
  double nyquist_momentum() const;  // largest |k| along one axis

  std::array<double, 3> site_coords(int flat) const;  // x in [0,L)^d
  std::array<int, 3> site_multi_index(int flat) const;
  int flat_index(const std::array<int, 3>& idx) const;

  /// Minimal-image displacement coordinate in [-L/2, L/2).
  double min_image(double x) const;

  bool operator==(const Lattice& o) const { return d == o.d && L == o.L && M == o.M; }
};

Lattice make_lattice(int d, double L, int M);

// -- spectral transforms (FFTW behind a thread-local plan cache) ------------

/// Unnormalized forward DFT of a flat field.
VecXc fft_forward(const Lattice& lat, const VecXc& values);
/// Inverse DFT normalized by 1/M^d (fft_inverse(fft_forward(f)) == f).
VecXc fft_inverse(const Lattice& lat, const VecXc& freq);

// -- inner products and fields ----------------------------------------------

cdouble inner(const Lattice& lat, const VecXc& f, const VecXc& g);
double field_norm(const Lattice& lat, const VecXc& f);

/// Coefficients in the orthonormal site basis: c_j = f_j * sqrt(weight).
VecXc to_coefficients(const Lattice& lat, const VecXc& values);
VecXc to_values(const Lattice& lat, const VecXc& coeffs);

/// Spectral Laplacian: multiplier -|k|^2. Exact on band-limited fields.
VecXc laplacian(const Lattice& lat, const VecXc& f);

/// Squared Sobolev norm sum (1+|k|^2)^order |c_k|^2 over unitary Fourier coefficients.
double sobolev_norm_sq(const Lattice& lat, const VecXc& values, int order);

/// Circular convolution with quadrature weight: out_i = sum_j a_{i-j} b_j * w.
VecXc convolve(const Lattice& lat, const VecXc& a, const VecXc& b);

/// Unitary DFT matrix on coefficient vectors (direct formula; oracle-grade).
MatXc dft_matrix(const Lattice& lat);
/// Matrix of -Laplacian in the orthonormal site basis.
MatXc kinetic_matrix(const Lattice& lat);

// -- domain types ------------------------------------------------------------

/// Normalized complex field on a lattice; ||phi|| = 1 within 1e-12 after construction.
struct WaveFunction {
  Lattice lat;
  VecXc values;

  static WaveFunction normalized(const Lattice& lat, VecXc vals);
  VecXc coefficients() const { return to_coefficients(lat, values); }
  double norm() const { return field_norm(lat, values); }
};

/// Real, even pair potential sampled on minimal-image displacement vectors.
struct PairPotential {
  Lattice lat;
  VecXd values;
  double norm_l1 = 0.0;
  double norm_linf = 0.0;

  static PairPotential from_function(const Lattice& lat,
                                     const std::function<double(const std::array<double, 3>&)>& v);
  static PairPotential from_values(const Lattice& lat, VecXd vals);
  bool is_zero() const { return norm_linf == 0.0; }
  /// v(x_p - x_q) looked up by flat site indices.
  double pair_value(int p, int q) const;
};

/// Mean-field potential v * |phi|^2, checked real to 1e-12.
VecXd mean_field(const PairPotential& v, const WaveFunction& phi);

/// f - <phi, f> phi; orthogonal to phi within 1e-12.
VecXc project_orthogonal(const Lattice& lat, const VecXc& f, const VecXc& phi);

}  // namespace mflab
