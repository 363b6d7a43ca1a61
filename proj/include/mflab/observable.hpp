#pragma once

#include "mflab/lattice.hpp"

namespace mflab {

/// Bounded self-adjoint one-particle observable on a lattice.
///
/// Internally carries the Hermitian matrix in the orthonormal site basis
/// (coefficient vectors c = values * sqrt(weight)); multiplication operators
/// keep their diagonal alongside for exact application.
struct Observable {
  enum class Kind { Multiplication, FiniteRank, Dense };

  Kind kind = Kind::Dense;
  Lattice lat;
  VecXd mult_values;  // only for Kind::Multiplication
  MatXc matrix;       // coefficient-space Hermitian matrix
  double op_norm = 0.0;

  static Observable multiplication(const Lattice& lat, VecXd func_values);
  static Observable projector(const Lattice& lat, const VecXc& g_values);
  static Observable dense(const Lattice& lat, MatXc coeff_matrix);

  /// Apply to a field given by values; returns values.
  VecXc apply_values(const VecXc& phi_values) const;
  /// <phi, O phi> (real for Hermitian O; real part returned).
  double expectation(const WaveFunction& phi) const;
};

}  // namespace mflab
