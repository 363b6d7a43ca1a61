#pragma once

#include "mflab/lattice.hpp"

namespace mflab {

/// Condensate trajectory from the nonlinear Hartree flow, stored at integrator
/// resolution. Immutable after construction; downstream consumers snap to
/// stored instants rather than interpolate.
struct HartreeTrajectory {
  Lattice lat;
  PairPotential v;
  double dt = 0.0;  // effective step (t / steps)
  std::vector<double> times;
  std::vector<VecXc> states;  // field values per instant
  std::vector<double> norms;
  std::vector<double> energies;
  std::vector<double> h4_norms;  // sqrt of H^4 Sobolev norm, diagnostic only

  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  /// Index of the stored instant nearest to s; throws if s is out of range.
  int index_at(double s) const;
  const VecXc& state_at(double s) const { return states[index_at(s)]; }
};

/// One trajectory instant with the mean-field kernels of the linearized flow.
///
/// K1 f = phi(x) Int v(x-y) conj(phi(y)) f(y) dy   (Hermitian)
/// K2 f = phi(x) Int v(x-y) phi(y) f(y) dy         (symmetric kernel)
/// mu   = 1/2 Int Int v(x-y) |phi(x)|^2 |phi(y)|^2
struct HartreeFrame {
  Lattice lat;
  double s = 0.0;
  VecXc phi;
  VecXd mean_field_values;
  double mu = 0.0;
  VecXc v_hat;  // cached DFT of the potential samples

  VecXc apply_hH(const VecXc& f) const;   // -Lap f + (v*|phi|^2) f
  VecXc apply_K1(const VecXc& f) const;
  VecXc apply_K2(const VecXc& f) const;
  VecXc apply_JK2(const VecXc& f) const;  // conj(K2 f)

  // Dense coefficient-space matrices; oracle/test use on small lattices.
  MatXc dense_hH() const;
  MatXc dense_K1() const;
  MatXc dense_K2() const;
};

/// Strang-splitting integration of i d/dt phi = -Lap phi + (v*|phi|^2) phi.
HartreeTrajectory hartree_evolve(const WaveFunction& phi0, const PairPotential& v, double t,
                                 double dt);

/// Int |grad phi|^2 + 1/2 Int Int v(x-y)|phi(x)|^2 |phi(y)|^2.
double hartree_energy(const WaveFunction& phi, const PairPotential& v);

HartreeFrame frame_at(const HartreeTrajectory& traj, double s);

}  // namespace mflab
