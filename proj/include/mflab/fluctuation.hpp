#pragma once

#include "mflab/hartree.hpp"
#include "mflab/observable.hpp"

namespace mflab {

/// Linearization field f at time s, constrained orthogonal to phi_s.
struct FluctuationField {
  Lattice lat;
  double s = 0.0;
  double t = 0.0;  // terminal time the field belongs to
  VecXc f;         // values
};

struct FluctuationOptions {
  bool include_k2 = true;     // disable the antilinear J K2 term (test hook)
  double growth_guard = 1e6;  // abort when ||f|| exceeds guard * terminal norm
};

/// Backward solve of i d/ds f = (hH(s) + K1(s) + J K2(s)) f from s = t to 0.
///
/// The generator is only real-linear (J is complex conjugation), so RK4 is
/// applied to the map f -> -i(hH f + K1 f + conj(K2 f)), which agrees with
/// integrating the doubled system in (Re f, Im f). Frames are snapped to
/// stored trajectory instants: macro-steps span two trajectory intervals so
/// RK4 midpoints land on stored instants; a single Heun step absorbs an odd
/// interval count. After each step f is re-projected orthogonal to phi_s and
/// the pre-projection drift is recorded.
struct BackwardResult {
  std::vector<double> s_grid;      // reached instants, descending from t to 0
  std::vector<double> f_norms;     // ||f_{s;t}|| at those instants
  std::vector<double> orth_drift;  // |<phi_s, f>| / ||f|| before re-projection
  VecXc f0;                        // f_{0;t} values
  double terminal_norm = 0.0;
  double alpha2() const;           // ||f_{0;t}||^2
  double max_drift() const;
};

/// f_{t;t} = q_t O phi_t = O phi_t - <phi_t, O phi_t> phi_t.
FluctuationField terminal_condition(const Observable& O, const HartreeFrame& frame_t);

BackwardResult solve_backward(const FluctuationField& fT, const HartreeTrajectory& traj,
                              const FluctuationOptions& opt = {});

/// Forward integration of the same equation from s = 0 to t (reversibility checks).
VecXc solve_forward(const VecXc& f0, const HartreeTrajectory& traj, double t,
                    const FluctuationOptions& opt = {});

/// alpha_t^2 = ||f_{0;t}||^2 for the terminal datum q_t O phi_t.
double variance_alpha2(const Observable& O, const HartreeTrajectory& traj, double t,
                       const FluctuationOptions& opt = {});

}  // namespace mflab
