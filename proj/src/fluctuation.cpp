#include "mflab/fluctuation.hpp"

#include <cmath>
#include <memory>

namespace mflab {

double BackwardResult::alpha2() const { return f0.size() ? f_norms.back() * f_norms.back() : 0.0; }

double BackwardResult::max_drift() const {
  double m = 0.0;
  for (double d : orth_drift) m = std::max(m, d);
  return m;
}

FluctuationField terminal_condition(const Observable& O, const HartreeFrame& frame_t) {
  if (!(O.lat == frame_t.lat)) throw ConfigError("terminal_condition: lattice mismatch");
  VecXc of = O.apply_values(frame_t.phi);
  VecXc f = project_orthogonal(frame_t.lat, of, frame_t.phi);
  return FluctuationField{frame_t.lat, frame_t.s, frame_t.s, std::move(f)};
}

namespace {

struct Stepper {
  const HartreeTrajectory& traj;
  FluctuationOptions opt;
  std::vector<std::unique_ptr<HartreeFrame>> frames;

  explicit Stepper(const HartreeTrajectory& tr, const FluctuationOptions& o)
      : traj(tr), opt(o), frames(tr.times.size()) {}

  const HartreeFrame& frame(int k) {
    if (!frames[k]) frames[k] = std::make_unique<HartreeFrame>(frame_at(traj, traj.times[k]));
    return *frames[k];
  }

  VecXc rhs(int k, const VecXc& u) {
    const HartreeFrame& fr = frame(k);
    VecXc g = fr.apply_hH(u);
    if (!traj.v.is_zero()) {
      g += fr.apply_K1(u);
      if (opt.include_k2) g += fr.apply_JK2(u);
    }
    return cdouble(0.0, -1.0) * g;
  }

  // One RK4 macro-step from instant k to k + 2*dir (dir = -1 backward, +1 forward).
  VecXc rk4(int k, int dir, const VecXc& u) {
    const double h = dir * 2.0 * traj.dt;
    VecXc k1 = rhs(k, u);
    VecXc k2 = rhs(k + dir, u + (h / 2.0) * k1);
    VecXc k3 = rhs(k + dir, u + (h / 2.0) * k2);
    VecXc k4 = rhs(k + 2 * dir, u + h * k3);
    return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // Heun step over a single trajectory interval (odd interval count).
  VecXc heun(int k, int dir, const VecXc& u) {
    const double h = dir * traj.dt;
    VecXc k1 = rhs(k, u);
    VecXc k2 = rhs(k + dir, u + h * k1);
    return u + (h / 2.0) * (k1 + k2);
  }
};

}  // namespace

BackwardResult solve_backward(const FluctuationField& fT, const HartreeTrajectory& traj,
                              const FluctuationOptions& opt) {
  if (!(fT.lat == traj.lat)) throw ConfigError("solve_backward: lattice mismatch");
  const int K = traj.index_at(fT.t);
  Stepper st(traj, opt);

  BackwardResult res;
  res.terminal_norm = field_norm(traj.lat, fT.f);
  VecXc u = fT.f;

  auto record = [&](int k) {
    res.s_grid.push_back(traj.times[k]);
    res.f_norms.push_back(field_norm(traj.lat, u));
    if (!(res.f_norms.back() <= opt.growth_guard * std::max(res.terminal_norm, 1e-300)))
      throw NumericError("solve_backward: norm growth guard tripped at s = " +
                         fmt17(traj.times[k]));
  };
  auto reproject = [&](int k) {
    const VecXc& phi = traj.states[k];
    const double nf = field_norm(traj.lat, u);
    const double ip = std::abs(inner(traj.lat, phi, u));
    res.orth_drift.push_back(nf > 0.0 ? ip / nf : 0.0);
    u = project_orthogonal(traj.lat, u, phi);
  };

  reproject(K);  // terminal datum is projected by construction; drift ~ 0
  record(K);
  int k = K;
  if (k % 2 == 1) {
    u = st.heun(k, -1, u);
    --k;
    reproject(k);
    record(k);
  }
  while (k >= 2) {
    u = st.rk4(k, -1, u);
    k -= 2;
    reproject(k);
    record(k);
  }
  res.f0 = u;
  return res;
}

VecXc solve_forward(const VecXc& f0, const HartreeTrajectory& traj, double t,
                    const FluctuationOptions& opt) {
  const int K = traj.index_at(t);
  Stepper st(traj, opt);
  VecXc u = f0;
  int k = 0;
  while (k + 2 <= K) {
    u = st.rk4(k, +1, u);
    k += 2;
    u = project_orthogonal(traj.lat, u, traj.states[k]);
  }
  if (k < K) {
    u = st.heun(k, +1, u);
    ++k;
    u = project_orthogonal(traj.lat, u, traj.states[k]);
  }
  return u;
}

double variance_alpha2(const Observable& O, const HartreeTrajectory& traj, double t,
                       const FluctuationOptions& opt) {
  HartreeFrame fr = frame_at(traj, t);
  FluctuationField fT = terminal_condition(O, fr);
  BackwardResult res = solve_backward(fT, traj, opt);
  return res.alpha2();
}

}  // namespace mflab
