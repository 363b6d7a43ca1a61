#include "mflab/hartree.hpp"

#include <cmath>

namespace mflab {

int HartreeTrajectory::index_at(double s) const {
  if (times.empty()) throw ConfigError("trajectory is empty");
  const double eps = 1e-9 * (1.0 + horizon());
  if (s < times.front() - eps || s > times.back() + eps)
    throw ConfigError("requested time is outside the trajectory range");
  if (dt <= 0.0 || times.size() == 1) return 0;
  int k = static_cast<int>(std::llround(s / dt));
  k = std::max(0, std::min<int>(k, static_cast<int>(times.size()) - 1));
  return k;
}

namespace {

double energy_from_values(const Lattice& lat, const VecXc& values, const PairPotential& v) {
  VecXc freq = fft_forward(lat, values);
  const double unit = lat.weight() / lat.sites();
  double kinetic = 0.0;
  for (int i = 0; i < freq.size(); ++i) kinetic += lat.momentum_sq(i) * std::norm(freq[i]) * unit;
  double potential = 0.0;
  if (!v.is_zero()) {
    VecXc density = values.cwiseAbs2().cast<cdouble>();
    VecXc conv = convolve(lat, v.values.cast<cdouble>(), density);
    potential = 0.5 * (conv.real().cwiseProduct(values.cwiseAbs2()).sum()) * lat.weight();
  }
  return kinetic + potential;
}

}  // namespace

double hartree_energy(const WaveFunction& phi, const PairPotential& v) {
  if (!(phi.lat == v.lat)) throw ConfigError("hartree_energy: lattice mismatch");
  return energy_from_values(phi.lat, phi.values, v);
}

HartreeTrajectory hartree_evolve(const WaveFunction& phi0, const PairPotential& v, double t,
                                 double dt) {
  if (!(phi0.lat == v.lat)) throw ConfigError("hartree_evolve: lattice mismatch");
  if (!(dt > 0.0)) throw ConfigError("hartree_evolve: dt must be positive");
  if (t < 0.0) throw ConfigError("hartree_evolve: t must be nonnegative");
  const Lattice& lat = phi0.lat;

  const int steps = t == 0.0 ? 0 : std::max(1, static_cast<int>(std::ceil(t / dt - 1e-9)));
  const double h = steps == 0 ? dt : t / steps;

  HartreeTrajectory traj;
  traj.lat = lat;
  traj.v = v;
  traj.dt = h;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);

  // Kinetic half-step phase in Fourier space.
  VecXc half_phase(lat.sites());
  for (int i = 0; i < half_phase.size(); ++i)
    half_phase[i] = std::polar(1.0, -lat.momentum_sq(i) * h / 2.0);

  auto record = [&](double s, const VecXc& values) {
    traj.times.push_back(s);
    traj.states.push_back(values);
    traj.norms.push_back(field_norm(lat, values));
    traj.energies.push_back(energy_from_values(lat, values, v));
    traj.h4_norms.push_back(std::sqrt(sobolev_norm_sq(lat, values, 4)));
  };

  VecXc psi = phi0.values;
  record(0.0, psi);

  for (int k = 0; k < steps; ++k) {
    VecXc freq = fft_forward(lat, psi);
    freq = freq.cwiseProduct(half_phase);
    psi = fft_inverse(lat, freq);

    if (!v.is_zero()) {
      WaveFunction tmp{lat, psi};
      VecXd mf = mean_field(v, tmp);
      for (int i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -mf[i] * h);
    }

    freq = fft_forward(lat, psi);
    freq = freq.cwiseProduct(half_phase);
    psi = fft_inverse(lat, freq);

    if (!psi.allFinite())
      throw NumericError("hartree_evolve: non-finite field at t = " + fmt17(traj.times.back()) +
                         " (last stable instant)");
    record((k + 1) * h, psi);
  }
  return traj;
}

VecXc HartreeFrame::apply_hH(const VecXc& f) const {
  VecXc out = -laplacian(lat, f);
  out += mean_field_values.cast<cdouble>().cwiseProduct(f);
  return out;
}

namespace {

// phi(x) * Int v(x-y) g(y) f(y) dy with cached DFT of v.
VecXc kernel_apply(const Lattice& lat, const VecXc& v_hat, const VecXc& phi, const VecXc& g,
                   const VecXc& f) {
  VecXc prod = g.cwiseProduct(f);
  VecXc conv = fft_inverse(lat, v_hat.cwiseProduct(fft_forward(lat, prod))) * lat.weight();
  return phi.cwiseProduct(conv);
}

}  // namespace

VecXc HartreeFrame::apply_K1(const VecXc& f) const {
  return kernel_apply(lat, v_hat, phi, phi.conjugate(), f);
}

VecXc HartreeFrame::apply_K2(const VecXc& f) const {
  return kernel_apply(lat, v_hat, phi, phi, f);
}

VecXc HartreeFrame::apply_JK2(const VecXc& f) const { return apply_K2(f).conjugate(); }

namespace {

MatXc dense_from_apply(const Lattice& lat, const std::function<VecXc(const VecXc&)>& apply) {
  const int n = lat.sites();
  MatXc A(n, n);
  const double sw = std::sqrt(lat.weight());
  for (int j = 0; j < n; ++j) {
    VecXc e = VecXc::Zero(n);
    e[j] = 1.0 / sw;  // coefficient basis vector as values
    A.col(j) = apply(e) * sw;
  }
  return A;
}

}  // namespace

MatXc HartreeFrame::dense_hH() const {
  return dense_from_apply(lat, [this](const VecXc& f) { return apply_hH(f); });
}

MatXc HartreeFrame::dense_K1() const {
  return dense_from_apply(lat, [this](const VecXc& f) { return apply_K1(f); });
}

MatXc HartreeFrame::dense_K2() const {
  return dense_from_apply(lat, [this](const VecXc& f) { return apply_K2(f); });
}

HartreeFrame frame_at(const HartreeTrajectory& traj, double s) {
  const int k = traj.index_at(s);
  HartreeFrame fr;
  fr.lat = traj.lat;
  fr.s = traj.times[k];
  fr.phi = traj.states[k];
  WaveFunction tmp{traj.lat, fr.phi};
  if (traj.v.is_zero()) {
    fr.mean_field_values = VecXd::Zero(traj.lat.sites());
    fr.mu = 0.0;
  } else {
    fr.mean_field_values = mean_field(traj.v, tmp);
    fr.mu = 0.5 * fr.mean_field_values.cwiseProduct(fr.phi.cwiseAbs2()).sum() * traj.lat.weight();
  }
  fr.v_hat = fft_forward(traj.lat, traj.v.values.cast<cdouble>());
  return fr;
}

}  // namespace mflab
