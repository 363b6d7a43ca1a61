#include "mflab/lattice.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace mflab {

int Lattice::sites() const {
  int n = 1;
  for (int i = 0; i < d; ++i) n *= M;
  return n;
}

double Lattice::weight() const { return std::pow(L / M, d); }

double Lattice::spacing() const { return L / M; }

int Lattice::axis_freq(int j) const { return j < (M + 1) / 2 ? j : j - M; }

double Lattice::momentum_sq(int flat) const {
  const auto idx = site_multi_index(flat);
  double k2 = 0.0;
  for (int a = 0; a < d; ++a) {
    const double k = 2.0 * kPi * axis_freq(idx[a]) / L;
    k2 += k * k;
  }
  return k2;
}

double Lattice::nyquist_momentum() const {
  return 2.0 * kPi * (M / 2) / L;
}

std::array<int, 3> Lattice::site_multi_index(int flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = d - 1; a >= 0; --a) {
    idx[a] = flat % M;
    flat /= M;
  }
  return idx;
}

int Lattice::flat_index(const std::array<int, 3>& idx) const {
  int flat = 0;
  for (int a = 0; a < d; ++a) flat = flat * M + ((idx[a] % M) + M) % M;
  return flat;
}

std::array<double, 3> Lattice::site_coords(int flat) const {
  const auto idx = site_multi_index(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a) x[a] = idx[a] * spacing();
  return x;
}

double Lattice::min_image(double x) const {
  double y = std::fmod(x, L);
  if (y < -L / 2) y += L;
  if (y >= L / 2) y -= L;
  return y;
}

Lattice make_lattice(int d, double L, int M) {
  if (d < 1 || d > 3) throw ConfigError("lattice dimension must be 1, 2 or 3");
  if (M < 2) throw ConfigError("lattice must have M >= 2 points per axis");
  if (!(L > 0.0)) throw ConfigError("lattice box length must be positive");
  return Lattice{d, L, M};
}

namespace {

// FFTW plans are cached per (d, M) and per thread; the FFTW planner itself is
// global state, so creation/destruction is serialized by a process-wide mutex.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanSet {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_complex* buf = nullptr;
  int n = 0;

  PlanSet(int d, int M) {
    n = 1;
    int dims[3] = {M, M, M};
    for (int i = 0; i < d; ++i) n *= M;
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf = fftw_alloc_complex(n);
    fwd = fftw_plan_dft(d, dims, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft(d, dims, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~PlanSet() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }
  PlanSet(const PlanSet&) = delete;
  PlanSet& operator=(const PlanSet&) = delete;
};

PlanSet& plans_for(const Lattice& lat) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<PlanSet>> cache;
  auto key = std::make_pair(lat.d, lat.M);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<PlanSet>(lat.d, lat.M)).first;
  }
  return *it->second;
}

VecXc run_plan(const Lattice& lat, const VecXc& in, bool forward) {
  PlanSet& ps = plans_for(lat);
  if (in.size() != ps.n) throw ConfigError("field size does not match lattice");
  auto* buf = reinterpret_cast<cdouble*>(ps.buf);
  for (int i = 0; i < ps.n; ++i) buf[i] = in[i];
  fftw_execute(forward ? ps.fwd : ps.bwd);
  VecXc out(ps.n);
  for (int i = 0; i < ps.n; ++i) out[i] = buf[i];
  return out;
}

}  // namespace

VecXc fft_forward(const Lattice& lat, const VecXc& values) { return run_plan(lat, values, true); }

VecXc fft_inverse(const Lattice& lat, const VecXc& freq) {
  VecXc out = run_plan(lat, freq, false);
  out /= static_cast<double>(lat.sites());
  return out;
}

cdouble inner(const Lattice& lat, const VecXc& f, const VecXc& g) {
  if (f.size() != lat.sites() || g.size() != lat.sites())
    throw ConfigError("inner: field size does not match lattice");
  return f.dot(g) * lat.weight();
}

double field_norm(const Lattice& lat, const VecXc& f) {
  return std::sqrt(f.squaredNorm() * lat.weight());
}

VecXc to_coefficients(const Lattice& lat, const VecXc& values) {
  return values * std::sqrt(lat.weight());
}

VecXc to_values(const Lattice& lat, const VecXc& coeffs) {
  return coeffs / std::sqrt(lat.weight());
}

VecXc laplacian(const Lattice& lat, const VecXc& f) {
  VecXc freq = fft_forward(lat, f);
  for (int i = 0; i < freq.size(); ++i) freq[i] *= -lat.momentum_sq(i);
  return fft_inverse(lat, freq);
}

double sobolev_norm_sq(const Lattice& lat, const VecXc& values, int order) {
  VecXc freq = fft_forward(lat, values);
  const double unit = lat.weight() / lat.sites();  // |c_hat|^2 = |freq|^2 * w / M^d
  double s = 0.0;
  for (int i = 0; i < freq.size(); ++i) {
    s += std::pow(1.0 + lat.momentum_sq(i), order) * std::norm(freq[i]) * unit;
  }
  return s;
}

VecXc convolve(const Lattice& lat, const VecXc& a, const VecXc& b) {
  VecXc fa = fft_forward(lat, a);
  VecXc fb = fft_forward(lat, b);
  fa = fa.cwiseProduct(fb);
  return fft_inverse(lat, fa) * lat.weight();
}

MatXc dft_matrix(const Lattice& lat) {
  const int n = lat.sites();
  MatXc F(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int r = 0; r < n; ++r) {
    const auto kr = lat.site_multi_index(r);
    for (int c = 0; c < n; ++c) {
      const auto jc = lat.site_multi_index(c);
      double phase = 0.0;
      for (int a = 0; a < lat.d; ++a) phase += 2.0 * kPi * kr[a] * jc[a] / lat.M;
      F(r, c) = std::polar(scale, -phase);
    }
  }
  return F;
}

MatXc kinetic_matrix(const Lattice& lat) {
  const int n = lat.sites();
  MatXc F = dft_matrix(lat);
  VecXd k2(n);
  for (int i = 0; i < n; ++i) k2[i] = lat.momentum_sq(i);
  return F.adjoint() * k2.asDiagonal() * F;
}

WaveFunction WaveFunction::normalized(const Lattice& lat, VecXc vals) {
  if (vals.size() != lat.sites()) throw ConfigError("wavefunction size does not match lattice");
  if (!vals.allFinite()) throw NumericError("wavefunction has non-finite entries");
  const double n = field_norm(lat, vals);
  if (!(n > 0.0)) throw NumericError("cannot normalize a zero wavefunction");
  vals /= n;
  return WaveFunction{lat, std::move(vals)};
}

PairPotential PairPotential::from_function(
    const Lattice& lat, const std::function<double(const std::array<double, 3>&)>& v) {
  const int n = lat.sites();
  VecXd vals(n);
  for (int i = 0; i < n; ++i) {
    auto x = lat.site_coords(i);
    for (int a = 0; a < lat.d; ++a) x[a] = lat.min_image(x[a]);
    vals[i] = v(x);
  }
  return from_values(lat, std::move(vals));
}

PairPotential PairPotential::from_values(const Lattice& lat, VecXd vals) {
  if (vals.size() != lat.sites()) throw ConfigError("potential size does not match lattice");
  if (!vals.allFinite()) throw NumericError("potential has non-finite entries");
  // Enforce evenness exactly: v(x) = v(-x) on the displacement grid.
  PairPotential p;
  p.lat = lat;
  p.values = vals;
  for (int i = 0; i < vals.size(); ++i) {
    auto idx = lat.site_multi_index(i);
    std::array<int, 3> neg{0, 0, 0};
    for (int a = 0; a < lat.d; ++a) neg[a] = (lat.M - idx[a]) % lat.M;
    const int j = lat.flat_index(neg);
    p.values[i] = 0.5 * (vals[i] + vals[j]);
  }
  p.norm_l1 = p.values.cwiseAbs().sum() * lat.weight();
  p.norm_linf = p.values.size() ? p.values.cwiseAbs().maxCoeff() : 0.0;
  return p;
}

double PairPotential::pair_value(int p, int q) const {
  const auto ip = lat.site_multi_index(p);
  const auto iq = lat.site_multi_index(q);
  std::array<int, 3> diff{0, 0, 0};
  for (int a = 0; a < lat.d; ++a) diff[a] = ip[a] - iq[a];
  return values[lat.flat_index(diff)];
}

VecXd mean_field(const PairPotential& v, const WaveFunction& phi) {
  if (!(v.lat == phi.lat)) throw ConfigError("mean_field: potential and field on different lattices");
  const Lattice& lat = v.lat;
  VecXc density = phi.values.cwiseAbs2().cast<cdouble>();
  VecXc conv = convolve(lat, v.values.cast<cdouble>(), density);
  const double scale = std::max(1.0, conv.cwiseAbs().maxCoeff());
  if (conv.imag().cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw NumericError("mean_field produced a non-real field");
  return conv.real();
}

VecXc project_orthogonal(const Lattice& lat, const VecXc& f, const VecXc& phi) {
  return f - inner(lat, phi, f) * phi;
}

}  // namespace mflab
