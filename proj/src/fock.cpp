#include "mflab/fock.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace mflab {

FockSpace make_fock_space(int modes, int n_param, int n_cut, int dim_cap) {
  if (modes < 1) throw ConfigError("fock space needs at least one mode");
  if (n_param < 1) throw ConfigError("fock space particle parameter N must be >= 1");
  if (n_cut < 0) throw ConfigError("fock space cutoff must be nonnegative");
  if (n_cut > n_param)
    throw ConfigError("fock space requires n_cut <= N (weight sqrt(1 - n/N) must stay real)");

  FockSpace sp;
  sp.modes = modes;
  sp.n_param = n_param;
  sp.n_cut = n_cut;
  int dim = 0;
  for (int n = 0; n <= n_cut; ++n) {
    sp.offsets.push_back(dim);
    sp.sectors.push_back(make_sector_basis(modes, n));
    dim += sp.sectors.back().dim();
    if (dim > dim_cap) throw CapError("fock space dimension exceeds cap");
  }
  sp.dim = dim;
  sp.total_of.resize(dim);
  for (int n = 0; n <= n_cut; ++n)
    for (int i = 0; i < sp.sectors[n].dim(); ++i) sp.total_of[sp.offsets[n] + i] = n;

  // Elementary annihilators a_i: sector n -> n-1 with amplitude sqrt(n_i).
  sp.annihilators.assign(modes, MatXc::Zero(dim, dim));
  std::vector<int> occ;
  for (int n = 1; n <= n_cut; ++n) {
    const SectorBasis& from = sp.sectors[n];
    const SectorBasis& to = sp.sectors[n - 1];
    for (int i = 0; i < from.dim(); ++i) {
      const auto& tup = from.tuples[i];
      for (int m = 0; m < modes; ++m) {
        if (tup[m] == 0) continue;
        occ = tup;
        occ[m] -= 1;
        const int j = to.find(occ);
        sp.annihilators[m](sp.offsets[n - 1] + j, sp.offsets[n] + i) =
            std::sqrt(static_cast<double>(tup[m]));
      }
    }
  }
  return sp;
}

VecXc fock_vacuum(const FockSpace& sp) {
  VecXc v = VecXc::Zero(sp.dim);
  v[0] = 1.0;
  return v;
}

MatXc op_a(const FockSpace& sp, const VecXc& f) {
  if (f.size() != sp.modes) throw ConfigError("op_a: mode vector size mismatch");
  MatXc A = MatXc::Zero(sp.dim, sp.dim);
  for (int m = 0; m < sp.modes; ++m)
    if (f[m] != cdouble(0.0)) A += std::conj(f[m]) * sp.annihilators[m];
  return A;
}

MatXc op_adag(const FockSpace& sp, const VecXc& f) { return op_a(sp, f).adjoint(); }

MatXc sqrt_weight(const FockSpace& sp) {
  MatXc S = MatXc::Zero(sp.dim, sp.dim);
  for (int i = 0; i < sp.dim; ++i)
    S(i, i) = std::sqrt(1.0 - static_cast<double>(sp.total_of[i]) / sp.n_param);
  return S;
}

MatXc op_b(const FockSpace& sp, const VecXc& f) { return sqrt_weight(sp) * op_a(sp, f); }

MatXc op_bdag(const FockSpace& sp, const VecXc& f) { return op_adag(sp, f) * sqrt_weight(sp); }

MatXc op_phi_plus(const FockSpace& sp, const VecXc& f) { return op_b(sp, f) + op_bdag(sp, f); }

MatXc op_phi_minus(const FockSpace& sp, const VecXc& f) {
  return cdouble(0.0, -1.0) * (op_b(sp, f) - op_bdag(sp, f));
}

MatXc number_plus(const FockSpace& sp) {
  MatXc N = MatXc::Zero(sp.dim, sp.dim);
  for (int i = 0; i < sp.dim; ++i) N(i, i) = static_cast<double>(sp.total_of[i]);
  return N;
}

MatXc d_gamma(const FockSpace& sp, const MatXc& A, bool require_hermitian) {
  if (A.rows() != sp.modes || A.cols() != sp.modes)
    throw ConfigError("d_gamma: mode matrix size mismatch");
  if (require_hermitian) {
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw ConfigError("d_gamma: matrix is not Hermitian");
  }
  MatXc G = MatXc::Zero(sp.dim, sp.dim);
  for (int n = 0; n <= sp.n_cut; ++n) {
    const int off = sp.offsets[n];
    MatXc block = MatXc(one_body_in_sector(sp.sectors[n], A));
    G.block(off, off, block.rows(), block.cols()) = block;
  }
  return G;
}

MatXc interior_projector(const FockSpace& sp, int reach) {
  MatXc P = MatXc::Zero(sp.dim, sp.dim);
  for (int i = 0; i < sp.dim; ++i)
    if (sp.total_of[i] <= sp.n_cut - reach) P(i, i) = 1.0;
  return P;
}

double interior_residual(const FockSpace& sp, const MatXc& X, int reach) {
  double m = 0.0;
  for (int c = 0; c < sp.dim; ++c) {
    if (sp.total_of[c] > sp.n_cut - reach) continue;
    m = std::max(m, X.col(c).cwiseAbs().maxCoeff());
  }
  return m;
}

MatXc ad_power(const MatXc& X, const MatXc& Y, int n) {
  if (n < 0) throw ConfigError("ad_power: order must be nonnegative");
  MatXc out = Y;
  for (int i = 0; i < n; ++i) out = X * out - out * X;
  return out;
}

MatXc expm_dense(const MatXc& A) { return A.exp(); }

MatXc expm_hermitian(const MatXc& H, cdouble scale) {
  Eigen::SelfAdjointEigenSolver<MatXc> es(H);
  VecXc d(es.eigenvalues().size());
  for (int i = 0; i < d.size(); ++i) d[i] = std::exp(scale * es.eigenvalues()[i]);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

// -- closed forms --------------------------------------------------------------

namespace {

cdouble cdot(const VecXc& f, const VecXc& g) { return f.dot(g); }  // antilinear in f

MatXc one_minus_nplus_over_n(const FockSpace& sp) {
  MatXc D = MatXc::Zero(sp.dim, sp.dim);
  for (int i = 0; i < sp.dim; ++i)
    D(i, i) = 1.0 - static_cast<double>(sp.total_of[i]) / sp.n_param;
  return D;
}

}  // namespace

MatXc lemma_ad_odd(const FockSpace& sp, const VecXc& h, const VecXc& g, int n) {
  const double rN = std::sqrt(static_cast<double>(sp.n_param));
  const double h2 = h.squaredNorm();
  const cdouble gh = cdot(g, h);
  const double p2n = std::pow(2.0, 2 * n);
  MatXc out = -p2n * rN * std::pow(h2, n) * gh * one_minus_nplus_over_n(sp);
  if (n >= 1)
    out += ((p2n - 1.0) / rN) * std::pow(h2, n - 1) * gh * (op_adag(sp, h) * op_a(sp, h));
  out += (std::pow(h2, n) / rN) * (op_adag(sp, h) * op_a(sp, g));
  return out;
}

MatXc lemma_ad_even(const FockSpace& sp, const VecXc& h, const VecXc& g, int n) {
  const double h2 = h.squaredNorm();
  const cdouble gh = cdot(g, h);
  const double c = std::pow(2.0, 2 * n - 1) - 1.0;
  MatXc iphi_minus = cdouble(0.0, 1.0) * op_phi_minus(sp, h);
  return c * std::pow(h2, n - 1) * gh * iphi_minus + std::pow(h2, n) * op_b(sp, g) -
         std::pow(h2, n - 1) * gh * op_bdag(sp, h);
}

MatXc closed_conj_b(const FockSpace& sp, const VecXc& h, const VecXc& g) {
  const double rN = std::sqrt(static_cast<double>(sp.n_param));
  const double hn = h.norm();
  if (hn == 0.0) return op_b(sp, g);
  const double h2 = hn * hn;
  const double gam = std::cosh(hn);
  const double sig = std::sinh(hn);
  const cdouble gh = cdot(g, h);
  MatXc iphi_minus = cdouble(0.0, 1.0) * op_phi_minus(sp, h);
  MatXc out = gam * op_b(sp, g);
  out += gam * (gam - 1.0) / h2 * gh * iphi_minus;
  out -= (gam - 1.0) / h2 * gh * op_bdag(sp, h);
  out -= rN * gam * sig / hn * gh * one_minus_nplus_over_n(sp);
  out += (sig / hn) * ((gam - 1.0) / h2) / rN * gh * (op_adag(sp, h) * op_a(sp, h));
  out += (sig / hn) / rN * (op_adag(sp, h) * op_a(sp, g));
  return out;
}

MatXc closed_conj_adag_a(const FockSpace& sp, const VecXc& h, const VecXc& g1, const VecXc& g2) {
  const double rN = std::sqrt(static_cast<double>(sp.n_param));
  const double hn = h.norm();
  if (hn == 0.0) return op_adag(sp, g1) * op_a(sp, g2);
  const double h2 = hn * hn;
  const double gam = std::cosh(hn);
  const double sig = std::sinh(hn);
  const cdouble hg1 = cdot(h, g1);   // <h, g1>
  const cdouble g2h = cdot(g2, h);   // <g2, h>
  MatXc iphi_minus = cdouble(0.0, 1.0) * op_phi_minus(sp, h);
  MatXc out = op_adag(sp, g1) * op_a(sp, g2);
  out += rN * sig / hn * (hg1 * op_b(sp, g2) - g2h * op_bdag(sp, g1));
  out -= sp.n_param * sig * sig / h2 * hg1 * g2h * one_minus_nplus_over_n(sp);
  out += (gam - 1.0) / h2 *
         (hg1 * (op_adag(sp, h) * op_a(sp, g2)) + g2h * (op_adag(sp, g1) * op_a(sp, h)));
  out += rN * sig / hn * (gam - 1.0) / h2 * hg1 * g2h * iphi_minus;
  out += std::pow((gam - 1.0) / h2, 2) * hg1 * g2h * (op_adag(sp, h) * op_a(sp, h));
  return out;
}

MatXc closed_conj_dgamma(const FockSpace& sp, const VecXc& h, const MatXc& H) {
  const double rN = std::sqrt(static_cast<double>(sp.n_param));
  const double hn = h.norm();
  const double h2 = hn * hn;
  const double gam = std::cosh(hn);
  const double sig = std::sinh(hn);
  const VecXc Hh = H * h;
  const cdouble hHh = cdot(h, Hh);
  MatXc iphi_minus_h = cdouble(0.0, 1.0) * op_phi_minus(sp, h);
  MatXc out = d_gamma(sp, H);
  out += rN * sig / hn * (cdouble(0.0, 1.0) * op_phi_minus(sp, Hh));
  out -= sp.n_param * sig * sig / h2 * hHh * one_minus_nplus_over_n(sp);
  out += (gam - 1.0) / h2 *
         (op_adag(sp, h) * op_a(sp, Hh) + op_adag(sp, Hh) * op_a(sp, h));
  out += rN * sig / hn * (gam - 1.0) / h2 * hHh * iphi_minus_h;
  out += std::pow((gam - 1.0) / h2, 2) * hHh * (op_adag(sp, h) * op_a(sp, h));
  return out;
}

MatXc closed_time_derivative(const FockSpace& sp, const VecXc& h, const VecXc& hdot) {
  const double rN = std::sqrt(static_cast<double>(sp.n_param));
  const double hn = h.norm();
  const double h2 = hn * hn;
  const double gam = std::cosh(hn);
  const double sig = std::sinh(hn);
  const cdouble dh = cdot(hdot, h);  // <d/dt h, h>
  const double re = dh.real();
  const double im = dh.imag();
  MatXc out = rN * sig / hn * op_phi_plus(sp, hdot);
  out -= rN * (sig / hn) * ((gam - 1.0) / h2) * im * op_phi_minus(sp, h);
  out -= rN * (sig - hn) / (h2 * hn) * re * op_phi_plus(sp, h);
  out -= cdouble(0.0, 1.0) * static_cast<double>(sp.n_param) * sig * sig / h2 * im *
         one_minus_nplus_over_n(sp);
  out += cdouble(0.0, 1.0) * std::pow((gam - 1.0) / h2, 2) * im *
         (op_adag(sp, h) * op_a(sp, h));
  out += (gam - 1.0) / h2 *
         (op_adag(sp, h) * op_a(sp, hdot) - op_adag(sp, hdot) * op_a(sp, h));
  return out;
}

double bstar_power_norm_sq(const FockSpace& sp, const VecXc& h, int n) {
  if (n > sp.n_cut) throw ConfigError("bstar_power_norm_sq: n exceeds the cutoff");
  VecXc v = fock_vacuum(sp);
  MatXc B = op_bdag(sp, h);
  for (int i = 0; i < n; ++i) v = B * v;
  return v.squaredNorm();
}

double bstar_power_norm_formula(int n_param, int n, double h_norm) {
  // (N-1)! / (N^{n-1} (N-n)!) * n! * ||h||^{2n} = prod_{j=1}^{n-1} (N-j)/N * n! ||h||^{2n}
  double prefix = 1.0;
  for (int j = 1; j <= n - 1; ++j) prefix *= static_cast<double>(n_param - j) / n_param;
  double fact = 1.0;
  for (int j = 2; j <= n; ++j) fact *= j;
  return prefix * fact * std::pow(h_norm * h_norm, n);
}

std::pair<double, double> vacuum_mgf_identity(const FockSpace& sp, const VecXc& h,
                                              double lambda_kappa) {
  if (sp.n_cut != sp.n_param)
    throw ConfigError("vacuum_mgf_identity requires n_cut == N");
  const double rN = std::sqrt(static_cast<double>(sp.n_param));
  VecXc u = expm_dense(rN * op_bdag(sp, h)) * fock_vacuum(sp);
  double lhs = 0.0;
  for (int i = 0; i < sp.dim; ++i)
    lhs += std::exp(lambda_kappa * sp.total_of[i]) * std::norm(u[i]);
  const double rhs =
      std::pow(1.0 + h.squaredNorm() * std::exp(lambda_kappa), sp.n_param);
  return {lhs, rhs};
}

}  // namespace mflab
