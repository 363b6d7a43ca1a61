#include <chrono>
#include <cmath>
#include <random>

#include "mflab/fock.hpp"

namespace mflab {

namespace {

MatXc comm(const MatXc& A, const MatXc& B) { return A * B - B * A; }

MatXc one_minus_np(const FockSpace& sp) {
  MatXc D = MatXc::Zero(sp.dim, sp.dim);
  for (int i = 0; i < sp.dim; ++i)
    D(i, i) = 1.0 - static_cast<double>(sp.total_of[i]) / sp.n_param;
  return D;
}

}  // namespace

std::vector<IdentityReport> verify_commutators(const FockSpace& sp, const VecXc& f, const VecXc& g,
                                               const MatXc& H, int reach) {
  if (sp.n_cut == sp.n_param) reach = 0;  // no truncation edge: identities exact everywhere
  const double invN = 1.0 / sp.n_param;
  MatXc bf = op_b(sp, f), bg = op_b(sp, g);
  MatXc bfd = op_bdag(sp, f), bgd = op_bdag(sp, g);
  MatXc np = number_plus(sp);
  MatXc one_np = one_minus_np(sp);
  const cdouble fg = f.dot(g);

  std::vector<IdentityReport> out;
  auto push = [&](const std::string& name, const MatXc& resid) {
    out.push_back({name, interior_residual(sp, resid, reach), 1e-10, true});
  };

  push("comm1.bb", comm(bf, bg));
  push("comm1.bdbd", comm(bfd, bgd));
  push("comm1.bbd", comm(bf, bgd) - (fg * one_np - invN * (op_adag(sp, g) * op_a(sp, f))));

  // [phi_+(h), i phi_-(g)] = -2 Re<h,g> (1 - N_+/N) + a*(g)a(h)/N + a*(h)a(g)/N
  MatXc pp_f = op_phi_plus(sp, f);
  MatXc ipm_g = cdouble(0, 1) * op_phi_minus(sp, g);
  MatXc rhs4 = -2.0 * fg.real() * one_np + invN * (op_adag(sp, g) * op_a(sp, f)) +
               invN * (op_adag(sp, f) * op_a(sp, g));
  push("comm4.pp_ipm", comm(pp_f, ipm_g) - rhs4);

  // [b(h), a*(g1)a(g2)] = <h,g1> b(g2) with h=f, g1=g, g2=f (reusing supplied vectors)
  MatXc ada = op_adag(sp, g) * op_a(sp, f);
  push("comm2.b_ada", comm(bf, ada) - f.dot(g) * op_b(sp, f));
  push("comm2.bd_ada", comm(bfd, ada) - (-(f.dot(f)) * op_bdag(sp, g)));

  MatXc ipm_f = cdouble(0, 1) * op_phi_minus(sp, f);
  push("comm3.pp_np", comm(pp_f, np) - ipm_f);
  push("comm3.ipm_np", comm(ipm_f, np) - op_phi_plus(sp, f));

  const VecXc Hf = H * f;
  push("comm3b.pp_dG", comm(pp_f, d_gamma(sp, H)) - cdouble(0, 1) * op_phi_minus(sp, Hf));
  push("comm3b.ipm_dG", comm(ipm_f, d_gamma(sp, H)) - op_phi_plus(sp, Hf));
  return out;
}

std::vector<IdentityReport> verify_lemma21(const FockSpace& sp, const VecXc& h, const VecXc& g,
                                           int n_max) {
  const double rN = std::sqrt(static_cast<double>(sp.n_param));
  MatXc X = rN * op_phi_plus(sp, h);
  MatXc bg = op_b(sp, g);
  std::vector<IdentityReport> out;
  MatXc cur = bg;
  const bool exact = sp.n_cut == sp.n_param;
  for (int k = 1; k <= 2 * n_max + 1; ++k) {
    cur = X * cur - cur * X;
    const int reach = exact ? 0 : std::max(k, 2);
    if (sp.n_cut - reach < 0) break;  // no interior block left at this order
    if (k % 2 == 1) {
      const int n = (k - 1) / 2;
      if (n > n_max) break;
      MatXc rhs = lemma_ad_odd(sp, h, g, n);
      out.push_back({"lemma21.odd.n" + std::to_string(n),
                     interior_residual(sp, cur - rhs, reach), 1e-9, true});
    } else {
      const int n = k / 2;
      MatXc rhs = lemma_ad_even(sp, h, g, n);
      out.push_back({"lemma21.even.n" + std::to_string(n),
                     interior_residual(sp, cur - rhs, reach), 1e-9, true});
    }
  }
  return out;
}

std::vector<IdentityReport> verify_field_conjugations(const FockSpace& sp, const VecXc& h,
                                                      const VecXc& g1, const VecXc& g2,
                                                      const MatXc& H) {
  const double rN = std::sqrt(static_cast<double>(sp.n_param));
  MatXc X = rN * op_phi_plus(sp, h);
  MatXc E = expm_dense(X);
  MatXc Einv = expm_dense(-X);
  const bool exact = sp.n_cut == sp.n_param;  // no truncation edge: asserted
  const int reach = exact ? 0 : 2;

  std::vector<IdentityReport> out;
  auto push = [&](const std::string& name, const MatXc& resid) {
    out.push_back({name, interior_residual(sp, resid, reach), 1e-8, exact});
  };

  push("prop22.conj_b", E * op_b(sp, g1) * Einv - closed_conj_b(sp, h, g1));

  // b_x version: run the same closed form over every elementary mode.
  double worst = 0.0;
  for (int m = 0; m < sp.modes; ++m) {
    VecXc em = VecXc::Zero(sp.modes);
    em[m] = 1.0;
    MatXc resid = E * op_b(sp, em) * Einv - closed_conj_b(sp, h, em);
    worst = std::max(worst, interior_residual(sp, resid, reach));
  }
  out.push_back({"bxexp.conj_bx", worst, 1e-8, exact});

  push("axay.conj_adag_a",
       E * (op_adag(sp, g1) * op_a(sp, g2)) * Einv - closed_conj_adag_a(sp, h, g1, g2));
  push("prop23.conj_dgamma", E * d_gamma(sp, H) * Einv - closed_conj_dgamma(sp, h, H));
  return out;
}

std::vector<IdentityReport> verify_number_conjugations(const FockSpace& sp, const VecXc& h,
                                                       double s) {
  MatXc Eminus = MatXc::Zero(sp.dim, sp.dim);
  MatXc Eplus = MatXc::Zero(sp.dim, sp.dim);
  for (int i = 0; i < sp.dim; ++i) {
    Eminus(i, i) = std::exp(-s * sp.total_of[i]);
    Eplus(i, i) = std::exp(s * sp.total_of[i]);
  }
  MatXc b = op_b(sp, h), bd = op_bdag(sp, h);
  MatXc pp = op_phi_plus(sp, h), pm = op_phi_minus(sp, h);
  MatXc ipm = cdouble(0, 1) * pm;

  std::vector<IdentityReport> out;
  auto push = [&](const std::string& name, const MatXc& resid) {
    out.push_back({name, resid.cwiseAbs().maxCoeff(), 1e-12, true});
  };
  push("prop24.b", Eminus * b * Eplus - std::exp(s) * b);
  push("prop24.bdag", Eminus * bd * Eplus - std::exp(-s) * bd);
  push("prop24.phip", Eminus * pp * Eplus - (std::cosh(s) * pp + std::sinh(s) * ipm));
  push("prop24.iphim", Eminus * ipm * Eplus - (std::cosh(s) * ipm + std::sinh(s) * pp));
  return out;
}

IdentityReport verify_time_derivative(const FockSpace& sp, const VecXc& h_minus, const VecXc& h0,
                                      const VecXc& h_plus, const VecXc& hdot, double delta) {
  if (!(delta > 0.0)) throw ConfigError("verify_time_derivative: delta must be positive");
  const double rN = std::sqrt(static_cast<double>(sp.n_param));
  MatXc Ep = expm_dense(rN * op_phi_plus(sp, h_plus));
  MatXc Em = expm_dense(rN * op_phi_plus(sp, h_minus));
  MatXc E0inv = expm_dense(-rN * op_phi_plus(sp, h0));
  MatXc fd = ((Ep - Em) / (2.0 * delta)) * E0inv;
  MatXc rhs = closed_time_derivative(sp, h0, hdot);
  const bool exact = sp.n_cut == sp.n_param;
  return {"prop25.fd_delta" + fmt17(delta), interior_residual(sp, fd - rhs, exact ? 0 : 2), 1e-6,
          exact};
}

namespace {

VecXc random_mode_vector(std::mt19937_64& rng, int modes, double scale) {
  std::normal_distribution<double> dist(0.0, 1.0);
  VecXc v(modes);
  for (int i = 0; i < modes; ++i) v[i] = cdouble(dist(rng), dist(rng));
  v *= scale / v.norm();
  return v;
}

MatXc random_hermitian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  MatXc A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = cdouble(dist(rng), dist(rng));
  return 0.5 * (A + A.adjoint());
}

}  // namespace

FockVerifyReport run_fock_verify(const FockVerifyConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  FockSpace sp = make_fock_space(cfg.modes, cfg.n_param, cfg.n_cut);
  std::mt19937_64 rng(cfg.seed);

  VecXc f = random_mode_vector(rng, cfg.modes, 1.0);
  VecXc g = random_mode_vector(rng, cfg.modes, 1.0);
  VecXc h = random_mode_vector(rng, cfg.modes, cfg.h_scale);
  VecXc g2 = random_mode_vector(rng, cfg.modes, 1.0);
  MatXc H = random_hermitian(rng, cfg.modes);

  FockVerifyReport rep;
  rep.cfg = cfg;
  auto append = [&](std::vector<IdentityReport> v) {
    for (auto& e : v) rep.entries.push_back(std::move(e));
  };

  // Adjointness / Hermiticity of the building blocks.
  {
    auto push = [&](const std::string& name, double r) {
      rep.entries.push_back({name, r, 1e-12, true});
    };
    push("adjoint.a_adag", (op_a(sp, f).adjoint() - op_adag(sp, f)).cwiseAbs().maxCoeff());
    push("adjoint.b_bdag", (op_b(sp, f).adjoint() - op_bdag(sp, f)).cwiseAbs().maxCoeff());
    MatXc pp = op_phi_plus(sp, f);
    MatXc ipm = cdouble(0, 1) * op_phi_minus(sp, f);
    push("hermitian.phip", (pp - pp.adjoint()).cwiseAbs().maxCoeff());
    push("hermitian.iphim", (ipm - ipm.adjoint()).cwiseAbs().maxCoeff());
    MatXc dG = d_gamma(sp, H);
    push("hermitian.dgamma", (dG - dG.adjoint()).cwiseAbs().maxCoeff());
    push("vacuum.b_annihilates", (op_b(sp, f) * fock_vacuum(sp)).cwiseAbs().maxCoeff());
    push("dgamma.identity_is_nplus",
         (d_gamma(sp, MatXc::Identity(sp.modes, sp.modes)) - number_plus(sp))
             .cwiseAbs()
             .maxCoeff());
  }

  append(verify_commutators(sp, f, g, H));
  {
    // Clamp the nesting depth so an interior block survives when n_cut < N.
    int n_max = cfg.lemma_n_max;
    if (sp.n_cut < sp.n_param) n_max = std::min(n_max, std::max(0, (sp.n_cut - 1) / 2));
    if (n_max >= 0) append(verify_lemma21(sp, h, g, n_max));
  }
  append(verify_field_conjugations(sp, h, f, g2, H));
  append(verify_number_conjugations(sp, h, std::log(2.0)));

  {
    // Rotating path h_t = e^{it} h at t = 0: hdot = i h.
    const double delta = 1e-4;
    VecXc hp = std::polar(1.0, delta) * h;
    VecXc hm = std::polar(1.0, -delta) * h;
    VecXc hdot = cdouble(0, 1) * h;
    rep.entries.push_back(verify_time_derivative(sp, hm, h, hp, hdot, delta));
  }

  // Norm bounds (bd-bb*): slack of the two operator inequalities on random vectors.
  {
    std::normal_distribution<double> dist(0.0, 1.0);
    MatXc b = op_b(sp, h), bd = op_bdag(sp, h);
    double slack_b = 0.0, slack_bd = 0.0;
    for (int rep_i = 0; rep_i < 25; ++rep_i) {
      VecXc xi(sp.dim);
      for (int i = 0; i < sp.dim; ++i) xi[i] = cdouble(dist(rng), dist(rng));
      xi /= xi.norm();
      double nb = (b * xi).norm();
      double nbd = (bd * xi).norm();
      double wn = 0.0, wn1 = 0.0;
      for (int i = 0; i < sp.dim; ++i) {
        wn += sp.total_of[i] * std::norm(xi[i]);
        wn1 += (sp.total_of[i] + 1.0) * std::norm(xi[i]);
      }
      slack_b = std::max(slack_b, nb - h.norm() * std::sqrt(wn));
      slack_bd = std::max(slack_bd, nbd - h.norm() * std::sqrt(wn1));
    }
    rep.entries.push_back({"bound.b_number", std::max(0.0, slack_b), 1e-10, true});
    rep.entries.push_back({"bound.bdag_number", std::max(0.0, slack_bd), 1e-10, true});
  }

  // Bound (bd-dG): min eigenvalue of ||A|| N_+ +- dGamma(A) >= -1e-10.
  {
    Eigen::SelfAdjointEigenSolver<MatXc> esA(H, Eigen::EigenvaluesOnly);
    const double anorm = esA.eigenvalues().cwiseAbs().maxCoeff();
    MatXc dG = d_gamma(sp, H);
    MatXc np = number_plus(sp);
    double worst = 0.0;
    for (double sign : {1.0, -1.0}) {
      Eigen::SelfAdjointEigenSolver<MatXc> es(anorm * np + sign * dG, Eigen::EigenvaluesOnly);
      worst = std::min(worst, es.eigenvalues().minCoeff());
    }
    rep.entries.push_back({"bound.dgamma_number", std::max(0.0, -worst), 1e-10, true});
  }

  // Factorial norm identity and the binomial vacuum MGF.
  {
    double worst = 0.0;
    for (int n = 0; n <= std::min(sp.n_param, sp.n_cut); ++n) {
      const double lhs = bstar_power_norm_sq(sp, h, n);
      const double rhs = bstar_power_norm_formula(sp.n_param, n, h.norm());
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    rep.entries.push_back({"lemma33.bstar_norms", worst, 1e-10, true});
    if (sp.n_cut == sp.n_param) {
      auto [lhs, rhs] = vacuum_mgf_identity(sp, h, 0.1);
      rep.entries.push_back({"lemma33.vacuum_mgf", std::abs(lhs - rhs) / rhs, 1e-10, true});
    }
  }

  // Truncation-edge deviation of [b, b*] measured over all columns.
  {
    MatXc resid = (op_b(sp, f) * op_bdag(sp, g) - op_bdag(sp, g) * op_b(sp, f)) -
                  (f.dot(g) * one_minus_np(sp) -
                   (1.0 / sp.n_param) * (op_adag(sp, g) * op_a(sp, f)));
    rep.edge_deviation = resid.cwiseAbs().maxCoeff();
  }

  for (const auto& e : rep.entries) {
    if (!e.asserted) continue;
    rep.all_pass = rep.all_pass && e.pass();
    rep.worst_ratio = std::max(rep.worst_ratio, e.residual / e.tolerance);
  }
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace mflab
