#include "mflab/nbody.hpp"

#include <cmath>

namespace mflab {

NBodySpace make_nbody_space(const Lattice& lat, int n_particles, int dim_cap) {
  if (n_particles < 1) throw ConfigError("nbody space needs at least one particle");
  const int ms = lat.sites();
  if (ms > 16 || n_particles > 15)
    throw CapError("nbody space supports at most 16 sites and 15 particles");
  const std::uint64_t dim = binomial(ms + n_particles - 1, n_particles);
  if (dim > static_cast<std::uint64_t>(dim_cap))
    throw CapError("nbody dimension " + std::to_string(dim) + " exceeds cap " +
                   std::to_string(dim_cap));
  NBodySpace sp;
  sp.lat = lat;
  sp.n_particles = n_particles;
  sp.basis = make_sector_basis(ms, n_particles);
  sp.dim = sp.basis.dim();
  return sp;
}

SpMatXc nbody_one_body(const NBodySpace& sp, const MatXc& A) {
  return one_body_in_sector(sp.basis, A);
}

SpMatXc nbody_hamiltonian(const NBodySpace& sp, const PairPotential& v) {
  if (!(sp.lat == v.lat)) throw ConfigError("nbody_hamiltonian: lattice mismatch");
  const int ms = sp.lat.sites();
  MatXc T = kinetic_matrix(sp.lat);
  SpMatXc H = nbody_one_body(sp, T);

  // Interaction is diagonal in the occupation basis:
  // (1/2N) sum_pq v_pq (n_p n_q - delta_pq n_p).
  std::vector<Eigen::Triplet<cdouble>> trip;
  for (int i = 0; i < sp.dim; ++i) {
    const auto& n = sp.basis.tuples[i];
    double u = 0.0;
    for (int p = 0; p < ms; ++p) {
      if (n[p] == 0) continue;
      for (int q = 0; q < ms; ++q) {
        if (n[q] == 0) continue;
        u += v.pair_value(p, q) * (n[p] * n[q] - (p == q ? n[p] : 0));
      }
    }
    if (u != 0.0) trip.emplace_back(i, i, u / (2.0 * sp.n_particles));
  }
  SpMatXc U(sp.dim, sp.dim);
  U.setFromTriplets(trip.begin(), trip.end());
  return H + U;
}

VecXc product_state(const NBodySpace& sp, const WaveFunction& phi) {
  if (!(sp.lat == phi.lat)) throw ConfigError("product_state: lattice mismatch");
  const VecXc c = phi.coefficients();
  const int ms = sp.lat.sites();
  VecXc psi(sp.dim);
  for (int i = 0; i < sp.dim; ++i) {
    const auto& n = sp.basis.tuples[i];
    double multinomial = 1.0;
    int placed = 0;
    for (int p = 0; p < ms; ++p) {
      for (int j = 1; j <= n[p]; ++j) {
        ++placed;
        multinomial *= static_cast<double>(placed) / j;
      }
    }
    cdouble amp = std::sqrt(multinomial);
    for (int p = 0; p < ms; ++p)
      for (int j = 0; j < n[p]; ++j) amp *= c[p];
    psi[i] = amp;
  }
  return psi;
}

VecXc evolve_dense(const SpMatXc& H, const VecXc& psi0, double t) {
  MatXc Hd = MatXc(H);
  Eigen::SelfAdjointEigenSolver<MatXc> es(Hd);
  VecXc phase(es.eigenvalues().size());
  for (int i = 0; i < phase.size(); ++i)
    phase[i] = std::polar(1.0, -es.eigenvalues()[i] * t);
  return es.eigenvectors() * phase.asDiagonal() * (es.eigenvectors().adjoint() * psi0);
}

namespace {

// One Lanczos step: psi <- exp(-i dt H) psi with full reorthogonalization.
VecXc krylov_step(const SpMatXc& H, const VecXc& psi, double dt, int m) {
  const double beta0 = psi.norm();
  if (beta0 == 0.0) return psi;
  const int dim = static_cast<int>(psi.size());
  m = std::min(m, dim);

  MatXc V(dim, m);
  VecXd alpha = VecXd::Zero(m), beta = VecXd::Zero(m);
  V.col(0) = psi / beta0;
  int k = m;
  for (int j = 0; j < m; ++j) {
    VecXc w = H * V.col(j);
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    alpha[j] = V.col(j).dot(w).real();
    w -= alpha[j] * V.col(j);
    // Two passes of reorthogonalization keep the small basis numerically clean.
    for (int pass = 0; pass < 2; ++pass)
      w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w);
    if (j + 1 < m) {
      beta[j] = w.norm();
      if (beta[j] < 1e-13 * std::max(1.0, std::abs(alpha[j]))) {
        k = j + 1;  // happy breakdown: the Krylov space is invariant
        break;
      }
      V.col(j + 1) = w / beta[j];
    }
  }

  MatXd T = MatXd::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < k) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<MatXd> es(T);
  VecXc small(k);
  for (int j = 0; j < k; ++j) small[j] = std::polar(1.0, -es.eigenvalues()[j] * dt);
  VecXd e1w = es.eigenvectors().row(0);
  VecXc y = es.eigenvectors().cast<cdouble>() * small.cwiseProduct(e1w.cast<cdouble>());
  return beta0 * (V.leftCols(k) * y);
}

}  // namespace

VecXc evolve_krylov(const SpMatXc& H, const VecXc& psi0, double t, double dt, int krylov_dim) {
  if (!(dt > 0.0)) throw ConfigError("evolve_krylov: dt must be positive");
  const int steps = t == 0.0 ? 0 : std::max(1, static_cast<int>(std::ceil(std::abs(t) / dt - 1e-9)));
  const double h = steps == 0 ? 0.0 : t / steps;
  VecXc psi = psi0;
  for (int s = 0; s < steps; ++s) {
    psi = krylov_step(H, psi, h, krylov_dim);
    if (!psi.allFinite()) throw NumericError("evolve_krylov: non-finite state");
  }
  return psi;
}

VecXc nbody_evolve(const NBodySpace& sp, const SpMatXc& H, const VecXc& psi0, double t,
                   const EvolveOptions& opt) {
  if (t == 0.0) return psi0;
  if (sp.dim <= opt.dense_cap) return evolve_dense(H, psi0, t);
  return evolve_krylov(H, psi0, t, opt.dt, opt.krylov_dim);
}

VecXc rotate_state(const NBodySpace& sp, const MatXc& V, const VecXc& psi) {
  const int ms = sp.lat.sites();
  if (V.rows() != ms || V.cols() != ms) throw ConfigError("rotate_state: matrix size mismatch");
  const int N = sp.n_particles;

  std::vector<SectorBasis> ladders;
  ladders.reserve(N + 1);
  for (int k = 0; k <= N; ++k)
    ladders.push_back(k == N ? sp.basis : make_sector_basis(ms, k));

  VecXc out = VecXc::Zero(sp.dim);
  for (int i = 0; i < sp.dim; ++i) {
    if (psi[i] == cdouble(0.0)) continue;
    const auto& n = sp.basis.tuples[i];
    // Column |n> is prod_q adag(V col q)^{n_q} / sqrt(prod n_q!) applied to vacuum.
    VecXc cur(1);
    cur[0] = 1.0;
    int level = 0;
    double norm_fac = 1.0;
    for (int q = 0; q < ms; ++q) {
      for (int j = 1; j <= n[q]; ++j) {
        cur = apply_creation(ladders[level], ladders[level + 1], V.col(q), cur);
        ++level;
        norm_fac *= j;
      }
    }
    out += (psi[i] / std::sqrt(norm_fac)) * cur;
  }
  return out;
}

DGammaMeasure dgamma_measure(const NBodySpace& sp, const Observable& O, const VecXc& psi) {
  Eigen::SelfAdjointEigenSolver<MatXc> es(O.matrix);
  // Old site mode q in the eigenmode basis: U^dag e_q.
  VecXc rotated = rotate_state(sp, es.eigenvectors().adjoint(), psi);
  DGammaMeasure m;
  m.value.resize(sp.dim);
  m.prob.resize(sp.dim);
  for (int i = 0; i < sp.dim; ++i) {
    const auto& n = sp.basis.tuples[i];
    double val = 0.0;
    for (int k = 0; k < sp.lat.sites(); ++k) val += n[k] * es.eigenvalues()[k];
    m.value[i] = val;
    m.prob[i] = std::norm(rotated[i]);
  }
  m.total = kahan_sum(m.prob);
  return m;
}

double mgf_from_measure(const DGammaMeasure& m, double lambda, int n_particles, double center) {
  std::vector<double> terms(m.value.size());
  for (std::size_t i = 0; i < m.value.size(); ++i)
    terms[i] = m.prob[i] * std::exp(lambda * (m.value[i] - n_particles * center));
  return kahan_sum(terms) / m.total;
}

double nbody_mgf(const NBodySpace& sp, const Observable& O, const VecXc& psi, double lambda,
                 double center) {
  return mgf_from_measure(dgamma_measure(sp, O, psi), lambda, sp.n_particles, center);
}

double tail_from_measure(const DGammaMeasure& m, double x, int n_particles, double center) {
  std::vector<double> terms;
  for (std::size_t i = 0; i < m.value.size(); ++i)
    if (m.value[i] / n_particles - center > x) terms.push_back(m.prob[i]);
  return kahan_sum(terms) / m.total;
}

double tail_probability(const NBodySpace& sp, const Observable& O, const VecXc& psi, double x,
                        double center) {
  return tail_from_measure(dgamma_measure(sp, O, psi), x, sp.n_particles, center);
}

double nbody_variance(const NBodySpace& sp, const Observable& O, const VecXc& psi) {
  SpMatXc G = nbody_one_body(sp, O.matrix);
  VecXc gpsi = G * psi;
  const double n2 = psi.squaredNorm();
  const double mean = psi.dot(gpsi).real() / n2;
  const double second = gpsi.squaredNorm() / n2;
  return second - mean * mean;
}

MatXc reduced_density(const NBodySpace& sp, const VecXc& psi) {
  const int ms = sp.lat.sites();
  MatXc rho = MatXc::Zero(ms, ms);
  std::vector<int> occ;
  // rho_pq = <psi, adag_q a_p psi> / N
  for (int i = 0; i < sp.dim; ++i) {
    if (psi[i] == cdouble(0.0)) continue;
    const auto& n = sp.basis.tuples[i];
    for (int p = 0; p < ms; ++p) {
      if (n[p] == 0) continue;
      for (int q = 0; q < ms; ++q) {
        if (q == p) {
          rho(p, p) += std::norm(psi[i]) * static_cast<double>(n[p]);
          continue;
        }
        occ = n;
        occ[p] -= 1;
        occ[q] += 1;
        const int j = sp.basis.find(occ);
        const double amp = std::sqrt(static_cast<double>(n[p]) * occ[q]);
        rho(p, q) += std::conj(psi[j]) * psi[i] * amp;
      }
    }
  }
  rho /= static_cast<double>(sp.n_particles) * psi.squaredNorm();
  return rho;
}

MatXc orthonormal_completion(const VecXc& c) {
  const int n = static_cast<int>(c.size());
  MatXc W(n, n);
  W.col(0) = c / c.norm();
  int filled = 1;
  for (int j = 0; j < n && filled < n; ++j) {
    VecXc cand = VecXc::Zero(n);
    cand[j] = 1.0;
    // Modified Gram-Schmidt with a second pass.
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < filled; ++k) cand -= W.col(k).dot(cand) * W.col(k);
    const double nn = cand.norm();
    if (nn > 1e-8) W.col(filled++) = cand / nn;
  }
  if (filled != n) throw NumericError("orthonormal_completion failed");
  return W;
}

ExcisionResult excision(const NBodySpace& sp, const VecXc& psi, const WaveFunction& phi) {
  if (!(sp.lat == phi.lat)) throw ConfigError("excision: lattice mismatch");
  const int ms = sp.lat.sites();
  const int N = sp.n_particles;
  ExcisionResult exc;
  exc.W = orthonormal_completion(phi.coefficients());
  VecXc rotated = rotate_state(sp, exc.W.adjoint(), psi);

  exc.excited_sectors.reserve(N + 1);
  for (int j = 0; j <= N; ++j) exc.excited_sectors.push_back(make_sector_basis(ms - 1, j));
  exc.layers.resize(N + 1);
  exc.layer_norms_sq.assign(N + 1, 0.0);
  for (int j = 0; j <= N; ++j) exc.layers[j] = VecXc::Zero(exc.excited_sectors[j].dim());

  std::vector<int> excited;
  for (int i = 0; i < sp.dim; ++i) {
    const auto& n = sp.basis.tuples[i];
    const int j = N - n[0];  // excitation count
    excited.assign(n.begin() + 1, n.end());
    const int idx = exc.excited_sectors[j].find(excited);
    exc.layers[j][idx] = rotated[i];
  }
  for (int j = 0; j <= N; ++j) exc.layer_norms_sq[j] = exc.layers[j].squaredNorm();
  return exc;
}

VecXc excision_reconstruct(const NBodySpace& sp, const ExcisionResult& exc) {
  const int ms = sp.lat.sites();
  const int N = sp.n_particles;
  VecXc rotated = VecXc::Zero(sp.dim);
  std::vector<int> occ(ms);
  for (int j = 0; j <= N; ++j) {
    const SectorBasis& sec = exc.excited_sectors[j];
    for (int i = 0; i < sec.dim(); ++i) {
      occ[0] = N - j;
      std::copy(sec.tuples[i].begin(), sec.tuples[i].end(), occ.begin() + 1);
      rotated[sp.basis.find(occ)] = exc.layers[j][i];
    }
  }
  return rotate_state(sp, exc.W, rotated);
}

double mgf_via_excision(const NBodySpace& sp, const VecXc& psi, const WaveFunction& phi,
                        const Observable& O, double lambda) {
  const int ms = sp.lat.sites();
  const int N = sp.n_particles;
  ExcisionResult exc = excision(sp, psi, phi);

  // Fock realization over the excited modes with n_cut = N (exact algebra).
  FockSpace fsp = make_fock_space(ms - 1, N, N);
  VecXc xi = VecXc::Zero(fsp.dim);
  for (int j = 0; j <= N; ++j) {
    const SectorBasis& sec = exc.excited_sectors[j];
    for (int i = 0; i < sec.dim(); ++i) {
      const int idx = fsp.sectors[j].find(sec.tuples[i]);
      xi[fsp.offsets[j] + idx] = exc.layers[j][i];
    }
  }

  const VecXc c = phi.coefficients();
  const double center = c.dot(O.matrix * c).real();
  MatXc rotatedO = exc.W.adjoint() * O.matrix * exc.W;
  MatXc A_exc = rotatedO.block(1, 1, ms - 1, ms - 1) -
                center * MatXc::Identity(ms - 1, ms - 1);
  VecXc g_exc = (exc.W.adjoint() * (O.matrix * c)).tail(ms - 1);

  MatXc X = lambda * d_gamma(fsp, A_exc) +
            (lambda * std::sqrt(static_cast<double>(N))) * op_phi_plus(fsp, g_exc);
  MatXc E = expm_hermitian(X, 1.0);
  const cdouble val = xi.dot(E * xi);
  return val.real() / xi.squaredNorm();
}

}  // namespace mflab
