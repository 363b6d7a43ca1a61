#pragma once

#include "mflab/fock.hpp"
#include "mflab/observable.hpp"

namespace mflab {

/// N bosons on the lattice sites, occupation-number (second-quantized sector)
/// representation: basis tuples (n_1,...,n_Ms) with sum = N.
struct NBodySpace {
  Lattice lat;
  int n_particles = 0;
  SectorBasis basis;
  int dim = 0;
};

NBodySpace make_nbody_space(const Lattice& lat, int n_particles, int dim_cap = 200000);

/// H_N = sum T_pq a*_p a_q + (1/2N) sum v(x_p - x_q) a*_p a*_q a_q a_p,
/// with T the spectral one-body Laplacian in the orthonormal site basis.
SpMatXc nbody_hamiltonian(const NBodySpace& sp, const PairPotential& v);

/// One-body operator sum A_pq a*_p a_q on the N-particle sector.
SpMatXc nbody_one_body(const NBodySpace& sp, const MatXc& A);

/// Factorized state phi^{(x) N}: coefficient on tuple n is
/// sqrt(N!/prod n_i!) prod c_i^{n_i} with c the site-basis coefficients of phi.
VecXc product_state(const NBodySpace& sp, const WaveFunction& phi);

struct EvolveOptions {
  double dt = 1e-2;
  int krylov_dim = 30;
  int dense_cap = 1200;  // use dense eigendecomposition up to this dimension
};

VecXc nbody_evolve(const NBodySpace& sp, const SpMatXc& H, const VecXc& psi0, double t,
                   const EvolveOptions& opt = {});
VecXc evolve_dense(const SpMatXc& H, const VecXc& psi0, double t);
VecXc evolve_krylov(const SpMatXc& H, const VecXc& psi0, double t, double dt, int krylov_dim);

/// Re-expresses psi in the occupation basis of new modes; column q of V holds
/// the coordinates of old mode q in the new mode basis (V unitary).
VecXc rotate_state(const NBodySpace& sp, const MatXc& V, const VecXc& psi);

/// Spectral measure of dGamma(O) in the state psi: eigenmode occupation values
/// sum_k m_k d_k with probabilities |psihat_m|^2. Makes MGFs and tails exact.
struct DGammaMeasure {
  std::vector<double> value;  // dGamma(O) eigenvalue per basis element
  std::vector<double> prob;
  double total = 0.0;  // sum of probabilities (= ||psi||^2)
};

DGammaMeasure dgamma_measure(const NBodySpace& sp, const Observable& O, const VecXc& psi);

/// E_psi exp(lambda (dGamma(O) - N center)), normalized by ||psi||^2.
double mgf_from_measure(const DGammaMeasure& m, double lambda, int n_particles, double center);
double nbody_mgf(const NBodySpace& sp, const Observable& O, const VecXc& psi, double lambda,
                 double center);

/// P_psi( dGamma(O)/N - center > x ).
double tail_from_measure(const DGammaMeasure& m, double x, int n_particles, double center);
double tail_probability(const NBodySpace& sp, const Observable& O, const VecXc& psi, double x,
                        double center);

/// Var_psi(dGamma(O)) computed from sparse applications.
double nbody_variance(const NBodySpace& sp, const Observable& O, const VecXc& psi);

/// One-particle reduced density matrix (site coefficient basis), trace 1.
MatXc reduced_density(const NBodySpace& sp, const VecXc& psi);

/// Condensate excision: psi decomposed into excitation layers eta_j orthogonal
/// to phi, via rotation of the one-particle basis so that mode 0 = phi.
struct ExcisionResult {
  MatXc W;  // unitary, column 0 = phi coefficients
  std::vector<VecXc> layers;                // eta_j over excited-mode sector bases
  std::vector<SectorBasis> excited_sectors; // totals 0..N over Ms-1 modes
  std::vector<double> layer_norms_sq;
};

ExcisionResult excision(const NBodySpace& sp, const VecXc& psi, const WaveFunction& phi);
VecXc excision_reconstruct(const NBodySpace& sp, const ExcisionResult& exc);

/// <xi, e^{lambda dGamma(q Otilde q) + lambda sqrt(N) phi_+(q O phi)} xi> with
/// xi the excision of psi realized on the truncated Fock space (n_cut = N).
/// Agrees with nbody_mgf by the excision conjugation rules.
double mgf_via_excision(const NBodySpace& sp, const VecXc& psi, const WaveFunction& phi,
                        const Observable& O, double lambda);

/// Unitary with first column c, remaining columns a Gram-Schmidt completion.
MatXc orthonormal_completion(const VecXc& c);

}  // namespace mflab
