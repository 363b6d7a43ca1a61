#include "mflab/ldp.hpp"

#include <cmath>

namespace mflab {

double triple_norm(const Observable& O, const PairPotential& v) {
  if (!(O.lat == v.lat)) throw ConfigError("triple_norm: lattice mismatch");
  const Lattice& lat = O.lat;
  MatXc T = kinetic_matrix(lat);  // -Lap
  MatXc lap = -T;
  MatXc resolvent = (MatXc::Identity(lat.sites(), lat.sites()) + T).inverse();  // (1 - Lap)^{-1}
  MatXc B = lap * O.matrix * resolvent;
  Eigen::JacobiSVD<MatXc> svd(B);
  const double smooth_part = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  return smooth_part + (1.0 + v.norm_linf + v.norm_l1) * O.op_norm;
}

LambdaStar lambda_star(double x, const LdpParams& p) {
  if (!(x > 0.0)) throw ConfigError("lambda_star: x must be positive");
  if (!(p.alpha2 >= 0.0) || !(p.beta >= 0.0) || !(p.lambda_max > 0.0))
    throw ConfigError("lambda_star: invalid parameters");
  const double disc = std::sqrt(p.alpha2 * p.alpha2 + 12.0 * p.beta * x);
  double lam = 2.0 * x / (p.alpha2 + disc);
  LambdaStar out;
  out.clamped = lam > p.lambda_max;
  out.lambda = out.clamped ? p.lambda_max : lam;
  return out;
}

namespace {

double objective(double lam, double x, const LdpParams& p) {
  return -lam * x + 0.5 * lam * lam * p.alpha2 + p.beta * lam * lam * lam;
}

}  // namespace

double rate_function(double x, const LdpParams& p) {
  const LambdaStar ls = lambda_star(x, p);
  return objective(ls.lambda, x, p);
}

double rate_function_closed_two_term(double x, const LdpParams& p) {
  const double s = std::sqrt(p.alpha2 * p.alpha2 + 12.0 * p.beta * x);
  const double den = p.alpha2 + s;
  return -2.0 * x * x * s / (den * den) + 8.0 * p.beta * x * x * x / (den * den * den);
}

double chernoff_envelope(double x, int n_particles, const LdpParams& p) {
  return std::exp(n_particles * rate_function(x, p));
}

double fit_beta(const std::vector<double>& lambdas, const std::vector<double>& log_mgf_over_n,
                double alpha2) {
  if (lambdas.size() != log_mgf_over_n.size()) throw ConfigError("fit_beta: size mismatch");
  double beta = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double lam = lambdas[i];
    if (!(lam > 0.0)) continue;
    const double excess = log_mgf_over_n[i] - 0.5 * lam * lam * alpha2;
    beta = std::max(beta, excess / (lam * lam * lam));
  }
  return beta;
}

}  // namespace mflab
