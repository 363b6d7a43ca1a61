#pragma once

#include "mflab/observable.hpp"

namespace mflab {

/// Parameters of the upper large-deviation rate function
/// gamma(x) = inf_{0 <= lambda <= lambda_max} [ -lambda x + lambda^2 alpha2/2 + beta lambda^3 ].
struct LdpParams {
  double alpha2 = 1.0;      // CLT variance
  double beta = 0.0;        // cubic error coefficient (supplied or fitted)
  double lambda_max = 1.0;  // admissible tilt window
};

/// ||Lap O (1 - Lap)^{-1}||_op + (1 + ||v||_inf + ||v||_1) ||O||_op on the lattice.
double triple_norm(const Observable& O, const PairPotential& v);

struct LambdaStar {
  double lambda = 0.0;
  bool clamped = false;
};

/// Unconstrained minimizer 2x / (alpha2 + sqrt(alpha2^2 + 12 beta x)), clamped
/// to [0, lambda_max] with a flag.
LambdaStar lambda_star(double x, const LdpParams& p);

/// gamma(x) <= 0, evaluated at the (possibly clamped) optimal tilt.
double rate_function(double x, const LdpParams& p);

/// The equivalent explicit two-term form of gamma(x) on the unclamped domain.
double rate_function_closed_two_term(double x, const LdpParams& p);

/// exp(N gamma(x)) in (0, 1].
double chernoff_envelope(double x, int n_particles, const LdpParams& p);

/// Smallest beta >= 0 such that (1/N) log MGF(lambda) <= lambda^2 alpha2 / 2 +
/// beta lambda^3 on the sampled grid.
double fit_beta(const std::vector<double>& lambdas, const std::vector<double>& log_mgf_over_n,
                double alpha2);

}  // namespace mflab
