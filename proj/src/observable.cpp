#include "mflab/observable.hpp"

namespace mflab {

namespace {

void check_hermitian(const MatXc& A) {
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ConfigError("observable matrix is not Hermitian");
}

double spectral_norm(const MatXc& A) {
  if (A.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatXc> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Observable Observable::multiplication(const Lattice& lat, VecXd func_values) {
  if (func_values.size() != lat.sites()) throw ConfigError("observable size does not match lattice");
  Observable o;
  o.kind = Kind::Multiplication;
  o.lat = lat;
  o.mult_values = std::move(func_values);
  o.matrix = o.mult_values.cast<cdouble>().asDiagonal();
  o.op_norm = o.mult_values.cwiseAbs().maxCoeff();
  return o;
}

Observable Observable::projector(const Lattice& lat, const VecXc& g_values) {
  if (g_values.size() != lat.sites()) throw ConfigError("observable size does not match lattice");
  Observable o;
  o.kind = Kind::FiniteRank;
  o.lat = lat;
  VecXc c = to_coefficients(lat, g_values);
  o.matrix = c * c.adjoint();
  o.op_norm = c.squaredNorm();
  return o;
}

Observable Observable::dense(const Lattice& lat, MatXc coeff_matrix) {
  if (coeff_matrix.rows() != lat.sites() || coeff_matrix.cols() != lat.sites())
    throw ConfigError("observable matrix size does not match lattice");
  check_hermitian(coeff_matrix);
  Observable o;
  o.kind = Kind::Dense;
  o.lat = lat;
  o.matrix = std::move(coeff_matrix);
  o.op_norm = spectral_norm(o.matrix);
  return o;
}

VecXc Observable::apply_values(const VecXc& phi_values) const {
  if (kind == Kind::Multiplication) return mult_values.cast<cdouble>().cwiseProduct(phi_values);
  return to_values(lat, matrix * to_coefficients(lat, phi_values));
}

double Observable::expectation(const WaveFunction& phi) const {
  return inner(lat, phi.values, apply_values(phi.values)).real();
}

}  // namespace mflab
