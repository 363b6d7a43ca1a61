#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mflab {

using cdouble = std::complex<double>;
using VecXc = Eigen::VectorXcd;
using VecXd = Eigen::VectorXd;
using MatXc = Eigen::MatrixXcd;
using MatXd = Eigen::MatrixXd;
using SpMatXc = Eigen::SparseMatrix<cdouble>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Malformed configuration or violated call contract (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure at runtime: NaN, instability, tolerance blowout (CLI exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested problem size exceeds a configured dimension cap (CLI exit code 4).
struct CapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Compensated (Kahan) sum; used where spectral sums feed finite differences.
inline double kahan_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

/// Format with 17 significant digits so doubles round-trip through text.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string fmt17(int x) { return std::to_string(x); }

}  // namespace mflab
