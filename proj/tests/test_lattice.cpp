#include <doctest.h>

#include "mflab/observable.hpp"
#include "oracles.hpp"

using namespace mflab;
using namespace mflab::testing;

namespace {

VecXc plane_wave(const Lattice& lat, int n) {
  VecXc f(lat.sites());
  const double k = 2.0 * kPi * n / lat.L;
  for (int i = 0; i < f.size(); ++i)
    f[i] = std::polar(1.0 / std::sqrt(lat.L), k * lat.site_coords(i)[0]);
  return f;
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("laplacian of a plane wave is -k^2 times the wave") {
  const Lattice lat = make_lattice(1, 5.0, 32);
  const int n = 3;
  const double k = 2.0 * kPi * n / lat.L;
  VecXc f = plane_wave(lat, n);
  VecXc lap = laplacian(lat, f);
  CHECK((lap + k * k * f).cwiseAbs().maxCoeff() < 1e-12 * k * k);
}

TEST_CASE("laplacian of a constant field vanishes") {
  const Lattice lat = make_lattice(1, 3.0, 16);
  VecXc f = VecXc::Constant(lat.sites(), cdouble(0.7, -0.2));
  CHECK(laplacian(lat, f).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("laplacian agrees with the second-difference stencil at O(M^-2)") {
  std::mt19937_64 rng(42);
  std::vector<std::pair<int, cdouble>> modes;
  const Lattice coarse = make_lattice(1, 7.0, 64);
  VecXc f = bandlimited_field(coarse, rng, 4, &modes);

  auto sup_err = [&](const Lattice& lat) {
    VecXc g = VecXc::Zero(lat.sites());
    for (const auto& [n, a] : modes) {
      const double k = 2.0 * kPi * n / lat.L;
      for (int i = 0; i < g.size(); ++i) g[i] += a * std::polar(1.0, k * lat.site_coords(i)[0]);
    }
    return (laplacian(lat, g) - stencil_laplacian_1d(lat, g)).cwiseAbs().maxCoeff();
  };

  // Error bound h^2/12 * sup|f''''| from the stencil Taylor expansion.
  double sup_f4 = 0.0;
  for (int i = 0; i < coarse.sites(); ++i) {
    cdouble v = 0.0;
    for (const auto& [n, a] : modes) {
      const double k = 2.0 * kPi * n / coarse.L;
      v += a * std::pow(k, 4) * std::polar(1.0, k * coarse.site_coords(i)[0]);
    }
    sup_f4 = std::max(sup_f4, std::abs(v));
  }
  const double e_coarse = sup_err(coarse);
  const double e_fine = sup_err(make_lattice(1, 7.0, 128));
  const double h = coarse.spacing();
  CHECK(e_coarse <= 1.5 * h * h / 12.0 * sup_f4);
  CHECK(e_coarse / e_fine > 3.3);
  CHECK(e_coarse / e_fine < 4.8);
}

TEST_CASE("Parseval: position-space norm equals Fourier-space norm") {
  std::mt19937_64 rng(7);
  const Lattice lat = make_lattice(1, 4.0, 24);
  VecXc f = random_field(lat, rng);
  const double pos = field_norm(lat, f);
  const double fourier = std::sqrt(sobolev_norm_sq(lat, f, 0));
  CHECK(std::abs(pos - fourier) < 1e-12 * pos);
}

TEST_CASE("laplacian is self-adjoint for the weighted inner product") {
  std::mt19937_64 rng(11);
  const Lattice lat = make_lattice(1, 4.0, 24);
  VecXc f = random_field(lat, rng), g = random_field(lat, rng);
  const cdouble lhs = inner(lat, f, laplacian(lat, g));
  const cdouble rhs = inner(lat, laplacian(lat, f), g);
  CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(lhs));
}

TEST_CASE("kinetic matrix matches the FFT Laplacian") {
  std::mt19937_64 rng(3);
  const Lattice lat = make_lattice(1, 6.0, 12);
  VecXc f = random_field(lat, rng);
  VecXc via_fft = to_coefficients(lat, -laplacian(lat, f));
  VecXc via_mat = kinetic_matrix(lat) * to_coefficients(lat, f);
  CHECK((via_fft - via_mat).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mean_field: zero and constant potentials") {
  std::mt19937_64 rng(5);
  const Lattice lat = make_lattice(1, 5.0, 32);
  WaveFunction phi = WaveFunction::normalized(lat, random_field(lat, rng));

  PairPotential vzero = PairPotential::from_values(lat, VecXd::Zero(lat.sites()));
  CHECK(mean_field(vzero, phi).cwiseAbs().maxCoeff() < 1e-14);

  const double c = 1.7;
  PairPotential vconst = PairPotential::from_values(lat, VecXd::Constant(lat.sites(), c));
  VecXd mf = mean_field(vconst, phi);
  CHECK((mf.array() - c).abs().maxCoeff() < 1e-12);  // c * ||phi||^2 = c
}

TEST_CASE("mean_field: Gaussian convolved with Gaussian matches the closed form") {
  const Lattice lat = make_lattice(1, 20.0, 256);
  const double av = 0.7, sv = 1.2, sp = 0.9;
  PairPotential v = PairPotential::from_function(lat, [&](const std::array<double, 3>& x) {
    return av * std::exp(-x[0] * x[0] / (2.0 * sv * sv));
  });
  VecXc phi_vals(lat.sites());
  for (int i = 0; i < lat.sites(); ++i) {
    const double dx = lat.min_image(lat.site_coords(i)[0] - lat.L / 2.0);
    phi_vals[i] = std::exp(-dx * dx / (4.0 * sp * sp));
  }
  WaveFunction phi = WaveFunction::normalized(lat, phi_vals);
  VecXd mf = mean_field(v, phi);
  // (v * |phi|^2)(x) = av sv / sqrt(sv^2 + sp^2) exp(-xc^2 / (2 (sv^2+sp^2)))
  double worst = 0.0;
  for (int i = 0; i < lat.sites(); ++i) {
    const double xc = lat.min_image(lat.site_coords(i)[0] - lat.L / 2.0);
    const double expect = av * sv / std::sqrt(sv * sv + sp * sp) *
                          std::exp(-xc * xc / (2.0 * (sv * sv + sp * sp)));
    worst = std::max(worst, std::abs(mf[i] - expect));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("mean_field is gauge invariant") {
  std::mt19937_64 rng(9);
  const Lattice lat = make_lattice(1, 5.0, 16);
  WaveFunction phi = WaveFunction::normalized(lat, random_field(lat, rng));
  PairPotential v = PairPotential::from_function(lat, [&](const std::array<double, 3>& x) {
    return std::exp(-x[0] * x[0]);
  });
  WaveFunction phased{lat, std::polar(1.0, 1.234) * phi.values};
  CHECK((mean_field(v, phi) - mean_field(v, phased)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("mean_field rejects lattice mismatch") {
  const Lattice a = make_lattice(1, 5.0, 16), b = make_lattice(1, 5.0, 32);
  PairPotential v = PairPotential::from_values(a, VecXd::Zero(a.sites()));
  VecXc ones = VecXc::Constant(b.sites(), 1.0);
  WaveFunction phi = WaveFunction::normalized(b, ones);
  CHECK_THROWS_AS(mean_field(v, phi), ConfigError);
}

TEST_CASE("project_orthogonal basics") {
  std::mt19937_64 rng(13);
  const Lattice lat = make_lattice(1, 4.0, 16);
  WaveFunction phi = WaveFunction::normalized(lat, random_field(lat, rng));

  CHECK(project_orthogonal(lat, phi.values, phi.values).cwiseAbs().maxCoeff() < 1e-12);

  VecXc g = project_orthogonal(lat, random_field(lat, rng), phi.values);
  CHECK(std::abs(inner(lat, phi.values, g)) < 1e-12);
  CHECK((project_orthogonal(lat, g, phi.values) - g).cwiseAbs().maxCoeff() < 1e-12);

  VecXc sum = phi.values + g;
  CHECK((project_orthogonal(lat, sum, phi.values) - g).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pair potential is even on the displacement grid") {
  const Lattice lat = make_lattice(1, 6.0, 12);
  PairPotential v = PairPotential::from_function(lat, [&](const std::array<double, 3>& x) {
    return std::exp(-std::abs(x[0]));
  });
  for (int i = 0; i < lat.sites(); ++i) {
    const int j = lat.flat_index({(lat.M - i) % lat.M, 0, 0});
    CHECK(v.values[i] == v.values[j]);
  }
  CHECK(v.norm_l1 == doctest::Approx(v.values.cwiseAbs().sum() * lat.weight()));
  CHECK(v.norm_linf == doctest::Approx(1.0));
}

TEST_CASE("2d laplacian plane wave") {
  const Lattice lat = make_lattice(2, 4.0, 8);
  VecXc f(lat.sites());
  const double kx = 2.0 * kPi * 2 / lat.L, ky = 2.0 * kPi * 1 / lat.L;
  for (int i = 0; i < lat.sites(); ++i) {
    const auto x = lat.site_coords(i);
    f[i] = std::polar(1.0, kx * x[0] + ky * x[1]);
  }
  VecXc lap = laplacian(lat, f);
  const double k2 = kx * kx + ky * ky;
  CHECK((lap + k2 * f).cwiseAbs().maxCoeff() < 1e-11 * k2);
}

TEST_CASE("observable constructors and hermiticity guard") {
  const Lattice lat = make_lattice(1, 4.0, 8);
  VecXd m(lat.sites());
  for (int i = 0; i < lat.sites(); ++i) m[i] = std::cos(2.0 * kPi * lat.site_coords(i)[0] / lat.L);
  Observable O = Observable::multiplication(lat, m);
  CHECK(O.op_norm == doctest::Approx(m.cwiseAbs().maxCoeff()));

  std::mt19937_64 rng(17);
  WaveFunction phi = WaveFunction::normalized(lat, random_field(lat, rng));
  // <phi, O phi> equals the direct weighted sum for a multiplication operator.
  double direct = 0.0;
  for (int i = 0; i < lat.sites(); ++i) direct += m[i] * std::norm(phi.values[i]) * lat.weight();
  CHECK(O.expectation(phi) == doctest::Approx(direct).epsilon(1e-12));

  MatXc bad = MatXc::Zero(lat.sites(), lat.sites());
  bad(0, 1) = 1.0;  // not Hermitian
  CHECK_THROWS_AS(Observable::dense(lat, bad), ConfigError);

  Observable P = Observable::projector(lat, phi.values);
  CHECK(P.op_norm == doctest::Approx(1.0));
  CHECK(P.expectation(phi) == doctest::Approx(1.0));
}

TEST_CASE("lattice construction guards") {
  CHECK_THROWS_AS(make_lattice(0, 1.0, 8), ConfigError);
  CHECK_THROWS_AS(make_lattice(1, -1.0, 8), ConfigError);
  CHECK_THROWS_AS(make_lattice(1, 1.0, 1), ConfigError);
}

}  // TEST_SUITE
