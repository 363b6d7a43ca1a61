#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "mflab/fluctuation.hpp"
#include "oracles.hpp"

using namespace mflab;
using namespace mflab::testing;

namespace {

WaveFunction gaussian_state(const Lattice& lat, double sigma) {
  VecXc vals(lat.sites());
  for (int i = 0; i < lat.sites(); ++i) {
    const double dx = lat.min_image(lat.site_coords(i)[0] - lat.L / 2.0);
    vals[i] = std::exp(-dx * dx / (4.0 * sigma * sigma));
  }
  return WaveFunction::normalized(lat, vals);
}

PairPotential gaussian_potential(const Lattice& lat, double a, double sigma) {
  return PairPotential::from_function(lat, [&](const std::array<double, 3>& x) {
    return a * std::exp(-x[0] * x[0] / (2.0 * sigma * sigma));
  });
}

Observable cosine_observable(const Lattice& lat, double amp = 1.0, int harm = 1) {
  VecXd m(lat.sites());
  for (int i = 0; i < lat.sites(); ++i)
    m[i] = amp * std::cos(2.0 * kPi * harm * lat.site_coords(i)[0] / lat.L);
  return Observable::multiplication(lat, m);
}

// Doubled real form of f -> -i (hH f + K1 f + J K2 f) acting on (Re f, Im f).
MatXd doubled_generator(const HartreeFrame& fr, bool include_k2) {
  const int n = fr.lat.sites();
  auto apply = [&](const VecXc& u) {
    VecXc g = fr.apply_hH(u) + fr.apply_K1(u);
    if (include_k2) g += fr.apply_JK2(u);
    return (cdouble(0.0, -1.0) * g).eval();
  };
  MatXd G(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    VecXc e = VecXc::Zero(n);
    e[j] = 1.0;
    VecXc col = apply(e);
    G.col(j).head(n) = col.real();
    G.col(j).tail(n) = col.imag();
    e[j] = cdouble(0.0, 1.0);
    col = apply(e);
    G.col(n + j).head(n) = col.real();
    G.col(n + j).tail(n) = col.imag();
  }
  return G;
}

VecXd to_doubled(const VecXc& u) {
  VecXd r(2 * u.size());
  r.head(u.size()) = u.real();
  r.tail(u.size()) = u.imag();
  return r;
}

VecXc from_doubled(const VecXd& r) {
  const int n = static_cast<int>(r.size()) / 2;
  VecXc u(n);
  for (int i = 0; i < n; ++i) u[i] = cdouble(r[i], r[n + i]);
  return u;
}

// Second-order dense reference: backward flow via trapezoid-averaged frozen
// generators, independent of the RK4 stepping in the implementation.
VecXc oracle_backward(const FluctuationField& fT, const HartreeTrajectory& traj) {
  const int K = traj.index_at(fT.t);
  std::vector<MatXd> gens(K + 1);
  for (int k = 0; k <= K; ++k) gens[k] = doubled_generator(frame_at(traj, traj.times[k]), true);
  VecXd r = to_doubled(fT.f);
  for (int k = K; k >= 1; --k) {
    MatXd avg = 0.5 * (gens[k] + gens[k - 1]);
    r = (-traj.dt * avg).exp() * r;
  }
  return from_doubled(r);
}

}  // namespace

TEST_SUITE("fluctuation") {

TEST_CASE("terminal condition: identity observable gives the zero field") {
  const Lattice lat = make_lattice(1, 5.0, 16);
  PairPotential v = gaussian_potential(lat, 1.0, 0.6);
  WaveFunction phi0 = gaussian_state(lat, 0.8);
  HartreeTrajectory traj = hartree_evolve(phi0, v, 0.1, 1e-2);
  Observable id = Observable::multiplication(lat, VecXd::Ones(lat.sites()));
  FluctuationField f = terminal_condition(id, frame_at(traj, 0.1));
  CHECK(field_norm(lat, f.f) < 1e-12);
}

TEST_CASE("terminal condition: projector onto a state orthogonal to phi gives zero") {
  const Lattice lat = make_lattice(1, 5.0, 16);
  PairPotential v = PairPotential::from_values(lat, VecXd::Zero(lat.sites()));
  WaveFunction phi0 = gaussian_state(lat, 0.8);
  HartreeTrajectory traj = hartree_evolve(phi0, v, 0.0, 1e-2);
  std::mt19937_64 rng(3);
  VecXc g = project_orthogonal(lat, random_field(lat, rng), phi0.values);
  Observable P = Observable::projector(lat, g);
  FluctuationField f = terminal_condition(P, frame_at(traj, 0.0));
  CHECK(field_norm(lat, f.f) < 1e-12);
}

TEST_CASE("terminal condition matches the dense coefficient computation") {
  const Lattice lat = make_lattice(1, 5.0, 12);
  PairPotential v = gaussian_potential(lat, 0.8, 0.6);
  WaveFunction phi0 = gaussian_state(lat, 0.7);
  HartreeTrajectory traj = hartree_evolve(phi0, v, 0.05, 5e-3);
  HartreeFrame fr = frame_at(traj, 0.05);

  VecXd pos(lat.sites());
  for (int i = 0; i < lat.sites(); ++i) pos[i] = lat.site_coords(i)[0] - lat.L / 2.0;
  Observable X = Observable::multiplication(lat, pos);
  FluctuationField f = terminal_condition(X, fr);

  VecXc c = to_coefficients(lat, fr.phi);
  VecXc oc = X.matrix * c;
  VecXc expect = to_values(lat, oc - c.dot(oc) * c);
  CHECK((f.f - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(inner(lat, fr.phi, f.f)) < 1e-12);
}

TEST_CASE("free flow conserves the fluctuation norm") {
  const Lattice lat = make_lattice(1, 2.0 * kPi, 16);
  PairPotential v = PairPotential::from_values(lat, VecXd::Zero(lat.sites()));
  WaveFunction phi0 = gaussian_state(lat, 0.8);
  HartreeTrajectory traj = hartree_evolve(phi0, v, 0.5, 1e-3);
  FluctuationField fT = terminal_condition(cosine_observable(lat), frame_at(traj, 0.5));
  BackwardResult res = solve_backward(fT, traj);
  for (double n : res.f_norms) CHECK(std::abs(n - res.terminal_norm) < 1e-8);
  CHECK(res.alpha2() ==
        doctest::Approx(res.terminal_norm * res.terminal_norm).epsilon(1e-8));
}

TEST_CASE("self-adjoint sub-case (K2 disabled) conserves the norm") {
  const Lattice lat = make_lattice(1, 2.0 * kPi, 16);
  PairPotential v = gaussian_potential(lat, 1.5, 0.7);
  WaveFunction phi0 = gaussian_state(lat, 0.8);
  HartreeTrajectory traj = hartree_evolve(phi0, v, 0.4, 1e-3);
  FluctuationField fT = terminal_condition(cosine_observable(lat), frame_at(traj, 0.4));
  FluctuationOptions opt;
  opt.include_k2 = false;
  BackwardResult res = solve_backward(fT, traj, opt);
  for (double n : res.f_norms) CHECK(std::abs(n - res.terminal_norm) < 1e-8);
}

TEST_CASE("one macro-step matches the frozen-coefficient expm oracle at O(dt^2)") {
  const Lattice lat = make_lattice(1, 2.0 * kPi, 6);
  PairPotential v = gaussian_potential(lat, 1.2, 0.8);
  WaveFunction phi0 = gaussian_state(lat, 0.9);

  auto one_step_error = [&](double dt) {
    HartreeTrajectory traj = hartree_evolve(phi0, v, 2.0 * dt, dt);
    FluctuationField fT = terminal_condition(cosine_observable(lat), frame_at(traj, 2.0 * dt));
    BackwardResult res = solve_backward(fT, traj);
    MatXd G = doubled_generator(frame_at(traj, 2.0 * dt), true);
    VecXc frozen = from_doubled(((-2.0 * dt) * G).exp() * to_doubled(fT.f));
    frozen = project_orthogonal(lat, frozen, traj.states.front());
    return field_norm(lat, res.f0 - frozen);
  };
  const double e1 = one_step_error(2e-2);
  const double e2 = one_step_error(1e-2);
  CHECK(e1 < 1.0 * 2e-2 * 2e-2);  // O(dt^2) with a small constant
  CHECK(e1 / e2 > 2.5);           // at least second-order shrinkage
}

TEST_CASE("variance at t = 0 equals the one-particle variance of O") {
  const Lattice lat = make_lattice(1, 5.0, 16);
  PairPotential v = gaussian_potential(lat, 1.0, 0.7);
  WaveFunction phi0 = gaussian_state(lat, 0.8);
  HartreeTrajectory traj = hartree_evolve(phi0, v, 0.0, 1e-2);
  Observable O = cosine_observable(lat);
  const double alpha2 = variance_alpha2(O, traj, 0.0);
  VecXc ophi = O.apply_values(phi0.values);
  const double expect =
      inner(lat, ophi, ophi).real() - std::pow(inner(lat, phi0.values, ophi).real(), 2);
  CHECK(alpha2 == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("free flow: alpha_t^2 equals the terminal projection norm") {
  const Lattice lat = make_lattice(1, 2.0 * kPi, 16);
  PairPotential v = PairPotential::from_values(lat, VecXd::Zero(lat.sites()));
  WaveFunction phi0 = gaussian_state(lat, 0.8);
  HartreeTrajectory traj = hartree_evolve(phi0, v, 0.3, 1e-3);
  Observable O = cosine_observable(lat);
  HartreeFrame fr = frame_at(traj, 0.3);
  FluctuationField fT = terminal_condition(O, fr);
  const double expect = std::pow(field_norm(lat, fT.f), 2);
  CHECK(variance_alpha2(O, traj, 0.3) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("interacting variance matches the dense propagator oracle") {
  const Lattice lat = make_lattice(1, 2.0 * kPi, 6);
  PairPotential v = gaussian_potential(lat, 1.0, 0.8);
  WaveFunction phi0 = gaussian_state(lat, 0.9);
  const double t = 0.2, dt = 2.5e-4;
  HartreeTrajectory traj = hartree_evolve(phi0, v, t, dt);
  Observable O = cosine_observable(lat);
  FluctuationField fT = terminal_condition(O, frame_at(traj, t));
  BackwardResult res = solve_backward(fT, traj);
  VecXc f0_oracle = oracle_backward(fT, traj);
  CHECK(std::abs(res.alpha2() - std::pow(field_norm(lat, f0_oracle), 2)) < 1e-6);
  CHECK(res.max_drift() < 1e-6);
}

TEST_CASE("reversibility: forward integration recovers the terminal datum") {
  const Lattice lat = make_lattice(1, 2.0 * kPi, 12);
  PairPotential v = gaussian_potential(lat, 1.2, 0.7);
  WaveFunction phi0 = gaussian_state(lat, 0.8);
  Observable O = cosine_observable(lat);

  auto roundtrip = [&](double dt) {
    HartreeTrajectory traj = hartree_evolve(phi0, v, 0.2, dt);
    FluctuationField fT = terminal_condition(O, frame_at(traj, 0.2));
    BackwardResult res = solve_backward(fT, traj);
    VecXc back = solve_forward(res.f0, traj, 0.2);
    return field_norm(lat, back - fT.f);
  };
  const double r1 = roundtrip(2e-3);
  const double r2 = roundtrip(1e-3);
  CHECK(r1 < 1.0 * 2e-3 * 2e-3 + 1e-8);
  CHECK((r2 < r1 / 3.5 || r2 < 1e-10));
}

TEST_CASE("solve_backward is real-linear but not complex-linear") {
  const Lattice lat = make_lattice(1, 2.0 * kPi, 8);
  PairPotential v = gaussian_potential(lat, 1.0, 0.8);
  WaveFunction phi0 = gaussian_state(lat, 0.9);
  const double t = 0.1, dt = 2.5e-3;
  HartreeTrajectory traj = hartree_evolve(phi0, v, t, dt);
  HartreeFrame fr = frame_at(traj, t);

  std::mt19937_64 rng(19);
  VecXc fa = project_orthogonal(lat, random_field(lat, rng), fr.phi);
  VecXc fb = project_orthogonal(lat, random_field(lat, rng), fr.phi);
  const double a = 0.6, b = -1.3;

  auto solve = [&](const VecXc& f) {
    FluctuationField fT{lat, t, t, f};
    return solve_backward(fT, traj).f0;
  };
  VecXc combined = solve(a * fa + b * fb);
  VecXc separate = a * solve(fa) + b * solve(fb);
  CHECK(field_norm(lat, combined - separate) < 1e-10);

  // Complex scaling does NOT commute with the flow (J K2 is antilinear).
  VecXc scaled = solve((cdouble(0.0, 1.0) * fa).eval());
  VecXc naive = cdouble(0.0, 1.0) * solve(fa);
  CHECK(field_norm(lat, scaled - naive) > 1e-6);
}

TEST_CASE("alpha^2 is invariant under O -> O + c identity") {
  const Lattice lat = make_lattice(1, 2.0 * kPi, 12);
  PairPotential v = gaussian_potential(lat, 1.0, 0.7);
  WaveFunction phi0 = gaussian_state(lat, 0.8);
  HartreeTrajectory traj = hartree_evolve(phi0, v, 0.2, 2e-3);
  Observable O = cosine_observable(lat);
  VecXd shifted = O.mult_values.array() + 2.5;
  Observable Oshift = Observable::multiplication(lat, shifted);
  const double a1 = variance_alpha2(O, traj, 0.2);
  const double a2 = variance_alpha2(Oshift, traj, 0.2);
  CHECK(std::abs(a1 - a2) < 1e-10 * (1.0 + a1));
}

TEST_CASE("norm growth guard aborts with a numeric error") {
  const Lattice lat = make_lattice(1, 2.0 * kPi, 8);
  PairPotential v = gaussian_potential(lat, 1.0, 0.8);
  WaveFunction phi0 = gaussian_state(lat, 0.9);
  HartreeTrajectory traj = hartree_evolve(phi0, v, 0.05, 5e-3);
  FluctuationField fT = terminal_condition(cosine_observable(lat), frame_at(traj, 0.05));
  FluctuationOptions opt;
  opt.growth_guard = 0.5;  // impossible bound: trips on the first record
  CHECK_THROWS_AS(solve_backward(fT, traj, opt), NumericError);
}

}  // TEST_SUITE
