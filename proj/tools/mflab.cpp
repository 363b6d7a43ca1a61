#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "mflab/fluctuation.hpp"
#include "mflab/fock.hpp"
#include "mflab/io.hpp"
#include "mflab/ldp.hpp"
#include "mflab/nbody.hpp"
#include "mflab/pipeline.hpp"

using namespace mflab;
using nlohmann::json;

namespace {

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<int> parse_ints(const std::string& csv) {
  std::vector<int> out;
  for (double v : parse_doubles(csv)) out.push_back(static_cast<int>(v));
  return out;
}

json fock_report_json(const FockVerifyReport& rep) {
  json entries = json::array();
  for (const auto& e : rep.entries)
    entries.push_back({{"name", e.name},
                       {"residual", e.residual},
                       {"tolerance", e.tolerance},
                       {"asserted", e.asserted},
                       {"pass", e.pass()}});
  return json{{"config",
               {{"modes", rep.cfg.modes},
                {"n", rep.cfg.n_param},
                {"n_cut", rep.cfg.n_cut},
                {"seed", rep.cfg.seed}}},
              {"entries", entries},
              {"all_pass", rep.all_pass},
              {"worst_ratio", rep.worst_ratio},
              {"edge_deviation", rep.edge_deviation},
              {"runtime_seconds", rep.runtime_seconds}};
}

int dispatch(int argc, char** argv) {
  CLI::App app{"mean-field Bose gas laboratory: Hartree flow, Bogoliubov "
               "fluctuations, exact N-body cross-checks, Chernoff tables"};
  app.require_subcommand(1);

  // hartree
  auto* hart = app.add_subcommand("hartree", "integrate the Hartree equation, export trajectory");
  int h_d = 1, h_M = 64;
  double h_L = 2.0 * kPi, h_dt = 1e-3, h_t = 1.0;
  std::string h_vkind = "gaussian", h_vparams = "1.0,0.5";
  std::string h_pkind = "gaussian", h_pparams = "0.8";
  std::string h_out;
  hart->add_option("--d", h_d, "spatial dimension");
  hart->add_option("--L", h_L, "box side length");
  hart->add_option("--M", h_M, "grid points per dimension");
  hart->add_option("--dt", h_dt, "integrator step");
  hart->add_option("--t", h_t, "time horizon");
  hart->add_option("--v-kind", h_vkind, "potential kind (zero|constant|gaussian|cosine)");
  hart->add_option("--v-params", h_vparams, "potential params, comma separated");
  hart->add_option("--phi0-kind", h_pkind, "initial state kind (plane_wave|gaussian|gaussian_boosted)");
  hart->add_option("--phi0-params", h_pparams, "initial state params, comma separated");
  hart->add_option("--out", h_out, "output trajectory directory")->required();

  // variance
  auto* var = app.add_subcommand("variance", "backward fluctuation solve and alpha_t^2");
  std::string v_traj, v_okind = "cosine", v_oparams = "1.0,1", v_out;
  double v_t = -1.0;
  var->add_option("--traj", v_traj, "trajectory directory")->required();
  var->add_option("--O-kind", v_okind, "observable kind");
  var->add_option("--O-params", v_oparams, "observable params");
  var->add_option("--t", v_t, "terminal time (default: trajectory horizon)");
  var->add_option("--out", v_out, "output CSV path")->required();

  // fock-verify
  auto* fock = app.add_subcommand("fock-verify", "excitation-operator identity battery");
  int f_M = 3, f_N = 6, f_ncut = 6;
  std::uint64_t f_seed = 1;
  std::string f_report;
  fock->add_option("--M", f_M, "number of modes");
  fock->add_option("--N", f_N, "particle number parameter");
  fock->add_option("--n-cut", f_ncut, "total occupation cutoff");
  fock->add_option("--seed", f_seed, "random seed");
  fock->add_option("--report", f_report, "JSON report path")->required();

  // nbody-compare
  auto* nb = app.add_subcommand("nbody-compare", "exact N-body MGF/tail table against a trajectory");
  std::string n_traj, n_nlist = "2,3", n_okind = "cosine", n_oparams = "1.0,1";
  std::string n_lgrid = "0.0,0.1,0.2", n_xgrid = "0.1,0.2", n_out;
  double n_t = -1.0;
  int n_dense_cap = 1200;
  nb->add_option("--traj", n_traj, "trajectory directory")->required();
  nb->add_option("--N-list", n_nlist, "particle numbers, comma separated");
  nb->add_option("--O-kind", n_okind, "observable kind");
  nb->add_option("--O-params", n_oparams, "observable params");
  nb->add_option("--lambda-grid", n_lgrid, "tilt grid, comma separated");
  nb->add_option("--x-grid", n_xgrid, "deviation grid, comma separated");
  nb->add_option("--t", n_t, "evolution time (default: trajectory horizon)");
  nb->add_option("--dense-cap", n_dense_cap, "dense eigensolver dimension cap");
  nb->add_option("--out", n_out, "output CSV path")->required();

  // ldp-table
  auto* ldp = app.add_subcommand("ldp-table", "rate function and Chernoff envelope table");
  double l_alpha2 = 1.0, l_beta = 0.0, l_lmax = 1.0;
  std::string l_xgrid = "0.1,0.2,0.3", l_out;
  int l_N = 10;
  ldp->add_option("--alpha2", l_alpha2, "CLT variance");
  ldp->add_option("--beta", l_beta, "cubic coefficient");
  ldp->add_option("--lambda-max", l_lmax, "tilt window bound");
  ldp->add_option("--x-grid", l_xgrid, "deviation grid");
  ldp->add_option("--N", l_N, "particle number in the envelope");
  ldp->add_option("--out", l_out, "output CSV path")->required();

  // run / validate
  auto* run = app.add_subcommand("run", "full pipeline from a JSON config");
  std::string r_config, r_out;
  run->add_option("config", r_config, "JSON config path")->required();
  run->add_option("--out", r_out, "output directory (default: $MFLAB_OUTPUT_ROOT/<config stem>)");

  auto* val = app.add_subcommand("validate", "check a JSON config against caps");
  std::string va_config;
  val->add_option("config", va_config, "JSON config path")->required();

  CLI11_PARSE(app, argc, argv);

  if (hart->parsed()) {
    const Lattice lat = make_lattice(h_d, h_L, h_M);
    const PairPotential v = make_potential(lat, {h_vkind, parse_doubles(h_vparams)});
    const WaveFunction phi0 = make_phi0(lat, {h_pkind, parse_doubles(h_pparams)});
    HartreeTrajectory traj = hartree_evolve(phi0, v, h_t, h_dt);
    save_trajectory(h_out, traj);
    std::cout << "trajectory: " << traj.times.size() << " instants, dt = " << fmt17(traj.dt)
              << ", final norm = " << fmt17(traj.norms.back()) << "\n";
    return 0;
  }

  if (var->parsed()) {
    HartreeTrajectory traj = load_trajectory(v_traj);
    const double t = v_t < 0.0 ? traj.horizon() : v_t;
    const Observable O = make_observable(traj.lat, {v_okind, parse_doubles(v_oparams)});
    HartreeFrame fr = frame_at(traj, t);
    FluctuationField fT = terminal_condition(O, fr);
    BackwardResult res = solve_backward(fT, traj);

    std::ostringstream csv;
    csv << "s,f_norm,orth_drift\n";
    for (std::size_t i = res.s_grid.size(); i-- > 0;)
      csv << fmt17(res.s_grid[i]) << ',' << fmt17(res.f_norms[i]) << ','
          << fmt17(res.orth_drift[i]) << '\n';
    write_text(v_out, csv.str());
    std::cout << "alpha_t^2 = " << fmt17(res.alpha2()) << " (t = " << fmt17(t)
              << ", max orth drift = " << fmt17(res.max_drift()) << ")\n";
    return 0;
  }

  if (fock->parsed()) {
    FockVerifyConfig cfg;
    cfg.modes = f_M;
    cfg.n_param = f_N;
    cfg.n_cut = f_ncut;
    cfg.seed = f_seed;
    FockVerifyReport rep = run_fock_verify(cfg);
    write_text(f_report, fock_report_json(rep).dump(2) + "\n");
    std::cout << (rep.all_pass ? "PASS" : "FAIL") << ": " << rep.entries.size()
              << " identities, worst residual/tolerance = " << fmt17(rep.worst_ratio) << "\n";
    return rep.all_pass ? 0 : 3;
  }

  if (nb->parsed()) {
    HartreeTrajectory traj = load_trajectory(n_traj);
    const double t = n_t < 0.0 ? traj.horizon() : n_t;
    const Observable O = make_observable(traj.lat, {n_okind, parse_doubles(n_oparams)});
    WaveFunction phi0{traj.lat, traj.states.front()};
    WaveFunction phit{traj.lat, traj.state_at(t)};
    const double center = O.expectation(phit);

    std::ostringstream csv;
    csv << "N,lambda,mgf,log_mgf_over_N,x,tail,chernoff_envelope\n";
    for (int n : parse_ints(n_nlist)) {
      NBodySpace sp = make_nbody_space(traj.lat, n);
      SpMatXc H = nbody_hamiltonian(sp, traj.v);
      EvolveOptions opt;
      opt.dt = traj.dt;
      opt.dense_cap = n_dense_cap;
      VecXc psi = nbody_evolve(sp, H, product_state(sp, phi0), t, opt);
      DGammaMeasure measure = dgamma_measure(sp, O, psi);
      for (double lam : parse_doubles(n_lgrid)) {
        const double m = mgf_from_measure(measure, lam, n, center);
        for (double x : parse_doubles(n_xgrid)) {
          csv << n << ',' << fmt17(lam) << ',' << fmt17(m) << ','
              << fmt17(std::log(m) / n) << ',' << fmt17(x) << ','
              << fmt17(tail_from_measure(measure, x, n, center)) << ','
              << fmt17(std::exp(-lam * n * x) * m) << '\n';
        }
      }
    }
    write_text(n_out, csv.str());
    std::cout << "wrote " << n_out << "\n";
    return 0;
  }

  if (ldp->parsed()) {
    LdpParams p{l_alpha2, l_beta, l_lmax};
    std::ostringstream csv;
    csv << "x,lambda_star,clamped,gamma,envelope\n";
    for (double x : parse_doubles(l_xgrid)) {
      const LambdaStar ls = lambda_star(x, p);
      csv << fmt17(x) << ',' << fmt17(ls.lambda) << ',' << (ls.clamped ? 1 : 0) << ','
          << fmt17(rate_function(x, p)) << ',' << fmt17(chernoff_envelope(x, l_N, p)) << '\n';
    }
    write_text(l_out, csv.str());
    std::cout << "wrote " << l_out << "\n";
    return 0;
  }

  if (run->parsed()) {
    ExperimentConfig cfg = load_config(r_config);
    std::filesystem::path out;
    if (!r_out.empty()) {
      out = r_out;
    } else if (!cfg.output_dir.empty()) {
      out = cfg.output_dir;
    } else if (const char* root = std::getenv("MFLAB_OUTPUT_ROOT")) {
      out = std::filesystem::path(root) / std::filesystem::path(r_config).stem();
    } else {
      throw ConfigError("no output directory: pass --out, set output_dir, or MFLAB_OUTPUT_ROOT");
    }
    run_pipeline(cfg, out);
    std::cout << "pipeline complete: " << out.string() << "\n";
    return 0;
  }

  if (val->parsed()) {
    ExperimentConfig cfg = load_config(va_config);
    ValidationReport rep = validate_config(cfg);
    std::cout << "nbody dim = " << rep.nbody_dim << " (cap " << kNbodyPipelineDimCap << ")\n"
              << "fock dim = " << rep.fock_dim << " (cap " << kFockDimCap << ")\n"
              << "estimated runtime ~ " << fmt17(rep.est_runtime_s) << " s\n"
              << "estimated memory ~ " << fmt17(rep.est_memory_mb) << " MB\n";
    if (!rep.ok) {
      for (const auto& e : rep.errors) std::cerr << "error: " << e << "\n";
      bool cap = false;
      for (const auto& e : rep.errors) cap = cap || e.find("exceeds cap") != std::string::npos;
      return cap ? 4 : 2;
    }
    std::cout << "config ok\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CapError& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
