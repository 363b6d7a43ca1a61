#include "mflab/pipeline.hpp"

#include <chrono>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mflab/fluctuation.hpp"
#include "mflab/fock.hpp"
#include "mflab/io.hpp"
#include "mflab/ldp.hpp"
#include "mflab/nbody.hpp"

namespace mflab {

using nlohmann::json;

namespace {

json report_to_json(const FockVerifyReport& rep) {
  json out;
  out["config"] = {{"modes", rep.cfg.modes},  {"n", rep.cfg.n_param},
                   {"n_cut", rep.cfg.n_cut},  {"seed", rep.cfg.seed},
                   {"h_scale", rep.cfg.h_scale}, {"lemma_n_max", rep.cfg.lemma_n_max}};
  json entries = json::array();
  for (const auto& e : rep.entries) {
    entries.push_back({{"name", e.name},
                       {"residual", e.residual},
                       {"tolerance", e.tolerance},
                       {"asserted", e.asserted},
                       {"pass", e.pass()}});
  }
  out["entries"] = entries;
  out["all_pass"] = rep.all_pass;
  out["worst_ratio"] = rep.worst_ratio;
  out["edge_deviation"] = rep.edge_deviation;
  out["runtime_seconds"] = rep.runtime_seconds;
  return out;
}

struct NBodyRow {
  int n = 0;
  double var_over_n = 0.0;
  double center = 0.0;
  DGammaMeasure measure;
};

NBodyRow run_nbody_for(const ExperimentConfig& cfg, const HartreeTrajectory& traj,
                       const Observable& O, int n) {
  NBodySpace sp = make_nbody_space(traj.lat, n, static_cast<int>(kNbodyPipelineDimCap));
  SpMatXc H = nbody_hamiltonian(sp, traj.v);
  WaveFunction phi0{traj.lat, traj.states.front()};
  VecXc psi = product_state(sp, phi0);
  EvolveOptions opt;
  opt.dt = cfg.dt;
  opt.dense_cap = cfg.dense_cap;
  psi = nbody_evolve(sp, H, psi, cfg.t, opt);

  NBodyRow row;
  row.n = n;
  WaveFunction phi_t{traj.lat, traj.states.back()};
  row.center = O.expectation(phi_t);
  row.var_over_n = nbody_variance(sp, O, psi) / n;
  row.measure = dgamma_measure(sp, O, psi);
  return row;
}

}  // namespace

void run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  ValidationReport vrep = validate_config(cfg);
  if (!vrep.ok) {
    std::string msg = "config validation failed:";
    for (const auto& e : vrep.errors) msg += "\n  " + e;
    write_text(out_dir / "FAILED", "stage: validate\n" + msg + "\n");
    if (vrep.nbody_dim > kNbodyPipelineDimCap || vrep.fock_dim > kFockDimCap)
      throw CapError(msg);
    throw ConfigError(msg);
  }

  write_text(out_dir / "config_echo.json", config_to_json(cfg));

  json manifest;
  manifest["schema"] = 1;
  manifest["tool"] = "mflab";
  manifest["version"] = "0.1.0";
  manifest["seed"] = cfg.seed;
  json timings;
  std::vector<fs::path> outputs{out_dir / "config_echo.json"};

  std::string stage = "setup";
  try {
    auto timed = [&](const std::string& name, auto&& fn) {
      stage = name;
      const auto t0 = std::chrono::steady_clock::now();
      fn();
      timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    const Lattice lat = make_lattice(cfg.d, cfg.L, cfg.M);
    const PairPotential v = make_potential(lat, cfg.potential);
    const WaveFunction phi0 = make_phi0(lat, cfg.phi0);
    const Observable O = make_observable(lat, cfg.observable);

    HartreeTrajectory traj;
    timed("hartree", [&] {
      traj = hartree_evolve(phi0, v, cfg.t, cfg.dt);
      save_trajectory(out_dir / "traj", traj);
      outputs.push_back(out_dir / "traj" / "manifest.json");
    });

    double alpha2 = 0.0;
    timed("variance", [&] {
      HartreeFrame fr = frame_at(traj, cfg.t);
      FluctuationField fT = terminal_condition(O, fr);
      BackwardResult res = solve_backward(fT, traj);
      alpha2 = res.alpha2();

      std::ostringstream csv;
      csv << "s,f_norm,orth_drift\n";
      for (std::size_t i = res.s_grid.size(); i-- > 0;) {
        csv << fmt17(res.s_grid[i]) << ',' << fmt17(res.f_norms[i]) << ','
            << fmt17(res.orth_drift[i]) << '\n';
      }
      write_text(out_dir / "variance.csv", csv.str());
      json vj;
      vj["t"] = cfg.t;
      vj["alpha2"] = alpha2;
      vj["terminal_norm"] = res.terminal_norm;
      vj["max_orth_drift"] = res.max_drift();
      write_text(out_dir / "variance.json", vj.dump(2) + "\n");
      outputs.push_back(out_dir / "variance.csv");
      outputs.push_back(out_dir / "variance.json");
    });

    timed("fock-verify", [&] {
      FockVerifyConfig fcfg;
      fcfg.modes = cfg.fock_modes;
      fcfg.n_param = cfg.fock_n;
      fcfg.n_cut = cfg.fock_n_cut;
      fcfg.seed = cfg.seed;
      FockVerifyReport rep = run_fock_verify(fcfg);
      write_text(out_dir / "fock_report.json", report_to_json(rep).dump(2) + "\n");
      outputs.push_back(out_dir / "fock_report.json");
      if (!rep.all_pass) throw NumericError("fock identity battery failed");
    });

    std::vector<NBodyRow> rows;
    timed("nbody", [&] {
      const int hw = static_cast<int>(std::thread::hardware_concurrency());
      const int workers = cfg.threads > 0 ? cfg.threads : std::max(1, hw);
      std::vector<std::future<NBodyRow>> futures;
      rows.resize(cfg.n_list.size());
      // Evolutions for distinct N are independent; launch at most `workers` at a time.
      for (std::size_t base = 0; base < cfg.n_list.size();
           base += static_cast<std::size_t>(workers)) {
        futures.clear();
        const std::size_t hi =
            std::min(cfg.n_list.size(), base + static_cast<std::size_t>(workers));
        for (std::size_t i = base; i < hi; ++i) {
          futures.push_back(std::async(std::launch::async, [&, i] {
            return run_nbody_for(cfg, traj, O, cfg.n_list[i]);
          }));
        }
        for (std::size_t i = base; i < hi; ++i) rows[i] = futures[i - base].get();
      }

      std::ostringstream csv;
      csv << "N,lambda,mgf,log_mgf_over_N,x,tail,chernoff_envelope\n";
      for (const auto& row : rows) {
        for (double lam : cfg.lambda_grid) {
          const double m = mgf_from_measure(row.measure, lam, row.n, row.center);
          const double logm = std::log(m) / row.n;
          for (double x : cfg.x_grid) {
            const double tail = tail_from_measure(row.measure, x, row.n, row.center);
            const double env = std::exp(-lam * row.n * x) * m;
            csv << row.n << ',' << fmt17(lam) << ',' << fmt17(m) << ',' << fmt17(logm) << ','
                << fmt17(x) << ',' << fmt17(tail) << ',' << fmt17(env) << '\n';
          }
        }
      }
      write_text(out_dir / "nbody_compare.csv", csv.str());
      outputs.push_back(out_dir / "nbody_compare.csv");

      std::ostringstream clt;
      clt << "N,var_over_N,alpha2,abs_diff\n";
      for (const auto& row : rows)
        clt << row.n << ',' << fmt17(row.var_over_n) << ',' << fmt17(alpha2) << ','
            << fmt17(std::abs(row.var_over_n - alpha2)) << '\n';
      write_text(out_dir / "clt.csv", clt.str());
      outputs.push_back(out_dir / "clt.csv");
    });

    timed("ldp", [&] {
      LdpParams params;
      params.alpha2 = alpha2;
      params.lambda_max = cfg.ldp_lambda_max ? *cfg.ldp_lambda_max : cfg.lambda_grid.back();
      if (cfg.ldp_beta) {
        params.beta = *cfg.ldp_beta;
      } else if (!rows.empty()) {
        // Fit the cubic coefficient from the largest-N MGF samples.
        const auto& row = rows.back();
        std::vector<double> lams, logs;
        for (double lam : cfg.lambda_grid) {
          if (lam <= 0.0) continue;
          lams.push_back(lam);
          logs.push_back(std::log(mgf_from_measure(row.measure, lam, row.n, row.center)) / row.n);
        }
        params.beta = fit_beta(lams, logs, alpha2);
      }

      std::ostringstream csv;
      csv << "x,lambda_star,clamped,gamma,envelope\n";
      const int n_ref = rows.empty() ? cfg.n_list.back() : rows.back().n;
      for (double x : cfg.x_grid) {
        const LambdaStar ls = lambda_star(x, params);
        const double gamma = rate_function(x, params);
        csv << fmt17(x) << ',' << fmt17(ls.lambda) << ',' << (ls.clamped ? 1 : 0) << ','
            << fmt17(gamma) << ',' << fmt17(chernoff_envelope(x, n_ref, params)) << '\n';
      }
      write_text(out_dir / "ldp_table.csv", csv.str());
      outputs.push_back(out_dir / "ldp_table.csv");

      json lj;
      lj["alpha2"] = params.alpha2;
      lj["beta"] = params.beta;
      lj["beta_fitted"] = !cfg.ldp_beta.has_value();
      lj["lambda_max"] = params.lambda_max;
      lj["lambda_window_observed"] = {cfg.lambda_grid.front(), cfg.lambda_grid.back()};
      write_text(out_dir / "ldp_params.json", lj.dump(2) + "\n");
      outputs.push_back(out_dir / "ldp_params.json");
    });

    stage = "manifest";
    // Hash the trajectory files too, via its own manifest listing.
    for (const auto& entry : fs::directory_iterator(out_dir / "traj")) {
      if (entry.path().filename() != "manifest.json") outputs.push_back(entry.path());
    }
    std::sort(outputs.begin(), outputs.end());
    json files = json::array();
    for (const auto& p : outputs) {
      files.push_back({{"path", fs::relative(p, out_dir).string()}, {"sha256", sha256_file(p)}});
    }
    manifest["outputs"] = files;
    manifest["timings_seconds"] = timings;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    write_text(out_dir / "FAILED", "stage: " + stage + "\n" + e.what() + "\n");
    throw;
  }
}

}  // namespace mflab
