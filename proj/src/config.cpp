#include "mflab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mflab/occupation.hpp"

namespace mflab {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config: " + where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + key + "' in " + where);
  }
}

ExperimentConfig::Spec parse_spec(const json& obj, const std::string& where) {
  require_keys(obj, where, {"kind", "params"});
  ExperimentConfig::Spec s;
  s.kind = obj.at("kind").get<std::string>();
  if (obj.contains("params")) s.params = obj.at("params").get<std::vector<double>>();
  return s;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  require_keys(root, "top level",
               {"schema_version", "lattice", "potential", "phi0", "observable", "time", "nbody",
                "fock", "ldp", "seed", "threads", "output_dir"});

  ExperimentConfig cfg;
  cfg.schema_version = root.value("schema_version", 1);
  if (cfg.schema_version != 1) throw ConfigError("config: unsupported schema_version");

  if (root.contains("lattice")) {
    const auto& lat = root["lattice"];
    require_keys(lat, "lattice", {"d", "L", "M"});
    cfg.d = lat.value("d", cfg.d);
    cfg.L = lat.value("L", cfg.L);
    cfg.M = lat.value("M", cfg.M);
  }
  if (root.contains("potential")) cfg.potential = parse_spec(root["potential"], "potential");
  if (root.contains("phi0")) cfg.phi0 = parse_spec(root["phi0"], "phi0");
  if (root.contains("observable")) cfg.observable = parse_spec(root["observable"], "observable");
  if (root.contains("time")) {
    const auto& tm = root["time"];
    require_keys(tm, "time", {"t", "dt"});
    cfg.t = tm.value("t", cfg.t);
    cfg.dt = tm.value("dt", cfg.dt);
  }
  if (root.contains("nbody")) {
    const auto& nb = root["nbody"];
    require_keys(nb, "nbody", {"n_list", "lambda_grid", "x_grid", "dense_cap"});
    if (nb.contains("n_list")) cfg.n_list = nb["n_list"].get<std::vector<int>>();
    if (nb.contains("lambda_grid")) cfg.lambda_grid = nb["lambda_grid"].get<std::vector<double>>();
    if (nb.contains("x_grid")) cfg.x_grid = nb["x_grid"].get<std::vector<double>>();
    cfg.dense_cap = nb.value("dense_cap", cfg.dense_cap);
  }
  if (root.contains("fock")) {
    const auto& fk = root["fock"];
    require_keys(fk, "fock", {"modes", "n", "n_cut"});
    cfg.fock_modes = fk.value("modes", cfg.fock_modes);
    cfg.fock_n = fk.value("n", cfg.fock_n);
    cfg.fock_n_cut = fk.value("n_cut", cfg.fock_n_cut);
  }
  if (root.contains("ldp")) {
    const auto& ld = root["ldp"];
    require_keys(ld, "ldp", {"beta", "lambda_max"});
    if (ld.contains("beta") && !ld["beta"].is_null()) cfg.ldp_beta = ld["beta"].get<double>();
    if (ld.contains("lambda_max") && !ld["lambda_max"].is_null())
      cfg.ldp_lambda_max = ld["lambda_max"].get<double>();
  }
  cfg.seed = root.value("seed", cfg.seed);
  cfg.threads = root.value("threads", cfg.threads);
  cfg.output_dir = root.value("output_dir", cfg.output_dir);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["schema_version"] = cfg.schema_version;
  root["lattice"] = {{"d", cfg.d}, {"L", cfg.L}, {"M", cfg.M}};
  root["potential"] = {{"kind", cfg.potential.kind}, {"params", cfg.potential.params}};
  root["phi0"] = {{"kind", cfg.phi0.kind}, {"params", cfg.phi0.params}};
  root["observable"] = {{"kind", cfg.observable.kind}, {"params", cfg.observable.params}};
  root["time"] = {{"t", cfg.t}, {"dt", cfg.dt}};
  root["nbody"] = {{"n_list", cfg.n_list},
                   {"lambda_grid", cfg.lambda_grid},
                   {"x_grid", cfg.x_grid},
                   {"dense_cap", cfg.dense_cap}};
  root["fock"] = {{"modes", cfg.fock_modes}, {"n", cfg.fock_n}, {"n_cut", cfg.fock_n_cut}};
  json ldp;
  ldp["beta"] = cfg.ldp_beta ? json(*cfg.ldp_beta) : json(nullptr);
  ldp["lambda_max"] = cfg.ldp_lambda_max ? json(*cfg.ldp_lambda_max) : json(nullptr);
  root["ldp"] = ldp;
  root["seed"] = cfg.seed;
  root["threads"] = cfg.threads;
  root["output_dir"] = cfg.output_dir;
  return root.dump(2) + "\n";
}

ValidationReport validate_config(const ExperimentConfig& cfg) {
  ValidationReport rep;
  auto fail = [&](const std::string& msg) {
    rep.ok = false;
    rep.errors.push_back(msg);
  };

  if (cfg.d < 1 || cfg.d > 3) fail("lattice d must be 1, 2 or 3");
  if (cfg.M < 2) fail("lattice M must be >= 2");
  if (!(cfg.L > 0.0)) fail("lattice L must be positive");
  if (!(cfg.dt > 0.0)) fail("time.dt must be positive");
  if (cfg.t < 0.0) fail("time.t must be nonnegative");

  if (cfg.n_list.empty()) fail("nbody.n_list must not be empty");
  for (int n : cfg.n_list)
    if (n < 1 || n > 15) fail("nbody.n_list entries must lie in [1, 15]");
  if (cfg.lambda_grid.empty()) fail("nbody.lambda_grid must not be empty");
  if (cfg.x_grid.empty()) fail("nbody.x_grid must not be empty");
  auto sorted_finite = [&](const std::vector<double>& g, const std::string& name) {
    for (double v : g)
      if (!std::isfinite(v)) fail(name + " contains a non-finite value");
    if (!std::is_sorted(g.begin(), g.end())) fail(name + " must be sorted ascending");
  };
  sorted_finite(cfg.lambda_grid, "nbody.lambda_grid");
  sorted_finite(cfg.x_grid, "nbody.x_grid");
  for (double lam : cfg.lambda_grid)
    if (lam < 0.0) fail("nbody.lambda_grid entries must be >= 0");
  for (double x : cfg.x_grid)
    if (!(x > 0.0)) fail("nbody.x_grid entries must be > 0");

  std::uint64_t sites = 1;
  for (int a = 0; a < cfg.d; ++a) sites *= cfg.M;
  if (sites > 16) fail("nbody stage supports at most 16 lattice sites");
  int n_max = 0;
  for (int n : cfg.n_list) n_max = std::max(n_max, n);
  if (sites <= 16 && n_max > 0) {
    rep.nbody_dim = binomial(static_cast<int>(sites) + n_max - 1, n_max);
    if (rep.nbody_dim > kNbodyPipelineDimCap)
      fail("nbody dimension " + std::to_string(rep.nbody_dim) + " exceeds cap " +
           std::to_string(kNbodyPipelineDimCap));
  }

  if (cfg.fock_n_cut > cfg.fock_n) fail("fock.n_cut must be <= fock.n");
  if (cfg.fock_modes < 1 || cfg.fock_modes > 16) fail("fock.modes must lie in [1, 16]");
  if (cfg.fock_n_cut >= 0 && cfg.fock_modes >= 1) {
    std::uint64_t dim = 0;
    for (int n = 0; n <= cfg.fock_n_cut; ++n) dim += binomial(cfg.fock_modes + n - 1, n);
    rep.fock_dim = dim;
    if (dim > kFockDimCap)
      fail("fock dimension " + std::to_string(dim) + " exceeds cap " +
           std::to_string(kFockDimCap));
  }

  if (cfg.ldp_lambda_max && !(*cfg.ldp_lambda_max > 0.0)) fail("ldp.lambda_max must be positive");
  if (cfg.ldp_beta && *cfg.ldp_beta < 0.0) fail("ldp.beta must be nonnegative");

  // Coarse cost model: dense N-body eigensolve plus the per-instant Hartree work.
  const double dim = static_cast<double>(rep.nbody_dim);
  const double steps = cfg.t > 0 ? cfg.t / cfg.dt : 0.0;
  rep.est_runtime_s = 2e-9 * dim * dim * dim + 1e-7 * steps * sites * std::log2(double(sites) + 1);
  rep.est_memory_mb = (16.0 * dim * dim + 16.0 * double(rep.fock_dim) * rep.fock_dim) / 1e6;
  return rep;
}

PairPotential make_potential(const Lattice& lat, const ExperimentConfig::Spec& spec) {
  auto need = [&](std::size_t n) {
    if (spec.params.size() < n)
      throw ConfigError("potential '" + spec.kind + "' needs " + std::to_string(n) + " params");
  };
  if (spec.kind == "zero") {
    return PairPotential::from_values(lat, VecXd::Zero(lat.sites()));
  }
  if (spec.kind == "constant") {
    need(1);
    return PairPotential::from_values(lat, VecXd::Constant(lat.sites(), spec.params[0]));
  }
  if (spec.kind == "gaussian") {
    need(2);
    const double a = spec.params[0], sigma = spec.params[1];
    if (!(sigma > 0.0)) throw ConfigError("potential gaussian needs sigma > 0");
    return PairPotential::from_function(lat, [&](const std::array<double, 3>& x) {
      double r2 = 0.0;
      for (int ax = 0; ax < lat.d; ++ax) r2 += x[ax] * x[ax];
      return a * std::exp(-r2 / (2.0 * sigma * sigma));
    });
  }
  if (spec.kind == "cosine") {
    need(1);
    const double a = spec.params[0];
    return PairPotential::from_function(lat, [&](const std::array<double, 3>& x) {
      return a * std::cos(2.0 * kPi * x[0] / lat.L);
    });
  }
  throw ConfigError("unknown potential kind '" + spec.kind + "'");
}

WaveFunction make_phi0(const Lattice& lat, const ExperimentConfig::Spec& spec) {
  const int n = lat.sites();
  VecXc vals(n);
  if (spec.kind == "plane_wave") {
    std::array<double, 3> k{0.0, 0.0, 0.0};
    for (int ax = 0; ax < lat.d; ++ax)
      k[ax] = 2.0 * kPi * (ax < static_cast<int>(spec.params.size()) ? spec.params[ax] : 0.0) /
              lat.L;
    for (int i = 0; i < n; ++i) {
      const auto x = lat.site_coords(i);
      double phase = 0.0;
      for (int ax = 0; ax < lat.d; ++ax) phase += k[ax] * x[ax];
      vals[i] = std::polar(1.0, phase);
    }
  } else if (spec.kind == "gaussian" || spec.kind == "gaussian_boosted") {
    if (spec.params.empty()) throw ConfigError("phi0 gaussian needs sigma");
    const double sigma = spec.params[0];
    if (!(sigma > 0.0)) throw ConfigError("phi0 gaussian needs sigma > 0");
    for (int i = 0; i < n; ++i) {
      const auto x = lat.site_coords(i);
      double r2 = 0.0, phase = 0.0;
      for (int ax = 0; ax < lat.d; ++ax) {
        const double dx = lat.min_image(x[ax] - lat.L / 2.0);
        r2 += dx * dx;
        if (spec.kind == "gaussian_boosted" && ax + 1 < static_cast<int>(spec.params.size()))
          phase += 2.0 * kPi * spec.params[ax + 1] * x[ax] / lat.L;
      }
      vals[i] = std::polar(std::exp(-r2 / (4.0 * sigma * sigma)), phase);
    }
  } else {
    throw ConfigError("unknown phi0 kind '" + spec.kind + "'");
  }
  return WaveFunction::normalized(lat, std::move(vals));
}

Observable make_observable(const Lattice& lat, const ExperimentConfig::Spec& spec) {
  const int n = lat.sites();
  if (spec.kind == "cosine") {
    if (spec.params.size() < 2) throw ConfigError("observable cosine needs [amplitude, harmonic]");
    const double a = spec.params[0];
    const int harm = static_cast<int>(spec.params[1]);
    VecXd m(n);
    for (int i = 0; i < n; ++i)
      m[i] = a * std::cos(2.0 * kPi * harm * lat.site_coords(i)[0] / lat.L);
    return Observable::multiplication(lat, std::move(m));
  }
  if (spec.kind == "position") {
    VecXd m(n);
    for (int i = 0; i < n; ++i) m[i] = lat.site_coords(i)[0] - lat.L / 2.0;
    return Observable::multiplication(lat, std::move(m));
  }
  if (spec.kind == "gaussian") {
    if (spec.params.size() < 2) throw ConfigError("observable gaussian needs [amplitude, sigma]");
    const double a = spec.params[0], sigma = spec.params[1];
    VecXd m(n);
    for (int i = 0; i < n; ++i) {
      const auto x = lat.site_coords(i);
      double r2 = 0.0;
      for (int ax = 0; ax < lat.d; ++ax) {
        const double dx = lat.min_image(x[ax] - lat.L / 2.0);
        r2 += dx * dx;
      }
      m[i] = a * std::exp(-r2 / (2.0 * sigma * sigma));
    }
    return Observable::multiplication(lat, std::move(m));
  }
  if (spec.kind == "projector_gaussian") {
    if (spec.params.empty()) throw ConfigError("observable projector_gaussian needs [sigma]");
    WaveFunction g = make_phi0(lat, {"gaussian", {spec.params[0]}});
    return Observable::projector(lat, g.values);
  }
  throw ConfigError("unknown observable kind '" + spec.kind + "'");
}

}  // namespace mflab
