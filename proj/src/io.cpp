#include "mflab/io.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mflab {

using nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_complex_csv(const fs::path& path, const VecXc& field) {
  std::ostringstream out;
  out << "re,im\n";
  for (int i = 0; i < field.size(); ++i)
    out << fmt17(field[i].real()) << ',' << fmt17(field[i].imag()) << '\n';
  write_text(path, out.str());
}

VecXc read_complex_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);  // header
  std::vector<cdouble> vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("malformed complex CSV: " + path.string());
    vals.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  VecXc out(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) out[i] = vals[i];
  return out;
}

void write_real_csv(const fs::path& path, const VecXd& field) {
  std::ostringstream out;
  out << "value\n";
  for (int i = 0; i < field.size(); ++i) out << fmt17(field[i]) << '\n';
  write_text(path, out.str());
}

VecXd read_real_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    vals.push_back(std::stod(line));
  }
  VecXd out(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) out[i] = vals[i];
  return out;
}

std::string sha256_file(const fs::path& path) {
  const std::string data = read_text(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, data.data(), data.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

std::string phi_file_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "phi_%06d.csv", k);
  return buf;
}

}  // namespace

void save_trajectory(const fs::path& dir, const HartreeTrajectory& traj) {
  fs::create_directories(dir);
  json manifest;
  manifest["schema"] = 1;
  manifest["lattice"] = {{"d", traj.lat.d}, {"L", traj.lat.L}, {"M", traj.lat.M}};
  manifest["dt"] = traj.dt;
  manifest["t"] = traj.horizon();
  manifest["instants"] = traj.times.size();
  manifest["times"] = traj.times;
  manifest["norms"] = traj.norms;
  manifest["energies"] = traj.energies;
  manifest["h4_norms"] = traj.h4_norms;
  manifest["potential_file"] = "potential.csv";
  std::vector<std::string> files;
  for (std::size_t k = 0; k < traj.states.size(); ++k) files.push_back(phi_file_name(k));
  manifest["files"] = files;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  write_real_csv(dir / "potential.csv", traj.v.values);
  for (std::size_t k = 0; k < traj.states.size(); ++k)
    write_complex_csv(dir / files[k], traj.states[k]);
}

HartreeTrajectory load_trajectory(const fs::path& dir) {
  json manifest = json::parse(read_text(dir / "manifest.json"));
  const Lattice lat = make_lattice(manifest["lattice"]["d"].get<int>(),
                                   manifest["lattice"]["L"].get<double>(),
                                   manifest["lattice"]["M"].get<int>());
  HartreeTrajectory traj;
  traj.lat = lat;
  traj.v = PairPotential::from_values(lat, read_real_csv(dir / manifest["potential_file"].get<std::string>()));
  traj.dt = manifest["dt"].get<double>();
  traj.times = manifest["times"].get<std::vector<double>>();
  traj.norms = manifest["norms"].get<std::vector<double>>();
  traj.energies = manifest["energies"].get<std::vector<double>>();
  traj.h4_norms = manifest["h4_norms"].get<std::vector<double>>();
  for (const auto& f : manifest["files"].get<std::vector<std::string>>()) {
    traj.states.push_back(read_complex_csv(dir / f));
    if (traj.states.back().size() != lat.sites())
      throw ConfigError("trajectory field size mismatch in " + f);
  }
  if (traj.states.size() != traj.times.size())
    throw ConfigError("trajectory manifest is inconsistent");
  return traj;
}

}  // namespace mflab
