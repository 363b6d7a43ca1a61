#pragma once

#include <filesystem>

#include "mflab/hartree.hpp"

namespace mflab {

namespace fs = std::filesystem;

/// Complex field as CSV "re,im", one row per site, 17 significant digits.
void write_complex_csv(const fs::path& path, const VecXc& field);
VecXc read_complex_csv(const fs::path& path);

void write_real_csv(const fs::path& path, const VecXd& field);
VecXd read_real_csv(const fs::path& path);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

std::string sha256_file(const fs::path& path);

/// Trajectory directory layout: manifest.json + potential.csv + phi_%06d.csv.
void save_trajectory(const fs::path& dir, const HartreeTrajectory& traj);
HartreeTrajectory load_trajectory(const fs::path& dir);

}  // namespace mflab
