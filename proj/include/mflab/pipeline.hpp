#pragma once

#include <filesystem>

#include "mflab/config.hpp"

namespace mflab {

/// Run the full experiment: hartree -> variance -> fock-verify -> nbody -> ldp.
/// Writes all artifacts plus a manifest with content hashes into out_dir.
/// On error, partial outputs are kept and a FAILED marker names the stage.
void run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace mflab
