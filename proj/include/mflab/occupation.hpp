#pragma once

#include <unordered_map>

#include "mflab/common.hpp"

namespace mflab {

/// Exact binomial coefficient (throws on uint64 overflow).
std::uint64_t binomial(int n, int k);

/// Nibble-packs an occupation tuple; requires modes <= 16 and n_i <= 15.
std::uint64_t pack_occupation(const std::vector<int>& occ);

/// All occupation tuples (n_1,...,n_M) with a fixed total, in ascending
/// lexicographic order, plus an index lookup. The ordering is frozen: it
/// defines basis layouts in serialized reports.
struct SectorBasis {
  int modes = 0;
  int total = 0;
  std::vector<std::vector<int>> tuples;
  std::unordered_map<std::uint64_t, int> index;

  int dim() const { return static_cast<int>(tuples.size()); }
  int find(const std::vector<int>& occ) const;
};

SectorBasis make_sector_basis(int modes, int total);

/// sum_pq A_pq adag_p a_q restricted to one fixed-total sector (total preserved).
SpMatXc one_body_in_sector(const SectorBasis& basis, const MatXc& A);

/// Apply adag(f) mapping a fixed-total sector to the next one.
/// `from`/`to` must be sectors of the same mode count with to.total == from.total + 1.
VecXc apply_creation(const SectorBasis& from, const SectorBasis& to, const VecXc& f,
                     const VecXc& amplitudes);

}  // namespace mflab
