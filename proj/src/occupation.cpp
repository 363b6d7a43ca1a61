#include "mflab/occupation.hpp"

#include <cmath>

namespace mflab {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    std::uint64_t next = r * (n - k + i);
    if (next / (n - k + i) != r) throw CapError("binomial overflow");
    r = next / i;
  }
  return r;
}

std::uint64_t pack_occupation(const std::vector<int>& occ) {
  if (occ.size() > 16) throw CapError("occupation packing supports at most 16 modes");
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (occ[i] < 0 || occ[i] > 15) throw CapError("occupation packing supports n_i <= 15");
    key |= static_cast<std::uint64_t>(occ[i]) << (4 * i);
  }
  return key;
}

int SectorBasis::find(const std::vector<int>& occ) const {
  auto it = index.find(pack_occupation(occ));
  return it == index.end() ? -1 : it->second;
}

namespace {

void enumerate(int modes, int remaining, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
  const int pos = static_cast<int>(cur.size());
  if (pos == modes - 1) {
    cur.push_back(remaining);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int n = 0; n <= remaining; ++n) {
    cur.push_back(n);
    enumerate(modes, remaining - n, cur, out);
    cur.pop_back();
  }
}

}  // namespace

SectorBasis make_sector_basis(int modes, int total) {
  if (modes < 1) throw ConfigError("sector basis needs at least one mode");
  if (total < 0) throw ConfigError("sector basis total must be nonnegative");
  SectorBasis b;
  b.modes = modes;
  b.total = total;
  std::vector<int> cur;
  enumerate(modes, total, cur, b.tuples);
  const std::uint64_t expect = binomial(modes + total - 1, total);
  if (b.tuples.size() != expect) throw NumericError("sector basis enumeration mismatch");
  b.index.reserve(b.tuples.size());
  for (std::size_t i = 0; i < b.tuples.size(); ++i)
    b.index.emplace(pack_occupation(b.tuples[i]), static_cast<int>(i));
  return b;
}

SpMatXc one_body_in_sector(const SectorBasis& basis, const MatXc& A) {
  const int modes = basis.modes;
  if (A.rows() != modes || A.cols() != modes)
    throw ConfigError("one_body_in_sector: matrix size does not match mode count");
  std::vector<Eigen::Triplet<cdouble>> trip;
  std::vector<int> occ;
  for (int col = 0; col < basis.dim(); ++col) {
    const auto& n = basis.tuples[col];
    cdouble diag = 0.0;
    for (int p = 0; p < modes; ++p) diag += A(p, p) * static_cast<double>(n[p]);
    if (diag != cdouble(0.0)) trip.emplace_back(col, col, diag);
    for (int q = 0; q < modes; ++q) {
      if (n[q] == 0) continue;
      for (int p = 0; p < modes; ++p) {
        if (p == q || A(p, q) == cdouble(0.0)) continue;
        occ = n;
        occ[q] -= 1;
        occ[p] += 1;
        const int row = basis.find(occ);
        if (row < 0) throw NumericError("one_body_in_sector: target state missing");
        const double amp = std::sqrt(static_cast<double>(n[q]) * (n[p] + 1));
        trip.emplace_back(row, col, A(p, q) * amp);
      }
    }
  }
  SpMatXc out(basis.dim(), basis.dim());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

VecXc apply_creation(const SectorBasis& from, const SectorBasis& to, const VecXc& f,
                     const VecXc& amplitudes) {
  if (to.total != from.total + 1 || to.modes != from.modes)
    throw ConfigError("apply_creation: sector mismatch");
  if (f.size() != from.modes || amplitudes.size() != from.dim())
    throw ConfigError("apply_creation: size mismatch");
  VecXc out = VecXc::Zero(to.dim());
  std::vector<int> occ;
  for (int i = 0; i < from.dim(); ++i) {
    if (amplitudes[i] == cdouble(0.0)) continue;
    const auto& n = from.tuples[i];
    for (int p = 0; p < from.modes; ++p) {
      if (f[p] == cdouble(0.0)) continue;
      occ = n;
      occ[p] += 1;
      const int j = to.find(occ);
      out[j] += f[p] * std::sqrt(static_cast<double>(occ[p])) * amplitudes[i];
    }
  }
  return out;
}

}  // namespace mflab
