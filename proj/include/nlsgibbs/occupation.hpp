#pragma once

#include <cstdint>
#include <vector>

namespace nlsgibbs {

using Occupation = std::vector<int>;

/// Binomial coefficient as double; exact for the small arguments used here.
double binomial(int n, int k);
/// Product of factorials prod_k occ_k!.
double occupation_factorial(const Occupation& occ);

/// All occupation vectors (n_1..n_M) with sum n, in a fixed order: descending
/// lexicographic, so (n,0,...,0) comes first and (0,...,0,n) last. This is the
/// orthonormal basis of the symmetric n-particle space H^(n) over M modes.
class OccupationSector {
 public:
  OccupationSector(int M, int n);

  int M() const { return M_; }
  int particles() const { return n_; }
  int dim() const { return static_cast<int>(states_.size()); }
  const Occupation& state(int i) const { return states_[i]; }
  const std::vector<Occupation>& states() const { return states_; }

  /// Position of `occ` in this sector; -1 if it is not a member.
  int rank(const Occupation& occ) const;

  /// Number of occupations of n particles in M modes, C(n+M-1, M-1).
  static std::int64_t count(int M, int n);

 private:
  int M_;
  int n_;
  std::vector<Occupation> states_;
};

/// Occupation vector of a tensor index (s_1..s_p), s_1 most significant in base M.
Occupation multiset_of_index(std::int64_t index, int M, int p);

}  // namespace nlsgibbs
