#include "nlsgibbs/occupation.hpp"

#include <cmath>
#include <stdexcept>

namespace nlsgibbs {

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double occupation_factorial(const Occupation& occ) {
  double f = 1.0;
  for (int m : occ) {
    for (int i = 2; i <= m; ++i) f *= i;
  }
  return f;
}

std::int64_t OccupationSector::count(int M, int n) {
  return static_cast<std::int64_t>(binomial(n + M - 1, M - 1));
}

namespace {
void enumerate(int pos, int remaining, Occupation& cur, std::vector<Occupation>& out) {
  const int M = static_cast<int>(cur.size());
  if (pos == M - 1) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    cur[pos] = v;
    enumerate(pos + 1, remaining - v, cur, out);
  }
}
}  // namespace

OccupationSector::OccupationSector(int M, int n) : M_(M), n_(n) {
  if (M < 1 || n < 0) throw std::invalid_argument("occupation sector: need M >= 1, n >= 0");
  states_.reserve(static_cast<size_t>(count(M, n)));
  Occupation cur(M, 0);
  enumerate(0, n, cur, states_);
}

int OccupationSector::rank(const Occupation& occ) const {
  if (static_cast<int>(occ.size()) != M_) return -1;
  int rem = n_;
  double r = 0.0;
  for (int i = 0; i < M_; ++i) {
    if (occ[i] < 0 || occ[i] > rem) return -1;
    if (i == M_ - 1) {
      if (occ[i] != rem) return -1;
      break;
    }
    // states sharing the prefix but with a larger value at position i
    r += binomial(rem - occ[i] - 1 + (M_ - i - 1), M_ - i - 1);
    rem -= occ[i];
  }
  return static_cast<int>(r);
}

Occupation multiset_of_index(std::int64_t index, int M, int p) {
  Occupation occ(M, 0);
  for (int i = 0; i < p; ++i) {
    occ[index % M] += 1;
    index /= M;
  }
  return occ;
}

}  // namespace nlsgibbs
