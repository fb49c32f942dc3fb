#pragma once

#include <string>
#include <vector>

#include "nlsgibbs/spectral.hpp"

namespace nlsgibbs {

/// Compactly supported, continuous, even, nonnegative bumps on [-1, 1] with
/// unit integral; used as the base profile of mollified interactions.
enum class BaseBump { Triangle, RaisedCosine };

double base_bump(BaseBump kind, double y);
std::string to_string(BaseBump kind);
BaseBump base_bump_from_string(const std::string& name);

/// [x]: the representative of x + Z in [-1/2, 1/2).
double torus_representative(double x);

/// Two-body interaction w on the torus.
///   Nonlocal:   even cosine series w(x) = a_0 + 2 sum_{q>=1} a_q cos(2 pi q x), w >= 0.
///   Mollified:  w^eps(x) = eps^{-1} base([x]/eps), renormalized on the grid.
///   LocalDelta: w = delta, so w_hat == 1.
class PotentialSpec {
 public:
  enum class Kind { Nonlocal, Mollified, LocalDelta };

  static PotentialSpec none();
  static PotentialSpec local_delta();
  /// `fourier[q]` = w_hat(q) = w_hat(-q) for q = 0,1,...; missing modes are zero.
  static PotentialSpec nonlocal_cosine(std::vector<double> fourier);
  static PotentialSpec mollified(double eps, BaseBump base = BaseBump::Triangle);

  Kind kind() const { return kind_; }
  bool is_zero() const;
  double eps() const { return eps_; }
  BaseBump base() const { return base_; }
  const std::vector<double>& fourier() const { return fourier_; }
  std::string describe() const;

  /// w_hat(q) for q in [-2K, 2K] (index q + 2K), the range entering cubic terms.
  /// Throws ParameterError for a nonlocal series that is negative somewhere on the
  /// grid, or a mollifier supported on fewer than four grid cells.
  CVector kernel_hat(const Grid& grid) const;

  /// Physical samples w(x_j) on the grid; LocalDelta has none and throws.
  std::vector<double> physical_samples(const Grid& grid) const;

  /// sup_x w(x) on the grid; +inf for LocalDelta.
  double sup_norm(const Grid& grid) const;

 private:
  Kind kind_ = Kind::Nonlocal;
  std::vector<double> fourier_;
  double eps_ = 0.0;
  BaseBump base_ = BaseBump::Triangle;
};

}  // namespace nlsgibbs
