#pragma once

#include <vector>

#include "nlsgibbs/occupation.hpp"
#include "nlsgibbs/spectral.hpp"

namespace nlsgibbs {

/// Bounded operator xi on the symmetric p-particle space H^(p) over M modes.
///
/// The kernel is stored in the orthonormal occupation basis of H^(p)
/// (OccupationSector order), so P+ xi P+ = xi holds by construction. Kernels
/// given on the full tensor space (C^M)^{(x)p} are projected on input; both
/// the quantum lift and the classical polynomial only see that projection.
class Observable {
 public:
  Observable(int M, int p, CMatrix kernel);

  static Observable zero(int M, int p);
  static Observable identity(int M, int p);
  /// Projects a kernel on (C^M)^{(x)p}, indices s_1..s_p with s_1 most significant.
  static Observable from_tensor(int M, int p, const CMatrix& full);
  /// |f><g| on the one-particle space.
  static Observable rank_one(const CVector& f, const CVector& g);
  /// Diagonal one-particle operator sum_k d_k |u_k><u_k|.
  static Observable diagonal(const std::vector<double>& d);
  /// Multiplication by V(x) = sum_q v_hat(q) e^{2 pi i q x} on the active modes;
  /// v_hat indexed q + Q over [-Q, Q], Q >= max mode difference.
  static Observable multiplication(const std::vector<int>& modes, const CVector& v_hat);
  /// Two-body operator W_{(k1 k2),(l1 l2)} = w_hat(k1 - l1) delta_{k1+k2, l1+l2}.
  static Observable two_body(const std::vector<int>& modes, const CVector& w_hat);

  int M() const { return M_; }
  int particles() const { return p_; }
  int dim() const { return static_cast<int>(kernel_.rows()); }
  const CMatrix& kernel() const { return kernel_; }
  const OccupationSector& basis() const { return *basis_; }

  /// Embedding back into the tensor space: B xi B^dagger.
  CMatrix to_tensor() const;

  /// Largest singular value by power iteration on xi^dagger xi.
  double operator_norm(double tol = 1e-10) const;
  bool is_hermitian(double tol = 1e-12) const;

  Observable adjoint() const;
  Observable& operator+=(const Observable& o);
  Observable& operator-=(const Observable& o);
  Observable& operator*=(cplx a);
  friend Observable operator+(Observable a, const Observable& b) { return a += b; }
  friend Observable operator-(Observable a, const Observable& b) { return a -= b; }
  friend Observable operator*(cplx a, Observable b) { return b *= a; }

 private:
  int M_;
  int p_;
  CMatrix kernel_;
  std::shared_ptr<const OccupationSector> basis_;
};

/// Shared occupation sector for (M, n); cached.
std::shared_ptr<const OccupationSector> occupation_sector(int M, int n);

/// Normalization c_alpha = sqrt(prod alpha! / p!) of the symmetric basis vector
/// |alpha> = c_alpha sum_{s in seq(alpha)} |s>.
double symmetric_norm(const Occupation& alpha);

/// xi .r eta = P+ (xi (x) 1^(q-r)) (1^(p-r) (x) eta) P+ on H^(p+q-r).
Observable star_product(const Observable& xi, const Observable& eta, int r);
/// [xi, eta]_r = xi .r eta - eta .r xi
Observable bracket(const Observable& xi, const Observable& eta, int r);

/// xi_t = e^{i t sum_j h_j} xi e^{-i t sum_j h_j}, h diagonal with `lambdas`.
Observable free_evolve_kernel(const Observable& xi, double t, const std::vector<double>& lambdas);

/// Components <alpha|phi^{(x)p}> = sqrt(p!/alpha!) prod_k c_k^{alpha_k}.
CVector symmetric_power(const CVector& c, int p);

/// Theta(xi) = <phi^{(x)p}, xi phi^{(x)p}> for active-mode coefficients c.
cplx theta_value(const Observable& xi, const CVector& c);

}  // namespace nlsgibbs
