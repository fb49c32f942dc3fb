#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nlsgibbs {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Raised for violated preconditions on user-supplied parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Torus T^1 = [0,1) truncated to Fourier modes k in {-K,...,K}, sampled at
/// P equispaced points. An optional active subset of modes restricts the
/// one-body space (Galerkin subspace); by default every mode is active.
class Grid {
 public:
  static Grid make(int K, int P, double kappa);

  /// Same geometry with only `modes` active. Modes must lie in [-K, K].
  Grid with_active_modes(std::vector<int> modes) const;

  int K() const { return K_; }
  int P() const { return P_; }
  double kappa() const { return kappa_; }
  /// Length of a coefficient array, 2K+1.
  int size() const { return 2 * K_ + 1; }
  /// Number of active modes.
  int M() const { return static_cast<int>(modes_.size()); }
  const std::vector<int>& modes() const { return modes_; }
  bool is_active(int k) const;
  int index(int k) const { return k + K_; }
  double x(int j) const { return static_cast<double>(j) / P_; }

  /// lambda_k = 4 pi^2 k^2 + kappa, eigenvalue of -Delta + kappa on e^{2 pi i k x}.
  double lambda(int k) const;

  bool same_geometry(const Grid& other) const;

 private:
  Grid(int K, int P, double kappa, std::vector<int> modes);
  int K_;
  int P_;
  double kappa_;
  std::vector<int> modes_;
  std::vector<char> active_;
};

/// One-body spectrum restricted to the active modes of a grid.
struct Spectrum {
  std::vector<int> modes;
  std::vector<double> lambdas;

  double lambda_min() const;
  /// sum over active modes of 1/(lambda_k + nu)
  double trace_inverse(double nu = 0.0) const;
};

Spectrum spectrum(const Grid& grid);

/// sum_{|k|>K} 1/(4 pi^2 k^2 + kappa): the part of tr h^{-1} dropped by truncation.
double truncation_tail(int K, double kappa);

/// Band-limited field: coefficient of e^{2 pi i k x} stored at index k+K.
struct Field {
  CVector coeffs;

  Field() = default;
  explicit Field(CVector c) : coeffs(std::move(c)) {}
  static Field zeros(const Grid& grid) { return Field(CVector::Zero(grid.size())); }

  int K() const { return (static_cast<int>(coeffs.size()) - 1) / 2; }
  cplx& operator[](int k) { return coeffs[k + K()]; }
  cplx operator[](int k) const { return coeffs[k + K()]; }
};

/// Coefficients on the active modes, in ascending mode order.
CVector active_coefficients(const Field& field, const Grid& grid);
Field field_from_active(const CVector& active, const Grid& grid);
/// Zero every coefficient outside the active set.
void project_active(Field& field, const Grid& grid);

/// Complex-to-complex DFT of fixed length backed by FFTW. Plans are created
/// once per length and shared; execute calls are thread safe.
class Fft {
 public:
  explicit Fft(int n);
  int size() const { return n_; }
  /// out_j = sum_m in_m e^{-2 pi i j m / n} (unnormalized)
  void forward(const cplx* in, cplx* out) const;
  /// out_j = sum_m in_m e^{+2 pi i j m / n} (unnormalized)
  void backward(const cplx* in, cplx* out) const;

 private:
  struct Plans;
  int n_;
  std::shared_ptr<const Plans> plans_;
};

/// Samples f(x_j) = sum_k c_k e^{2 pi i k j / P}, j = 0..P-1.
CVector to_physical(const Field& field, const Grid& grid);
/// Inverse of to_physical; keeps modes |k| <= K.
Field to_spectral(const CVector& values, const Grid& grid);

/// Spectral coefficients of P-periodic samples for modes q in [-Q, Q].
CVector spectral_band(const CVector& values, int Q);
/// Samples of sum_{|q|<=Q} c_q e^{2 pi i q j / P}.
CVector physical_from_band(const CVector& band, int P);

/// Pointwise product kernel_hat(k) * density_hat(k) over a common mode range.
CVector convolve(const CVector& kernel_hat, const CVector& density_hat);

}  // namespace nlsgibbs
