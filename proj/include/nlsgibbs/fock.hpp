#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nlsgibbs/observable.hpp"
#include "nlsgibbs/occupation.hpp"
#include "nlsgibbs/spectral.hpp"

namespace nlsgibbs {

/// Truncated bosonic Fock space over M modes: sectors n = 0..N_max.
class FockBasis {
 public:
  static constexpr std::int64_t kMaxDimension = 200000;

  FockBasis(int M, int N_max);

  int M() const { return M_; }
  int N_max() const { return N_max_; }
  const OccupationSector& sector(int n) const { return *sectors_.at(n); }
  int sector_dim(int n) const { return sector(n).dim(); }
  std::int64_t dimension() const { return offsets_.back(); }
  /// Global index of the first state of sector n.
  std::int64_t offset(int n) const { return offsets_.at(n); }

 private:
  int M_;
  int N_max_;
  std::vector<std::shared_ptr<const OccupationSector>> sectors_;
  std::vector<std::int64_t> offsets_;
};

/// Operator on the truncated Fock space stored as dense blocks between sectors;
/// block (m, n) maps sector n into sector m. Missing blocks are zero.
class FockOperator {
 public:
  explicit FockOperator(std::shared_ptr<const FockBasis> basis, bool hermitian = false)
      : basis_(std::move(basis)), hermitian_(hermitian) {}

  static FockOperator identity(std::shared_ptr<const FockBasis> basis);

  const FockBasis& basis() const { return *basis_; }
  const std::shared_ptr<const FockBasis>& basis_ptr() const { return basis_; }
  bool hermitian() const { return hermitian_; }
  void set_hermitian(bool h) { hermitian_ = h; }
  bool sector_diagonal() const;

  const std::map<std::pair<int, int>, CMatrix>& blocks() const { return blocks_; }
  /// nullptr when the block is zero
  const CMatrix* block(int m, int n) const;
  /// Block (m, n), created as zeros if absent.
  CMatrix& block_ref(int m, int n);

  CMatrix to_dense() const;
  FockOperator adjoint() const;
  /// max |entry| over all blocks
  double max_abs() const;

  FockOperator& operator+=(const FockOperator& o);
  FockOperator& operator-=(const FockOperator& o);
  FockOperator& operator*=(cplx a);
  friend FockOperator operator+(FockOperator a, const FockOperator& b) { return a += b; }
  friend FockOperator operator-(FockOperator a, const FockOperator& b) { return a -= b; }
  friend FockOperator operator*(cplx a, FockOperator b) { return b *= a; }
  friend FockOperator operator*(const FockOperator& a, const FockOperator& b);

  /// CSV rows: row_sector, col_sector, row_occupation, col_occupation, re, im.
  void write_csv(const std::string& path) const;

 private:
  std::shared_ptr<const FockBasis> basis_;
  bool hermitian_;
  std::map<std::pair<int, int>, CMatrix> blocks_;
};

/// b*(f) for a one-body vector f on the M modes; vanishes on the top sector.
FockOperator creation(const CVector& f, std::shared_ptr<const FockBasis> basis);
/// b(f) = b*(f)^dagger
FockOperator annihilation(const CVector& f, std::shared_ptr<const FockBasis> basis);

/// Sector-n block of Theta_tau(xi) = tau^{-p} sum xi b*...b* b...b (normal ordered).
CMatrix lift_block(const Observable& xi, double tau, int n);
/// Diagonal of lift_block without forming the block.
Eigen::VectorXcd lift_diagonal(const Observable& xi, double tau, int n);
FockOperator lift(const Observable& xi, double tau, std::shared_ptr<const FockBasis> basis);

/// Diagonal operator f(n / tau) on sector n.
FockOperator number_weight(const std::function<double(double)>& f, double tau,
                           std::shared_ptr<const FockBasis> basis);

/// One-body h = diag(lambda) and two-body W on the modes of a grid.
struct ModeModel {
  std::vector<int> modes;
  std::vector<double> lambdas;
  Observable one_body;
  Observable two_body;
  bool interacting = false;

  static ModeModel make(const Grid& grid, const CVector& w_hat);
  int M() const { return static_cast<int>(modes.size()); }
  /// Sector-n block of H_tau = Theta_tau(h) + Theta_tau(W) / 2.
  CMatrix hamiltonian_block(double tau, int n) const;
  CMatrix free_block(double tau, int n) const;
  CMatrix interaction_block(double tau, int n) const;
};

struct Hamiltonians {
  FockOperator free;
  FockOperator interaction;
  FockOperator full;
};
Hamiltonians build_hamiltonians(const ModeModel& model, double tau, std::shared_ptr<const FockBasis> basis);

/// Eigendecomposition of a Hermitian sector block, split over the connected
/// components of its sparsity pattern. Diagonal blocks keep V = I implicitly.
struct SectorEigen {
  Eigen::VectorXd energies;
  CMatrix vectors;
  bool diagonal = false;

  static SectorEigen of(const CMatrix& H);
  /// V^dagger A V
  CMatrix to_eigenbasis(const CMatrix& A) const;
  /// V D V^dagger for a diagonal D
  CMatrix from_eigenbasis_diagonal(const CVector& d) const;
};

class HamiltonianSpectrum {
 public:
  explicit HamiltonianSpectrum(const FockOperator& H);

  const FockBasis& basis() const { return *basis_; }
  const SectorEigen& sector(int n) const { return sectors_.at(n); }

 private:
  std::shared_ptr<const FockBasis> basis_;
  std::vector<SectorEigen> sectors_;
};

/// tr(A e^{-H - nu N_tau}) / tr(e^{-H - nu N_tau}); only sector-diagonal blocks of A contribute.
cplx grand_canonical_expectation(const FockOperator& A, const HamiltonianSpectrum& H, double tau,
                                 double nu = 0.0);
/// tr(A e^{-H0 - z W - nu N_tau}) / tr(e^{-H0 - nu N_tau}), Re z >= 0.
cplx deformed_expectation(const FockOperator& A, const FockOperator& H0, const FockOperator& W, double tau,
                          cplx z, double nu = 0.0);

/// e^{i t tau H} A e^{-i t tau H}
FockOperator heisenberg_evolve(const FockOperator& A, double t, double tau, const HamiltonianSpectrum& H);

/// G(k) = 1 / (tau (e^{(lambda_k + nu)/tau} - 1))
std::vector<double> quantum_green_function(const Spectrum& spec, double nu, double tau);

/// prod_k (1 - e^{-lambda_k/tau}) / (1 - e^{-(lambda_k+nu)/tau})
double partition_ratio(const Spectrum& spec, double nu, double tau);
/// prod_k lambda_k / (lambda_k + nu)
double partition_ratio_limit(const Spectrum& spec, double nu);
/// Same ratio as a trace quotient over the truncated Fock space.
double partition_ratio_trace(const Spectrum& spec, double nu, double tau, int N_max);

/// Free sector partition functions Z_n = sum_{|m| = n} e^{-sum_k (lambda_k+nu) m_k / tau}, n = 0..N.
std::vector<double> free_sector_partition(const Spectrum& spec, double nu, double tau, int N);
/// sum_{n > N} (n/tau)^power Z_n / Z for the free state.
double free_number_tail(const Spectrum& spec, double nu, double tau, int N, int power = 0);
/// Smallest N with free_number_tail(..., N, power) <= tol.
int free_particle_cutoff(const Spectrum& spec, double nu, double tau, double tol, int power = 0);

struct CutoffReport {
  int N_max = 0;
  double tail_estimate = 0.0;
  std::vector<double> sector_weights;  // tr_n e^{-H - nu N_tau}, n = 0..N_max
};
/// Grows N until the interacting sector weights fall below tol relative to the
/// accumulated trace, with the remaining tail extrapolated geometrically from
/// the last ratio (sector weights decay faster than geometrically once W
/// dominates). `power` weights sector n by (n/tau)^power.
CutoffReport interacting_particle_cutoff(const ModeModel& model, double tau, double nu, double tol,
                                         int power = 0, int hard_limit = 20000);

}  // namespace nlsgibbs
