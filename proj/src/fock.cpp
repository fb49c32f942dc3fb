#include "nlsgibbs/fock.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "nlsgibbs/parallel.hpp"

namespace nlsgibbs {

FockBasis::FockBasis(int M, int N_max) : M_(M), N_max_(N_max) {
  if (M < 1) throw ParameterError("fock basis: need M >= 1");
  if (N_max < 0) throw ParameterError("fock basis: need N_max >= 0");
  std::int64_t total = 0;
  for (int n = 0; n <= N_max; ++n) {
    total += OccupationSector::count(M, n);
    if (total > kMaxDimension) {
      throw ParameterError("fock basis: dimension exceeds " + std::to_string(kMaxDimension) + " at M=" +
                           std::to_string(M) + ", N_max=" + std::to_string(N_max) +
                           "; lower N_max or use the sector-streaming routines");
    }
  }
  offsets_.push_back(0);
  for (int n = 0; n <= N_max; ++n) {
    sectors_.push_back(occupation_sector(M, n));
    offsets_.push_back(offsets_.back() + sectors_.back()->dim());
  }
}

// ---------------------------------------------------------------------------

FockOperator FockOperator::identity(std::shared_ptr<const FockBasis> basis) {
  FockOperator op(basis, true);
  for (int n = 0; n <= basis->N_max(); ++n) {
    const int d = basis->sector_dim(n);
    op.blocks_[{n, n}] = CMatrix::Identity(d, d);
  }
  return op;
}

bool FockOperator::sector_diagonal() const {
  for (const auto& [key, b] : blocks_) {
    if (key.first != key.second && b.size() > 0 && !b.isZero(0.0)) return false;
  }
  return true;
}

const CMatrix* FockOperator::block(int m, int n) const {
  auto it = blocks_.find({m, n});
  return it == blocks_.end() ? nullptr : &it->second;
}

CMatrix& FockOperator::block_ref(int m, int n) {
  auto it = blocks_.find({m, n});
  if (it != blocks_.end()) return it->second;
  return blocks_[{m, n}] = CMatrix::Zero(basis_->sector_dim(m), basis_->sector_dim(n));
}

CMatrix FockOperator::to_dense() const {
  const auto D = basis_->dimension();
  CMatrix out = CMatrix::Zero(D, D);
  for (const auto& [key, b] : blocks_) {
    out.block(basis_->offset(key.first), basis_->offset(key.second), b.rows(), b.cols()) = b;
  }
  return out;
}

FockOperator FockOperator::adjoint() const {
  FockOperator out(basis_, hermitian_);
  for (const auto& [key, b] : blocks_) out.blocks_[{key.second, key.first}] = b.adjoint();
  return out;
}

double FockOperator::max_abs() const {
  double m = 0.0;
  for (const auto& [key, b] : blocks_) {
    if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
  }
  return m;
}

FockOperator& FockOperator::operator+=(const FockOperator& o) {
  for (const auto& [key, b] : o.blocks_) block_ref(key.first, key.second) += b;
  hermitian_ = hermitian_ && o.hermitian_;
  return *this;
}

FockOperator& FockOperator::operator-=(const FockOperator& o) {
  for (const auto& [key, b] : o.blocks_) block_ref(key.first, key.second) -= b;
  hermitian_ = hermitian_ && o.hermitian_;
  return *this;
}

FockOperator& FockOperator::operator*=(cplx a) {
  for (auto& [key, b] : blocks_) b *= a;
  if (a.imag() != 0.0) hermitian_ = false;
  return *this;
}

FockOperator operator*(const FockOperator& a, const FockOperator& b) {
  FockOperator out(a.basis_, false);
  for (const auto& [ka, ba] : a.blocks_) {
    for (const auto& [kb, bb] : b.blocks_) {
      if (ka.second != kb.first) continue;
      out.block_ref(ka.first, kb.second).noalias() += ba * bb;
    }
  }
  return out;
}

namespace {
std::string occupation_label(const Occupation& o) {
  std::string s;
  for (size_t i = 0; i < o.size(); ++i) s += (i ? "|" : "") + std::to_string(o[i]);
  return s;
}
}  // namespace

void FockOperator::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17) << "row_sector,col_sector,row_occupation,col_occupation,re,im\n";
  for (const auto& [key, b] : blocks_) {
    const auto& rs = basis_->sector(key.first);
    const auto& cs = basis_->sector(key.second);
    for (int i = 0; i < b.rows(); ++i) {
      for (int j = 0; j < b.cols(); ++j) {
        if (b(i, j) == 0.0) continue;
        out << key.first << "," << key.second << "," << occupation_label(rs.state(i)) << ","
            << occupation_label(cs.state(j)) << "," << b(i, j).real() << "," << b(i, j).imag() << "\n";
      }
    }
  }
}

// ---------------------------------------------------------------------------

FockOperator creation(const CVector& f, std::shared_ptr<const FockBasis> basis) {
  const int M = basis->M();
  if (f.size() != M) throw ParameterError("creation: vector length differs from mode count");
  FockOperator op(basis, false);
  for (int n = 0; n < basis->N_max(); ++n) {
    const auto& from = basis->sector(n);
    const auto& to = basis->sector(n + 1);
    CMatrix& b = op.block_ref(n + 1, n);
    for (int j = 0; j < from.dim(); ++j) {
      Occupation occ = from.state(j);
      for (int k = 0; k < M; ++k) {
        if (f[k] == 0.0) continue;
        occ[k] += 1;
        b(to.rank(occ), j) += f[k] * std::sqrt(static_cast<double>(occ[k]));
        occ[k] -= 1;
      }
    }
  }
  return op;
}

FockOperator annihilation(const CVector& f, std::shared_ptr<const FockBasis> basis) {
  return creation(f, std::move(basis)).adjoint();
}

namespace {
// sqrt(prod_k a_k! / b_k!) for b <= a componentwise
double sqrt_factorial_ratio(const Occupation& a, const Occupation& b) {
  double r = 1.0;
  for (size_t k = 0; k < a.size(); ++k) {
    for (int i = b[k] + 1; i <= a[k]; ++i) r *= i;
  }
  return std::sqrt(r);
}

// S_{alpha beta} = xi_{alpha beta} / (c_alpha c_beta)
CMatrix sequence_weights(const Observable& xi) {
  const auto& basis = xi.basis();
  CMatrix S = xi.kernel();
  for (int a = 0; a < basis.dim(); ++a) {
    for (int b = 0; b < basis.dim(); ++b) {
      S(a, b) /= symmetric_norm(basis.state(a)) * symmetric_norm(basis.state(b));
    }
  }
  return S;
}
}  // namespace

CMatrix lift_block(const Observable& xi, double tau, int n) {
  if (!(tau > 0.0)) throw ParameterError("lift: tau must be positive");
  const int M = xi.M();
  const int p = xi.particles();
  const auto sector = occupation_sector(M, n);
  const int d = sector->dim();
  CMatrix out = CMatrix::Zero(d, d);
  if (n < p) return out;
  const auto& small = xi.basis();
  const CMatrix S = sequence_weights(xi) * std::pow(tau, -p);
  Occupation r(M), m(M);
  for (int j = 0; j < d; ++j) {
    const Occupation& col = sector->state(j);
    for (int b = 0; b < small.dim(); ++b) {
      const Occupation& beta = small.state(b);
      bool fits = true;
      for (int k = 0; k < M && fits; ++k) {
        r[k] = col[k] - beta[k];
        fits = r[k] >= 0;
      }
      if (!fits) continue;
      const double down = sqrt_factorial_ratio(col, r);
      for (int a = 0; a < small.dim(); ++a) {
        const cplx s = S(a, b);
        if (s == 0.0) continue;
        const Occupation& alpha = small.state(a);
        for (int k = 0; k < M; ++k) m[k] = r[k] + alpha[k];
        out(sector->rank(m), j) += s * sqrt_factorial_ratio(m, r) * down;
      }
    }
  }
  return out;
}

Eigen::VectorXcd lift_diagonal(const Observable& xi, double tau, int n) {
  if (!(tau > 0.0)) throw ParameterError("lift: tau must be positive");
  const int M = xi.M();
  const int p = xi.particles();
  const auto sector = occupation_sector(M, n);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(sector->dim());
  if (n < p) return out;
  const auto& small = xi.basis();
  const CMatrix S = sequence_weights(xi) * std::pow(tau, -p);
  Occupation r(M), m(M);
  for (int j = 0; j < sector->dim(); ++j) {
    const Occupation& col = sector->state(j);
    for (int b = 0; b < small.dim(); ++b) {
      const Occupation& beta = small.state(b);
      bool fits = true;
      for (int k = 0; k < M && fits; ++k) {
        r[k] = col[k] - beta[k];
        fits = r[k] >= 0;
      }
      if (!fits) continue;
      // the row equals the column only for alpha = beta
      out[j] += S(b, b) * sqrt_factorial_ratio(col, r) * sqrt_factorial_ratio(col, r);
    }
  }
  return out;
}

FockOperator lift(const Observable& xi, double tau, std::shared_ptr<const FockBasis> basis) {
  if (xi.M() != basis->M()) throw ParameterError("lift: observable and basis mode counts differ");
  FockOperator op(basis, xi.is_hermitian());
  for (int n = 0; n <= basis->N_max(); ++n) op.block_ref(n, n) = lift_block(xi, tau, n);
  return op;
}

FockOperator number_weight(const std::function<double(double)>& f, double tau,
                           std::shared_ptr<const FockBasis> basis) {
  FockOperator op(basis, true);
  for (int n = 0; n <= basis->N_max(); ++n) {
    const int d = basis->sector_dim(n);
    op.block_ref(n, n) = CMatrix::Identity(d, d) * f(n / tau);
  }
  return op;
}

// ---------------------------------------------------------------------------

ModeModel ModeModel::make(const Grid& grid, const CVector& w_hat) {
  const Spectrum s = spectrum(grid);
  const int M = grid.M();
  bool interacting = w_hat.size() > 0 && !w_hat.isZero(0.0);
  Observable two = interacting ? Observable::two_body(s.modes, w_hat) : Observable::zero(M, 2);
  return ModeModel{s.modes, s.lambdas, Observable::diagonal(s.lambdas), std::move(two), interacting};
}

CMatrix ModeModel::free_block(double tau, int n) const { return lift_block(one_body, tau, n); }

CMatrix ModeModel::interaction_block(double tau, int n) const {
  if (!interacting) {
    const int d = static_cast<int>(OccupationSector::count(M(), n));
    return CMatrix::Zero(d, d);
  }
  return 0.5 * lift_block(two_body, tau, n);
}

CMatrix ModeModel::hamiltonian_block(double tau, int n) const {
  CMatrix H = free_block(tau, n);
  if (interacting) H += interaction_block(tau, n);
  return H;
}

Hamiltonians build_hamiltonians(const ModeModel& model, double tau, std::shared_ptr<const FockBasis> basis) {
  if (model.M() != basis->M()) throw ParameterError("hamiltonians: model and basis mode counts differ");
  Hamiltonians h{FockOperator(basis, true), FockOperator(basis, true), FockOperator(basis, true)};
  for (int n = 0; n <= basis->N_max(); ++n) {
    h.free.block_ref(n, n) = model.free_block(tau, n);
    h.interaction.block_ref(n, n) = model.interaction_block(tau, n);
    h.full.block_ref(n, n) = h.free.block_ref(n, n) + h.interaction.block_ref(n, n);
  }
  return h;
}

// ---------------------------------------------------------------------------

SectorEigen SectorEigen::of(const CMatrix& H) {
  const int d = static_cast<int>(H.rows());
  SectorEigen se;
  se.energies.resize(d);
  std::vector<int> parent(d);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  bool diagonal = true;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      if (i != j && H(i, j) != 0.0) {
        diagonal = false;
        parent[find(i)] = find(j);
      }
    }
  }
  if (diagonal) {
    se.diagonal = true;
    for (int i = 0; i < d; ++i) se.energies[i] = H(i, i).real();
    return se;
  }
  se.vectors = CMatrix::Zero(d, d);
  std::map<int, std::vector<int>> components;
  for (int i = 0; i < d; ++i) components[find(i)].push_back(i);
  for (const auto& [root, idx] : components) {
    const int c = static_cast<int>(idx.size());
    CMatrix sub(c, c);
    for (int a = 0; a < c; ++a) {
      for (int b = 0; b < c; ++b) sub(a, b) = H(idx[a], idx[b]);
    }
    sub = 0.5 * (sub + sub.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sub);
    if (es.info() != Eigen::Success) throw std::runtime_error("sector eigensolver failed");
    // eigenpairs stay on the component's own index set
    for (int a = 0; a < c; ++a) {
      se.energies[idx[a]] = es.eigenvalues()[a];
      for (int b = 0; b < c; ++b) se.vectors(idx[b], idx[a]) = es.eigenvectors()(b, a);
    }
  }
  return se;
}

CMatrix SectorEigen::to_eigenbasis(const CMatrix& A) const {
  if (diagonal) return A;
  return vectors.adjoint() * A * vectors;
}

CMatrix SectorEigen::from_eigenbasis_diagonal(const CVector& d) const {
  if (diagonal) return d.asDiagonal();
  return vectors * d.asDiagonal() * vectors.adjoint();
}

HamiltonianSpectrum::HamiltonianSpectrum(const FockOperator& H) : basis_(H.basis_ptr()) {
  if (!H.hermitian()) throw ParameterError("hamiltonian spectrum: operator not flagged Hermitian");
  if (!H.sector_diagonal()) throw ParameterError("hamiltonian spectrum: operator not sector-diagonal");
  sectors_.resize(basis_->N_max() + 1);
  parallel_for(basis_->N_max() + 1, [&](std::int64_t n) {
    const CMatrix* b = H.block(static_cast<int>(n), static_cast<int>(n));
    const int d = basis_->sector_dim(static_cast<int>(n));
    sectors_[n] = SectorEigen::of(b ? *b : CMatrix::Zero(d, d));
  });
}

cplx grand_canonical_expectation(const FockOperator& A, const HamiltonianSpectrum& H, double tau, double nu) {
  const int N = H.basis().N_max();
  std::vector<cplx> num(N + 1, 0.0);
  std::vector<double> den(N + 1, 0.0);
  parallel_for(N + 1, [&](std::int64_t n) {
    const SectorEigen& se = H.sector(static_cast<int>(n));
    Eigen::VectorXd w(se.energies.size());
    for (int i = 0; i < w.size(); ++i) w[i] = std::exp(-se.energies[i] - nu * n / tau);
    den[n] = w.sum();
    if (const CMatrix* a = A.block(static_cast<int>(n), static_cast<int>(n))) {
      const CMatrix t = se.to_eigenbasis(*a);
      cplx s = 0.0;
      for (int i = 0; i < w.size(); ++i) s += w[i] * t(i, i);
      num[n] = s;
    }
  });
  cplx total = 0.0;
  double z = 0.0;
  for (int n = 0; n <= N; ++n) {
    total += num[n];
    z += den[n];
  }
  return total / z;
}

cplx deformed_expectation(const FockOperator& A, const FockOperator& H0, const FockOperator& W, double tau,
                          cplx z, double nu) {
  if (z.real() < 0.0) throw ParameterError("deformed state: need Re z >= 0");
  const FockBasis& basis = H0.basis();
  cplx num = 0.0;
  double den = 0.0;
  for (int n = 0; n <= basis.N_max(); ++n) {
    const int d = basis.sector_dim(n);
    const CMatrix zero = CMatrix::Zero(d, d);
    const CMatrix& h0 = H0.block(n, n) ? *H0.block(n, n) : zero;
    const CMatrix& w = W.block(n, n) ? *W.block(n, n) : zero;
    const SectorEigen free = SectorEigen::of(h0);
    for (int i = 0; i < d; ++i) den += std::exp(-free.energies[i] - nu * n / tau);
    const CMatrix* a = A.block(n, n);
    if (!a) continue;
    CMatrix X = h0 + z * w;
    CMatrix expo;
    if (z.imag() == 0.0) {
      const SectorEigen se = SectorEigen::of(X);
      CVector e(d);
      for (int i = 0; i < d; ++i) e[i] = std::exp(-se.energies[i] - nu * n / tau);
      expo = se.from_eigenbasis_diagonal(e);
    } else {
      Eigen::ComplexEigenSolver<CMatrix> ces(X);
      if (ces.info() != Eigen::Success) throw std::runtime_error("deformed state: eigensolver failed");
      CVector e(d);
      for (int i = 0; i < d; ++i) e[i] = std::exp(-ces.eigenvalues()[i] - nu * n / tau);
      const CMatrix& P = ces.eigenvectors();
      expo = P * e.asDiagonal() * P.inverse();
    }
    num += ((*a) * expo).trace();
  }
  return num / den;
}

FockOperator heisenberg_evolve(const FockOperator& A, double t, double tau, const HamiltonianSpectrum& H) {
  const int N = H.basis().N_max();
  std::vector<CMatrix> U(N + 1);
  for (int n = 0; n <= N; ++n) {
    const SectorEigen& se = H.sector(n);
    CVector ph(se.energies.size());
    for (int i = 0; i < ph.size(); ++i) ph[i] = std::polar(1.0, t * tau * se.energies[i]);
    U[n] = se.from_eigenbasis_diagonal(ph);
  }
  FockOperator out(A.basis_ptr(), A.hermitian());
  for (const auto& [key, b] : A.blocks()) out.block_ref(key.first, key.second) = U[key.first] * b * U[key.second].adjoint();
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> quantum_green_function(const Spectrum& spec, double nu, double tau) {
  if (!(tau > 0.0) || nu < 0.0) throw ParameterError("green function: need tau > 0, nu >= 0");
  std::vector<double> g;
  for (double l : spec.lambdas) g.push_back(1.0 / (tau * std::expm1((l + nu) / tau)));
  return g;
}

double partition_ratio(const Spectrum& spec, double nu, double tau) {
  if (nu < 0.0) throw ParameterError("partition ratio: need nu >= 0");
  double r = 1.0;
  for (double l : spec.lambdas) r *= -std::expm1(-l / tau) / -std::expm1(-(l + nu) / tau);
  return r;
}

double partition_ratio_limit(const Spectrum& spec, double nu) {
  double r = 1.0;
  for (double l : spec.lambdas) r *= l / (l + nu);
  return r;
}

double partition_ratio_trace(const Spectrum& spec, double nu, double tau, int N_max) {
  const Observable h = Observable::diagonal(spec.lambdas);
  std::vector<double> num(N_max + 1), den(N_max + 1);
  parallel_for(N_max + 1, [&](std::int64_t n) {
    // H_{tau,0} is diagonal in the occupation basis
    const Eigen::VectorXcd e = lift_diagonal(h, tau, static_cast<int>(n));
    double a = 0.0, b = 0.0;
    for (int i = 0; i < e.size(); ++i) {
      b += std::exp(-e[i].real());
      a += std::exp(-e[i].real() - nu * n / tau);
    }
    num[n] = a;
    den[n] = b;
  });
  double a = 0.0, b = 0.0;
  for (int n = 0; n <= N_max; ++n) {
    a += num[n];
    b += den[n];
  }
  return a / b;
}

std::vector<double> free_sector_partition(const Spectrum& spec, double nu, double tau, int N) {
  // complete homogeneous symmetric polynomials h_n(x_1..x_M), x_k = e^{-(lambda_k+nu)/tau}
  std::vector<double> Z(N + 1, 0.0);
  Z[0] = 1.0;
  for (double l : spec.lambdas) {
    const double x = std::exp(-(l + nu) / tau);
    for (int n = 1; n <= N; ++n) Z[n] += x * Z[n - 1];
  }
  return Z;
}

double free_number_tail(const Spectrum& spec, double nu, double tau, int N, int power) {
  double logZ = 0.0;
  for (double l : spec.lambdas) logZ -= std::log(-std::expm1(-(l + nu) / tau));
  const double Z = std::exp(logZ);
  int far = std::max(N + 16, 2 * N + 16);
  for (;;) {
    const auto Zn = free_sector_partition(spec, nu, tau, far);
    double tail = 0.0;
    for (int n = N + 1; n <= far; ++n) tail += std::pow(n / tau, power) * Zn[n];
    const double last = std::pow(far / tau, power) * Zn[far];
    if (last <= 1e-20 * std::max(tail, 1e-300) || last == 0.0 || far > 50000000) return tail / Z;
    far *= 2;
  }
}

int free_particle_cutoff(const Spectrum& spec, double nu, double tau, double tol, int power) {
  double lmin = spec.lambda_min() + nu;
  // geometric decay rate of the slowest mode bounds the search window
  int hi = std::max(8, static_cast<int>(std::ceil(tau / lmin * (std::log(1.0 / tol) + 10.0))) + 64);
  while (free_number_tail(spec, nu, tau, hi, power) > tol) hi *= 2;
  int lo = 0;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (free_number_tail(spec, nu, tau, mid, power) <= tol) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

CutoffReport interacting_particle_cutoff(const ModeModel& model, double tau, double nu, double tol, int power,
                                         int hard_limit) {
  CutoffReport rep;
  double total = 0.0;
  double prev_ratio = 1.0;
  for (int n = 0; n <= hard_limit; ++n) {
    const SectorEigen se = SectorEigen::of(model.hamiltonian_block(tau, n));
    double z = 0.0;
    for (int i = 0; i < se.energies.size(); ++i) z += std::exp(-se.energies[i] - nu * n / tau);
    rep.sector_weights.push_back(z);
    const double weighted = z * std::pow(n / tau, power);
    total += z;
    if (n >= 2) {
      const double z_prev = rep.sector_weights[n - 1] * std::pow((n - 1) / tau, power);
      const double ratio = z_prev > 0.0 ? weighted / z_prev : 0.0;
      if (ratio < 1.0 && ratio <= prev_ratio * (1.0 + 1e-9)) {
        const double tail = weighted * ratio / (1.0 - ratio);
        if (tail <= tol * total) {
          rep.N_max = n;
          rep.tail_estimate = tail / total;
          return rep;
        }
      }
      prev_ratio = ratio;
    }
  }
  throw ParameterError("particle cutoff: tail still above tolerance at N = " + std::to_string(hard_limit));
}

}  // namespace nlsgibbs
