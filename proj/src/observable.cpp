#include "nlsgibbs/observable.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <random>

namespace nlsgibbs {

std::shared_ptr<const OccupationSector> occupation_sector(int M, int n) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const OccupationSector>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{M, n}];
  if (!slot) slot = std::make_shared<const OccupationSector>(M, n);
  return slot;
}

double symmetric_norm(const Occupation& alpha) {
  int p = 0;
  for (int a : alpha) p += a;
  double pf = 1.0;
  for (int i = 2; i <= p; ++i) pf *= i;
  return std::sqrt(occupation_factorial(alpha) / pf);
}

namespace {

std::int64_t ipow(int base, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Map between the tensor space (C^M)^{(x)d} and the symmetric subspace.
struct TensorMap {
  int M = 0;
  int d = 0;
  std::int64_t size = 0;
  std::shared_ptr<const OccupationSector> sector;
  std::vector<int> rank_of_index;
  std::vector<double> norm;  // c_alpha per symmetric state
};

std::shared_ptr<const TensorMap> tensor_map(int M, int d) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const TensorMap>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({M, d});
    if (it != cache.end()) return it->second;
  }
  auto tm = std::make_shared<TensorMap>();
  tm->M = M;
  tm->d = d;
  tm->size = ipow(M, d);
  tm->sector = occupation_sector(M, d);
  tm->rank_of_index.resize(static_cast<size_t>(tm->size));
  for (std::int64_t s = 0; s < tm->size; ++s) {
    tm->rank_of_index[s] = tm->sector->rank(multiset_of_index(s, M, d));
  }
  tm->norm.resize(tm->sector->dim());
  for (int a = 0; a < tm->sector->dim(); ++a) tm->norm[a] = symmetric_norm(tm->sector->state(a));
  std::lock_guard<std::mutex> lock(mu);
  cache[{M, d}] = tm;
  return tm;
}

// x <- (1^(a) (x) xi (x) 1^(d-a-q)) x, where xi acts on slots [a, a+q).
void apply_on_slots(const Observable& xi, int a, int d, CVector& x) {
  const int M = xi.M();
  const int q = xi.particles();
  const auto tm = tensor_map(M, q);
  const std::int64_t lo_size = ipow(M, d - a - q);
  const std::int64_t mid_size = tm->size;
  const std::int64_t hi_size = ipow(M, a);
  const int D = xi.dim();
  CVector sym(D), out(D);
  for (std::int64_t hi = 0; hi < hi_size; ++hi) {
    for (std::int64_t lo = 0; lo < lo_size; ++lo) {
      const std::int64_t base = hi * mid_size * lo_size + lo;
      sym.setZero();
      for (std::int64_t m = 0; m < mid_size; ++m) sym[tm->rank_of_index[m]] += x[base + m * lo_size];
      for (int i = 0; i < D; ++i) sym[i] *= tm->norm[i];
      out.noalias() = xi.kernel() * sym;
      for (std::int64_t m = 0; m < mid_size; ++m) {
        const int r = tm->rank_of_index[m];
        x[base + m * lo_size] = tm->norm[r] * out[r];
      }
    }
  }
}

}  // namespace

Observable::Observable(int M, int p, CMatrix kernel)
    : M_(M), p_(p), kernel_(std::move(kernel)), basis_(occupation_sector(M, p)) {
  if (kernel_.rows() != basis_->dim() || kernel_.cols() != basis_->dim()) {
    throw ParameterError("observable: kernel dimension " + std::to_string(kernel_.rows()) +
                         " does not match C(p+M-1, p) = " + std::to_string(basis_->dim()));
  }
}

Observable Observable::zero(int M, int p) {
  const int D = static_cast<int>(OccupationSector::count(M, p));
  return Observable(M, p, CMatrix::Zero(D, D));
}

Observable Observable::identity(int M, int p) {
  const int D = static_cast<int>(OccupationSector::count(M, p));
  return Observable(M, p, CMatrix::Identity(D, D));
}

Observable Observable::from_tensor(int M, int p, const CMatrix& full) {
  const auto tm = tensor_map(M, p);
  if (full.rows() != tm->size || full.cols() != tm->size) throw ParameterError("from_tensor: size mismatch");
  const int D = tm->sector->dim();
  CMatrix sym = CMatrix::Zero(D, D);
  for (std::int64_t s = 0; s < tm->size; ++s) {
    const int a = tm->rank_of_index[s];
    for (std::int64_t t = 0; t < tm->size; ++t) sym(a, tm->rank_of_index[t]) += full(s, t);
  }
  for (int a = 0; a < D; ++a) {
    for (int b = 0; b < D; ++b) sym(a, b) *= tm->norm[a] * tm->norm[b];
  }
  return Observable(M, p, std::move(sym));
}

Observable Observable::rank_one(const CVector& f, const CVector& g) {
  if (f.size() != g.size()) throw ParameterError("rank_one: vectors differ in length");
  return Observable(static_cast<int>(f.size()), 1, f * g.adjoint());
}

Observable Observable::diagonal(const std::vector<double>& d) {
  CMatrix k = CMatrix::Zero(d.size(), d.size());
  for (size_t i = 0; i < d.size(); ++i) k(i, i) = d[i];
  return Observable(static_cast<int>(d.size()), 1, std::move(k));
}

Observable Observable::multiplication(const std::vector<int>& modes, const CVector& v_hat) {
  const int Q = (static_cast<int>(v_hat.size()) - 1) / 2;
  const int M = static_cast<int>(modes.size());
  CMatrix k(M, M);
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      const int q = modes[i] - modes[j];
      if (std::abs(q) > Q) throw ParameterError("multiplication: v_hat range too small");
      k(i, j) = v_hat[q + Q];
    }
  }
  return Observable(M, 1, std::move(k));
}

Observable Observable::two_body(const std::vector<int>& modes, const CVector& w_hat) {
  const int Q = (static_cast<int>(w_hat.size()) - 1) / 2;
  const int M = static_cast<int>(modes.size());
  CMatrix full = CMatrix::Zero(M * M, M * M);
  for (int k1 = 0; k1 < M; ++k1) {
    for (int k2 = 0; k2 < M; ++k2) {
      for (int l1 = 0; l1 < M; ++l1) {
        for (int l2 = 0; l2 < M; ++l2) {
          if (modes[k1] + modes[k2] != modes[l1] + modes[l2]) continue;
          const int q = modes[k1] - modes[l1];
          if (std::abs(q) > Q) throw ParameterError("two_body: w_hat range too small");
          full(k1 * M + k2, l1 * M + l2) = w_hat[q + Q];
        }
      }
    }
  }
  return from_tensor(M, 2, full);
}

CMatrix Observable::to_tensor() const {
  const auto tm = tensor_map(M_, p_);
  CMatrix full(tm->size, tm->size);
  for (std::int64_t s = 0; s < tm->size; ++s) {
    const int a = tm->rank_of_index[s];
    for (std::int64_t t = 0; t < tm->size; ++t) {
      const int b = tm->rank_of_index[t];
      full(s, t) = tm->norm[a] * kernel_(a, b) * tm->norm[b];
    }
  }
  return full;
}

double Observable::operator_norm(double tol) const {
  const int D = dim();
  if (kernel_.isZero(0.0)) return 0.0;
  std::mt19937_64 rng(0x5eedULL + static_cast<unsigned>(D));
  std::normal_distribution<double> g;
  CVector v(D);
  for (int i = 0; i < D; ++i) v[i] = cplx(g(rng), g(rng));
  v.normalize();
  double sigma2 = 0.0;
  for (int it = 0; it < 100000; ++it) {
    CVector w = kernel_.adjoint() * (kernel_ * v);
    const double est = std::abs(v.dot(w));
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (it > 0 && std::abs(est - sigma2) <= tol * est) {
      sigma2 = est;
      break;
    }
    sigma2 = est;
  }
  return std::sqrt(sigma2);
}

bool Observable::is_hermitian(double tol) const {
  return (kernel_ - kernel_.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, kernel_.cwiseAbs().maxCoeff());
}

Observable Observable::adjoint() const { return Observable(M_, p_, kernel_.adjoint()); }

Observable& Observable::operator+=(const Observable& o) {
  if (o.M_ != M_ || o.p_ != p_) throw ParameterError("observable sum: shape mismatch");
  kernel_ += o.kernel_;
  return *this;
}

Observable& Observable::operator-=(const Observable& o) {
  if (o.M_ != M_ || o.p_ != p_) throw ParameterError("observable difference: shape mismatch");
  kernel_ -= o.kernel_;
  return *this;
}

Observable& Observable::operator*=(cplx a) {
  kernel_ *= a;
  return *this;
}

Observable star_product(const Observable& xi, const Observable& eta, int r) {
  const int p = xi.particles();
  const int q = eta.particles();
  if (xi.M() != eta.M()) throw ParameterError("star product: mode counts differ");
  if (r < 0 || r > std::min(p, q)) throw ParameterError("star product: need 0 <= r <= min(p, q)");
  const int M = xi.M();
  const int d = p + q - r;
  const auto tm = tensor_map(M, d);
  const int D = tm->sector->dim();
  CMatrix out(D, D);
  CVector v(tm->size);
  for (int b = 0; b < D; ++b) {
    for (std::int64_t s = 0; s < tm->size; ++s) v[s] = tm->rank_of_index[s] == b ? tm->norm[b] : 0.0;
    apply_on_slots(eta, p - r, d, v);
    apply_on_slots(xi, 0, d, v);
    CVector col = CVector::Zero(D);
    for (std::int64_t s = 0; s < tm->size; ++s) col[tm->rank_of_index[s]] += v[s];
    for (int a = 0; a < D; ++a) out(a, b) = tm->norm[a] * col[a];
  }
  return Observable(M, d, std::move(out));
}

Observable bracket(const Observable& xi, const Observable& eta, int r) {
  return star_product(xi, eta, r) - star_product(eta, xi, r);
}

Observable free_evolve_kernel(const Observable& xi, double t, const std::vector<double>& lambdas) {
  if (static_cast<int>(lambdas.size()) != xi.M()) throw ParameterError("free evolution: spectrum size mismatch");
  const auto& basis = xi.basis();
  std::vector<double> energy(basis.dim(), 0.0);
  for (int a = 0; a < basis.dim(); ++a) {
    for (int k = 0; k < xi.M(); ++k) energy[a] += basis.state(a)[k] * lambdas[k];
  }
  CMatrix k = xi.kernel();
  for (int a = 0; a < basis.dim(); ++a) {
    for (int b = 0; b < basis.dim(); ++b) k(a, b) *= std::polar(1.0, t * (energy[a] - energy[b]));
  }
  return Observable(xi.M(), xi.particles(), std::move(k));
}

CVector symmetric_power(const CVector& c, int p) {
  const int M = static_cast<int>(c.size());
  const auto sector = occupation_sector(M, p);
  CVector v(sector->dim());
  for (int a = 0; a < sector->dim(); ++a) {
    const Occupation& alpha = sector->state(a);
    cplx prod = 1.0;
    for (int k = 0; k < M; ++k) {
      for (int i = 0; i < alpha[k]; ++i) prod *= c[k];
    }
    v[a] = prod / symmetric_norm(alpha);
  }
  return v;
}

cplx theta_value(const Observable& xi, const CVector& c) {
  if (c.size() != xi.M()) throw ParameterError("theta: field has " + std::to_string(c.size()) +
                                               " active modes, observable expects " + std::to_string(xi.M()));
  const CVector v = symmetric_power(c, xi.particles());
  return v.dot(xi.kernel() * v);
}

}  // namespace nlsgibbs
