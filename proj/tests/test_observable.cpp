#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nlsgibbs/observable.hpp"

using namespace nlsgibbs;

namespace {

CMatrix random_matrix(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

Observable random_observable(std::mt19937_64& rng, int M, int p) {
  return Observable(M, p, random_matrix(rng, static_cast<int>(OccupationSector::count(M, p))));
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// average of the slot permutations on (C^M)^{(x)n}
CMatrix symmetrizer(int M, int n) {
  const int d = ipow(M, n);
  CMatrix P = CMatrix::Zero(d, d);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  int count = 0;
  do {
    ++count;
    for (int s = 0; s < d; ++s) {
      std::vector<int> digits(n);
      for (int j = n - 1, x = s; j >= 0; --j, x /= M) digits[j] = x % M;
      int t = 0;
      for (int j = 0; j < n; ++j) t = t * M + digits[perm[j]];
      P(t, s) += 1.0;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return P / count;
}

CVector tensor_power(const CVector& c, int p) {
  CVector v = CVector::Ones(1);
  for (int j = 0; j < p; ++j) {
    CVector w(v.size() * c.size());
    for (int a = 0; a < v.size(); ++a) w.segment(a * c.size(), c.size()) = v[a] * c;
    v = w;
  }
  return v;
}

}  // namespace

TEST_CASE("symmetric basis embedding is an isometry") {
  std::mt19937_64 rng(1);
  const Observable xi = random_observable(rng, 3, 2);
  const CMatrix T = xi.to_tensor();
  CHECK(T.rows() == 9);
  const CMatrix P = symmetrizer(3, 2);
  CHECK((P * T * P - T).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((Observable::from_tensor(3, 2, T).kernel() - xi.kernel()).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(std::abs(T.trace() - xi.kernel().trace()) < 1e-12);
  CHECK(symmetric_norm({1, 1}) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("from_tensor projects on symmetric tensors") {
  std::mt19937_64 rng(2);
  const CMatrix full = random_matrix(rng, 8);
  const CMatrix P = symmetrizer(2, 3);
  const Observable xi = Observable::from_tensor(2, 3, full);
  CHECK((xi.to_tensor() - P * full * P).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("star product against the tensor space definition") {
  std::mt19937_64 rng(3);
  const int M = 2;
  for (int p = 1; p <= 2; ++p) {
    for (int q = 1; q <= 2; ++q) {
      for (int r = 0; r <= std::min(p, q); ++r) {
        const Observable xi = random_observable(rng, M, p), eta = random_observable(rng, M, q);
        const int n = p + q - r;
        const CMatrix X = kron(xi.to_tensor(), CMatrix::Identity(ipow(M, q - r), ipow(M, q - r)));
        const CMatrix Y = kron(CMatrix::Identity(ipow(M, p - r), ipow(M, p - r)), eta.to_tensor());
        const CMatrix P = symmetrizer(M, n);
        const CMatrix expected = P * X * Y * P;
        const Observable s = star_product(xi, eta, r);
        CHECK(s.particles() == n);
        CHECK((s.to_tensor() - expected).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((bracket(xi, eta, r).kernel() - s.kernel() + star_product(eta, xi, r).kernel()).norm() < 1e-12);
      }
    }
  }
  std::mt19937_64 r2(4);
  const Observable a = random_observable(r2, 2, 1), b = random_observable(r2, 2, 2);
  CHECK_THROWS_AS(star_product(a, b, 2), ParameterError);
}

TEST_CASE("bracket is antisymmetric") {
  std::mt19937_64 rng(5);
  const Observable xi = random_observable(rng, 3, 2), eta = random_observable(rng, 3, 2);
  for (int r = 0; r <= 2; ++r) {
    CHECK((bracket(xi, eta, r).kernel() + bracket(eta, xi, r).kernel()).cwiseAbs().maxCoeff() < 1e-12);
  }
  // full contraction of one-particle operators is the matrix product
  const Observable a = random_observable(rng, 3, 1), b = random_observable(rng, 3, 1);
  CHECK((star_product(a, b, 1).kernel() - a.kernel() * b.kernel()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("theta value is the quadratic form on the tensor power") {
  std::mt19937_64 rng(6);
  const CVector c = random_matrix(rng, 3).col(0);
  for (int p = 1; p <= 3; ++p) {
    const Observable xi = random_observable(rng, 3, p);
    const CVector v = tensor_power(c, p);
    const cplx expected = v.dot(xi.to_tensor() * v);
    CHECK(std::abs(theta_value(xi, c) - expected) < 1e-10 * std::abs(expected));
  }
  const CVector s = symmetric_power(c, 2);
  CHECK(s[0] == c[0] * c[0]);
  CHECK(std::abs(s[1] - std::sqrt(2.0) * c[0] * c[1]) < 1e-14);
  // the number observable is the mass
  CHECK(std::abs(theta_value(Observable::identity(3, 1), c) - c.squaredNorm()) < 1e-13);
}

TEST_CASE("free evolution of kernels") {
  std::mt19937_64 rng(7);
  const std::vector<double> lambdas{1.0, 40.5, 7.0};
  const Observable xi = random_observable(rng, 3, 2);
  const double t = 0.37;
  const CMatrix Tt = free_evolve_kernel(xi, t, lambdas).to_tensor();
  const CMatrix T = xi.to_tensor();
  for (int s = 0; s < 9; ++s) {
    for (int u = 0; u < 9; ++u) {
      const double Ls = lambdas[s / 3] + lambdas[s % 3], Lu = lambdas[u / 3] + lambdas[u % 3];
      CHECK(std::abs(Tt(s, u) - std::polar(1.0, t * (Ls - Lu)) * T(s, u)) < 1e-12);
    }
  }
  CHECK(free_evolve_kernel(xi, t, lambdas).operator_norm() == doctest::Approx(xi.operator_norm()).epsilon(1e-8));
}

TEST_CASE("structured observables") {
  const std::vector<int> modes{-1, 0, 1};
  CVector w(5);
  w << 0.0, 0.5, 1.0, 0.5, 0.0;
  const Observable W = Observable::two_body(modes, w);
  CHECK(W.is_hermitian());
  CMatrix full = CMatrix::Zero(9, 9);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          if (modes[a] + modes[b] != modes[c] + modes[d]) continue;
          const int q = modes[a] - modes[c];
          if (std::abs(q) <= 2) full(3 * a + b, 3 * c + d) = w[q + 2];
        }
  const CMatrix P = symmetrizer(3, 2);
  CHECK((W.to_tensor() - P * full * P).cwiseAbs().maxCoeff() < 1e-13);

  CVector v(5);
  v << 0.0, cplx(0.2, 0.1), 1.0, cplx(0.2, -0.1), 0.0;
  const Observable V = Observable::multiplication(modes, v);
  CHECK(V.kernel()(0, 1) == cplx(0.2, 0.1));
  CHECK(V.kernel()(1, 1) == cplx(1.0));

  CVector f(2), g(2);
  f << 1.0, cplx(0.0, 2.0);
  g << 3.0, 1.0;
  const Observable R = Observable::rank_one(f, g);
  CHECK((R.kernel() - f * g.adjoint()).norm() < 1e-15);
  CHECK(R.operator_norm() == doctest::Approx(f.norm() * g.norm()));
  CHECK((R.adjoint().kernel() - R.kernel().adjoint()).norm() == 0.0);
  CHECK(Observable::diagonal({1.0, 2.0}).kernel()(1, 1) == cplx(2.0));
  CHECK_THROWS_AS(Observable(2, 2, CMatrix::Zero(4, 4)), ParameterError);
}

TEST_CASE("operator norm matches the largest singular value") {
  std::mt19937_64 rng(8);
  const Observable xi = random_observable(rng, 3, 2);
  const double sv = xi.kernel().jacobiSvd().singularValues()[0];
  CHECK(xi.operator_norm(1e-14) == doctest::Approx(sv).epsilon(1e-9));
}
