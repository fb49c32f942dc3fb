#include <doctest.h>

#include <cmath>
#include <random>

#include "nlsgibbs/fock.hpp"

using namespace nlsgibbs;

namespace {

CMatrix random_matrix(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

CVector unit(int M, int s) {
  CVector e = CVector::Zero(M);
  e[s] = 1.0;
  return e;
}

std::shared_ptr<const FockBasis> fock(int M, int N) { return std::make_shared<const FockBasis>(M, N); }

}  // namespace

TEST_CASE("fock basis layout") {
  const FockBasis b(3, 4);
  CHECK(b.dimension() == 1 + 3 + 6 + 10 + 15);
  CHECK(b.offset(2) == 4);
  CHECK(b.sector_dim(4) == 15);
  CHECK_THROWS(FockBasis(40, 40));
}

TEST_CASE("ladder operators") {
  const auto basis = fock(2, 4);
  const CMatrix a = annihilation(unit(2, 0), basis).to_dense();
  const CMatrix ad = creation(unit(2, 0), basis).to_dense();
  CHECK((a - ad.adjoint()).norm() == 0.0);
  // b*_0 |n,0> = sqrt(n+1) |n+1,0>; |n,0> is the first state of each sector
  for (int n = 0; n < 4; ++n) {
    CHECK(std::abs(ad(basis->offset(n + 1), basis->offset(n)) - std::sqrt(n + 1.0)) < 1e-14);
  }
  // number operator from the ladder
  const CMatrix N = ad * a + creation(unit(2, 1), basis).to_dense() * annihilation(unit(2, 1), basis).to_dense();
  for (int n = 0; n <= 4; ++n) {
    for (int i = 0; i < basis->sector_dim(n); ++i) {
      const auto k = basis->offset(n) + i;
      CHECK(std::abs(N(k, k) - double(n)) < 1e-13);
    }
  }
}

TEST_CASE("canonical commutation below the cutoff") {
  std::mt19937_64 rng(11);
  const int M = 3, Nm = 3;
  const auto basis = fock(M, Nm);
  const int D = static_cast<int>(basis->dimension());
  const int below = static_cast<int>(basis->offset(Nm));
  for (int trial = 0; trial < 5; ++trial) {
    const CVector f = random_matrix(rng, M).col(0), g = random_matrix(rng, M).col(0);
    const CMatrix bf = annihilation(f, basis).to_dense(), bg = creation(g, basis).to_dense();
    const CMatrix c = bf * bg - bg * bf;
    CHECK((c.topLeftCorner(below, below) - f.dot(g) * CMatrix::Identity(below, below)).cwiseAbs().maxCoeff() < 1e-13);
    const CMatrix bh = annihilation(g, basis).to_dense();
    CHECK((bf * bh - bh * bf).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(c.rows() == D);
  }
}

TEST_CASE("lift equals the normal ordered ladder product") {
  std::mt19937_64 rng(12);
  const int M = 2, Nm = 4;
  const double tau = 3.0;
  const auto basis = fock(M, Nm);
  const int D = static_cast<int>(basis->dimension());
  std::vector<CMatrix> b(M), bs(M);
  for (int s = 0; s < M; ++s) {
    b[s] = annihilation(unit(M, s), basis).to_dense();
    bs[s] = creation(unit(M, s), basis).to_dense();
  }
  // p = 1: sum xi_{st} b*_s b_t / tau
  const Observable x1(M, 1, random_matrix(rng, 2));
  CMatrix e1 = CMatrix::Zero(D, D);
  for (int s = 0; s < M; ++s)
    for (int t = 0; t < M; ++t) e1 += x1.kernel()(s, t) * bs[s] * b[t];
  CHECK((lift(x1, tau, basis).to_dense() - e1 / tau).cwiseAbs().maxCoeff() < 1e-13);
  // p = 2 over the tensor kernel: b*_{s1} b*_{s2} b_{t2} b_{t1} / tau^2
  const Observable x2(M, 2, random_matrix(rng, 3));
  const CMatrix T = x2.to_tensor();
  CMatrix e2 = CMatrix::Zero(D, D);
  for (int s = 0; s < 4; ++s)
    for (int t = 0; t < 4; ++t) e2 += T(s, t) * bs[s / 2] * bs[s % 2] * b[t % 2] * b[t / 2];
  CHECK((lift(x2, tau, basis).to_dense() - e2 / (tau * tau)).cwiseAbs().maxCoeff() < 1e-13);
  // the diagonal shortcut
  for (int n = 0; n <= Nm; ++n) {
    CHECK((lift_diagonal(x2, tau, n) - lift_block(x2, tau, n).diagonal()).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("lift norm bound per sector") {
  std::mt19937_64 rng(13);
  for (int p = 1; p <= 3; ++p) {
    const Observable xi(3, p, random_matrix(rng, static_cast<int>(OccupationSector::count(3, p))));
    for (int n = p; n <= 6; ++n) {
      const double tau = 1.7;
      const double norm = lift_block(xi, tau, n).jacobiSvd().singularValues()[0];
      CHECK(norm <= std::pow(n / tau, p) * xi.operator_norm(1e-14) * (1 + 1e-10));
    }
    CHECK(lift_block(xi, 1.0, p - 1).norm() == 0.0);
  }
}

TEST_CASE("single mode closed forms") {
  const Grid g = Grid::make(0, 8, 1.0);
  CVector w(1);
  w << 0.8;
  const ModeModel model = ModeModel::make(g, w);
  const double tau = 5.0;
  for (int n = 0; n <= 6; ++n) {
    CHECK(std::abs(model.interaction_block(tau, n)(0, 0) - 0.8 * n * (n - 1) / (2 * tau * tau)) < 1e-14);
    CHECK(std::abs(model.free_block(tau, n)(0, 0) - 1.0 * n / tau) < 1e-14);
  }
  const Spectrum s = spectrum(g);
  CHECK(quantum_green_function(s, 0.0, 1.0)[0] == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)));
  CHECK(partition_ratio(s, 1.0, 1.0) == doctest::Approx(0.7310585786300049));
  CHECK(partition_ratio_limit(s, 1.0) == doctest::Approx(0.5));
  CHECK(std::abs(partition_ratio(s, 1.0, 1e6) - 0.5) < 1e-6);

  // grand canonical number density at tau = 1 against the quasi-free value
  const int Nm = free_particle_cutoff(s, 0.0, 1.0, 1e-15, 1);
  const auto basis = fock(1, Nm);
  const ModeModel free = ModeModel::make(g, CVector());
  const Hamiltonians H = build_hamiltonians(free, 1.0, basis);
  const cplx n = grand_canonical_expectation(lift(Observable::identity(1, 1), 1.0, basis), HamiltonianSpectrum(H.full), 1.0);
  CHECK(std::abs(n - 1.0 / (std::exp(1.0) - 1.0)) < 1e-13);
}

TEST_CASE("partition ratio as a trace") {
  const Grid g = Grid::make(1, 8, 1.0);
  const Spectrum s = spectrum(g);
  for (double tau : {1.0, 4.0}) {
    const int N = free_particle_cutoff(s, 0.0, tau, 1e-13);
    CHECK(std::abs(partition_ratio_trace(s, 1.0, tau, N) - partition_ratio(s, 1.0, tau)) < 1e-10);
  }
}

TEST_CASE("free sector partition functions") {
  const Spectrum s{{0, 1}, {1.0, 2.5}};
  const double tau = 2.0, nu = 0.3;
  const auto Z = free_sector_partition(s, nu, tau, 5);
  for (int n = 0; n <= 5; ++n) {
    double direct = 0.0;
    for (int a = 0; a <= n; ++a) direct += std::exp(-((1.0 + nu) * a + (2.5 + nu) * (n - a)) / tau);
    CHECK(Z[n] == doctest::Approx(direct).epsilon(1e-13));
  }
  // total Z = prod 1 / (1 - e^{-(lambda+nu)/tau})
  const auto big = free_sector_partition(s, nu, tau, 400);
  double total = 0.0;
  for (double z : big) total += z;
  const double exact = 1.0 / ((1 - std::exp(-1.3 / tau)) * (1 - std::exp(-2.8 / tau)));
  CHECK(total == doctest::Approx(exact).epsilon(1e-12));
  const int N = free_particle_cutoff(s, nu, tau, 1e-9);
  CHECK(free_number_tail(s, nu, tau, N) <= 1e-9);
  CHECK(free_number_tail(s, nu, tau, N - 1) > 1e-9);
}

TEST_CASE("Heisenberg evolution") {
  std::mt19937_64 rng(14);
  const Grid g = Grid::make(1, 8, 1.0).with_active_modes({0, 1});
  CVector w(5);
  w << 0.0, 0.5, 1.0, 0.5, 0.0;
  const ModeModel model = ModeModel::make(g, w);
  const double tau = 3.0;
  const auto basis = fock(2, 6);
  const Hamiltonians H = build_hamiltonians(model, tau, basis);
  const HamiltonianSpectrum spec(H.full);
  const Observable xi(2, 1, random_matrix(rng, 2));
  const FockOperator A = lift(xi, tau, basis);

  SUBCASE("free evolution of a lift is the lift of the evolved kernel") {
    const HamiltonianSpectrum free(H.free);
    const double t = 0.31;
    const FockOperator At = heisenberg_evolve(A, t, tau, free);
    const FockOperator expected = lift(free_evolve_kernel(xi, t, model.lambdas), tau, basis);
    CHECK((At - expected).max_abs() < 1e-12);
  }
  SUBCASE("the Gibbs state is invariant") {
    const cplx a0 = grand_canonical_expectation(A, spec, tau);
    for (double t : {0.2, 1.0, -3.0}) {
      CHECK(std::abs(grand_canonical_expectation(heisenberg_evolve(A, t, tau, spec), spec, tau) - a0) < 1e-12);
    }
  }
  SUBCASE("group property and unitarity") {
    const FockOperator a = heisenberg_evolve(heisenberg_evolve(A, 0.2, tau, spec), 0.3, tau, spec);
    CHECK((a - heisenberg_evolve(A, 0.5, tau, spec)).max_abs() < 1e-11);
    const FockOperator back = heisenberg_evolve(heisenberg_evolve(A, 0.7, tau, spec), -0.7, tau, spec);
    CHECK((back - A).max_abs() < 1e-11);
  }
  SUBCASE("deformed expectations interpolate between free and interacting") {
    const HamiltonianSpectrum free(H.free);
    CHECK(std::abs(deformed_expectation(A, H.free, H.interaction, tau, 0.0) - grand_canonical_expectation(A, free, tau)) < 1e-12);
    const cplx z1 = deformed_expectation(A, H.free, H.interaction, tau, 1.0);
    const cplx z1_norm = deformed_expectation(FockOperator::identity(basis), H.free, H.interaction, tau, 1.0);
    CHECK(std::abs(z1 / z1_norm - grand_canonical_expectation(A, spec, tau)) < 1e-12);
  }
}

TEST_CASE("interacting cutoff") {
  const Grid g = Grid::make(1, 8, 1.0).with_active_modes({0, 1});
  CVector w(5);
  w << 0.0, 0.5, 1.0, 0.5, 0.0;
  const ModeModel model = ModeModel::make(g, w);
  const CutoffReport r = interacting_particle_cutoff(model, 4.0, 0.0, 1e-12);
  CHECK(r.N_max > 0);
  CHECK(r.tail_estimate <= 1e-12);
  CHECK(static_cast<int>(r.sector_weights.size()) == r.N_max + 1);
  // interaction only shrinks the sector weights
  const auto Z = free_sector_partition(spectrum(g), 0.0, 4.0, r.N_max);
  for (int n = 0; n <= r.N_max; ++n) CHECK(r.sector_weights[n] <= Z[n] * (1 + 1e-12));
}
