#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "nlsgibbs/classical.hpp"
#include "nlsgibbs/parallel.hpp"

using namespace nlsgibbs;

TEST_CASE("counter gaussians are reproducible standard complex normals") {
  CHECK(counter_gaussian(1, 2, 3) == counter_gaussian(1, 2, 3));
  CHECK(counter_gaussian(1, 2, 3) != counter_gaussian(1, 2, 4));
  CHECK(counter_gaussian(1, 2, 3) != counter_gaussian(2, 2, 3));
  const int n = 200000;
  cplx m = 0.0, m2 = 0.0;
  double a2 = 0.0, a4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const cplx z = counter_gaussian(99, i, 0);
    m += z;
    m2 += z * z;
    a2 += std::norm(z);
    a4 += std::norm(z) * std::norm(z);
  }
  // E z = E z^2 = 0, E|z|^2 = 1, E|z|^4 = 2
  CHECK(std::abs(m / double(n)) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 / double(n)) < 5.0 / std::sqrt(n));
  CHECK(a2 / n == doctest::Approx(1.0).epsilon(5.0 / std::sqrt(n)));
  CHECK(a4 / n == doctest::Approx(2.0).epsilon(30.0 / std::sqrt(n)));
}

TEST_CASE("free field sampler covariance") {
  const Grid g = Grid::make(2, 10, 1.0).with_active_modes({-1, 0, 2});
  const FreeFieldSampler s(g, 5, 0.5);
  CVector omega(3);
  omega << 1.0, cplx(0.0, 1.0), 2.0;
  const Field f = s.from_omega(omega);
  CHECK(std::abs(f[-1] - 1.0 / std::sqrt(g.lambda(-1) + 0.5)) < 1e-15);
  CHECK(std::abs(f[2] - 2.0 / std::sqrt(g.lambda(2) + 0.5)) < 1e-15);
  CHECK(f[1] == cplx(0.0));
  CHECK((s.sample(17).coeffs - s.from_omega(s.omega(17)).coeffs).norm() == 0.0);
  double m = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) m += std::norm(s.sample(i)[0]);
  CHECK(m / n == doctest::Approx(1.0 / 1.5).epsilon(0.02));
}

TEST_CASE("interaction energy against the physical double sum") {
  const Grid g = Grid::make(3, 14, 1.0);
  Field f = Field::zeros(g);
  for (int k = -3; k <= 3; ++k) f[k] = cplx(std::cos(k + 0.2), 0.3 * k) / (1.0 + k * k);
  const PotentialSpec pot = PotentialSpec::nonlocal_cosine({1.0, 0.4, 0.1});
  const auto w = pot.physical_samples(g);
  const CVector u = to_physical(f, g);
  const int P = g.P();
  double direct = 0.0;
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j) direct += w[(i - j + P) % P] * std::norm(u[i]) * std::norm(u[j]);
  direct *= 0.5 / (double(P) * P);
  CHECK(interaction_energy(f, pot, g) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(mass(f) == doctest::Approx(u.squaredNorm() / P).epsilon(1e-13));
}

TEST_CASE("ratio estimates") {
  const Estimate e = ratio_estimate({1.0, 2.0, 3.0, 4.0}, {1.0, 1.0, 1.0, 1.0});
  CHECK(e.value == cplx(2.5));
  // equal weights: jackknife equals the standard error of the mean
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  const Estimate w = ratio_estimate({1.0, 3.0}, {3.0, 1.0});
  CHECK(w.value == cplx(1.5));
  CHECK_THROWS_AS(ratio_estimate({1.0}, {0.0}), ParameterError);
  CHECK_THROWS_AS(ratio_estimate({}, {}), ParameterError);
}

TEST_CASE("wick moments") {
  const Spectrum s{{0, 1}, {2.0, 5.0}};
  CHECK(wick_moment(std::vector<int>{0}, std::vector<int>{0}, s) == cplx(0.5));
  CHECK(wick_moment(std::vector<int>{0, 0}, std::vector<int>{0, 0}, s) == cplx(2.0 / 4.0));
  CHECK(std::abs(wick_moment(std::vector<int>{0, 1, 1}, std::vector<int>{1, 0, 1}, s) - 2.0 / (2.0 * 25.0)) < 1e-15);
  CHECK(wick_moment(std::vector<int>{0}, std::vector<int>{1}, s) == cplx(0.0));
  CHECK(std::abs(wick_moment(std::vector<int>{1}, std::vector<int>{1}, s, 1.0) - 1.0 / 6.0) < 1e-15);
  CHECK_THROWS_AS(wick_moment(std::vector<int>{}, std::vector<int>{0, 0}, s), ParameterError);
}

TEST_CASE("ensembles") {
  const Grid g = Grid::make(1, 8, 1.0);
  const PotentialSpec pot = PotentialSpec::nonlocal_cosine({1.0, 0.5});
  const FreeFieldSampler s(g, 3);
  const Ensemble e = make_ensemble(s, pot, 3000);
  CHECK(e.size() == 3000);
  for (int i : {0, 17, 2999}) CHECK(e.weights[i] == doctest::Approx(std::exp(-interaction_energy(e.samples[i], pot, g))));

  SUBCASE("independent of the thread budget") {
    set_thread_budget(1);
    const Ensemble a = make_ensemble(s, pot, 3000);
    set_thread_budget(3);
    const Ensemble b = make_ensemble(s, pot, 3000);
    set_thread_budget(0);
    CHECK(a.weights == b.weights);
    const auto mass_of = [](const Field& f) { return cplx(mass(f)); };
    set_thread_budget(1);
    const Estimate ea = gibbs_expectation(a, mass_of);
    set_thread_budget(4);
    const Estimate eb = gibbs_expectation(a, mass_of);
    set_thread_budget(0);
    CHECK(ea.value == eb.value);
    CHECK(ea.std_error == eb.std_error);
  }
  SUBCASE("csv round trip") {
    const auto path = (std::filesystem::temp_directory_path() / "nlsgibbs_ensemble_test.csv").string();
    write_ensemble(e, path);
    const Ensemble r = read_ensemble(path);
    CHECK(r.size() == e.size());
    CHECK(r.grid.same_geometry(e.grid));
    CHECK(r.seed == e.seed);
    CHECK((r.samples[5].coeffs - e.samples[5].coeffs).norm() < 1e-15);
    CHECK(r.weights[5] == doctest::Approx(e.weights[5]).epsilon(1e-15));
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".json");
  }
  SUBCASE("free expectation of the mass") {
    const Ensemble free = make_ensemble(s, PotentialSpec::none(), 50000);
    const Estimate m = gibbs_expectation(free, [](const Field& f) { return cplx(mass(f)); });
    const double exact = spectrum(g).trace_inverse();
    CHECK(std::abs(m.value.real() - exact) < 4.0 * m.std_error);
    const Estimate wm = weighted_expectation(free, [](const Field&) { return cplx(1.0); },
                                             [](double n) { return n; });
    CHECK(std::abs(wm.value - m.value) < 1e-12);
  }
}

TEST_CASE("theta observable on the active modes") {
  const Grid g = Grid::make(2, 10, 1.0).with_active_modes({0, 2});
  Field f = Field::zeros(g);
  f[0] = cplx(1.0, 1.0);
  f[2] = 2.0;
  f[1] = 100.0;  // inactive, ignored
  CHECK(std::abs(theta_observable(Observable::identity(2, 1), f, g) - 6.0) < 1e-14);
  CHECK(std::abs(theta_observable(Observable::identity(2, 2), f, g) - 36.0) < 1e-12);
}
