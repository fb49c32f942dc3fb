#include <doctest.h>

#include <cmath>

#include "nlsgibbs/occupation.hpp"
#include "nlsgibbs/potential.hpp"
#include "nlsgibbs/spectral.hpp"

using namespace nlsgibbs;

TEST_CASE("grid validates its parameters") {
  CHECK_THROWS_AS(Grid::make(-1, 8, 1.0), ParameterError);
  CHECK_THROWS_AS(Grid::make(2, 9, 1.0), ParameterError);
  CHECK_THROWS_AS(Grid::make(2, 8, 1.0), ParameterError);  // below 4K+2
  CHECK_THROWS_AS(Grid::make(2, 10, 0.0), ParameterError);
  CHECK_THROWS_AS(Grid::make(2, 10, 1.0).with_active_modes({3}), ParameterError);
  CHECK_THROWS_AS(Grid::make(2, 10, 1.0).with_active_modes({}), ParameterError);
  CHECK_NOTHROW(Grid::make(2, 10, 1.0));
}

TEST_CASE("eigenvalues and active subsets") {
  const Grid g = Grid::make(3, 14, 2.0);
  CHECK(g.M() == 7);
  CHECK(g.lambda(0) == doctest::Approx(2.0));
  CHECK(g.lambda(-2) == doctest::Approx(16.0 * kPi * kPi + 2.0));
  const Grid a = g.with_active_modes({2, -1});
  CHECK(a.M() == 2);
  CHECK(a.modes().front() == -1);
  CHECK(a.is_active(2));
  CHECK_FALSE(a.is_active(0));
  const Spectrum s = spectrum(a);
  CHECK(s.lambda_min() == doctest::Approx(a.lambda(-1)));
  CHECK(s.trace_inverse(1.0) == doctest::Approx(1.0 / (a.lambda(-1) + 1.0) + 1.0 / (a.lambda(2) + 1.0)));
}

TEST_CASE("truncation tail matches a direct sum") {
  const double kappa = 0.7;
  double direct = 0.0;
  for (int k = 6; k < 2000000; ++k) direct += 2.0 / (4.0 * kPi * kPi * double(k) * k + kappa);
  CHECK(truncation_tail(5, kappa) == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("fft agrees with the naive dft") {
  const int n = 12;
  const Fft f(n);
  CVector in(n), out(n), back(n);
  for (int j = 0; j < n; ++j) in[j] = cplx(std::sin(j + 0.3), std::cos(2.0 * j));
  f.forward(in.data(), out.data());
  for (int j = 0; j < n; ++j) {
    cplx s = 0.0;
    for (int m = 0; m < n; ++m) s += in[m] * std::polar(1.0, -kTwoPi * j * m / n);
    CHECK(std::abs(out[j] - s) < 1e-12);
  }
  f.backward(out.data(), back.data());
  CHECK((back / double(n) - in).norm() < 1e-12);
}

TEST_CASE("physical and spectral representations round trip") {
  const Grid g = Grid::make(4, 18, 1.0);
  Field f = Field::zeros(g);
  for (int k = -4; k <= 4; ++k) f[k] = cplx(1.0 / (1 + k * k), 0.1 * k);
  const CVector v = to_physical(f, g);
  CHECK(std::abs(v[5] - [&] {
          cplx s = 0.0;
          for (int k = -4; k <= 4; ++k) s += f[k] * std::polar(1.0, kTwoPi * k * g.x(5));
          return s;
        }()) < 1e-12);
  CHECK((to_spectral(v, g).coeffs - f.coeffs).norm() < 1e-12);
  const CVector band = spectral_band(v, 4);
  CHECK((physical_from_band(band, g.P()) - v).norm() < 1e-12);
}

TEST_CASE("active coefficients") {
  const Grid g = Grid::make(2, 10, 1.0).with_active_modes({-2, 1});
  Field f = Field::zeros(g);
  f[-2] = 3.0;
  f[0] = 5.0;
  f[1] = 7.0;
  const CVector a = active_coefficients(f, g);
  CHECK(a.size() == 2);
  CHECK(a[0] == cplx(3.0));
  CHECK(a[1] == cplx(7.0));
  project_active(f, g);
  CHECK(f[0] == cplx(0.0));
  CHECK((field_from_active(a, g).coeffs - f.coeffs).norm() == 0.0);
}

TEST_CASE("occupation sectors") {
  for (int M = 1; M <= 4; ++M) {
    for (int n = 0; n <= 5; ++n) {
      const OccupationSector s(M, n);
      CHECK(s.dim() == OccupationSector::count(M, n));
      CHECK(s.count(M, n) == std::llround(binomial(n + M - 1, M - 1)));
      for (int i = 0; i < s.dim(); ++i) CHECK(s.rank(s.state(i)) == i);
    }
  }
  const OccupationSector s(3, 2);
  CHECK(s.state(0) == Occupation{2, 0, 0});
  CHECK(s.state(s.dim() - 1) == Occupation{0, 0, 2});
  CHECK(s.rank({1, 1, 1}) == -1);
  CHECK(occupation_factorial({3, 2}) == 12.0);
  CHECK(multiset_of_index(5, 2, 3) == Occupation{1, 2});  // 101 in base 2
}

TEST_CASE("potentials") {
  const Grid g = Grid::make(3, 14, 1.0);
  const PotentialSpec w = PotentialSpec::nonlocal_cosine({1.0, 0.5});
  const CVector wh = w.kernel_hat(g);
  CHECK(wh.size() == 13);
  CHECK(wh[6] == cplx(1.0));
  CHECK(wh[5] == cplx(0.5));
  CHECK(wh[7] == cplx(0.5));
  CHECK(wh[8] == cplx(0.0));
  CHECK(w.sup_norm(g) == doctest::Approx(2.0));
  CHECK_THROWS_AS(PotentialSpec::nonlocal_cosine({0.1, 1.0}).kernel_hat(g), ParameterError);
  CHECK(PotentialSpec::none().is_zero());

  const Grid fine = Grid::make(16, 128, 1.0);
  const PotentialSpec m = PotentialSpec::mollified(0.125);
  CHECK(std::abs(m.kernel_hat(fine)[32] - 1.0) < 1e-12);
  CHECK_THROWS_AS(PotentialSpec::mollified(0.01).kernel_hat(fine), ParameterError);
  CHECK(PotentialSpec::local_delta().kernel_hat(fine).isApproxToConstant(1.0));

  CHECK(torus_representative(0.75) == doctest::Approx(-0.25));
  CHECK(torus_representative(-0.5) == doctest::Approx(-0.5));
  for (BaseBump b : {BaseBump::Triangle, BaseBump::RaisedCosine}) {
    double s = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) s += base_bump(b, -1.0 + (i + 0.5) * 2.0 / n) * 2.0 / n;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(base_bump_from_string(to_string(b)) == b);
  }
}
