#include <doctest.h>

#include <cmath>

#include "nlsgibbs/xsb.hpp"

using namespace nlsgibbs;

TEST_CASE("single spacetime harmonic") {
  const int P = 16, Q = 32;
  const double T = 2.0;
  const int k = 3, j = -5;
  const SpacetimeField f = SpacetimeField::sample(P, Q, T, [&](double x, double t) {
    return std::polar(2.0, kTwoPi * (k * x + j * t / T));
  });
  const CMatrix c = spacetime_coefficients(f);
  CHECK(std::abs(c(k + P / 2, j + Q / 2) - 2.0) < 1e-13);
  CHECK(c.cwiseAbs().sum() == doctest::Approx(2.0).epsilon(1e-12));
  const double eta = j / T;
  const double expected = 2.0 * std::pow(1.0 + kTwoPi * k, 0.5) * std::pow(1.0 + std::abs(eta + kTwoPi * k * k), 0.25);
  CHECK(xsb_norm(f, 0.5, 0.25) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(linf_hsigma_norm(f, 0.5) == doctest::Approx(2.0 * std::pow(1.0 + kTwoPi * k, 0.5)).epsilon(1e-12));
  CHECK(f.l4_norm() == doctest::Approx(2.0));
}

TEST_CASE("Plancherel at sigma = b = 0") {
  const SpacetimeField f = random_spacetime_field(6, 32, 64, 1.0, 3, 77);
  CHECK(xsb_norm(f, 0.0, 0.0) == doctest::Approx(f.l2_norm()).epsilon(1e-12));
  CHECK_THROWS_AS(xsb_norm(f, 0.0, 1.5), ParameterError);
}

TEST_CASE("free solutions concentrate on the characteristic") {
  const Grid g = Grid::make(4, 18, 1.0);
  Field u = Field::zeros(g);
  u[2] = 1.0;
  u[-3] = cplx(0.0, 0.5);
  const double T = resonant_window();
  const SpacetimeField f = SpacetimeField::free_evolution(u, 18, 64, T);
  const CMatrix c = spacetime_coefficients(f);
  // eta = -2 pi k^2 lies on the lattice j / T
  CHECK(std::abs(c(2 + 9, -4 + 32) - 1.0) < 1e-12);
  CHECK(std::abs(c(-3 + 9, -9 + 32) - cplx(0.0, 0.5)) < 1e-12);
  // so the modulation weight is 1 and every b gives the same norm
  CHECK(xsb_norm(f, 0.0, 0.5) == doctest::Approx(xsb_norm(f, 0.0, 0.0)).epsilon(1e-12));
  CHECK_THROWS_AS(SpacetimeField::free_evolution(u, 6, 64, T), ParameterError);
}

TEST_CASE("taper") {
  SpacetimeField f = SpacetimeField::sample(4, 8, 1.0, [](double, double) { return cplx(1.0); });
  f.taper();
  CHECK(f.values(0, 0) == cplx(0.0));
  CHECK(std::abs(f.values(2, 4) - 1.0) < 1e-15);
}

TEST_CASE("shape validation") {
  CHECK_THROWS_AS(SpacetimeField::sample(5, 8, 1.0, [](double, double) { return cplx(1.0); }), ParameterError);
  CHECK_THROWS_AS(SpacetimeField::sample(4, 6, 1.0, [](double, double) { return cplx(1.0); }), ParameterError);
  CHECK_THROWS_AS(SpacetimeField::sample(4, 8, 0.0, [](double, double) { return cplx(1.0); }), ParameterError);
  const SpacetimeField zero = SpacetimeField::sample(4, 8, 1.0, [](double, double) { return cplx(0.0); });
  CHECK_THROWS_AS(strichartz_ratio(zero), ParameterError);
}

TEST_CASE("Slobodeckij constant") {
  // int_R |e^{i z} - 1|^2 |z|^{-1-2 s} dz: midpoint rule on [0, Z], the non-oscillating tail exactly
  for (double s : {0.25, 0.375, 0.6}) {
    const double Z = 400.0;
    const int n = 4000000;
    const double h = Z / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = (i + 0.5) * h;
      acc += (2.0 - 2.0 * std::cos(z)) * std::pow(z, -1.0 - 2.0 * s) * h;
    }
    acc += 2.0 * std::pow(Z, -2.0 * s) / (2.0 * s);
    CHECK(slobodeckij_constant(s) == doctest::Approx(2.0 * acc).epsilon(1e-3));
  }
  CHECK_THROWS_AS(slobodeckij_constant(0.0), ParameterError);
  CHECK_THROWS_AS(slobodeckij_constant(1.0), ParameterError);
}

TEST_CASE("Slobodeckij norm") {
  const Grid g = Grid::make(16, 256, 1.0);
  Field c = Field::zeros(g);
  c[0] = 3.0;
  CHECK(slobodeckij_norm(c, g, 0.375) < 1e-13);
  for (int k : {4, 8}) {
    Field f = Field::zeros(g);
    f[k] = 1.0;
    const double ratio = slobodeckij_norm(f, g, 0.375) / homogeneous_sobolev_norm(f, 0.375);
    CHECK(ratio > 0.5);
    CHECK(ratio < 1.5);
  }
  Field f = Field::zeros(g);
  f[3] = 2.0;
  CHECK(homogeneous_sobolev_norm(f, 0.5) == doctest::Approx(2.0 * std::sqrt(kTwoPi * 3)));
}

TEST_CASE("Strichartz ratio is stable under time refinement for resolved fields") {
  const SpacetimeField a = random_spacetime_field(6, 32, 64, resonant_window(), 2, 5);
  const SpacetimeField b = random_spacetime_field(6, 32, 128, resonant_window(), 2, 5);
  CHECK(strichartz_ratio(b) == doctest::Approx(strichartz_ratio(a)).epsilon(0.1));
}
