#include <doctest.h>

#include <cmath>
#include <random>

#include "nlsgibbs/dyson.hpp"

using namespace nlsgibbs;

namespace {

struct Setup {
  Grid grid = Grid::make(1, 8, 1.0).with_active_modes({0, 1});
  ModeModel model;
  Observable xi;

  explicit Setup(double w1 = 0.5) : model(make(grid, w1)), xi(Observable::rank_one(vec(1.0, 1.0), vec(1.0, 1.0))) {
    xi *= 0.5;
  }
  static ModeModel make(const Grid& g, double w1) {
    CVector w(5);
    w << 0.0, w1, 1.0, w1, 0.0;
    return ModeModel::make(g, w);
  }
  static CVector vec(cplx a, cplx b) {
    CVector v(2);
    v << a, b;
    return v;
  }
};

}  // namespace

TEST_CASE("Gauss-Legendre rule") {
  std::vector<double> x, w;
  gauss_legendre(6, x, w);
  double total = 0.0;
  for (double v : w) total += v;
  CHECK(total == doctest::Approx(2.0));
  // exact through degree 11
  for (int d = 0; d <= 11; ++d) {
    double s = 0.0;
    for (int i = 0; i < 6; ++i) s += w[i] * std::pow(x[i], d);
    CHECK(s == doctest::Approx(d % 2 ? 0.0 : 2.0 / (d + 1)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(gauss_legendre(0, x, w), ParameterError);
}

TEST_CASE("radius of convergence") {
  const Setup s;
  const double T0 = dyson_radius(s.model.two_body, 2.0);
  CHECK(T0 == doctest::Approx(1.0 / (2.0 * std::exp(1.0) * 2.0 * s.model.two_body.operator_norm())));
  CHECK(std::isinf(dyson_radius(Observable::zero(2, 2), 1.0)));
  CHECK_THROWS_AS(dyson_coefficients(s.xi, s.model, 0.9 * T0, 3, 2.0), ParameterError);
}

TEST_CASE("first coefficients") {
  const Setup s;
  const double T0 = dyson_radius(s.model.two_body, 1.0);
  const double t = 0.4 * T0;
  const DysonSeries series = dyson_coefficients(s.xi, s.model, t, 3, 1.0);
  CHECK(series.p == 1);
  CHECK(series.max_particles() == 4);
  CHECK((series.coefficient(1).kernel() - free_evolve_kernel(s.xi, t, s.model.lambdas).kernel()).norm() < 1e-14);
  CHECK(series.coefficient(7).kernel().norm() == 0.0);

  // e^{p+1} = i p int_0^t [W_s, xi_t]_1 ds by composite Simpson
  const int n = 400;
  Observable acc = Observable::zero(2, 2);
  for (int i = 0; i <= n; ++i) {
    const double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += cplx(c * t / (3.0 * n)) * dyson_step(s.xi, s.model.two_body, i * t / n, t, s.model.lambdas);
  }
  acc *= cplx(0.0, 1.0);
  CHECK((series.coefficient(2).kernel() - acc.kernel()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("no interaction, no higher terms") {
  const Setup s(0.0);
  const ModeModel free = ModeModel::make(s.grid, CVector());
  const DysonSeries series = dyson_coefficients(s.xi, free, 0.3, 3, 1.0);
  for (int l = 2; l <= series.max_particles(); ++l) CHECK(series.coefficient(l).kernel().norm() == 0.0);
}

TEST_CASE("quantum truncation errors decay with the order") {
  const Setup s;
  const double t = 0.3 * dyson_radius(s.model.two_body, 1.0);
  const DysonSeries series = dyson_coefficients(s.xi, s.model, t, 4, 1.0);
  const auto rows = dyson_quantum_errors(s.xi, series, s.model, 16.0);
  REQUIRE(rows.size() == 5);
  CHECK(rows[1].error < rows[0].error);
  CHECK(rows[2].error < rows[1].error);
  CHECK(rows.front().L == 1);
}

TEST_CASE("fitted decay ratio") {
  std::vector<DysonQuantumRow> rows{{1, 1.0}, {2, 0.1}, {3, 0.01}, {4, 1e-5}};
  CHECK(fitted_decay_ratio(rows, 20.0) == doctest::Approx(0.1));
}

TEST_CASE("classical first order by finite differences") {
  const Setup s;
  FlowParams p;
  p.dt = 1e-5;
  const PotentialSpec pot = PotentialSpec::nonlocal_cosine({1.0, 0.5});
  const NlsFlow flow(s.grid, pot, p);
  Field phi = Field::zeros(s.grid);
  phi[0] = cplx(0.3, 0.2);
  phi[1] = cplx(-0.1, 0.25);
  CHECK(dyson_first_order_error(s.xi, s.model, phi, flow, 1e-4) < 1e-5);
}

TEST_CASE("classical expansion on small-mass samples") {
  const Setup s;
  const double t = 0.3 * dyson_radius(s.model.two_body, 1.0);
  const DysonSeries series = dyson_coefficients(s.xi, s.model, t, 6, 1.0);
  FlowParams p;
  p.dt = 1e-4;
  const NlsFlow flow(s.grid, PotentialSpec::nonlocal_cosine({1.0, 0.5}), p);
  std::vector<Field> samples;
  for (int i = 0; i < 20; ++i) {
    Field f = Field::zeros(s.grid);
    f[0] = counter_gaussian(3, i, 0) * 0.4;
    f[1] = counter_gaussian(3, i, 1) * 0.1;
    samples.push_back(f);
  }
  const DysonClassicalStats st = dyson_classical_check(s.xi, series, samples, flow, 7);
  CHECK(st.used > 0);
  CHECK(st.max_error < 1e-6);
}
