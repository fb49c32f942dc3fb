#include "nlsgibbs/dyson.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "nlsgibbs/parallel.hpp"

namespace nlsgibbs {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw ParameterError("gauss_legendre: need n >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()[i];
    weights[i] = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
}

Observable dyson_step(const Observable& xi, const Observable& W, double s, double u,
                      const std::vector<double>& lambdas) {
  return bracket(free_evolve_kernel(W, s, lambdas), free_evolve_kernel(xi, u, lambdas), 1);
}

double dyson_radius(const Observable& W, double K_cal) {
  if (!(K_cal > 0.0)) throw ParameterError("dyson: K must be positive");
  const double w = W.operator_norm();
  if (w == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (2.0 * std::exp(1.0) * K_cal * w);
}

Observable DysonSeries::coefficient(int l) const {
  const int M = terms.front().M();
  if (l < p || l > max_particles()) return Observable::zero(M, std::max(l, 0));
  return terms[l - p];
}

namespace {
// Q(i, l) = int_{sigma_i}^{t} L_l(s) ds for the Lagrange basis on the nodes;
// row n integrates from 0.
Eigen::MatrixXd integration_matrix(const std::vector<double>& sigma, double t) {
  const int n = static_cast<int>(sigma.size());
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  auto lagrange = [&](int l, double s) {
    double v = 1.0;
    for (int m = 0; m < n; ++m) {
      if (m != l) v *= (s - sigma[m]) / (sigma[l] - sigma[m]);
    }
    return v;
  };
  Eigen::MatrixXd Q(n + 1, n);
  for (int i = 0; i <= n; ++i) {
    const double a = i < n ? sigma[i] : 0.0;
    for (int l = 0; l < n; ++l) {
      double acc = 0.0;
      for (int m = 0; m < n; ++m) {
        const double s = a + (t - a) * (x[m] + 1.0) / 2.0;
        acc += w[m] * lagrange(l, s);
      }
      Q(i, l) = acc * (t - a) / 2.0;
    }
  }
  return Q;
}
}  // namespace

DysonSeries dyson_coefficients(const Observable& xi, const ModeModel& model, double t, int J, double K_cal,
                               int nodes, double safety) {
  if (J < 0) throw ParameterError("dyson: order must be >= 0");
  if (nodes < 2) throw ParameterError("dyson: need at least 2 quadrature nodes");
  if (xi.M() != model.M()) throw ParameterError("dyson: observable and model mode counts differ");
  const Observable& W = model.two_body;
  const double T0 = dyson_radius(W, K_cal);
  if (std::abs(t) >= safety * T0) {
    throw ParameterError("dyson: |t| = " + std::to_string(std::abs(t)) + " is outside " + std::to_string(safety) +
                         " T0 = " + std::to_string(safety * T0) + "; split the time interval");
  }
  DysonSeries out;
  out.p = xi.particles();
  out.t = t;
  out.K_cal = K_cal;
  out.nodes = nodes;
  out.ratio_bound = 2.0 * std::exp(1.0) * K_cal * W.operator_norm() * std::abs(t);
  const Observable xi_t = free_evolve_kernel(xi, t, model.lambdas);
  out.terms.push_back(xi_t);
  if (J == 0 || t == 0.0 || !model.interacting) {
    for (int j = 1; j <= J; ++j) out.terms.push_back(Observable::zero(xi.M(), out.p + j));
    return out;
  }
  std::vector<double> x, w;
  gauss_legendre(nodes, x, w);
  std::vector<double> sigma(nodes);
  for (int i = 0; i < nodes; ++i) sigma[i] = t * (x[i] + 1.0) / 2.0;
  const Eigen::MatrixXd Q = integration_matrix(sigma, t);
  std::vector<Observable> W_at;
  for (double s : sigma) W_at.push_back(free_evolve_kernel(W, s, model.lambdas));

  std::vector<Observable> G(nodes, xi_t);
  cplx prefactor = 1.0;
  for (int j = 1; j <= J; ++j) {
    const int q = out.p + j;
    std::vector<Observable> f(nodes, Observable::zero(xi.M(), q));
    parallel_for(nodes, [&](std::int64_t i) { f[i] = bracket(W_at[i], G[i], 1); });
    std::vector<Observable> next(nodes, Observable::zero(xi.M(), q));
    Observable at_zero = Observable::zero(xi.M(), q);
    for (int i = 0; i <= nodes; ++i) {
      Observable& target = i < nodes ? next[i] : at_zero;
      for (int l = 0; l < nodes; ++l) target += cplx(Q(i, l)) * f[l];
    }
    G = std::move(next);
    prefactor *= cplx(0.0, 1.0) * static_cast<double>(out.p + j - 1);
    out.terms.push_back(prefactor * at_zero);
  }
  return out;
}

namespace {
double spectral_norm(const CMatrix& A) {
  if (A.size() == 0) return 0.0;
  const double herm = (A - A.adjoint()).cwiseAbs().maxCoeff();
  if (herm <= 1e-13 * std::max(1.0, A.cwiseAbs().maxCoeff())) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (A + A.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<CMatrix> svd(A);
  return svd.singularValues()[0];
}
}  // namespace

std::vector<DysonQuantumRow> dyson_quantum_errors(const Observable& xi, const DysonSeries& series,
                                                  const ModeModel& model, double tau) {
  const int n_max = static_cast<int>(std::floor(series.K_cal * tau + 1e-9));
  const int rows = static_cast<int>(series.terms.size());
  std::vector<std::vector<double>> per_sector(n_max + 1, std::vector<double>(rows, 0.0));
  parallel_for(n_max + 1, [&](std::int64_t nn) {
    const int n = static_cast<int>(nn);
    const SectorEigen se = SectorEigen::of(model.hamiltonian_block(tau, n));
    CVector ph(se.energies.size());
    for (int i = 0; i < ph.size(); ++i) ph[i] = std::polar(1.0, series.t * tau * se.energies[i]);
    const CMatrix U = se.from_eigenbasis_diagonal(ph);
    CMatrix diff = U * lift_block(xi, tau, n) * U.adjoint();
    for (int j = 0; j < rows; ++j) {
      diff -= lift_block(series.terms[j], tau, n);
      per_sector[n][j] = spectral_norm(diff);
    }
  });
  std::vector<DysonQuantumRow> out;
  for (int j = 0; j < rows; ++j) {
    DysonQuantumRow r;
    r.L = series.p + j;
    for (int n = 0; n <= n_max; ++n) r.error = std::max(r.error, per_sector[n][j]);
    out.push_back(r);
  }
  return out;
}

double fitted_decay_ratio(const std::vector<DysonQuantumRow>& rows, double floor_factor) {
  if (rows.size() < 2) throw ParameterError("decay ratio: need at least two rows");
  const double floor = floor_factor * rows.back().error;
  std::vector<double> L, y;
  for (const auto& r : rows) {
    if (r.error > floor && r.error > 0.0) {
      L.push_back(r.L);
      y.push_back(std::log(r.error));
    }
  }
  if (L.size() < 2) throw ParameterError("decay ratio: fewer than two rows above the floor");
  const double mL = std::accumulate(L.begin(), L.end(), 0.0) / L.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < L.size(); ++i) {
    sxy += (L[i] - mL) * (y[i] - my);
    sxx += (L[i] - mL) * (L[i] - mL);
  }
  return std::exp(sxy / sxx);
}

DysonClassicalStats dyson_classical_check(const Observable& xi, const DysonSeries& series,
                                          const std::vector<Field>& samples, const NlsFlow& flow, int L) {
  DysonClassicalStats st;
  const Grid& grid = flow.grid();
  double sum = 0.0;
  for (const Field& phi : samples) {
    if (mass(phi) > series.K_cal) continue;
    const CVector c = active_coefficients(phi, grid);
    const cplx exact = theta_value(xi, active_coefficients(flow.evolve(phi, series.t), grid));
    cplx approx = 0.0;
    for (int l = series.p; l <= std::min(L, series.max_particles()); ++l) approx += theta_value(series.coefficient(l), c);
    const double e = std::abs(exact - approx);
    st.max_error = std::max(st.max_error, e);
    sum += e;
    ++st.used;
  }
  st.mean_error = st.used > 0 ? sum / st.used : 0.0;
  return st;
}

double dyson_first_order_error(const Observable& xi, const ModeModel& model, const Field& phi,
                               const NlsFlow& flow, double h) {
  const Grid& grid = flow.grid();
  const auto ends = flow.evolve_to(phi, {h, -h});
  const cplx fd = (theta_value(xi, active_coefficients(ends[0], grid)) -
                   theta_value(xi, active_coefficients(ends[1], grid))) /
                  (2.0 * h);
  const CVector c = active_coefficients(phi, grid);
  const double p = xi.particles();
  cplx exact = cplx(0.0, p) * theta_value(bracket(model.one_body, xi, 1), c);
  if (model.interacting) exact += cplx(0.0, p) * theta_value(bracket(model.two_body, xi, 1), c);
  return std::abs(fd - exact) / std::max(std::abs(exact), 1e-300);
}

}  // namespace nlsgibbs
