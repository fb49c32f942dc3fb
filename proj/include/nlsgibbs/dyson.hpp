#pragma once

#include <vector>

#include "nlsgibbs/classical.hpp"
#include "nlsgibbs/flow.hpp"
#include "nlsgibbs/fock.hpp"
#include "nlsgibbs/observable.hpp"

namespace nlsgibbs {

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// [W_s, xi_u]_1 with both kernels freely evolved by the one-body spectrum.
Observable dyson_step(const Observable& xi, const Observable& W, double s, double u,
                      const std::vector<double>& lambdas);

/// T0 = 1 / (2 e K ||W||): the order-j terms on sectors n <= K tau are bounded by
/// e^p K^p (2 e K ||W|| |t|)^j ||xi||. ||W|| is the norm of the truncated two-body kernel.
double dyson_radius(const Observable& W, double K_cal);

/// Coefficients e^{p+j}, j = 0..J, of the expansion of Psi^t Theta(xi):
///   e^p = xi_t,
///   e^{p+j} = i^j p (p+1) ... (p+j-1) int_{t > s_1 > ... > s_j > 0} [W_{s_j}, [..., [W_{s_1}, xi_t]_1 ...]_1]_1.
/// The nested integrals are built recursively, G_k(sigma) = int_sigma^t [W_s, G_{k-1}(s)]_1 ds,
/// by Gauss-Legendre collocation with `nodes` points on [0, t].
struct DysonSeries {
  int p = 0;
  double t = 0.0;
  double K_cal = 0.0;
  int nodes = 0;
  double ratio_bound = 0.0;  // 2 e K ||W|| |t|
  std::vector<Observable> terms;

  int max_particles() const { return p + static_cast<int>(terms.size()) - 1; }
  /// e^l, the term acting on l particles; zero outside [p, max_particles()].
  Observable coefficient(int l) const;
};

/// Throws ParameterError when |t| exceeds `safety` * T0.
DysonSeries dyson_coefficients(const Observable& xi, const ModeModel& model, double t, int J, double K_cal,
                               int nodes = 16, double safety = 0.5);

struct DysonQuantumRow {
  int L = 0;          // highest particle number kept
  double error = 0.0;  // max over sectors n <= K tau of the spectral norm
};

/// ||(Psi_tau^t Theta_tau(xi) - sum_{l <= L} Theta_tau(e^l)) restricted to H^(<= K tau)||
/// for L = p .. max_particles().
std::vector<DysonQuantumRow> dyson_quantum_errors(const Observable& xi, const DysonSeries& series,
                                                  const ModeModel& model, double tau);

/// Geometric ratio of the truncation error in L, fitted by least squares on log
/// error over rows whose error exceeds `floor_factor` times the last row's error
/// (the last row is dominated by the 1/tau remainder).
double fitted_decay_ratio(const std::vector<DysonQuantumRow>& rows, double floor_factor = 20.0);

struct DysonClassicalStats {
  std::int64_t used = 0;  // samples with N <= K
  double max_error = 0.0;
  double mean_error = 0.0;
};

/// |Psi^t Theta(xi) - sum_l Theta(e^l)| on the samples with N <= K_cal.
DysonClassicalStats dyson_classical_check(const Observable& xi, const DysonSeries& series,
                                          const std::vector<Field>& samples, const NlsFlow& flow, int L);

/// Relative error between the central difference of Theta(xi)(S_t phi) at t = 0
/// and i p (Theta([h, xi]_1) + Theta([W, xi]_1))(phi).
double dyson_first_order_error(const Observable& xi, const ModeModel& model, const Field& phi,
                               const NlsFlow& flow, double h);

}  // namespace nlsgibbs
