#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsgibbs/classical.hpp"
#include "nlsgibbs/flow.hpp"
#include "nlsgibbs/fock.hpp"
#include "nlsgibbs/observable.hpp"

namespace nlsgibbs {

struct CorrelationTerm {
  Observable xi;
  double t = 0.0;
};

/// Time-dependent correlation Psi^{t_1} Theta(xi^1) ... Psi^{t_m} Theta(xi^m) f(N).
struct CorrelationSpec {
  std::vector<CorrelationTerm> terms;
  /// Number weight f; empty means f = 1.
  std::function<double(double)> weight;

  void validate() const;
  int M() const { return terms.front().xi.M(); }
  /// Sum of the particle numbers of the terms.
  int total_particles() const;
  /// Reversed order, adjoint kernels, same times and weight; conjugates the value.
  CorrelationSpec adjoint() const;
};

/// prod_j Theta(xi^j)(S_{t_j} phi) f(N(phi)) for one field.
cplx classical_sample_correlation(const CorrelationSpec& spec, const NlsFlow& flow, const Field& phi);

/// rho(prod_j Psi^{t_j} Theta(xi^j) f(N)) over a weighted ensemble. One trajectory
/// per sample serves every distinct time.
Estimate classical_correlation(const CorrelationSpec& spec, const Ensemble& ensemble, const FlowParams& params);

/// Exact free (w = 0) classical correlation by expanding every Theta(xi^j_{t_j}) into
/// monomials and applying the Wick rule with covariance 1/(lambda + nu). No weight.
cplx free_classical_correlation(const CorrelationSpec& spec, const Spectrum& spec_modes, double nu = 0.0);

/// Exact free (w = 0) quantum correlation without particle cutoff: the same monomial
/// expansion as the classical case, normal ordered within each term, evaluated by
/// the quasi-free rule with ordered contractions <phi*_k phi_k> = G(k) and
/// <phi_k phi*_k> = G(k) + 1/tau, G the quantum Green function.
cplx free_quantum_correlation(const CorrelationSpec& spec, const Spectrum& spec_modes, double tau, double nu = 0.0);

/// rho_tau(prod_j Psi_tau^{t_j} Theta_tau(xi^j) f(N_tau)) with the trace taken over
/// sectors n = 0..N_max of e^{-H_tau - nu N_tau}.
cplx quantum_correlation(const CorrelationSpec& spec, const ModeModel& model, double tau, int N_max,
                         double nu = 0.0);

struct QuantumCorrelation {
  cplx value;
  int N_max = 0;
  double tail_estimate = 0.0;
};
/// N_max from the free tail bound (w = 0) or the interacting tail extrapolation,
/// with the sector weights tested against (n/tau)^{sum p}.
QuantumCorrelation quantum_correlation_auto(const CorrelationSpec& spec, const ModeModel& model, double tau,
                                            double nu = 0.0, double tol = 1e-13);

struct SweepRow {
  double parameter = 0.0;
  cplx value;
  double std_error = 0.0;
  cplx reference;
  double gap = 0.0;
  std::map<std::string, double> extras;
};

struct SweepReport {
  std::string parameter_name = "tau";
  std::vector<SweepRow> rows;

  /// gaps[i+1] <= gaps[i] for every i >= from
  bool gaps_nonincreasing(std::size_t from = 0) const;
  /// Columns: parameter, value_re, value_im, stderr, classical_ref_re, classical_ref_im, gap, extras...
  void write_csv(const std::string& path) const;
  nlohmann::json to_json() const;
};

/// Throws unless the schedule is strictly monotone and nonempty.
void validate_schedule(const std::vector<double>& schedule, const std::string& name);

/// Quantum values along a tau schedule against a fixed classical reference.
SweepReport tau_sweep(const CorrelationSpec& spec, const ModeModel& model, const std::vector<double>& taus,
                      const Estimate& reference, double nu = 0.0, double tol = 1e-13);

struct LocalLimitConfig {
  Grid grid = Grid::make(1, 8, 1.0);
  BaseBump base = BaseBump::Triangle;
  std::vector<double> taus;
  double exponent = 0.25;  // eps_tau = tau^{-exponent}
  std::uint64_t seed = 0;
  std::int64_t samples = 0;
  FlowParams flow;
};

/// Coupled limit eps_tau -> 0, tau -> infinity against the local classical correlation.
/// Extras: eps, classical_mollified_re/im, gap_quantum (quantum vs mollified classical),
/// gap_mollifier (mollified vs local classical).
SweepReport local_limit_sweep(const CorrelationSpec& spec, const LocalLimitConfig& cfg);

/// G(x) = S((x - K) / K) with S the smooth step 0 on y <= 0, 1 on y >= 1.
double smooth_tail_step(double x, double K_cal);

struct TailRow {
  double K_cal = 0.0;
  Estimate classical;
  cplx quantum;
};

/// |rho(prod Psi Theta(xi^j) G(N))| classically and at the given tau quantum mechanically.
std::vector<TailRow> tail_bound_check(const CorrelationSpec& spec, const std::vector<double>& K_schedule,
                                      const Ensemble& ensemble, const FlowParams& params, const ModeModel& model,
                                      double tau);

}  // namespace nlsgibbs
