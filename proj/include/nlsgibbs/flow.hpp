#pragma once

#include <string>
#include <vector>

#include "nlsgibbs/observable.hpp"
#include "nlsgibbs/potential.hpp"
#include "nlsgibbs/spectral.hpp"

namespace nlsgibbs {

struct FlowParams {
  double dt = 1e-3;
  /// Steps between recorded trajectory points; 0 records only the endpoints.
  int record_interval = 0;
  /// Relative tolerance of the implicit nonlinear substep.
  double implicit_tol = 1e-15;
  int implicit_max_iter = 60;

  void validate() const;
};

struct TrajectoryReport {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> energy;
  std::vector<Field> checkpoints;
  double max_mass_drift = 0.0;    // relative
  double max_energy_drift = 0.0;  // relative

  void write_csv(const std::string& path, bool with_coefficients = false) const;
};

/// Galerkin-truncated cubic NLS
///   i du/dt = (-Delta + kappa) u + P[(w * |u|^2) u]
/// on the active modes of the grid, integrated by Strang splitting: exact
/// linear propagation, and a symmetric implicit nonlinear substep
///   u1 = exp(-i h P V P) u0,  V = w * (|u0|^2 + |u1|^2) / 2,
/// which is unitary (mass exact), time-reversible and second order.
class NlsFlow {
 public:
  NlsFlow(Grid grid, PotentialSpec potential, FlowParams params = {});

  const Grid& grid() const { return grid_; }
  const PotentialSpec& potential() const { return potential_; }
  const FlowParams& params() const { return params_; }

  /// S_t u0; negative t runs the flow backwards.
  Field evolve(const Field& u0, double t) const;
  /// S_t u0 at every requested time (any order, duplicates allowed), one pass per sign.
  std::vector<Field> evolve_to(const Field& u0, const std::vector<double>& times) const;
  TrajectoryReport trajectory(const Field& u0, double t) const;

  double energy(const Field& u) const;

  /// One Strang step of length h (any sign).
  void step(CVector& active, double h) const;

 private:
  void nonlinear(CVector& active, double h) const;
  CVector potential_band(const CVector& density_band) const;
  CVector density_band(const CVector& a, const CVector& b) const;
  void apply_exp(const CVector& v_band, double h, CVector& active) const;

  Grid grid_;
  PotentialSpec potential_;
  FlowParams params_;
  std::vector<double> lambdas_;
  CVector w_hat_;
  bool free_ = false;
  bool dense_ = false;
};

/// Sum_k lambda_k |c_k|^2 + W(u).
double hamiltonian_energy(const Field& u, const PotentialSpec& potential, const Grid& grid);

/// Mollified potential, validated against the grid resolution.
PotentialSpec mollifier_kernel(double eps, BaseBump base, const Grid& grid);

/// Theta(xi)(S_t phi).
cplx flow_observable(const Observable& xi, const Field& phi, double t, const PotentialSpec& potential,
                     const Grid& grid, const FlowParams& params = {});

/// Largest dt (halving from params.dt) whose plane-wave error at t = 1 is below `target`.
double calibrate_dt(const Grid& grid, const PotentialSpec& potential, FlowParams params, double target = 1e-8);

struct MollifierRow {
  double eps = 0.0;
  double sup_error = 0.0;  // sup over sampled |t| <= T of ||u^eps - u||_{L^2}
  double slope = 0.0;      // log-log slope against the previous row; NaN for the first
  double constant = 0.0;   // sup_error / eps^slope
};

/// Compares the local flow with mollified flows along a decreasing eps schedule.
/// Times sampled every `sample_every` steps on [-T, T].
std::vector<MollifierRow> mollifier_convergence(const Field& phi0, const std::vector<double>& eps,
                                                double T, const Grid& grid, BaseBump base,
                                                const FlowParams& params, int sample_every = 10);

/// Random data with E|c_k|^2 proportional to (1 + |k|)^{-(1 + 2 s)}, so the expected
/// H^{s'} norm stays bounded as K grows only for s' < s; normalized to unit mass.
Field rough_random_field(const Grid& grid, double s, std::uint64_t seed);

}  // namespace nlsgibbs
