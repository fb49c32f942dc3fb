#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nlsgibbs/observable.hpp"
#include "nlsgibbs/potential.hpp"
#include "nlsgibbs/spectral.hpp"

namespace nlsgibbs {

/// SplitMix64 finalizer; the counter RNG below is built from it.
std::uint64_t splitmix64(std::uint64_t x);

/// Standard complex Gaussian (E|w|^2 = 1) keyed by (seed, sample, mode).
/// Independent of evaluation order, so sample i is the same under any schedule.
cplx counter_gaussian(std::uint64_t seed, std::uint64_t sample, std::uint64_t mode);

/// Free field phi = sum_k omega_k / sqrt(lambda_k + nu) u_k on the active modes.
class FreeFieldSampler {
 public:
  FreeFieldSampler(Grid grid, std::uint64_t seed, double nu = 0.0);

  const Grid& grid() const { return grid_; }
  std::uint64_t seed() const { return seed_; }
  double nu() const { return nu_; }

  /// Standard complex Gaussians for sample `index`, one per active mode.
  CVector omega(std::int64_t index) const;
  Field sample(std::int64_t index) const;
  /// Test hook: the field built from prescribed omegas.
  Field from_omega(const CVector& omega) const;

 private:
  Grid grid_;
  std::uint64_t seed_;
  double nu_;
  std::vector<double> scale_;
};

/// N = sum_k |c_k|^2
double mass(const Field& field);

/// W = 1/2 sum_q w_hat(q) |rho_hat(q)|^2 with rho = |phi|^2, w_hat over [-2K, 2K].
double interaction_energy(const Field& field, const CVector& w_hat);
double interaction_energy(const Field& field, const PotentialSpec& potential, const Grid& grid);

/// Theta(xi)(phi) on the active modes of `grid`.
cplx theta_observable(const Observable& xi, const Field& field, const Grid& grid);

/// Weighted free-field samples representing rho(X) = mu(X e^{-W}) / mu(e^{-W}).
struct Ensemble {
  Grid grid;
  PotentialSpec potential;
  std::uint64_t seed = 0;
  double nu = 0.0;
  std::vector<Field> samples;
  std::vector<double> weights;

  std::int64_t size() const { return static_cast<std::int64_t>(samples.size()); }
};

Ensemble make_ensemble(const FreeFieldSampler& sampler, const PotentialSpec& potential, std::int64_t n);

struct Estimate {
  cplx value;
  double std_error = 0.0;
  std::int64_t n = 0;
};

/// Self-normalized ratio sum w_i x_i / sum w_i with leave-one-out jackknife error.
Estimate ratio_estimate(const std::vector<cplx>& values, const std::vector<double>& weights);

using SampleFunctional = std::function<cplx(const Field&)>;

Estimate gibbs_expectation(const Ensemble& ensemble, const SampleFunctional& X);
/// rho(X f(N))
Estimate weighted_expectation(const Ensemble& ensemble, const SampleFunctional& X,
                              const std::function<double(double)>& f);

/// E_{mu^nu}[ prod_i conj(c_{a_i}) prod_j c_{b_j} ] as a sum over all pairings
/// (a permanent of the covariance delta_{ab}/(lambda_a + nu)). Modes are
/// values k, looked up in `spec`. An odd imbalance returns 0 (odd Gaussian
/// moment); an even imbalance throws, since phase invariance is not assumed.
cplx wick_moment(const std::vector<int>& conjugated, const std::vector<int>& unconjugated,
                 const Spectrum& spec, double nu = 0.0);
cplx wick_moment(const std::vector<std::pair<int, int>>& mode_pairs, const Spectrum& spec, double nu = 0.0);

nlohmann::json grid_to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);
nlohmann::json potential_to_json(const PotentialSpec& p);
PotentialSpec potential_from_json(const nlohmann::json& j);

/// CSV of spectral coefficients (index, weight, re/im per mode) plus `<path>.json` metadata.
void write_ensemble(const Ensemble& ensemble, const std::string& csv_path);
Ensemble read_ensemble(const std::string& csv_path);

}  // namespace nlsgibbs
