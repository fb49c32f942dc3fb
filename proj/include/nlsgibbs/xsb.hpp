#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nlsgibbs/spectral.hpp"

namespace nlsgibbs {

/// Samples f(x_j, t_l), x_j = j/P, t_l = l T/Q, of a field on the torus times a
/// periodized time window [0, T). Stored as a P x Q matrix.
struct SpacetimeField {
  int P = 0;
  int Q = 0;
  double T = 0.0;
  CMatrix values;

  static SpacetimeField sample(int P, int Q, double T, const std::function<cplx(double, double)>& f);
  /// (e^{i t Delta} u0)(x) on the window; each mode rotates as e^{-4 pi^2 i k^2 t}.
  static SpacetimeField free_evolution(const Field& u0, int P, int Q, double T);

  /// Multiplies by the raised cosine (1 - cos(2 pi t / T)) / 2.
  void taper();
  /// (mean |f|^2)^{1/2} over the lattice, i.e. the L^2 norm per unit time.
  double l2_norm() const;
  /// (mean |f|^4)^{1/4}
  double l4_norm() const;
};

/// Time window on which the resonant frequencies -2 pi k^2 fall on the lattice j / T.
inline double resonant_window(int periods = 1) { return periods / kTwoPi; }

/// Normalized spacetime coefficients over k in [-P/2, P/2), eta_j = j/T, j in [-Q/2, Q/2):
/// f(x, t) = sum_{k,j} c(k, j) e^{2 pi i (k x + eta_j t)}. Row k + P/2, column j + Q/2.
CMatrix spacetime_coefficients(const SpacetimeField& f);

/// (sum_{k,j} (1 + |2 pi k|)^{2 sigma} (1 + |eta_j + 2 pi k^2|)^{2 b} |c(k, j)|^2)^{1/2};
/// sigma = b = 0 gives l2_norm.
double xsb_norm(const SpacetimeField& f, double sigma, double b);

/// max_t (sum_k (1 + |2 pi k|)^{2 sigma} |f_hat(k, t)|^2)^{1/2} over the time samples.
double linf_hsigma_norm(const SpacetimeField& f, double sigma);

/// ||f||_{L^4} / ||f||_{X^{0,3/8}}; throws for the zero field.
double strichartz_ratio(const SpacetimeField& f);

/// Random free solution with E|c_k|^2 = (1 + |k|)^{-2}, |k| <= K, modulated in time
/// by a random trigonometric polynomial of degree `time_modes` in t/T, then tapered.
SpacetimeField random_spacetime_field(int K, int P, int Q, double T, int time_modes, std::uint64_t seed);

/// C_sigma = 2 pi / (Gamma(1 + 2 sigma) sin(pi sigma)), the constant with
/// int_R |e^{i a z} - 1|^2 |z|^{-1-2 sigma} dz = C_sigma |a|^{2 sigma}.
double slobodeckij_constant(double sigma);

/// (C_sigma^{-1} int int |f(x) - f(y)|^2 / |[x - y]|^{1 + 2 sigma} dx dy)^{1/2} by the grid
/// double sum with the diagonal excluded; the normalization makes single modes
/// approach (2 pi |k|)^sigma as k grows.
double slobodeckij_norm(const Field& f, const Grid& grid, double sigma);

/// (sum_k (2 pi |k|)^{2 sigma} |c_k|^2)^{1/2}
double homogeneous_sobolev_norm(const Field& f, double sigma);

}  // namespace nlsgibbs
