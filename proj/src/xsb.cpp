#include "nlsgibbs/xsb.hpp"

#include <cmath>

#include "nlsgibbs/classical.hpp"

namespace nlsgibbs {

namespace {
void check_shape(int P, int Q, double T) {
  if (P < 2 || P % 2 != 0) throw ParameterError("spacetime field: P must be even and >= 2");
  if (Q < 2 || (Q & (Q - 1)) != 0) throw ParameterError("spacetime field: Q must be a power of two");
  if (!(T > 0.0)) throw ParameterError("spacetime field: window must be positive");
}
}  // namespace

SpacetimeField SpacetimeField::sample(int P, int Q, double T, const std::function<cplx(double, double)>& f) {
  check_shape(P, Q, T);
  SpacetimeField out{P, Q, T, CMatrix(P, Q)};
  for (int l = 0; l < Q; ++l) {
    const double t = l * T / Q;
    for (int j = 0; j < P; ++j) out.values(j, l) = f(static_cast<double>(j) / P, t);
  }
  return out;
}

SpacetimeField SpacetimeField::free_evolution(const Field& u0, int P, int Q, double T) {
  check_shape(P, Q, T);
  const int K = u0.K();
  if (P < 2 * K + 2) throw ParameterError("spacetime field: P too small for the field");
  const Grid grid = Grid::make(K, P, 1.0);
  SpacetimeField out{P, Q, T, CMatrix(P, Q)};
  for (int l = 0; l < Q; ++l) {
    const double t = l * T / Q;
    Field u = u0;
    for (int k = -K; k <= K; ++k) u[k] *= std::polar(1.0, -4.0 * kPi * kPi * k * k * t);
    out.values.col(l) = to_physical(u, grid);
  }
  return out;
}

void SpacetimeField::taper() {
  for (int l = 0; l < Q; ++l) values.col(l) *= 0.5 * (1.0 - std::cos(kTwoPi * l / Q));
}

double SpacetimeField::l2_norm() const { return std::sqrt(values.cwiseAbs2().mean()); }

double SpacetimeField::l4_norm() const { return std::pow(values.cwiseAbs2().array().square().mean(), 0.25); }

CMatrix spacetime_coefficients(const SpacetimeField& f) {
  check_shape(f.P, f.Q, f.T);
  const Fft fx(f.P), ft(f.Q);
  CMatrix a(f.P, f.Q);
  CVector buf(std::max(f.P, f.Q)), out(std::max(f.P, f.Q));
  for (int l = 0; l < f.Q; ++l) {
    const CVector col = f.values.col(l);
    fx.forward(col.data(), out.data());
    a.col(l) = out.head(f.P);
  }
  CMatrix c(f.P, f.Q);
  const double norm = 1.0 / (static_cast<double>(f.P) * f.Q);
  for (int j = 0; j < f.P; ++j) {
    const CVector row = a.row(j).transpose();
    ft.forward(row.data(), out.data());
    // row j holds spatial frequency k = j (mod P); reorder both axes to centered ranges
    const int k = j < f.P / 2 ? j : j - f.P;
    for (int l = 0; l < f.Q; ++l) {
      const int e = l < f.Q / 2 ? l : l - f.Q;
      c(k + f.P / 2, e + f.Q / 2) = out[l] * norm;
    }
  }
  return c;
}

double xsb_norm(const SpacetimeField& f, double sigma, double b) {
  if (b < -1.0 || b > 1.0) throw ParameterError("xsb: b must lie in [-1, 1]");
  const CMatrix c = spacetime_coefficients(f);
  double sum = 0.0;
  for (int r = 0; r < f.P; ++r) {
    const int k = r - f.P / 2;
    const double wx = std::pow(1.0 + kTwoPi * std::abs(k), 2.0 * sigma);
    for (int s = 0; s < f.Q; ++s) {
      const double eta = (s - f.Q / 2) / f.T;
      const double wt = std::pow(1.0 + std::abs(eta + kTwoPi * k * k), 2.0 * b);
      sum += wx * wt * std::norm(c(r, s));
    }
  }
  return std::sqrt(sum);
}

double linf_hsigma_norm(const SpacetimeField& f, double sigma) {
  check_shape(f.P, f.Q, f.T);
  const Fft fx(f.P);
  CVector out(f.P);
  double best = 0.0;
  for (int l = 0; l < f.Q; ++l) {
    const CVector col = f.values.col(l);
    fx.forward(col.data(), out.data());
    double s = 0.0;
    for (int j = 0; j < f.P; ++j) {
      const int k = j < f.P / 2 ? j : j - f.P;
      s += std::pow(1.0 + kTwoPi * std::abs(k), 2.0 * sigma) * std::norm(out[j] / static_cast<double>(f.P));
    }
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

double strichartz_ratio(const SpacetimeField& f) {
  const double d = xsb_norm(f, 0.0, 0.375);
  if (d == 0.0) throw ParameterError("strichartz ratio: zero field");
  return f.l4_norm() / d;
}

SpacetimeField random_spacetime_field(int K, int P, int Q, double T, int time_modes, std::uint64_t seed) {
  if (K < 0 || time_modes < 0) throw ParameterError("random spacetime field: negative size");
  Field u0(CVector::Zero(2 * K + 1));
  for (int k = -K; k <= K; ++k) u0[k] = counter_gaussian(seed, 0, k + K) / (1.0 + std::abs(k));
  SpacetimeField f = SpacetimeField::free_evolution(u0, P, Q, T);
  std::vector<cplx> g(2 * time_modes + 1);
  for (int j = -time_modes; j <= time_modes; ++j) {
    g[j + time_modes] = counter_gaussian(seed, 1, j + time_modes) / (1.0 + std::abs(j));
  }
  for (int l = 0; l < Q; ++l) {
    cplx m = 0.0;
    for (int j = -time_modes; j <= time_modes; ++j) m += g[j + time_modes] * std::polar(1.0, kTwoPi * j * l / Q);
    f.values.col(l) *= m;
  }
  f.taper();
  return f;
}

double slobodeckij_constant(double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw ParameterError("slobodeckij: sigma must lie in (0, 1)");
  return kTwoPi / (std::tgamma(1.0 + 2.0 * sigma) * std::sin(kPi * sigma));
}

double slobodeckij_norm(const Field& f, const Grid& grid, double sigma) {
  const double C = slobodeckij_constant(sigma);
  const CVector v = to_physical(f, grid);
  const int P = grid.P();
  // the kernel depends on i - j only
  std::vector<double> kernel(P, 0.0);
  for (int d = 1; d < P; ++d) {
    kernel[d] = std::pow(std::abs(torus_representative(static_cast<double>(d) / P)), -(1.0 + 2.0 * sigma));
  }
  double sum = 0.0;
  for (int i = 0; i < P; ++i) {
    for (int d = 1; d < P; ++d) sum += std::norm(v[i] - v[(i + d) % P]) * kernel[d];
  }
  return std::sqrt(sum / (static_cast<double>(P) * P) / C);
}

double homogeneous_sobolev_norm(const Field& f, double sigma) {
  const int K = f.K();
  double s = 0.0;
  for (int k = -K; k <= K; ++k) {
    if (k != 0) s += std::pow(kTwoPi * std::abs(k), 2.0 * sigma) * std::norm(f[k]);
  }
  return std::sqrt(s);
}

}  // namespace nlsgibbs
