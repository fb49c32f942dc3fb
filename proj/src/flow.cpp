#include "nlsgibbs/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>

#include "nlsgibbs/classical.hpp"

namespace nlsgibbs {

void FlowParams::validate() const {
  if (!(dt > 0.0) || dt > 0.1) throw ParameterError("flow: dt must lie in (0, 0.1]");
  if (record_interval < 0) throw ParameterError("flow: record_interval must be >= 0");
  if (implicit_max_iter < 1) throw ParameterError("flow: implicit_max_iter must be >= 1");
}

namespace {
constexpr int kDenseModeLimit = 8;

// x <- exp(-i h A) x for Hermitian A with ||A|| <= bound, by Taylor series on
// substeps short enough that |h| ||A|| <= 1/2.
template <class Apply>
void taylor_exp(const Apply& apply, double bound, double h, CVector& x) {
  const int substeps = std::max(1, static_cast<int>(std::ceil(std::abs(h) * bound / 0.5)));
  const double hs = h / substeps;
  for (int s = 0; s < substeps; ++s) {
    CVector sum = x;
    CVector term = x;
    for (int n = 1; n < 60; ++n) {
      term = apply(term) * cplx(0.0, -hs / n);
      sum += term;
      if (term.norm() <= 1e-17 * sum.norm()) break;
    }
    x = sum;
  }
}

bool on_lattice(double t, double dt, long long& n) {
  const double r = std::abs(t) / dt;
  n = std::llround(r);
  return std::abs(r - static_cast<double>(n)) <= 1e-9 * std::max(1.0, r);
}
}  // namespace

NlsFlow::NlsFlow(Grid grid, PotentialSpec potential, FlowParams params)
    : grid_(std::move(grid)), potential_(std::move(potential)), params_(params) {
  params_.validate();
  for (int k : grid_.modes()) lambdas_.push_back(grid_.lambda(k));
  free_ = potential_.is_zero();
  if (!free_) w_hat_ = potential_.kernel_hat(grid_);
  dense_ = grid_.M() <= kDenseModeLimit;
}

CVector NlsFlow::density_band(const CVector& a, const CVector& b) const {
  // band of (|u_a|^2 + |u_b|^2) / 2 over q in [-2K, 2K]
  const int Q = 2 * grid_.K();
  CVector band = CVector::Zero(2 * Q + 1);
  const auto& modes = grid_.modes();
  const int M = grid_.M();
  if (dense_) {
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        band[modes[j] - modes[i] + Q] += 0.5 * (std::conj(a[i]) * a[j] + std::conj(b[i]) * b[j]);
      }
    }
    return band;
  }
  const CVector pa = to_physical(field_from_active(a, grid_), grid_);
  const CVector pb = to_physical(field_from_active(b, grid_), grid_);
  CVector rho(grid_.P());
  for (int j = 0; j < grid_.P(); ++j) rho[j] = 0.5 * (std::norm(pa[j]) + std::norm(pb[j]));
  return spectral_band(rho, Q);
}

CVector NlsFlow::potential_band(const CVector& density) const { return w_hat_.cwiseProduct(density); }

void NlsFlow::apply_exp(const CVector& v_band, double h, CVector& active) const {
  const int Q = 2 * grid_.K();
  const auto& modes = grid_.modes();
  const int M = grid_.M();
  if (dense_) {
    CMatrix A(M, M);
    double bound = 0.0;
    for (int i = 0; i < M; ++i) {
      double row = 0.0;
      for (int j = 0; j < M; ++j) {
        A(i, j) = v_band[modes[i] - modes[j] + Q];
        row += std::abs(A(i, j));
      }
      bound = std::max(bound, row);
    }
    taylor_exp([&](const CVector& x) { return CVector(A * x); }, bound, h, active);
    return;
  }
  const CVector vp = physical_from_band(v_band, grid_.P());
  std::vector<double> V(grid_.P());
  double vmax = 0.0;
  for (int j = 0; j < grid_.P(); ++j) {
    V[j] = vp[j].real();
    vmax = std::max(vmax, std::abs(V[j]));
  }
  auto apply_A = [&](const CVector& x) {
    CVector p = to_physical(field_from_active(x, grid_), grid_);
    for (int j = 0; j < grid_.P(); ++j) p[j] *= V[j];
    return active_coefficients(to_spectral(p, grid_), grid_);
  };
  taylor_exp(apply_A, vmax, h, active);
}

void NlsFlow::nonlinear(CVector& active, double h) const {
  if (free_) return;
  const CVector u0 = active;
  const double scale = std::max(u0.norm(), std::numeric_limits<double>::min());
  CVector u1 = u0;
  apply_exp(potential_band(density_band(u0, u0)), h, u1);
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < params_.implicit_max_iter; ++it) {
    CVector next = u0;
    apply_exp(potential_band(density_band(u0, u1)), h, next);
    const double diff = (next - u1).norm();
    u1 = std::move(next);
    if (diff <= params_.implicit_tol * scale) break;
    // stagnation at round-off level
    if (it > 2 && diff >= prev && diff <= 1e-12 * scale) break;
    prev = diff;
  }
  active = std::move(u1);
}

void NlsFlow::step(CVector& active, double h) const {
  nonlinear(active, 0.5 * h);
  for (int i = 0; i < grid_.M(); ++i) active[i] *= std::polar(1.0, -h * lambdas_[i]);
  nonlinear(active, 0.5 * h);
}

Field NlsFlow::evolve(const Field& u0, double t) const { return evolve_to(u0, {t}).front(); }

std::vector<Field> NlsFlow::evolve_to(const Field& u0, const std::vector<double>& times) const {
  const CVector a0 = active_coefficients(u0, grid_);
  std::vector<Field> out(times.size());
  // lattice times share one marching pass per sign
  std::map<long long, std::vector<size_t>> forward, backward;
  for (size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (!std::isfinite(t)) throw ParameterError("flow: non-finite time");
    long long n = 0;
    if (on_lattice(t, params_.dt, n)) {
      (t >= 0.0 ? forward : backward)[n].push_back(i);
      continue;
    }
    const long long steps = static_cast<long long>(std::ceil(std::abs(t) / params_.dt));
    const double h = t / static_cast<double>(steps);
    CVector a = a0;
    for (long long s = 0; s < steps; ++s) step(a, h);
    if (!a.allFinite()) throw std::runtime_error("flow: non-finite field values");
    out[i] = field_from_active(a, grid_);
  }
  auto march = [&](const std::map<long long, std::vector<size_t>>& targets, double h) {
    CVector a = a0;
    long long done = 0;
    for (const auto& [n, idx] : targets) {
      for (; done < n; ++done) step(a, h);
      if (!a.allFinite()) throw std::runtime_error("flow: non-finite field values");
      for (size_t i : idx) out[i] = field_from_active(a, grid_);
    }
  };
  march(forward, params_.dt);
  march(backward, -params_.dt);
  return out;
}

double NlsFlow::energy(const Field& u) const {
  double e = 0.0;
  for (int i = 0; i < grid_.M(); ++i) e += lambdas_[i] * std::norm(u.coeffs[grid_.index(grid_.modes()[i])]);
  if (!free_) e += interaction_energy(u, w_hat_);
  return e;
}

TrajectoryReport NlsFlow::trajectory(const Field& u0, double t) const {
  TrajectoryReport rep;
  long long n = 0;
  const long long steps = on_lattice(t, params_.dt, n)
                              ? n
                              : static_cast<long long>(std::ceil(std::abs(t) / params_.dt));
  const double h = steps > 0 ? t / static_cast<double>(steps) : 0.0;
  CVector a = active_coefficients(u0, grid_);
  const double m0 = a.squaredNorm();
  const double e0 = energy(u0);
  auto record = [&](long long s) {
    const Field f = field_from_active(a, grid_);
    const double m = a.squaredNorm();
    const double e = energy(f);
    rep.times.push_back(h * static_cast<double>(s));
    rep.mass.push_back(m);
    rep.energy.push_back(e);
    rep.checkpoints.push_back(f);
    if (m0 > 0.0) rep.max_mass_drift = std::max(rep.max_mass_drift, std::abs(m - m0) / m0);
    if (e0 != 0.0) rep.max_energy_drift = std::max(rep.max_energy_drift, std::abs(e - e0) / std::abs(e0));
  };
  record(0);
  for (long long s = 1; s <= steps; ++s) {
    step(a, h);
    if (!a.allFinite()) throw std::runtime_error("flow: non-finite field values");
    if (s == steps || (params_.record_interval > 0 && s % params_.record_interval == 0)) record(s);
  }
  return rep;
}

void TrajectoryReport::write_csv(const std::string& path, bool with_coefficients) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17) << "time,mass,energy";
  const int K = checkpoints.empty() ? 0 : checkpoints.front().K();
  if (with_coefficients) {
    for (int k = -K; k <= K; ++k) out << ",re_" << k << ",im_" << k;
  }
  out << "\n";
  for (size_t i = 0; i < times.size(); ++i) {
    out << times[i] << "," << mass[i] << "," << energy[i];
    if (with_coefficients) {
      for (int m = 0; m < checkpoints[i].coeffs.size(); ++m) {
        out << "," << checkpoints[i].coeffs[m].real() << "," << checkpoints[i].coeffs[m].imag();
      }
    }
    out << "\n";
  }
}

double hamiltonian_energy(const Field& u, const PotentialSpec& potential, const Grid& grid) {
  double e = 0.0;
  for (int k = -grid.K(); k <= grid.K(); ++k) e += grid.lambda(k) * std::norm(u.coeffs[grid.index(k)]);
  return e + interaction_energy(u, potential, grid);
}

PotentialSpec mollifier_kernel(double eps, BaseBump base, const Grid& grid) {
  PotentialSpec p = PotentialSpec::mollified(eps, base);
  p.physical_samples(grid);
  return p;
}

cplx flow_observable(const Observable& xi, const Field& phi, double t, const PotentialSpec& potential,
                     const Grid& grid, const FlowParams& params) {
  const NlsFlow flow(grid, potential, params);
  return theta_observable(xi, flow.evolve(phi, t), grid);
}

double calibrate_dt(const Grid& grid, const PotentialSpec& potential, FlowParams params, double target) {
  const int k = grid.is_active(1) ? 1 : grid.modes().front();
  const cplx c = 1.0;
  Field u0 = Field::zeros(grid);
  u0[k] = c;
  const double w0 = potential.is_zero() ? 0.0 : potential.kernel_hat(grid)[2 * grid.K()].real();
  for (;;) {
    const NlsFlow flow(grid, potential, params);
    const Field u = flow.evolve(u0, 1.0);
    const cplx exact = c * std::polar(1.0, -(grid.lambda(k) + w0 * std::norm(c)));
    Field ref = Field::zeros(grid);
    ref[k] = exact;
    if ((u.coeffs - ref.coeffs).norm() < target || params.dt < 1e-6) return params.dt;
    params.dt *= 0.5;
  }
}

std::vector<MollifierRow> mollifier_convergence(const Field& phi0, const std::vector<double>& eps,
                                                double T, const Grid& grid, BaseBump base,
                                                const FlowParams& params, int sample_every) {
  if (eps.empty()) throw ParameterError("mollifier sweep: empty eps schedule");
  for (size_t i = 1; i < eps.size(); ++i) {
    if (!(eps[i] < eps[i - 1])) throw ParameterError("mollifier sweep: eps schedule must decrease");
  }
  if (sample_every < 1) throw ParameterError("mollifier sweep: sample_every must be >= 1");
  std::vector<double> times;
  const long long n = static_cast<long long>(std::floor(T / params.dt + 1e-9));
  for (long long s = 0; s <= n; s += sample_every) {
    times.push_back(s * params.dt);
    if (s > 0) times.push_back(-s * params.dt);
  }
  const auto ref = NlsFlow(grid, PotentialSpec::local_delta(), params).evolve_to(phi0, times);
  std::vector<MollifierRow> rows;
  for (double e : eps) {
    const auto u = NlsFlow(grid, mollifier_kernel(e, base, grid), params).evolve_to(phi0, times);
    MollifierRow row;
    row.eps = e;
    for (size_t i = 0; i < times.size(); ++i) row.sup_error = std::max(row.sup_error, (u[i].coeffs - ref[i].coeffs).norm());
    if (rows.empty()) {
      row.slope = std::numeric_limits<double>::quiet_NaN();
      row.constant = std::numeric_limits<double>::quiet_NaN();
    } else {
      const auto& prev = rows.back();
      row.slope = std::log(prev.sup_error / row.sup_error) / std::log(prev.eps / row.eps);
      row.constant = row.sup_error / std::pow(row.eps, row.slope);
    }
    rows.push_back(row);
  }
  return rows;
}

Field rough_random_field(const Grid& grid, double s, std::uint64_t seed) {
  Field f = Field::zeros(grid);
  for (int k : grid.modes()) {
    const cplx g = counter_gaussian(seed, 0, static_cast<std::uint64_t>(k + grid.K()));
    f[k] = g * std::pow(1.0 + std::abs(k), -(0.5 + s));
  }
  const double m = std::sqrt(mass(f));
  if (m > 0.0) f.coeffs /= m;
  return f;
}

}  // namespace nlsgibbs
