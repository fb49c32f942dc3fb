#include "nlsgibbs/correlators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>

#include "nlsgibbs/parallel.hpp"

namespace nlsgibbs {

void CorrelationSpec::validate() const {
  if (terms.empty()) throw ParameterError("correlation: need at least one term");
  for (const auto& term : terms) {
    if (term.xi.M() != terms.front().xi.M()) throw ParameterError("correlation: observables on different mode sets");
    if (!std::isfinite(term.t)) throw ParameterError("correlation: non-finite time");
  }
}

int CorrelationSpec::total_particles() const {
  int p = 0;
  for (const auto& term : terms) p += term.xi.particles();
  return p;
}

CorrelationSpec CorrelationSpec::adjoint() const {
  CorrelationSpec out;
  out.weight = weight;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) out.terms.push_back({it->xi.adjoint(), it->t});
  return out;
}

cplx classical_sample_correlation(const CorrelationSpec& spec, const NlsFlow& flow, const Field& phi) {
  const Grid& grid = flow.grid();
  const double f = spec.weight ? spec.weight(mass(phi)) : 1.0;
  if (f == 0.0) return 0.0;
  std::vector<double> times;
  for (const auto& term : spec.terms) times.push_back(term.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const std::vector<Field> at = flow.evolve_to(phi, times);
  cplx prod = 1.0;
  for (const auto& term : spec.terms) {
    const auto pos = std::lower_bound(times.begin(), times.end(), term.t) - times.begin();
    prod *= theta_value(term.xi, active_coefficients(at[pos], grid));
  }
  return prod * f;
}

Estimate classical_correlation(const CorrelationSpec& spec, const Ensemble& ensemble, const FlowParams& params) {
  spec.validate();
  if (ensemble.size() == 0) throw ParameterError("correlation: empty ensemble");
  if (spec.M() != ensemble.grid.M()) throw ParameterError("correlation: observables do not match the grid");
  const NlsFlow flow(ensemble.grid, ensemble.potential, params);
  std::vector<cplx> values(ensemble.size());
  const auto parts = chunks(ensemble.size());
  parallel_for(static_cast<std::int64_t>(parts.size()), [&](std::int64_t c) {
    for (std::int64_t i = parts[c].begin; i < parts[c].end; ++i) {
      values[i] = ensemble.weights[i] == 0.0 ? cplx(0.0) : classical_sample_correlation(spec, flow, ensemble.samples[i]);
    }
  });
  return ratio_estimate(values, ensemble.weights);
}

namespace {
struct Monomial {
  cplx coeff;
  std::vector<int> conj;
  std::vector<int> unconj;
};

std::vector<Monomial> expand_theta(const Observable& xi, const std::vector<int>& modes) {
  const auto& basis = xi.basis();
  const int p = xi.particles();
  std::vector<double> norm(basis.dim());
  std::vector<std::vector<int>> mode_list(basis.dim());
  for (int a = 0; a < basis.dim(); ++a) {
    const Occupation& occ = basis.state(a);
    norm[a] = std::sqrt(std::tgamma(p + 1.0) / occupation_factorial(occ));
    for (int k = 0; k < static_cast<int>(occ.size()); ++k) {
      for (int r = 0; r < occ[k]; ++r) mode_list[a].push_back(modes[k]);
    }
  }
  std::vector<Monomial> out;
  for (int a = 0; a < basis.dim(); ++a) {
    for (int b = 0; b < basis.dim(); ++b) {
      const cplx x = xi.kernel()(a, b);
      if (x == 0.0) continue;
      out.push_back({x * norm[a] * norm[b], mode_list[a], mode_list[b]});
    }
  }
  return out;
}
}  // namespace

cplx free_classical_correlation(const CorrelationSpec& spec, const Spectrum& spec_modes, double nu) {
  spec.validate();
  if (spec.weight) throw ParameterError("free correlation: number weights are not supported");
  if (spec.M() != static_cast<int>(spec_modes.modes.size())) throw ParameterError("free correlation: mode mismatch");
  std::vector<std::vector<Monomial>> parts;
  double combos = 1.0;
  for (const auto& term : spec.terms) {
    parts.push_back(expand_theta(free_evolve_kernel(term.xi, term.t, spec_modes.lambdas), spec_modes.modes));
    combos *= static_cast<double>(parts.back().size());
  }
  if (combos > 4e6) throw ParameterError("free correlation: too many monomials");
  cplx total = 0.0;
  std::vector<int> conj, unconj;
  std::function<void(std::size_t, cplx)> rec = [&](std::size_t j, cplx coeff) {
    if (j == parts.size()) {
      total += coeff * wick_moment(conj, unconj, spec_modes, nu);
      return;
    }
    for (const auto& mono : parts[j]) {
      const std::size_t c0 = conj.size(), u0 = unconj.size();
      conj.insert(conj.end(), mono.conj.begin(), mono.conj.end());
      unconj.insert(unconj.end(), mono.unconj.begin(), mono.unconj.end());
      rec(j + 1, coeff * mono.coeff);
      conj.resize(c0);
      unconj.resize(u0);
    }
  };
  rec(0, 1.0);
  return total;
}

namespace {
struct Ladder {
  int slot;  // index into the spectrum
  bool creation;
};

// sum over perfect matchings of ordered contractions
cplx quasi_free_moment(std::vector<Ladder>& ops, const std::vector<double>& G, double tau) {
  if (ops.empty()) return 1.0;
  if (ops.size() % 2) return 0.0;
  const Ladder first = ops.front();
  cplx total = 0.0;
  for (std::size_t j = 1; j < ops.size(); ++j) {
    const Ladder other = ops[j];
    if (other.slot != first.slot || other.creation == first.creation) continue;
    const double c = first.creation ? G[first.slot] : G[first.slot] + 1.0 / tau;
    std::vector<Ladder> rest;
    rest.reserve(ops.size() - 2);
    for (std::size_t k = 1; k < ops.size(); ++k) {
      if (k != j) rest.push_back(ops[k]);
    }
    total += c * quasi_free_moment(rest, G, tau);
  }
  return total;
}
}  // namespace

cplx free_quantum_correlation(const CorrelationSpec& spec, const Spectrum& spec_modes, double tau, double nu) {
  spec.validate();
  if (!(tau > 0.0)) throw ParameterError("free correlation: tau must be positive");
  if (spec.weight) throw ParameterError("free correlation: number weights are not supported");
  if (spec.M() != static_cast<int>(spec_modes.modes.size())) throw ParameterError("free correlation: mode mismatch");
  const std::vector<double> G = quantum_green_function(spec_modes, nu, tau);
  auto slot = [&](int k) {
    return static_cast<int>(std::find(spec_modes.modes.begin(), spec_modes.modes.end(), k) - spec_modes.modes.begin());
  };
  std::vector<std::vector<Monomial>> parts;
  double combos = 1.0;
  for (const auto& term : spec.terms) {
    parts.push_back(expand_theta(free_evolve_kernel(term.xi, term.t, spec_modes.lambdas), spec_modes.modes));
    combos *= static_cast<double>(parts.back().size());
  }
  if (combos > 4e6) throw ParameterError("free correlation: too many monomials");
  cplx total = 0.0;
  std::vector<Ladder> ops;
  std::function<void(std::size_t, cplx)> rec = [&](std::size_t j, cplx coeff) {
    if (j == parts.size()) {
      std::vector<Ladder> copy = ops;
      total += coeff * quasi_free_moment(copy, G, tau);
      return;
    }
    for (const auto& mono : parts[j]) {
      const std::size_t n0 = ops.size();
      for (int k : mono.conj) ops.push_back({slot(k), true});
      for (int k : mono.unconj) ops.push_back({slot(k), false});
      rec(j + 1, coeff * mono.coeff);
      ops.resize(n0);
    }
  };
  rec(0, 1.0);
  return total;
}

cplx quantum_correlation(const CorrelationSpec& spec, const ModeModel& model, double tau, int N_max, double nu) {
  spec.validate();
  if (!(tau > 0.0)) throw ParameterError("quantum correlation: tau must be positive");
  if (nu < 0.0) throw ParameterError("quantum correlation: nu must be >= 0");
  if (N_max < 0) throw ParameterError("quantum correlation: N_max must be >= 0");
  if (spec.M() != model.M()) throw ParameterError("quantum correlation: observables do not match the model");
  const int m = static_cast<int>(spec.terms.size());
  // identical kernels share one lift
  std::vector<int> lift_of(m);
  std::vector<const Observable*> distinct;
  for (int j = 0; j < m; ++j) {
    int found = -1;
    for (int d = 0; d < static_cast<int>(distinct.size()); ++d) {
      const Observable& o = *distinct[d];
      if (o.particles() == spec.terms[j].xi.particles() && o.kernel() == spec.terms[j].xi.kernel()) found = d;
    }
    if (found < 0) {
      found = static_cast<int>(distinct.size());
      distinct.push_back(&spec.terms[j].xi);
    }
    lift_of[j] = found;
  }
  std::int64_t dim_total = 0;
  for (int n = 0; n <= N_max; ++n) dim_total += OccupationSector::count(model.M(), n);
  if (dim_total > FockBasis::kMaxDimension * 10) throw ParameterError("quantum correlation: Fock space too large");

  struct Part {
    double e0 = 0.0;
    double z = 0.0;
    cplx trace = 0.0;
  };
  std::vector<Part> parts(N_max + 1);
  parallel_for(N_max + 1, [&](std::int64_t nn) {
    const int n = static_cast<int>(nn);
    const SectorEigen se = SectorEigen::of(model.hamiltonian_block(tau, n));
    const int d = static_cast<int>(se.energies.size());
    Part& part = parts[n];
    part.e0 = se.energies.minCoeff() + nu * n / tau;
    Eigen::VectorXd boltz(d);
    for (int a = 0; a < d; ++a) boltz[a] = std::exp(-(se.energies[a] + nu * n / tau - part.e0));
    part.z = boltz.sum();
    const double f = spec.weight ? spec.weight(n / tau) : 1.0;
    if (f == 0.0) return;
    std::vector<CMatrix> lifted;
    for (const Observable* o : distinct) lifted.push_back(se.to_eigenbasis(lift_block(*o, tau, n)));
    auto evolved = [&](int j) {
      CMatrix A = lifted[lift_of[j]];
      const double t = spec.terms[j].t;
      if (t != 0.0) {
        for (int b = 0; b < d; ++b) {
          for (int a = 0; a < d; ++a) A(a, b) *= std::polar(1.0, t * tau * (se.energies[a] - se.energies[b]));
        }
      }
      return A;
    };
    cplx tr = 0.0;
    if (m == 1) {
      const CMatrix A = evolved(0);
      for (int a = 0; a < d; ++a) tr += A(a, a) * boltz[a];
    } else {
      CMatrix X = evolved(0);
      for (int j = 1; j < m - 1; ++j) X = X * evolved(j);
      const CMatrix last = evolved(m - 1);
      for (int a = 0; a < d; ++a) {
        cplx row = 0.0;
        for (int b = 0; b < d; ++b) row += X(a, b) * last(b, a);
        tr += row * boltz[a];
      }
    }
    part.trace = f * tr;
  });
  double emin = std::numeric_limits<double>::infinity();
  for (const auto& part : parts) emin = std::min(emin, part.e0);
  double z = 0.0;
  cplx num = 0.0;
  for (const auto& part : parts) {
    const double s = std::exp(-(part.e0 - emin));
    z += s * part.z;
    num += s * part.trace;
  }
  return num / z;
}

QuantumCorrelation quantum_correlation_auto(const CorrelationSpec& spec, const ModeModel& model, double tau,
                                            double nu, double tol) {
  spec.validate();
  QuantumCorrelation out;
  const int power = spec.total_particles();
  if (!model.interacting) {
    const Spectrum s{model.modes, model.lambdas};
    out.N_max = free_particle_cutoff(s, nu, tau, tol, power);
    out.tail_estimate = free_number_tail(s, nu, tau, out.N_max, power);
  } else {
    const CutoffReport rep = interacting_particle_cutoff(model, tau, nu, tol, power);
    out.N_max = rep.N_max;
    out.tail_estimate = rep.tail_estimate;
  }
  out.value = quantum_correlation(spec, model, tau, out.N_max, nu);
  return out;
}

bool SweepReport::gaps_nonincreasing(std::size_t from) const {
  for (std::size_t i = from; i + 1 < rows.size(); ++i) {
    if (rows[i + 1].gap > rows[i].gap) return false;
  }
  return true;
}

void SweepReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  std::set<std::string> keys;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.extras) keys.insert(k);
  }
  out << "parameter,value_re,value_im,stderr,classical_ref_re,classical_ref_im,gap";
  for (const auto& k : keys) out << ',' << k;
  out << '\n';
  for (const auto& r : rows) {
    out << r.parameter << ',' << r.value.real() << ',' << r.value.imag() << ',' << r.std_error << ','
        << r.reference.real() << ',' << r.reference.imag() << ',' << r.gap;
    for (const auto& k : keys) {
      auto it = r.extras.find(k);
      out << ',';
      if (it != r.extras.end()) out << it->second;
    }
    out << '\n';
  }
}

nlohmann::json SweepReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{{"parameter", r.parameter},
                     {"value", {r.value.real(), r.value.imag()}},
                     {"stderr", r.std_error},
                     {"classical_ref", {r.reference.real(), r.reference.imag()}},
                     {"gap", r.gap}};
    for (const auto& [k, v] : r.extras) j["extras"][k] = v;
    rows_json.push_back(j);
  }
  return {{"parameter_name", parameter_name}, {"rows", rows_json}};
}

void validate_schedule(const std::vector<double>& schedule, const std::string& name) {
  if (schedule.empty()) throw ParameterError(name + ": schedule is empty");
  if (schedule.size() < 2) return;
  const bool up = schedule[1] > schedule[0];
  for (std::size_t i = 0; i + 1 < schedule.size(); ++i) {
    if (up ? !(schedule[i + 1] > schedule[i]) : !(schedule[i + 1] < schedule[i])) {
      throw ParameterError(name + ": schedule must be strictly monotone");
    }
  }
}

SweepReport tau_sweep(const CorrelationSpec& spec, const ModeModel& model, const std::vector<double>& taus,
                      const Estimate& reference, double nu, double tol) {
  validate_schedule(taus, "tau sweep");
  SweepReport rep;
  for (double tau : taus) {
    const QuantumCorrelation q = quantum_correlation_auto(spec, model, tau, nu, tol);
    SweepRow row;
    row.parameter = tau;
    row.value = q.value;
    row.std_error = reference.std_error;
    row.reference = reference.value;
    row.gap = std::abs(q.value - reference.value);
    row.extras["N_max"] = q.N_max;
    row.extras["tail_estimate"] = q.tail_estimate;
    rep.rows.push_back(row);
  }
  return rep;
}

SweepReport local_limit_sweep(const CorrelationSpec& spec, const LocalLimitConfig& cfg) {
  spec.validate();
  validate_schedule(cfg.taus, "local limit");
  if (!(cfg.exponent > 0.0)) throw ParameterError("local limit: exponent must be positive");
  const FreeFieldSampler sampler(cfg.grid, cfg.seed);
  const Ensemble local = make_ensemble(sampler, PotentialSpec::local_delta(), cfg.samples);
  const Estimate ref = classical_correlation(spec, local, cfg.flow);
  SweepReport rep;
  for (double tau : cfg.taus) {
    const double eps = std::pow(tau, -cfg.exponent);
    const PotentialSpec moll = mollifier_kernel(eps, cfg.base, cfg.grid);
    const Estimate cm = classical_correlation(spec, make_ensemble(sampler, moll, cfg.samples), cfg.flow);
    const ModeModel model = ModeModel::make(cfg.grid, moll.kernel_hat(cfg.grid));
    const QuantumCorrelation q = quantum_correlation_auto(spec, model, tau);
    SweepRow row;
    row.parameter = tau;
    row.value = q.value;
    row.std_error = ref.std_error;
    row.reference = ref.value;
    row.gap = std::abs(q.value - ref.value);
    row.extras["eps"] = eps;
    row.extras["classical_mollified_re"] = cm.value.real();
    row.extras["classical_mollified_im"] = cm.value.imag();
    row.extras["classical_mollified_stderr"] = cm.std_error;
    row.extras["gap_quantum"] = std::abs(q.value - cm.value);
    row.extras["gap_mollifier"] = std::abs(cm.value - ref.value);
    row.extras["N_max"] = q.N_max;
    rep.rows.push_back(row);
  }
  return rep;
}

double smooth_tail_step(double x, double K_cal) {
  if (!(K_cal > 0.0)) throw ParameterError("tail step: K must be positive");
  const double y = (x - K_cal) / K_cal;
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / y);
  const double b = std::exp(-1.0 / (1.0 - y));
  return a / (a + b);
}

std::vector<TailRow> tail_bound_check(const CorrelationSpec& spec, const std::vector<double>& K_schedule,
                                      const Ensemble& ensemble, const FlowParams& params, const ModeModel& model,
                                      double tau) {
  validate_schedule(K_schedule, "tail bound");
  std::vector<TailRow> out;
  for (double K_cal : K_schedule) {
    CorrelationSpec weighted = spec;
    weighted.weight = [K_cal, base = spec.weight](double x) {
      return smooth_tail_step(x, K_cal) * (base ? base(x) : 1.0);
    };
    TailRow row;
    row.K_cal = K_cal;
    row.classical = classical_correlation(weighted, ensemble, params);
    row.quantum = quantum_correlation_auto(weighted, model, tau).value;
    out.push_back(row);
  }
  return out;
}

}  // namespace nlsgibbs
