#include "nlsgibbs/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "nlsgibbs/classical.hpp"
#include "nlsgibbs/dyson.hpp"
#include "nlsgibbs/flow.hpp"
#include "nlsgibbs/fock.hpp"
#include "nlsgibbs/xsb.hpp"

namespace nlsgibbs {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config error: " + key + ": expected a number, got '" + text + "'");
  }
}

RunConfig from_ptree(const boost::property_tree::ptree& tree) {
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      cfg.set(section, trim(body.data()));
      continue;
    }
    for (const auto& [key, value] : body) cfg.set(section + "." + key, trim(value.data()));
  }
  return cfg;
}
}  // namespace

RunConfig RunConfig::from_ini_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  return from_ptree(tree);
}

RunConfig RunConfig::from_ini_string(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  return from_ptree(tree);
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config error: manifest config must be an object");
  RunConfig cfg;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw ConfigError("config error: " + k + ": expected a string value");
    cfg.set(k, v.get<std::string>());
  }
  return cfg;
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("config error: override '" + assignment + "' is not of the form section.key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::require_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) throw ConfigError("config error: " + key + ": missing");
  return it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

std::int64_t RunConfig::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const double v = parse_double(key, it->second);
  if (v != std::floor(v)) throw ConfigError("config error: " + key + ": expected an integer, got '" + it->second + "'");
  return static_cast<std::int64_t>(v);
}

std::vector<double> RunConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split(it->second, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("config error: " + key + ": empty list");
  return out;
}

std::vector<std::string> RunConfig::get_strings(const std::string& key, const std::vector<std::string>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto out = split(it->second, ',');
  if (out.empty()) throw ConfigError("config error: " + key + ": empty list");
  return out;
}

std::uint64_t RunConfig::seed() const {
  auto it = values_.find("run.seed");
  if (it == values_.end() || it->second.empty()) {
    throw ConfigError("config error: run.seed: missing (the seed is mandatory)");
  }
  const std::string& s = it->second;
  if (s.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("config error: run.seed: expected a nonnegative integer, got '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError("config error: run.seed: out of range");
  }
}

std::string RunConfig::experiment() const { return require_string("run.experiment"); }

std::string RunConfig::canonical() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  return out.str();
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::hash() const {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(canonical());
  return out.str();
}

Observable parse_observable(const std::string& name, const std::vector<int>& modes) {
  const auto parts = split(name, ':');
  const int M = static_cast<int>(modes.size());
  auto slot = [&](const std::string& text) {
    const int k = static_cast<int>(parse_double("correlation.observables", text));
    const auto it = std::find(modes.begin(), modes.end(), k);
    if (it == modes.end()) throw ConfigError("config error: correlation.observables: mode " + text + " is not active");
    return static_cast<int>(it - modes.begin());
  };
  if (parts.size() == 1 && parts[0] == "number") return Observable::identity(M, 1);
  if (parts.size() == 2 && parts[0] == "mode") {
    CVector e = CVector::Zero(M);
    e[slot(parts[1])] = 1.0;
    return Observable::rank_one(e, e);
  }
  if (parts.size() == 3 && parts[0] == "superposition") {
    CVector e = CVector::Zero(M);
    e[slot(parts[1])] += 1.0 / std::sqrt(2.0);
    e[slot(parts[2])] += 1.0 / std::sqrt(2.0);
    return Observable::rank_one(e, e);
  }
  if (parts.size() == 3 && parts[0] == "pair") {
    const int a = slot(parts[1]), b = slot(parts[2]);
    CMatrix full = CMatrix::Zero(M * M, M * M);
    CVector v = CVector::Zero(M * M);
    v[a * M + b] += 1.0;
    v[b * M + a] += 1.0;
    v.normalize();
    full = v * v.adjoint();
    return Observable::from_tensor(M, 2, full);
  }
  throw ConfigError("config error: correlation.observables: unknown observable '" + name + "'");
}

Grid grid_from_config(const RunConfig& cfg) {
  const int K = static_cast<int>(cfg.get_int("grid.K", 1));
  if (K < 0) throw ConfigError("config error: grid.K: must be >= 0");
  int P_default = 4 * K + 2;
  if (P_default % 2) ++P_default;
  P_default = std::max(P_default, 8);
  const int P = static_cast<int>(cfg.get_int("grid.P", P_default));
  const double kappa = cfg.get_double("grid.kappa", 1.0);
  try {
    Grid g = Grid::make(K, P, kappa);
    if (cfg.has("grid.modes")) {
      std::vector<int> modes;
      for (double m : cfg.get_doubles("grid.modes", {})) modes.push_back(static_cast<int>(m));
      g = g.with_active_modes(modes);
    }
    return g;
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config error: grid: ") + e.what());
  }
}

PotentialSpec potential_from_config(const RunConfig& cfg, const Grid& grid) {
  const std::string kind = cfg.get_string("potential.kind", "none");
  try {
    PotentialSpec p;
    if (kind == "none") {
      p = PotentialSpec::none();
    } else if (kind == "nonlocal") {
      p = PotentialSpec::nonlocal_cosine(cfg.get_doubles("potential.fourier", {1.0}));
    } else if (kind == "local") {
      p = PotentialSpec::local_delta();
    } else if (kind == "mollified") {
      p = mollifier_kernel(cfg.get_double("potential.eps", 0.25),
                           base_bump_from_string(cfg.get_string("potential.base", "triangle")), grid);
    } else {
      throw ConfigError("config error: potential.kind: unknown kind '" + kind + "'");
    }
    if (!p.is_zero() && p.kind() != PotentialSpec::Kind::LocalDelta) p.kernel_hat(grid);
    return p;
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config error: potential: ") + e.what());
  }
}

CorrelationSpec correlation_from_config(const RunConfig& cfg, const Grid& grid) {
  const auto names = cfg.get_strings("correlation.observables", {"number"});
  const auto times = cfg.get_doubles("correlation.times", std::vector<double>(names.size(), 0.0));
  if (times.size() != names.size()) {
    throw ConfigError("config error: correlation.times: need one time per observable");
  }
  CorrelationSpec spec;
  for (std::size_t j = 0; j < names.size(); ++j) spec.terms.push_back({parse_observable(names[j], grid.modes()), times[j]});
  return spec;
}

FlowParams flow_from_config(const RunConfig& cfg) {
  FlowParams p;
  p.dt = cfg.get_double("flow.dt", 0.01);
  p.implicit_tol = cfg.get_double("flow.implicit_tol", p.implicit_tol);
  p.record_interval = static_cast<int>(cfg.get_int("flow.record_interval", 0));
  try {
    p.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config error: flow: ") + e.what());
  }
  return p;
}

void Table::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {
Check check_le(const std::string& name, double value, double threshold) {
  return {name, value, threshold, value <= threshold};
}

Table sweep_table(const SweepReport& rep) {
  Table t;
  std::vector<std::string> keys;
  for (const auto& r : rep.rows) {
    for (const auto& [k, v] : r.extras) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
  }
  std::sort(keys.begin(), keys.end());
  t.columns = {"parameter", "value_re", "value_im", "stderr", "classical_ref_re", "classical_ref_im", "gap"};
  t.columns.insert(t.columns.end(), keys.begin(), keys.end());
  for (const auto& r : rep.rows) {
    std::vector<double> row{r.parameter, r.value.real(), r.value.imag(), r.std_error,
                            r.reference.real(), r.reference.imag(), r.gap};
    for (const auto& k : keys) {
      auto it = r.extras.find(k);
      row.push_back(it == r.extras.end() ? std::nan("") : it->second);
    }
    t.rows.push_back(row);
  }
  return t;
}

Estimate classical_reference(const CorrelationSpec& spec, const RunConfig& cfg, const Grid& grid,
                             const PotentialSpec& pot) {
  const double nu = cfg.get_double("ensemble.nu", 0.0);
  if (pot.is_zero() && !spec.weight) return {free_classical_correlation(spec, spectrum(grid), nu), 0.0, 0};
  const FreeFieldSampler sampler(grid, cfg.seed(), nu);
  const Ensemble ens = make_ensemble(sampler, pot, cfg.get_int("ensemble.samples", 10000));
  return classical_correlation(spec, ens, flow_from_config(cfg));
}

ModeModel model_for(const Grid& grid, const PotentialSpec& pot) {
  return ModeModel::make(grid, pot.is_zero() ? CVector() : pot.kernel_hat(grid));
}

ExperimentResult exp_sample(const RunConfig& cfg) {
  const Grid grid = grid_from_config(cfg);
  const PotentialSpec pot = potential_from_config(cfg, grid);
  const FreeFieldSampler sampler(grid, cfg.seed(), cfg.get_double("ensemble.nu", 0.0));
  const Ensemble ens = make_ensemble(sampler, pot, cfg.get_int("ensemble.samples", 10000));
  ExperimentResult res;
  const std::string out = cfg.get_string("run.output", "out");
  std::filesystem::create_directories(out);
  write_ensemble(ens, (std::filesystem::path(out) / "ensemble.csv").string());
  const Estimate m = gibbs_expectation(ens, [](const Field& f) { return cplx(mass(f)); });
  res.summary["mean_mass"] = m.value.real();
  res.summary["mean_mass_stderr"] = m.std_error;
  res.summary["samples"] = ens.size();
  return res;
}

ExperimentResult exp_evolve(const RunConfig& cfg) {
  const Grid grid = grid_from_config(cfg);
  const PotentialSpec pot = potential_from_config(cfg, grid);
  FlowParams params = flow_from_config(cfg);
  const NlsFlow flow(grid, pot, params);
  const Field u0 = rough_random_field(grid, cfg.get_double("evolve.s", 0.5), cfg.seed());
  const TrajectoryReport rep = flow.trajectory(u0, cfg.get_double("evolve.t", 1.0));
  ExperimentResult res;
  Table t{{"time", "mass", "energy"}, {}};
  for (std::size_t i = 0; i < rep.times.size(); ++i) t.rows.push_back({rep.times[i], rep.mass[i], rep.energy[i]});
  res.tables["trajectory"] = t;
  res.checks.push_back(check_le("mass_drift", rep.max_mass_drift, cfg.get_double("tolerance.mass_drift", 1e-10)));
  res.summary["max_energy_drift"] = rep.max_energy_drift;
  return res;
}

ExperimentResult exp_correlate_classical(const RunConfig& cfg) {
  const Grid grid = grid_from_config(cfg);
  const PotentialSpec pot = potential_from_config(cfg, grid);
  const CorrelationSpec spec = correlation_from_config(cfg, grid);
  const FreeFieldSampler sampler(grid, cfg.seed(), cfg.get_double("ensemble.nu", 0.0));
  const Ensemble ens = make_ensemble(sampler, pot, cfg.get_int("ensemble.samples", 10000));
  const Estimate e = classical_correlation(spec, ens, flow_from_config(cfg));
  ExperimentResult res;
  res.tables["classical"] = Table{{"value_re", "value_im", "stderr", "samples"},
                                  {{e.value.real(), e.value.imag(), e.std_error, static_cast<double>(e.n)}}};
  return res;
}

ExperimentResult exp_correlate_quantum(const RunConfig& cfg) {
  const Grid grid = grid_from_config(cfg);
  const PotentialSpec pot = potential_from_config(cfg, grid);
  const CorrelationSpec spec = correlation_from_config(cfg, grid);
  const double tau = cfg.get_double("quantum.tau", 8.0);
  const QuantumCorrelation q = quantum_correlation_auto(spec, model_for(grid, pot), tau, cfg.get_double("quantum.nu", 0.0),
                                                        cfg.get_double("quantum.tol", 1e-13));
  ExperimentResult res;
  res.tables["quantum"] = Table{{"tau", "value_re", "value_im", "N_max", "tail_estimate"},
                                {{tau, q.value.real(), q.value.imag(), static_cast<double>(q.N_max), q.tail_estimate}}};
  return res;
}

double free_case_gap(const CorrelationSpec& spec, const Grid& grid, double tau) {
  const Spectrum s = spectrum(grid);
  return std::abs(free_quantum_correlation(spec, s, tau) - free_classical_correlation(spec, s));
}

ExperimentResult exp_tau_sweep(const RunConfig& cfg) {
  const Grid grid = grid_from_config(cfg);
  const PotentialSpec pot = potential_from_config(cfg, grid);
  const CorrelationSpec spec = correlation_from_config(cfg, grid);
  const auto taus = cfg.get_doubles("schedule.tau", {4, 8, 16, 32, 64});
  validate_schedule(taus, "schedule.tau");
  const Estimate ref = classical_reference(spec, cfg, grid, pot);
  const SweepReport rep = tau_sweep(spec, model_for(grid, pot), taus, ref, cfg.get_double("quantum.nu", 0.0),
                                    cfg.get_double("quantum.tol", 1e-13));
  ExperimentResult res;
  res.tables["tau_sweep"] = sweep_table(rep);
  if (pot.is_zero()) {
    // gap should halve per doubling of tau
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
      if (std::abs(taus[i + 1] - 2.0 * taus[i]) > 1e-12 * taus[i]) continue;
      const double r = rep.rows[i + 1].gap / rep.rows[i].gap;
      res.checks.push_back({"gap_ratio_tau_" + std::to_string(static_cast<int>(taus[i])), r, 0.55,
                            r >= 0.45 && r <= 0.55});
    }
  } else {
    const std::size_t from = static_cast<std::size_t>(cfg.get_int("tolerance.monotone_from", 1));
    res.checks.push_back({"gaps_nonincreasing", static_cast<double>(from), 0.0, rep.gaps_nonincreasing(from)});
    const double free_gap = free_case_gap(spec, grid, taus.back());
    res.checks.push_back(check_le("final_gap", rep.rows.back().gap, 3.0 * (ref.std_error + free_gap)));
    res.summary["free_gap_at_tau_max"] = free_gap;
  }
  res.summary["classical_reference"] = {ref.value.real(), ref.value.imag(), ref.std_error};
  return res;
}

ExperimentResult exp_invariance(const RunConfig& cfg) {
  const Grid grid = grid_from_config(cfg);
  const PotentialSpec pot = potential_from_config(cfg, grid);
  const CorrelationSpec base = correlation_from_config(cfg, grid);
  const auto times = cfg.get_doubles("invariance.times", {0.0, 0.5, 1.0});
  const double tau = cfg.get_double("quantum.tau", 4.0);
  const ModeModel model = model_for(grid, pot);
  const FreeFieldSampler sampler(grid, cfg.seed(), cfg.get_double("ensemble.nu", 0.0));
  const Ensemble ens = make_ensemble(sampler, pot, cfg.get_int("ensemble.samples", 10000));
  const FlowParams params = flow_from_config(cfg);
  ExperimentResult res;
  Table t{{"time", "quantum_re", "quantum_im", "classical_re", "classical_im", "classical_stderr"}, {}};
  std::vector<cplx> qv;
  std::vector<Estimate> cv;
  const int N_max = quantum_correlation_auto(base, model, tau).N_max;
  for (double time : times) {
    CorrelationSpec spec;
    spec.terms.push_back({base.terms.front().xi, time});
    qv.push_back(quantum_correlation(spec, model, tau, N_max));
    cv.push_back(classical_correlation(spec, ens, params));
    t.rows.push_back({time, qv.back().real(), qv.back().imag(), cv.back().value.real(), cv.back().value.imag(),
                      cv.back().std_error});
  }
  res.tables["invariance"] = t;
  double qdev = 0.0, cdev = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t j = i + 1; j < times.size(); ++j) {
      qdev = std::max(qdev, std::abs(qv[i] - qv[j]));
      const double s = std::max(cv[i].std_error, cv[j].std_error);
      cdev = std::max(cdev, std::abs(cv[i].value - cv[j].value) / s);
    }
  }
  res.checks.push_back(check_le("quantum_time_dependence", qdev, cfg.get_double("tolerance.quantum", 1e-12)));
  res.checks.push_back(check_le("classical_pairwise_sigmas", cdev, 3.0));
  return res;
}

ExperimentResult exp_local_limit(const RunConfig& cfg) {
  LocalLimitConfig lc;
  lc.grid = grid_from_config(cfg);
  lc.base = base_bump_from_string(cfg.get_string("potential.base", "triangle"));
  lc.taus = cfg.get_doubles("schedule.tau", {4, 8, 16});
  lc.exponent = cfg.get_double("schedule.exponent", 0.25);
  lc.seed = cfg.seed();
  lc.samples = cfg.get_int("ensemble.samples", 5000);
  lc.flow = flow_from_config(cfg);
  const CorrelationSpec spec = correlation_from_config(cfg, lc.grid);
  SweepReport rep;
  try {
    rep = local_limit_sweep(spec, lc);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config error: local limit: ") + e.what());
  }
  ExperimentResult res;
  res.tables["local_limit"] = sweep_table(rep);
  for (const auto& r : rep.rows) {
    const double bound = r.extras.at("gap_quantum") + r.extras.at("gap_mollifier");
    res.checks.push_back(check_le("triangle_tau_" + std::to_string(static_cast<int>(r.parameter)), r.gap,
                                  bound * (1.0 + 1e-12) + 1e-15));
  }
  return res;
}

ExperimentResult exp_mollifier(const RunConfig& cfg) {
  const Grid grid = grid_from_config(cfg);
  const auto eps = cfg.get_doubles("schedule.eps", {0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125});
  const Field u0 = rough_random_field(grid, cfg.get_double("mollifier.s", 0.375), cfg.seed());
  std::vector<MollifierRow> rows;
  try {
    rows = mollifier_convergence(u0, eps, cfg.get_double("mollifier.T", 1.0), grid,
                                 base_bump_from_string(cfg.get_string("potential.base", "triangle")),
                                 flow_from_config(cfg), static_cast<int>(cfg.get_int("mollifier.sample_every", 10)));
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config error: mollifier: ") + e.what());
  }
  ExperimentResult res;
  Table t{{"eps", "sup_error", "slope", "constant"}, {}};
  bool decreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.rows.push_back({rows[i].eps, rows[i].sup_error, rows[i].slope, rows[i].constant});
    if (i > 0 && !(rows[i].sup_error < rows[i - 1].sup_error)) decreasing = false;
  }
  res.tables["mollifier"] = t;
  res.checks.push_back({"errors_decreasing", decreasing ? 1.0 : 0.0, 1.0, decreasing});
  if (rows.size() >= 3) {
    const auto& a = rows[rows.size() - 2];
    const auto& b = rows.back();
    res.checks.push_back({"finest_slope", std::min(a.slope, b.slope), 0.125, std::min(a.slope, b.slope) >= 0.125});
    const double drift = std::abs(b.constant / a.constant - 1.0);
    res.checks.push_back(check_le("constant_drift", drift, 0.2));
  }
  return res;
}

ExperimentResult exp_dyson(const RunConfig& cfg) {
  const Grid grid = grid_from_config(cfg);
  const PotentialSpec pot = potential_from_config(cfg, grid);
  if (pot.is_zero() || pot.kind() == PotentialSpec::Kind::LocalDelta) {
    throw ConfigError("config error: potential.kind: the expansion needs a bounded nonzero interaction");
  }
  const ModeModel model = model_for(grid, pot);
  const Observable xi = parse_observable(cfg.get_strings("correlation.observables", {"superposition:0:1"}).front(),
                                         grid.modes());
  const double K_cal = cfg.get_double("dyson.K", 1.0);
  const double T0 = dyson_radius(model.two_body, K_cal);
  const double t = cfg.get_double("dyson.t", 0.45 * T0);
  const int J = static_cast<int>(cfg.get_int("dyson.order", 8));
  const double tau = cfg.get_double("quantum.tau", 64.0);
  DysonSeries series;
  try {
    series = dyson_coefficients(xi, model, t, J, K_cal, static_cast<int>(cfg.get_int("dyson.nodes", 16)));
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config error: dyson: ") + e.what());
  }
  const auto rows = dyson_quantum_errors(xi, series, model, tau);
  ExperimentResult res;
  Table tab{{"L", "quantum_error"}, {}};
  for (const auto& r : rows) tab.rows.push_back({static_cast<double>(r.L), r.error});
  res.tables["dyson_quantum"] = tab;
  const double ratio = fitted_decay_ratio(rows);
  res.checks.push_back(check_le("fitted_ratio", ratio, 1.2 * series.ratio_bound));
  const NlsFlow flow(grid, pot, flow_from_config(cfg));
  const FreeFieldSampler sampler(grid, cfg.seed());
  double worst = 0.0;
  for (int i = 0; i < static_cast<int>(cfg.get_int("dyson.fd_samples", 8)); ++i) {
    worst = std::max(worst, dyson_first_order_error(xi, model, sampler.sample(i), flow, cfg.get_double("dyson.fd_h", 1e-5)));
  }
  res.checks.push_back(check_le("first_order_fd", worst, 1e-5));
  res.summary["T0"] = T0;
  res.summary["t"] = t;
  res.summary["ratio_bound"] = series.ratio_bound;
  return res;
}

ExperimentResult exp_partition(const RunConfig& cfg) {
  const Grid grid = grid_from_config(cfg);
  const Spectrum spec = spectrum(grid);
  const double nu = cfg.get_double("partition.nu", 1.0);
  if (!(nu > 0.0)) throw ConfigError("config error: partition.nu: must be positive");
  const auto taus = cfg.get_doubles("schedule.tau", {1, 2, 4, 8, 16, 32});
  validate_schedule(taus, "schedule.tau");
  const double limit = partition_ratio_limit(spec, nu);
  // the streamed trace costs O(N_max^M) with N_max ~ tau / lambda_min
  const double trace_max_tau = cfg.get_double("partition.trace_max_tau", 8.0);
  ExperimentResult res;
  Table t{{"tau", "product", "trace", "N_max", "limit", "gap"}, {}};
  double worst = 0.0;
  std::vector<double> gaps;
  for (double tau : taus) {
    const double prod = partition_ratio(spec, nu, tau);
    double trace = std::nan("");
    int N = -1;
    if (grid.M() <= 3 && tau <= trace_max_tau) {
      N = free_particle_cutoff(spec, 0.0, tau, cfg.get_double("partition.tol", 1e-12));
      trace = partition_ratio_trace(spec, nu, tau, N);
      worst = std::max(worst, std::abs(trace - prod));
    }
    gaps.push_back(std::abs(prod - limit));
    t.rows.push_back({tau, prod, trace, static_cast<double>(N), limit, gaps.back()});
  }
  res.tables["partition_ratio"] = t;
  if (grid.M() <= 3) res.checks.push_back(check_le("trace_vs_product", worst, 1e-9));
  for (std::size_t i = 0; i + 1 < taus.size(); ++i) {
    if (std::abs(taus[i + 1] - 2.0 * taus[i]) > 1e-12 * taus[i] || taus[i] < cfg.get_double("partition.halving_from", 32.0)) continue;
    const double r = gaps[i + 1] / gaps[i];
    res.checks.push_back({"gap_ratio_tau_" + std::to_string(static_cast<int>(taus[i])), r, 0.55, r >= 0.45 && r <= 0.55});
  }
  return res;
}

ExperimentResult exp_tail(const RunConfig& cfg) {
  const Grid grid = grid_from_config(cfg);
  const PotentialSpec pot = potential_from_config(cfg, grid);
  const CorrelationSpec spec = correlation_from_config(cfg, grid);
  const auto Ks = cfg.get_doubles("schedule.K", {0.5, 1.0, 2.0});
  validate_schedule(Ks, "schedule.K");
  const FreeFieldSampler sampler(grid, cfg.seed(), cfg.get_double("ensemble.nu", 0.0));
  const Ensemble ens = make_ensemble(sampler, pot, cfg.get_int("ensemble.samples", 20000));
  const auto rows = tail_bound_check(spec, Ks, ens, flow_from_config(cfg), model_for(grid, pot),
                                     cfg.get_double("quantum.tau", 16.0));
  ExperimentResult res;
  Table t{{"K", "classical_abs", "classical_stderr", "quantum_abs"}, {}};
  for (const auto& r : rows) t.rows.push_back({r.K_cal, std::abs(r.classical.value), r.classical.std_error, std::abs(r.quantum)});
  res.tables["tail_bound"] = t;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (std::abs(rows[j].K_cal - 2.0 * rows[i].K_cal) > 1e-12) continue;
      const std::string tag = std::to_string(rows[i].K_cal);
      res.checks.push_back(check_le("classical_halving_K_" + tag, std::abs(rows[j].classical.value),
                                    0.6 * std::abs(rows[i].classical.value)));
      res.checks.push_back(check_le("quantum_halving_K_" + tag, std::abs(rows[j].quantum), 0.6 * std::abs(rows[i].quantum)));
    }
  }
  return res;
}

ExperimentResult exp_xsb(const RunConfig& cfg) {
  const int K = static_cast<int>(cfg.get_int("grid.K", 8));
  const int P = static_cast<int>(cfg.get_int("grid.P", 4 * K + 4));
  const int Q = static_cast<int>(cfg.get_int("xsb.Q", 256));
  const double T = cfg.get_double("xsb.T", resonant_window(1));
  const int fields = static_cast<int>(cfg.get_int("xsb.fields", 200));
  const double sigma = cfg.get_double("xsb.sigma", 0.5);
  const double b = cfg.get_double("xsb.b", 0.55);
  const std::uint64_t seed = cfg.seed();
  ExperimentResult res;
  Table t{{"field", "l2", "xsb_00", "xsb_sigma_b", "linf_hsigma", "strichartz_Q", "strichartz_2Q"}, {}};
  double plancherel = 0.0, s1 = 0.0, s2 = 0.0, embed = 0.0;
  try {
    for (int i = 0; i < fields; ++i) {
      const SpacetimeField f = random_spacetime_field(K, P, Q, T, 4, seed + static_cast<std::uint64_t>(i));
      const SpacetimeField g = random_spacetime_field(K, P, 2 * Q, T, 4, seed + static_cast<std::uint64_t>(i));
      const double l2 = f.l2_norm(), x00 = xsb_norm(f, 0.0, 0.0), xsb = xsb_norm(f, sigma, b);
      const double linf = linf_hsigma_norm(f, sigma), r1 = strichartz_ratio(f), r2 = strichartz_ratio(g);
      plancherel = std::max(plancherel, std::abs(l2 - x00) / l2);
      s1 = std::max(s1, r1);
      s2 = std::max(s2, r2);
      embed = std::max(embed, linf / xsb);
      t.rows.push_back({static_cast<double>(i), l2, x00, xsb, linf, r1, r2});
    }
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config error: xsb: ") + e.what());
  }
  res.tables["xsb_fields"] = t;
  const Grid grid = Grid::make(K, std::max(P, 64), 1.0);
  Table sl{{"k", "slobodeckij", "hdot_sigma", "ratio"}, {}};
  double lo = 1e300, hi = 0.0;
  for (int k = 1; k <= K; ++k) {
    Field f = Field::zeros(grid);
    f[k] = 1.0;
    const double a = slobodeckij_norm(f, grid, sigma), h = homogeneous_sobolev_norm(f, sigma);
    sl.rows.push_back({static_cast<double>(k), a, h, a / h});
    lo = std::min(lo, a / h);
    hi = std::max(hi, a / h);
  }
  res.tables["slobodeckij"] = sl;
  res.checks.push_back(check_le("plancherel", plancherel, 1e-10));
  res.checks.push_back(check_le("strichartz_doubling", std::abs(s2 / s1 - 1.0), 0.1));
  res.checks.push_back({"slobodeckij_envelope_low", lo, 0.5, lo >= 0.5});
  res.checks.push_back(check_le("slobodeckij_envelope_high", hi, 1.5));
  res.summary["embedding_constant"] = embed;
  res.summary["strichartz_max_Q"] = s1;
  res.summary["strichartz_max_2Q"] = s2;
  return res;
}

using ExperimentFn = ExperimentResult (*)(const RunConfig&);

const std::vector<std::pair<std::string, ExperimentFn>>& experiment_table() {
  static const std::vector<std::pair<std::string, ExperimentFn>> table{
      {"sample", exp_sample},
      {"evolve", exp_evolve},
      {"correlate-classical", exp_correlate_classical},
      {"correlate-quantum", exp_correlate_quantum},
      {"tau-sweep", exp_tau_sweep},
      {"invariance", exp_invariance},
      {"local-limit", exp_local_limit},
      {"mollifier-sweep", exp_mollifier},
      {"dyson-check", exp_dyson},
      {"partition-ratio", exp_partition},
      {"tail-bound", exp_tail},
      {"xsb", exp_xsb},
  };
  return table;
}
}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : experiment_table()) n.push_back(name);
    return n;
  }();
  return names;
}

ExperimentResult run_experiment(const std::string& name, const RunConfig& cfg) {
  for (const auto& [n, fn] : experiment_table()) {
    if (n == name) {
      cfg.seed();
      return fn(cfg);
    }
  }
  throw ConfigError("config error: run.experiment: unknown experiment '" + name + "'");
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list{
      {"free-convergence", "free single mode: quantum number density against 1/lambda, gap ~ lambda/(2 tau)",
       "tau-sweep",
       {{"grid.K", "0"}, {"grid.kappa", "1"}, {"potential.kind", "none"}, {"correlation.observables", "number"},
        {"schedule.tau", "4,8,16,32,64,128,256"}}},
      {"interacting-tau-sweep", "two modes {0,1}, w = 1 + cos 2 pi x: two-time correlation over tau vs Monte Carlo",
       "tau-sweep",
       {{"grid.K", "1"}, {"grid.modes", "0,1"}, {"potential.kind", "nonlocal"}, {"potential.fourier", "1,0.5"},
        {"correlation.observables", "superposition:0:1,superposition:0:1"}, {"correlation.times", "0,0.5"},
        {"schedule.tau", "8,16,32,64"}, {"ensemble.samples", "40000"}, {"flow.dt", "0.01"}}},
      {"invariance", "single-observable correlation is time independent (quantum exactly, classical in error bars)",
       "invariance",
       {{"grid.K", "1"}, {"potential.kind", "nonlocal"}, {"potential.fourier", "1,0.5"},
        {"correlation.observables", "superposition:0:1"}, {"quantum.tau", "2"}, {"ensemble.samples", "20000"},
        {"flow.dt", "0.01"}}},
      {"dyson-order", "Schwinger-Dyson truncation error against exact Heisenberg evolution", "dyson-check",
       {{"grid.K", "1"}, {"grid.modes", "0,1"}, {"potential.kind", "nonlocal"}, {"potential.fourier", "1,0.5"},
        {"correlation.observables", "superposition:0:1"}, {"dyson.K", "1"}, {"quantum.tau", "64"},
        {"flow.dt", "0.0001"}}},
      {"mollifier-rate", "mollified flows approach the local flow as eps decreases", "mollifier-sweep",
       {{"grid.K", "511"}, {"grid.P", "2048"}, {"flow.dt", "0.0005"}, {"mollifier.T", "1"}}},
      {"partition-ratio", "free partition function ratio: product formula, Fock trace and tau limit",
       "partition-ratio", {{"grid.K", "1"}, {"partition.nu", "1"}, {"schedule.tau", "1,2,4,8,16,32,64,128,256"}}},
      {"tail-bound", "large-mass tails of correlations decay as the cutoff grows", "tail-bound",
       {{"grid.K", "1"}, {"grid.modes", "0,1"}, {"potential.kind", "nonlocal"}, {"potential.fourier", "1,0.5"},
        {"correlation.observables", "number"}, {"schedule.K", "0.5,1,2"}, {"ensemble.samples", "20000"},
        {"quantum.tau", "16"}}},
      {"xsb-envelope", "Plancherel, Slobodeckij equivalence and Strichartz ratio envelopes", "xsb",
       {{"grid.K", "8"}, {"xsb.Q", "256"}, {"xsb.fields", "200"}}},
  };
  return list;
}

RunConfig preset_config(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name != name) continue;
    RunConfig cfg;
    cfg.set("run.experiment", p.experiment);
    cfg.set("run.preset", p.name);
    cfg.set("run.seed", "20240607");
    for (const auto& [k, v] : p.values) cfg.set(k, v);
    return cfg;
  }
  throw ConfigError("config error: unknown preset '" + name + "'");
}

int run_and_write(const RunConfig& cfg, std::ostream& log) {
  const std::string name = cfg.experiment();
  const std::uint64_t seed = cfg.seed();
  const ExperimentResult res = run_experiment(name, cfg);
  const std::filesystem::path out = cfg.get_string("run.output", "out");
  std::filesystem::create_directories(out);
  nlohmann::json manifest;
  manifest["experiment"] = name;
  manifest["seed"] = seed;
  manifest["config"] = cfg.to_json();
  manifest["config_hash"] = cfg.hash();
  manifest["version"] = "0.1.0";
  for (const auto& [tname, table] : res.tables) {
    const std::string file = tname + ".csv";
    table.write_csv((out / file).string());
    manifest["outputs"].push_back(file);
  }
  for (const auto& c : res.checks) {
    manifest["checks"].push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"passed", c.passed}});
    log << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << std::setprecision(6) << c.value
        << " threshold=" << c.threshold << '\n';
  }
  manifest["summary"] = res.summary;
  manifest["passed"] = res.passed();
  std::ofstream(out / "manifest.json") << manifest.dump(2) << '\n';
  log << "wrote " << out.string() << " (config hash " << cfg.hash() << ")\n";
  return res.passed() ? 0 : 1;
}

}  // namespace nlsgibbs
