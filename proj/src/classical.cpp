#include "nlsgibbs/classical.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "nlsgibbs/parallel.hpp"

namespace nlsgibbs {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {
double unit_open(std::uint64_t bits) {
  // (0, 1]: never zero, so log is finite
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}
}  // namespace

cplx counter_gaussian(std::uint64_t seed, std::uint64_t sample, std::uint64_t mode) {
  const std::uint64_t key = splitmix64(splitmix64(splitmix64(seed) ^ sample) ^ (mode * 0xd1342543de82ef95ULL));
  const double u1 = unit_open(splitmix64(key));
  const double u2 = unit_open(splitmix64(key ^ 0xa0761d6478bd642fULL));
  // |omega|^2 = -log u1 is Exp(1), phase uniform
  return std::polar(std::sqrt(-std::log(u1)), kTwoPi * u2);
}

FreeFieldSampler::FreeFieldSampler(Grid grid, std::uint64_t seed, double nu)
    : grid_(std::move(grid)), seed_(seed), nu_(nu) {
  if (!(nu >= 0.0)) throw ParameterError("sampler: nu must be >= 0");
  for (int k : grid_.modes()) scale_.push_back(1.0 / std::sqrt(grid_.lambda(k) + nu_));
}

CVector FreeFieldSampler::omega(std::int64_t index) const {
  CVector w(grid_.M());
  for (int i = 0; i < grid_.M(); ++i) {
    w[i] = counter_gaussian(seed_, static_cast<std::uint64_t>(index),
                            static_cast<std::uint64_t>(grid_.modes()[i] + grid_.K()));
  }
  return w;
}

Field FreeFieldSampler::sample(std::int64_t index) const { return from_omega(omega(index)); }

Field FreeFieldSampler::from_omega(const CVector& omega) const {
  if (omega.size() != grid_.M()) throw ParameterError("sampler: omega length mismatch");
  CVector c(grid_.M());
  for (int i = 0; i < grid_.M(); ++i) c[i] = omega[i] * scale_[i];
  return field_from_active(c, grid_);
}

double mass(const Field& field) { return field.coeffs.squaredNorm(); }

double interaction_energy(const Field& field, const CVector& w_hat) {
  const int K = field.K();
  const int Q = (static_cast<int>(w_hat.size()) - 1) / 2;
  if (Q < 2 * K) throw ParameterError("interaction: kernel range must cover [-2K, 2K]");
  const CVector& c = field.coeffs;
  double total = 0.0;
  for (int q = -2 * K; q <= 2 * K; ++q) {
    if (w_hat[q + Q] == 0.0) continue;
    // rho_hat(q) = sum_k conj(c_k) c_{k+q}
    cplx rho = 0.0;
    for (int k = std::max(-K, -K - q); k <= std::min(K, K - q); ++k) rho += std::conj(c[k + K]) * c[k + q + K];
    total += w_hat[q + Q].real() * std::norm(rho);
  }
  return 0.5 * total;
}

double interaction_energy(const Field& field, const PotentialSpec& potential, const Grid& grid) {
  if (potential.is_zero()) return 0.0;
  return interaction_energy(field, potential.kernel_hat(grid));
}

cplx theta_observable(const Observable& xi, const Field& field, const Grid& grid) {
  return theta_value(xi, active_coefficients(field, grid));
}

Ensemble make_ensemble(const FreeFieldSampler& sampler, const PotentialSpec& potential, std::int64_t n) {
  if (n <= 0) throw ParameterError("ensemble: sample count must be positive");
  Ensemble e{sampler.grid(), potential, sampler.seed(), sampler.nu(), {}, {}};
  e.samples.resize(n);
  e.weights.resize(n);
  const bool free = potential.is_zero();
  const CVector w_hat = free ? CVector() : potential.kernel_hat(sampler.grid());
  const auto parts = chunks(n);
  parallel_for(static_cast<std::int64_t>(parts.size()), [&](std::int64_t c) {
    const auto& part = parts[c];
    for (std::int64_t i = part.begin; i < part.end; ++i) {
      e.samples[i] = sampler.sample(i);
      e.weights[i] = free ? 1.0 : std::exp(-interaction_energy(e.samples[i], w_hat));
    }
  });
  return e;
}

Estimate ratio_estimate(const std::vector<cplx>& values, const std::vector<double>& weights) {
  const std::int64_t n = static_cast<std::int64_t>(values.size());
  if (n == 0) throw ParameterError("estimate: empty ensemble");
  if (weights.size() != values.size()) throw ParameterError("estimate: weight count mismatch");
  struct Sums {
    double w = 0.0;
    cplx wx = 0.0;
  };
  auto fold = [](Sums a, const Sums& b) {
    a.w += b.w;
    a.wx += b.wx;
    return a;
  };
  const Sums s = chunked_reduce<Sums>(
      n, Sums{},
      [&](Chunk c) {
        Sums r;
        for (std::int64_t i = c.begin; i < c.end; ++i) {
          r.w += weights[i];
          r.wx += weights[i] * values[i];
        }
        return r;
      },
      fold);
  if (!(s.w > 0.0)) throw ParameterError("estimate: all weights vanish");
  Estimate est;
  est.value = s.wx / s.w;
  est.n = n;
  if (n < 2) {
    est.std_error = std::numeric_limits<double>::infinity();
    return est;
  }
  // leave-one-out means theta_i = (S_wx - w_i x_i) / (S_w - w_i)
  struct Jack {
    cplx sum = 0.0;
    double sq = 0.0;
  };
  auto loo = [&](std::int64_t i) { return (s.wx - weights[i] * values[i]) / (s.w - weights[i]); };
  const Jack first = chunked_reduce<Jack>(
      n, Jack{},
      [&](Chunk c) {
        Jack r;
        for (std::int64_t i = c.begin; i < c.end; ++i) r.sum += loo(i);
        return r;
      },
      [](Jack a, const Jack& b) {
        a.sum += b.sum;
        return a;
      });
  const cplx mean = first.sum / static_cast<double>(n);
  const Jack second = chunked_reduce<Jack>(
      n, Jack{},
      [&](Chunk c) {
        Jack r;
        for (std::int64_t i = c.begin; i < c.end; ++i) r.sq += std::norm(loo(i) - mean);
        return r;
      },
      [](Jack a, const Jack& b) {
        a.sq += b.sq;
        return a;
      });
  est.std_error = std::sqrt(static_cast<double>(n - 1) / n * second.sq);
  return est;
}

Estimate gibbs_expectation(const Ensemble& ensemble, const SampleFunctional& X) {
  return weighted_expectation(ensemble, X, [](double) { return 1.0; });
}

Estimate weighted_expectation(const Ensemble& ensemble, const SampleFunctional& X,
                              const std::function<double(double)>& f) {
  const std::int64_t n = ensemble.size();
  if (n == 0) throw ParameterError("expectation: empty ensemble");
  std::vector<cplx> values(n);
  const auto parts = chunks(n);
  parallel_for(static_cast<std::int64_t>(parts.size()), [&](std::int64_t c) {
    for (std::int64_t i = parts[c].begin; i < parts[c].end; ++i) {
      const Field& phi = ensemble.samples[i];
      values[i] = X(phi) * f(mass(phi));
    }
  });
  return ratio_estimate(values, ensemble.weights);
}

cplx wick_moment(const std::vector<int>& conjugated, const std::vector<int>& unconjugated,
                 const Spectrum& spec, double nu) {
  const int na = static_cast<int>(conjugated.size());
  const int nb = static_cast<int>(unconjugated.size());
  if (na != nb) {
    if ((na + nb) % 2 == 1) return 0.0;
    throw ParameterError("wick_moment: unequal numbers of conjugated and unconjugated factors");
  }
  if (na > 20) throw ParameterError("wick_moment: at most 20 pairs");
  auto covariance = [&](int a, int b) -> double {
    if (a != b) return 0.0;
    for (size_t i = 0; i < spec.modes.size(); ++i) {
      if (spec.modes[i] == a) return 1.0 / (spec.lambdas[i] + nu);
    }
    throw ParameterError("wick_moment: mode " + std::to_string(a) + " not in spectrum");
  };
  // permanent by dynamic programming over the set of used unconjugated factors
  std::vector<double> dp(std::size_t{1} << na, 0.0);
  dp[0] = 1.0;
  for (std::size_t mask = 0; mask < dp.size(); ++mask) {
    if (dp[mask] == 0.0) continue;
    const int row = __builtin_popcountll(mask);
    if (row == na) continue;
    for (int j = 0; j < na; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      const double c = covariance(conjugated[row], unconjugated[j]);
      if (c != 0.0) dp[mask | (std::size_t{1} << j)] += dp[mask] * c;
    }
  }
  return dp.back();
}

cplx wick_moment(const std::vector<std::pair<int, int>>& mode_pairs, const Spectrum& spec, double nu) {
  std::vector<int> a, b;
  for (const auto& [k, l] : mode_pairs) {
    a.push_back(k);
    b.push_back(l);
  }
  return wick_moment(a, b, spec, nu);
}

nlohmann::json grid_to_json(const Grid& grid) {
  return {{"K", grid.K()}, {"P", grid.P()}, {"kappa", grid.kappa()}, {"modes", grid.modes()}};
}

Grid grid_from_json(const nlohmann::json& j) {
  Grid g = Grid::make(j.at("K").get<int>(), j.at("P").get<int>(), j.at("kappa").get<double>());
  if (j.contains("modes")) g = g.with_active_modes(j.at("modes").get<std::vector<int>>());
  return g;
}

nlohmann::json potential_to_json(const PotentialSpec& p) {
  switch (p.kind()) {
    case PotentialSpec::Kind::LocalDelta:
      return {{"kind", "local"}};
    case PotentialSpec::Kind::Mollified:
      return {{"kind", "mollified"}, {"eps", p.eps()}, {"base", to_string(p.base())}};
    case PotentialSpec::Kind::Nonlocal:
      break;
  }
  return {{"kind", "nonlocal"}, {"w_hat", p.fourier()}};
}

PotentialSpec potential_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "local") return PotentialSpec::local_delta();
  if (kind == "mollified") {
    return PotentialSpec::mollified(j.at("eps").get<double>(), base_bump_from_string(j.at("base").get<std::string>()));
  }
  if (kind == "nonlocal") return PotentialSpec::nonlocal_cosine(j.at("w_hat").get<std::vector<double>>());
  throw ParameterError("unknown potential kind '" + kind + "'");
}

void write_ensemble(const Ensemble& ensemble, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write " + csv_path);
  out << std::setprecision(17);
  out << "index,weight";
  for (int k = -ensemble.grid.K(); k <= ensemble.grid.K(); ++k) out << ",re_" << k << ",im_" << k;
  out << "\n";
  for (std::int64_t i = 0; i < ensemble.size(); ++i) {
    out << i << "," << ensemble.weights[i];
    for (int m = 0; m < ensemble.grid.size(); ++m) {
      out << "," << ensemble.samples[i].coeffs[m].real() << "," << ensemble.samples[i].coeffs[m].imag();
    }
    out << "\n";
  }
  nlohmann::json meta = {{"seed", ensemble.seed},
                         {"nu", ensemble.nu},
                         {"samples", ensemble.size()},
                         {"grid", grid_to_json(ensemble.grid)},
                         {"potential", potential_to_json(ensemble.potential)}};
  std::ofstream(csv_path + ".json") << meta.dump(2) << "\n";
}

Ensemble read_ensemble(const std::string& csv_path) {
  std::ifstream meta_in(csv_path + ".json");
  if (!meta_in) throw std::runtime_error("missing metadata " + csv_path + ".json");
  const nlohmann::json meta = nlohmann::json::parse(meta_in);
  Ensemble e{grid_from_json(meta.at("grid")), potential_from_json(meta.at("potential")),
             meta.at("seed").get<std::uint64_t>(), meta.at("nu").get<double>(), {}, {}};
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot read " + csv_path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    e.weights.push_back(std::stod(cell));
    Field f = Field::zeros(e.grid);
    for (int m = 0; m < e.grid.size(); ++m) {
      std::getline(ss, cell, ',');
      const double re = std::stod(cell);
      std::getline(ss, cell, ',');
      f.coeffs[m] = cplx(re, std::stod(cell));
    }
    e.samples.push_back(std::move(f));
  }
  return e;
}

}  // namespace nlsgibbs
