#include "nlsgibbs/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

#include <fftw3.h>

namespace nlsgibbs {

Grid::Grid(int K, int P, double kappa, std::vector<int> modes)
    : K_(K), P_(P), kappa_(kappa), modes_(std::move(modes)), active_(2 * K + 1, 0) {
  for (int k : modes_) active_[k + K_] = 1;
}

Grid Grid::make(int K, int P, double kappa) {
  if (K < 0) throw ParameterError("grid: K must be nonnegative");
  if (!(kappa > 0.0)) throw ParameterError("grid: kappa must be positive");
  if (P % 2 != 0) throw ParameterError("grid: P must be even");
  if (P < 4 * K + 2) {
    throw ParameterError("grid: P = " + std::to_string(P) + " < 4K+2 = " +
                         std::to_string(4 * K + 2) + " aliases cubic products");
  }
  std::vector<int> modes;
  for (int k = -K; k <= K; ++k) modes.push_back(k);
  return Grid(K, P, kappa, std::move(modes));
}

Grid Grid::with_active_modes(std::vector<int> modes) const {
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  if (modes.empty()) throw ParameterError("grid: active mode set is empty");
  for (int k : modes) {
    if (k < -K_ || k > K_) throw ParameterError("grid: active mode outside [-K, K]");
  }
  return Grid(K_, P_, kappa_, std::move(modes));
}

bool Grid::is_active(int k) const {
  return k >= -K_ && k <= K_ && active_[k + K_] != 0;
}

double Grid::lambda(int k) const {
  return 4.0 * kPi * kPi * static_cast<double>(k) * k + kappa_;
}

bool Grid::same_geometry(const Grid& other) const {
  return K_ == other.K_ && P_ == other.P_ && kappa_ == other.kappa_ && modes_ == other.modes_;
}

double Spectrum::lambda_min() const {
  return *std::min_element(lambdas.begin(), lambdas.end());
}

double Spectrum::trace_inverse(double nu) const {
  double s = 0.0;
  for (double l : lambdas) s += 1.0 / (l + nu);
  return s;
}

Spectrum spectrum(const Grid& grid) {
  Spectrum s;
  s.modes = grid.modes();
  s.lambdas.reserve(s.modes.size());
  for (int k : s.modes) s.lambdas.push_back(grid.lambda(k));
  return s;
}

double truncation_tail(int K, double kappa) {
  // sum_{k in Z} 1/(4 pi^2 k^2 + kappa) = coth(sqrt(kappa)/2) / (2 sqrt(kappa))
  const double r = std::sqrt(kappa);
  double total = 1.0 / (std::tanh(r / 2.0) * 2.0 * r);
  double kept = 1.0 / kappa;
  for (int k = 1; k <= K; ++k) kept += 2.0 / (4.0 * kPi * kPi * k * k + kappa);
  return std::max(0.0, total - kept);
}

CVector active_coefficients(const Field& field, const Grid& grid) {
  if (field.coeffs.size() != grid.size()) throw ParameterError("field size does not match grid");
  CVector out(grid.M());
  for (int i = 0; i < grid.M(); ++i) out[i] = field.coeffs[grid.index(grid.modes()[i])];
  return out;
}

Field field_from_active(const CVector& active, const Grid& grid) {
  if (active.size() != grid.M()) throw ParameterError("active coefficient count mismatch");
  Field f = Field::zeros(grid);
  for (int i = 0; i < grid.M(); ++i) f.coeffs[grid.index(grid.modes()[i])] = active[i];
  return f;
}

void project_active(Field& field, const Grid& grid) {
  for (int k = -grid.K(); k <= grid.K(); ++k) {
    if (!grid.is_active(k)) field.coeffs[grid.index(k)] = 0.0;
  }
}

// ---------------------------------------------------------------------------

struct Fft::Plans {
  int n = 0;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// One scratch pair per thread and length keeps execute calls alignment-safe.
struct Scratch {
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  int n = 0;
  ~Scratch() {
    if (in) fftw_free(in);
    if (out) fftw_free(out);
  }
};

Scratch& scratch_for(int n) {
  thread_local std::map<int, Scratch> pool;
  Scratch& s = pool[n];
  if (s.n != n) {
    s.in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    s.out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    s.n = n;
  }
  return s;
}
}  // namespace

Fft::Fft(int n) : n_(n) {
  if (n <= 0) throw ParameterError("fft length must be positive");
  static std::map<int, std::shared_ptr<const Plans>> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) {
    plans_ = it->second;
    return;
  }
  auto p = std::make_shared<Plans>();
  p->n = n;
  fftw_complex* a = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  fftw_complex* b = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  p->fwd = fftw_plan_dft_1d(n, a, b, FFTW_FORWARD, FFTW_ESTIMATE);
  p->bwd = fftw_plan_dft_1d(n, a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(a);
  fftw_free(b);
  cache.emplace(n, p);
  plans_ = p;
}

void Fft::forward(const cplx* in, cplx* out) const {
  Scratch& s = scratch_for(n_);
  std::memcpy(s.in, in, sizeof(cplx) * n_);
  fftw_execute_dft(plans_->fwd, s.in, s.out);
  std::memcpy(static_cast<void*>(out), s.out, sizeof(cplx) * n_);
}

void Fft::backward(const cplx* in, cplx* out) const {
  Scratch& s = scratch_for(n_);
  std::memcpy(s.in, in, sizeof(cplx) * n_);
  fftw_execute_dft(plans_->bwd, s.in, s.out);
  std::memcpy(static_cast<void*>(out), s.out, sizeof(cplx) * n_);
}

// ---------------------------------------------------------------------------

CVector physical_from_band(const CVector& band, int P) {
  const int Q = (static_cast<int>(band.size()) - 1) / 2;
  if (2 * Q + 1 > P) throw ParameterError("band wider than sample count");
  CVector spec = CVector::Zero(P);
  for (int q = -Q; q <= Q; ++q) spec[(q % P + P) % P] = band[q + Q];
  CVector out(P);
  Fft(P).backward(spec.data(), out.data());
  return out;
}

CVector spectral_band(const CVector& values, int Q) {
  const int P = static_cast<int>(values.size());
  if (2 * Q + 1 > P) throw ParameterError("band wider than sample count");
  CVector spec(P);
  Fft(P).forward(values.data(), spec.data());
  CVector band(2 * Q + 1);
  for (int q = -Q; q <= Q; ++q) band[q + Q] = spec[(q % P + P) % P] / static_cast<double>(P);
  return band;
}

CVector to_physical(const Field& field, const Grid& grid) {
  if (field.coeffs.size() != grid.size()) throw ParameterError("field size does not match grid");
  return physical_from_band(field.coeffs, grid.P());
}

Field to_spectral(const CVector& values, const Grid& grid) {
  if (values.size() != grid.P()) throw ParameterError("sample count does not match grid");
  return Field(spectral_band(values, grid.K()));
}

CVector convolve(const CVector& kernel_hat, const CVector& density_hat) {
  if (kernel_hat.size() != density_hat.size()) throw ParameterError("convolve: mode ranges differ");
  return kernel_hat.cwiseProduct(density_hat);
}

}  // namespace nlsgibbs
