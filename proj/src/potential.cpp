#include "nlsgibbs/potential.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace nlsgibbs {

double base_bump(BaseBump kind, double y) {
  const double a = std::abs(y);
  if (a >= 1.0) return 0.0;
  switch (kind) {
    case BaseBump::Triangle:
      return 1.0 - a;
    case BaseBump::RaisedCosine:
      return 0.5 * (1.0 + std::cos(kPi * a));
  }
  return 0.0;
}

std::string to_string(BaseBump kind) {
  return kind == BaseBump::Triangle ? "triangle" : "raised-cosine";
}

BaseBump base_bump_from_string(const std::string& name) {
  if (name == "triangle") return BaseBump::Triangle;
  if (name == "raised-cosine") return BaseBump::RaisedCosine;
  throw ParameterError("unknown mollifier base '" + name + "'");
}

double torus_representative(double x) {
  double r = x - std::floor(x + 0.5);
  if (r >= 0.5) r -= 1.0;
  return r;
}

PotentialSpec PotentialSpec::none() { return nonlocal_cosine({}); }

PotentialSpec PotentialSpec::local_delta() {
  PotentialSpec p;
  p.kind_ = Kind::LocalDelta;
  return p;
}

PotentialSpec PotentialSpec::nonlocal_cosine(std::vector<double> fourier) {
  PotentialSpec p;
  p.kind_ = Kind::Nonlocal;
  p.fourier_ = std::move(fourier);
  return p;
}

PotentialSpec PotentialSpec::mollified(double eps, BaseBump base) {
  if (!(eps > 0.0) || eps > 1.0) throw ParameterError("mollifier: eps must lie in (0, 1]");
  PotentialSpec p;
  p.kind_ = Kind::Mollified;
  p.eps_ = eps;
  p.base_ = base;
  return p;
}

bool PotentialSpec::is_zero() const {
  if (kind_ != Kind::Nonlocal) return false;
  for (double a : fourier_) {
    if (a != 0.0) return false;
  }
  return true;
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::LocalDelta:
      os << "local";
      break;
    case Kind::Mollified:
      os << "mollified eps=" << eps_ << " base=" << to_string(base_);
      break;
    case Kind::Nonlocal:
      os << "nonlocal w_hat=[";
      for (size_t q = 0; q < fourier_.size(); ++q) os << (q ? "," : "") << fourier_[q];
      os << "]";
      break;
  }
  return os.str();
}

std::vector<double> PotentialSpec::physical_samples(const Grid& grid) const {
  const int P = grid.P();
  std::vector<double> w(P, 0.0);
  if (kind_ == Kind::LocalDelta) throw ParameterError("local delta has no physical samples");
  if (kind_ == Kind::Nonlocal) {
    for (int j = 0; j < P; ++j) {
      double v = fourier_.empty() ? 0.0 : fourier_[0];
      for (size_t q = 1; q < fourier_.size(); ++q) v += 2.0 * fourier_[q] * std::cos(kTwoPi * q * grid.x(j));
      w[j] = v;
    }
    return w;
  }
  int support = 0;
  double sum = 0.0;
  for (int j = 0; j < P; ++j) {
    w[j] = base_bump(base_, torus_representative(grid.x(j)) / eps_) / eps_;
    if (w[j] > 0.0) ++support;
    sum += w[j];
  }
  if (support < 4) {
    std::ostringstream os;
    os << "mollifier eps=" << eps_ << " covers " << support << " grid cells on P=" << P
       << "; need at least 4, raise P to >= " << static_cast<int>(std::ceil(2.5 / eps_)) * 2;
    throw ParameterError(os.str());
  }
  // unit discrete integral: (1/P) sum_j w(x_j) = 1
  const double scale = static_cast<double>(P) / sum;
  for (double& v : w) v *= scale;
  return w;
}

CVector PotentialSpec::kernel_hat(const Grid& grid) const {
  const int Q = 2 * grid.K();
  CVector hat = CVector::Zero(2 * Q + 1);
  switch (kind_) {
    case Kind::LocalDelta:
      hat.setOnes();
      return hat;
    case Kind::Nonlocal: {
      const auto w = physical_samples(grid);
      const double scale = std::max(1.0, std::abs(fourier_.empty() ? 0.0 : fourier_[0]));
      for (double v : w) {
        if (v < -1e-12 * scale) throw ParameterError("nonlocal kernel is negative on the grid");
      }
      for (int q = -Q; q <= Q; ++q) {
        const size_t a = static_cast<size_t>(std::abs(q));
        hat[q + Q] = a < fourier_.size() ? fourier_[a] : 0.0;
      }
      return hat;
    }
    case Kind::Mollified: {
      const auto w = physical_samples(grid);
      CVector values(grid.P());
      for (int j = 0; j < grid.P(); ++j) values[j] = w[j];
      hat = spectral_band(values, Q);
      // even kernel: drop round-off imaginary parts
      for (int i = 0; i < hat.size(); ++i) hat[i] = hat[i].real();
      return hat;
    }
  }
  return hat;
}

double PotentialSpec::sup_norm(const Grid& grid) const {
  if (kind_ == Kind::LocalDelta) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (double v : physical_samples(grid)) m = std::max(m, v);
  return m;
}

}  // namespace nlsgibbs
