#pragma once

// Small value types shared by every module: fixed-capacity real vectors for
// n <= 2, torus points, phase-space states and the exception hierarchy.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace wkam {

inline constexpr int kMaxDim = 2;

/// Real vector with runtime dimension 1 or 2.
class RealVec {
 public:
  RealVec() = default;
  explicit RealVec(int n, double fill = 0.0) : n_(n) {
    if (n < 1 || n > kMaxDim) throw std::invalid_argument("RealVec: dimension must be 1 or 2");
    v_.fill(0.0);
    for (int i = 0; i < n; ++i) v_[i] = fill;
  }
  RealVec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
    if (n_ < 1 || n_ > kMaxDim) throw std::invalid_argument("RealVec: dimension must be 1 or 2");
    int i = 0;
    for (double x : xs) v_[i++] = x;
  }

  int size() const { return n_; }
  double& operator[](int i) { return v_[i]; }
  double operator[](int i) const { return v_[i]; }

  RealVec& operator+=(const RealVec& o) {
    for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
    return *this;
  }
  RealVec& operator-=(const RealVec& o) {
    for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
    return *this;
  }
  RealVec& operator*=(double s) {
    for (int i = 0; i < n_; ++i) v_[i] *= s;
    return *this;
  }
  friend RealVec operator+(RealVec a, const RealVec& b) { return a += b; }
  friend RealVec operator-(RealVec a, const RealVec& b) { return a -= b; }
  friend RealVec operator*(RealVec a, double s) { return a *= s; }
  friend RealVec operator*(double s, RealVec a) { return a *= s; }
  friend RealVec operator-(RealVec a) { return a *= -1.0; }

  double dot(const RealVec& o) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += v_[i] * o.v_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  double norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) m = std::max(m, std::abs(v_[i]));
    return m;
  }
  double norm1() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) m += std::abs(v_[i]);
    return m;
  }
  bool finite() const {
    for (int i = 0; i < n_; ++i)
      if (!std::isfinite(v_[i])) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> v_{0.0, 0.0};
  int n_ = 1;
};

/// Reduce a real number into [0,1).
inline double wrap01(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// Signed distance on the circle, result in [-1/2, 1/2).
inline double circle_delta(double a, double b) {
  double d = a - b;
  d -= std::floor(d + 0.5);
  return d;
}

/// Point of the torus T^n with every coordinate reduced into [0,1).
class TorusPoint {
 public:
  TorusPoint() : x_(1) {}
  explicit TorusPoint(const RealVec& lifted) : x_(lifted) {
    for (int i = 0; i < x_.size(); ++i) x_[i] = wrap01(x_[i]);
  }
  TorusPoint(std::initializer_list<double> xs) : TorusPoint(RealVec(xs)) {}

  int dim() const { return x_.size(); }
  double operator[](int i) const { return x_[i]; }
  const RealVec& coords() const { return x_; }

  /// Largest per-axis circle distance.
  double distance_inf(const TorusPoint& o) const {
    double m = 0.0;
    for (int i = 0; i < dim(); ++i) m = std::max(m, std::abs(circle_delta(x_[i], o.x_[i])));
    return m;
  }
  double distance(const TorusPoint& o) const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) {
      double d = circle_delta(x_[i], o.x_[i]);
      s += d * d;
    }
    return std::sqrt(s);
  }

 private:
  RealVec x_;
};

enum class FiberKind { momentum, velocity };

/// Phase-space state: position plus either a momentum p or a velocity xi.
struct PhaseState {
  TorusPoint x;
  RealVec y;  // p when kind == momentum, xi when kind == velocity
  FiberKind kind = FiberKind::momentum;

  bool finite() const { return x.coords().finite() && y.finite(); }

  /// Euclidean phase-space distance (torus metric on x).
  double distance(const PhaseState& o) const {
    double s = 0.0;
    for (int i = 0; i < x.dim(); ++i) {
      double dx = circle_delta(x[i], o.x[i]);
      double dy = y[i] - o.y[i];
      s += dx * dx + dy * dy;
    }
    return std::sqrt(s);
  }
};

// Error hierarchy. Every failure a caller can act on gets its own type.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  static std::string format_residual(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", r);
    return buf;
  }
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + format_residual(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class ControlRadiusError : public Error {
 public:
  ControlRadiusError(const std::string& what, double xi_norm)
      : Error(what), xi_norm_(xi_norm) {}
  double control_norm() const { return xi_norm_; }

 private:
  double xi_norm_;
};

class FeasibilityError : public Error {
 public:
  using Error::Error;
};

class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wkam
