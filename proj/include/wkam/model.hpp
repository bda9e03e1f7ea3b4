#pragma once

// Tonelli Hamiltonian/Lagrangian test families on T^n x R^n.
//
//   mechanical1d   H(x,p) = p^2/2 - F(x),  F >= 0 a finite trig series
//   quadraticKam   H(x,p) = w.(p - c - Du) + |p - c - Du|^2/2, so that
//                  v = u solves H(x, c + v_x) = 0 and the flow on the graph
//                  is x' = w
//   genericTonelli user supplied H; gradients and the Legendre transform are
//                  computed numerically

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wkam/core.hpp"

namespace wkam {

enum class ModelKind { mechanical1d, quadraticKam, genericTonelli };

const char* to_string(ModelKind k);

/// F(x) = a0 + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x), k = 1..K.
struct TrigSeries {
  double a0 = 0.0;
  std::vector<double> cos_coeffs;  // a_1..a_K
  std::vector<double> sin_coeffs;  // b_1..b_K

  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  /// All three at once; cheaper than three calls.
  void eval(double x, double& f, double& fx, double& fxx) const;

  /// Same function translated: G(x) = F(x - shift).
  TrigSeries shifted(double shift) const;
};

/// One term A * trig(2 pi k.x) of a periodic function on T^n.
struct TrigTerm {
  double amplitude = 0.0;
  std::vector<int> wave;  // k in Z^n
  bool is_sine = true;
};

/// u(x) = sum of TrigTerm, with gradient and Hessian.
class TrigPolynomial {
 public:
  TrigPolynomial() = default;
  TrigPolynomial(int dim, std::vector<TrigTerm> terms);

  int dim() const { return dim_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double value(const RealVec& x) const;
  RealVec gradient(const RealVec& x) const;
  /// Hessian as row-major 2x2 (only the leading dim x dim block is used).
  std::array<double, 4> hessian(const RealVec& x) const;

 private:
  int dim_ = 1;
  std::vector<TrigTerm> terms_;
};

struct HamiltonianEval {
  double H = 0.0;
  RealVec H_x;
  RealVec H_p;
};

struct LagrangianEval {
  double L = 0.0;
  RealVec L_x;
  RealVec L_xi;
};

/// Parameters of a genericTonelli model. Only H is mandatory.
struct GenericHamiltonian {
  int dim = 1;
  std::function<double(const RealVec& x, const RealVec& p)> H;
};

/// Immutable model value; copies share the (read-only) payload.
class TonelliModel {
 public:
  static TonelliModel mechanical(TrigSeries F, std::string name);
  static TonelliModel quadratic_kam(RealVec omega, RealVec offset, TrigPolynomial u,
                                    std::string name);
  static TonelliModel generic(GenericHamiltonian h, std::string name);

  ModelKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::string& name() const { return name_; }

  HamiltonianEval hamiltonian(const RealVec& x, const RealVec& p) const;
  HamiltonianEval hamiltonian(const TorusPoint& x, const RealVec& p) const {
    return hamiltonian(x.coords(), p);
  }
  double H(const RealVec& x, const RealVec& p) const;
  RealVec H_p(const RealVec& x, const RealVec& p) const;
  RealVec H_x(const RealVec& x, const RealVec& p) const;

  LagrangianEval lagrangian(const RealVec& x, const RealVec& xi) const;
  LagrangianEval lagrangian(const TorusPoint& x, const RealVec& xi) const {
    return lagrangian(x.coords(), xi);
  }
  double L(const RealVec& x, const RealVec& xi) const { return lagrangian(x, xi).L; }

  // mechanical1d accessors (throw DomainError for other kinds)
  const TrigSeries& potential() const;
  double F(double x) const { return potential().value(x); }
  double F_x(double x) const { return potential().d1(x); }
  double F_xx(double x) const { return potential().d2(x); }

  // quadraticKam accessors
  const RealVec& omega() const;
  const RealVec& offset() const;
  const TrigPolynomial& exact_solution() const;

 private:
  TonelliModel() = default;

  struct KamData {
    RealVec omega;
    RealVec offset;
    TrigPolynomial u;
  };

  ModelKind kind_ = ModelKind::mechanical1d;
  int dim_ = 1;
  std::string name_;
  std::shared_ptr<const TrigSeries> F_;
  std::shared_ptr<const KamData> kam_;
  std::shared_ptr<const GenericHamiltonian> gen_;
};

/// Named presets: "F0" (F = 0), "F1", "F2", "kam1d", "kam2d".
TonelliModel make_preset(const std::string& name);

/// The quadraticKam construction with h(c) = 0 and exact solution u.
TonelliModel make_quadratic_kam(const RealVec& omega, const RealVec& c, const TrigPolynomial& u,
                                std::string name = "quadraticKam");

TrigSeries preset_F1();
TrigSeries preset_F2();

enum class Branch { plus, minus };

/// +-sqrt(2F(x)), the separatrix S+ / S-.
double separatrix_momentum(const TonelliModel& model, double x, Branch branch);

struct CriticalValues {
  double c_minus = 0.0;
  double c_plus = 0.0;
};

/// c+- = +- integral over T of sqrt(2F).
CriticalValues critical_c(const TonelliModel& model);

struct SegmentActions {
  std::vector<double> zeros;    // ordered zeros of F in [0,1)
  std::vector<double> actions;  // S_i over [x_i, x_{i+1}], last one wraps
  double c_plus = 0.0;
  double c_minus = 0.0;
};

/// Zeros of F and the per-segment separatrix actions.
SegmentActions segment_actions(const TonelliModel& model);

/// Zeros of F (hyperbolic minima) only.
std::vector<double> potential_zeros(const TonelliModel& model);

}  // namespace wkam
