#pragma once

// Hamiltonian flow with friction,
//
//   x' = H_p(x,p),   p' = -H_x(x,p) + eps c - eps p,
//
// integrated with fixed-step RK4 (eps = 0 is the conservative flow), plus
// stationary points, unstable manifolds and cylinder hit times for the
// one-dimensional mechanical model.

#include <functional>
#include <optional>
#include <vector>

#include "wkam/model.hpp"

namespace wkam {

enum class Direction { forward, backward };

struct Trajectory {
  std::vector<double> s;        // times, 0 first
  std::vector<RealVec> x;       // lifted positions
  std::vector<RealVec> p;       // momenta
  Direction direction = Direction::forward;
  double ds = 0.0;              // nominal step magnitude

  std::size_t size() const { return s.size(); }
  bool empty() const { return s.empty(); }
  PhaseState state(std::size_t i) const { return PhaseState{TorusPoint(x[i]), p[i], FiberKind::momentum}; }
  /// Elapsed time |s_i - s_0|.
  double elapsed(std::size_t i) const { return std::abs(s[i] - s[0]); }
};

class DiscountedFlow {
 public:
  DiscountedFlow(const TonelliModel& model, RealVec c, double eps)
      : model_(model), c_(c), eps_(eps) {}

  void rhs(const RealVec& x, const RealVec& p, RealVec& dx, RealVec& dp) const;
  /// One RK4 step of signed size h.
  void step(RealVec& x, RealVec& p, double h) const;
  /// Velocity x' = H_p at a state.
  RealVec velocity(const RealVec& x, const RealVec& p) const { return model_.H_p(x, p); }

  const TonelliModel& model() const { return model_; }
  const RealVec& c() const { return c_; }
  double eps() const { return eps_; }

 private:
  const TonelliModel& model_;
  RealVec c_;
  double eps_;
};

/// Sample-by-sample stop test; receives the trajectory so far.
using StopRule = std::function<bool(const Trajectory&)>;

/// Integrates from `start` over signed time span `s_span` (negative means
/// backward) with step ds <= 1e-2. Throws BlowUpError if |p| exceeds 1e6.
Trajectory integrate(const TonelliModel& model, const RealVec& c, double eps,
                     const PhaseState& start, double s_span, double ds,
                     const StopRule& stop = nullptr);

/// Same, starting from a lifted position.
Trajectory integrate_lifted(const TonelliModel& model, const RealVec& c, double eps,
                            const RealVec& x0, const RealVec& p0, double s_span, double ds,
                            const StopRule& stop = nullptr);

enum class PointClass { hyperbolic, nonhyperbolic };

struct StationaryPoint {
  double x = 0.0;                         // in [0,1)
  double seed = 0.0;                      // zero of F the search started from
  double eps = 0.0, c = 0.0;
  double lambda_plus = 0.0, lambda_minus = 0.0;
  std::array<double, 2> unstable{1.0, 0.0};  // unit vector in (x, p)
  std::array<double, 2> stable{1.0, 0.0};
  PointClass kind = PointClass::hyperbolic;
};

/// Zeros of F_x + c eps near each zero of F, with linearisation data.
std::vector<StationaryPoint> find_stationary_points(const TonelliModel& model, double c, double eps);

enum class Side { left, right };

/// Unstable manifold branch from a hyperbolic point, traced until its
/// phase-space arc length exceeds arc_budget or it enters the 1e-4 ball of a
/// stationary point after leaving its own.
Trajectory trace_unstable_manifold(const StationaryPoint& sp, const TonelliModel& model, double c,
                                   double eps, Side side, double arc_budget, double ds = 1e-3,
                                   double max_time = 1e3);

struct CylinderHit {
  double time = 0.0;      // elapsed
  std::size_t center = 0;
  std::size_t sample = 0;
};

/// First sample with torus distance <= delta to one of the centers.
std::optional<CylinderHit> cylinder_hit_time(const Trajectory& traj,
                                             const std::vector<TorusPoint>& centers, double delta);

/// Mechanical energy identity: dH/ds = eps H_p.(c - p) along the flow.
double dissipation_rate(const TonelliModel& model, const RealVec& c, double eps, const RealVec& x,
                        const RealVec& p);

}  // namespace wkam
