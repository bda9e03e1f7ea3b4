#pragma once

// Backward minimizing characteristics of a solved field, alpha-limit
// clustering and the dynamic-programming identities along them.

#include <vector>

#include "wkam/flows.hpp"
#include "wkam/hj_solver.hpp"

namespace wkam {

struct CharacteristicOptions {
  double T = 10.0;
  double ds = 1e-3;
  /// > 0: reset p to the field momentum every k steps. Each reset adds a
  /// sample repeating the time and position with the new momentum.
  int resync_every = 0;
  /// Optional capture set: the deviation before the orbit first comes within
  /// capture_radius (torus distance in x) of one of these points is also
  /// reported separately.
  std::vector<TorusPoint> capture_centers;
  double capture_radius = 0.0;
};

struct Characteristic {
  Trajectory traj;
  RealVec seed;            // requested start
  RealVec start;           // start actually used (shifted off shocks)
  double shift = 0.0;
  std::vector<double> deviation;  // |p(s) - (c + v_x)(x(s))| per sample
  double max_deviation = 0.0;
  std::size_t capture_sample = 0;  // first captured sample, or traj.size()
  double max_deviation_before_capture = 0.0;
  bool blew_up = false;
  double blow_up_time = 0.0;
};

/// Integrates the discounted flow backward from (x0, c + v_x(x0)).
/// A blow-up is reported through the result, not thrown.
Characteristic backward_characteristic(const ScalarField& field, const MomentumField& mfield,
                                       const TonelliModel& model, const RealVec& c, double eps,
                                       const RealVec& x0, const CharacteristicOptions& opt);

struct AlphaCluster {
  PhaseState center;
  int revisits = 0;  // tail samples inside the cluster ball
};

struct AlphaLimitSet {
  std::vector<AlphaCluster> points;
  double window_fraction = 0.2;
  double radius = 1e-3;
  bool conclusive = false;
};

/// Greedy radius clustering of the trailing window of a trajectory; only
/// clusters visited at least three times are reported.
AlphaLimitSet alpha_limit_set(const Trajectory& traj, double window_fraction = 0.2,
                              double radius = 1e-3);

/// |v(x) - (int_{-tau}^0 e^{eps s}(L - c.x' + h) ds + e^{-eps tau} v(x(-tau)))|
/// along a backward trajectory starting at x = x(0), trapezoid rule.
double verify_value_identity(const ScalarField& field, const TonelliModel& model, const RealVec& c,
                             double eps, double h, const Trajectory& traj, double tau);

/// max over samples of |(c + v_x)(x(s)) - L_xi(x(s), x'(s))|.
double gradient_identity_scan(const MomentumField& mfield, const TonelliModel& model,
                              const Trajectory& traj);

}  // namespace wkam
