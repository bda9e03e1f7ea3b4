#pragma once

// Semi-Lagrangian solver for the discounted cell problem
//
//   eps v + H(x, c + v_x) = h   on T^n,
//
// discretised as the fixed point of the one-step Bellman operator
//
//   (T w)(x) = min_xi { dt (L(x,xi) - c.xi + h) + exp(-eps dt) w(x - xi dt) }
//
// with periodic multilinear interpolation of w at the foot point.

#include <cstdint>
#include <vector>

#include "wkam/grid.hpp"
#include "wkam/model.hpp"

namespace wkam {

enum class SolverMethod { policy, value };

enum class CostRule { rectangle, midpoint };

const char* to_string(SolverMethod m);
const char* to_string(CostRule r);

struct SolverConfig {
  double dt = 0.0;              // <= 0 selects the automatic step
  double control_radius = 0.0;  // <= 0 selects a radius from the model
  int controls = 25;            // coarse controls per axis (2-D search)
  int refine_levels = 5;        // 5x5 refinements around the coarse argmin (2-D)
  double tol = 1e-8;
  int max_iter = 100000;
  SolverMethod method = SolverMethod::policy;
  CostRule cost = CostRule::midpoint;
  /// Start from the solution on the grid with half as many nodes per axis,
  /// recursively down to coarse_min nodes per axis (0 disables).
  int coarse_min = 64;

  bool operator==(const SolverConfig&) const = default;
};

/// Concrete step and control radius for a problem.
struct SolverSetup {
  double dt = 0.0;
  double radius = 0.0;
  double beta = 1.0;  // exp(-eps dt)
};

SolverSetup resolve_setup(const SolverConfig& cfg, const TonelliModel& model, const RealVec& c,
                          double eps, const PeriodicGrid& grid);

/// Bellman argmin at one node.
struct NodeControl {
  RealVec xi;
  double running = 0.0;  // dt (L - c.xi + h)
  double value = 0.0;    // running + beta * w(foot)
  Stencil foot;
};

/// Pure operator object; thread-safe for concurrent calls.
class BellmanOperator {
 public:
  BellmanOperator(const TonelliModel& model, RealVec c, double eps, double h,
                  const PeriodicGrid& grid, const SolverConfig& cfg);

  const SolverSetup& setup() const { return setup_; }
  const PeriodicGrid& grid() const { return grid_; }

  /// Argmin at node k. With strict set, an argmin on the box edge throws
  /// ControlRadiusError; otherwise the clipped control is returned.
  NodeControl minimize(const ScalarField& w, std::size_t k, bool strict = true) const;

  /// One synchronous sweep.
  ScalarField apply(const ScalarField& w, bool strict = true) const;
  ScalarField apply(const ScalarField& w, std::vector<NodeControl>& controls,
                    bool strict = true) const;

  bool on_boundary(const NodeControl& nc) const;

 private:
  NodeControl minimize_1d(const ScalarField& w, std::size_t k) const;
  NodeControl minimize_2d(const ScalarField& w, std::size_t k) const;
  void polish_2d(const ScalarField& w, const RealVec& x, double& ba, double& bb, double& best) const;
  double running_cost(const RealVec& x, const RealVec& xi) const;

  const TonelliModel& model_;
  RealVec c_;
  double eps_, h_;
  PeriodicGrid grid_;
  SolverConfig cfg_;
  SolverSetup setup_;
};

ScalarField bellman_apply(const ScalarField& field, const TonelliModel& model, const RealVec& c,
                          double eps, double h, const SolverConfig& cfg);

struct SolveResult {
  ScalarField field;
  int iterations = 0;
  double residual = 0.0;
  SolverSetup setup;
};

SolveResult solve_discounted(const TonelliModel& model, const RealVec& c, double eps, double h,
                             const PeriodicGrid& grid, const SolverConfig& cfg);

/// Same, iterating from a given field on the same grid.
SolveResult solve_discounted(const TonelliModel& model, const RealVec& c, double eps, double h,
                             const ScalarField& initial, const SolverConfig& cfg);

/// h(c) from -eps mean(w^eps) over a decreasing eps sequence, extrapolated
/// to eps = 0 assuming a first-order expansion in eps.
double estimate_effective_h(const TonelliModel& model, const RealVec& c, const PeriodicGrid& grid,
                            const SolverConfig& cfg, const std::vector<double>& eps_seq);

struct MomentumField {
  PeriodicGrid grid;
  std::vector<RealVec> momentum;  // c + v_x
  std::vector<RealVec> control;   // argmin xi
  std::vector<std::uint8_t> shock;  // concave kink: D^- v - D^+ v > threshold
  double threshold = 0.0;         // kink threshold used for the flags

  RealVec interpolate(const RealVec& x) const;
  bool is_shock(std::size_t k) const { return shock[k] != 0; }
};

MomentumField reconstruct_momentum(const ScalarField& field, const TonelliModel& model,
                                   const RealVec& c, double eps, double h,
                                   const SolverConfig& cfg);

struct Shock {
  double location = 0.0;
  double left = 0.0;   // momentum just left of the jump
  double right = 0.0;  // momentum just right of the jump
};

std::vector<Shock> shock_scan_1d(const MomentumField& mfield);

}  // namespace wkam
