#pragma once

// Exact objects of the one-dimensional mechanical problem: separatrix
// actions, the Peierls barrier, the vanishing-discount limit v* and
// stationary viscosity solutions glued from separatrix branches.

#include <vector>

#include "wkam/grid.hpp"
#include "wkam/model.hpp"

namespace wkam {

/// G(x) = integral of sqrt(2F) from 0 to x on the lifted line, so that
/// G(x + 1) = G(x) + c_plus.
class SeparatrixIntegral {
 public:
  explicit SeparatrixIntegral(const TonelliModel& model, int panels = 1024);

  double operator()(double x) const;
  /// integral over [a, b] of sqrt(2F), any a <= b on the lifted line
  double integral(double a, double b) const { return (*this)(b) - (*this)(a); }
  double period_action() const { return total_; }

 private:
  double piece(double a, double b) const;

  TonelliModel model_;
  std::vector<double> zeros_;
  std::vector<double> table_;  // G at panel boundaries
  double total_ = 0.0;
};

/// h^c(x, y): cheapest separatrix arc from y to x over both orientations.
double peierls_barrier_1d(const TonelliModel& model, double c, double x, double y);
double peierls_barrier_1d(const SeparatrixIntegral& G, double c, double x, double y);

/// v*(x) = min over zeros x_i of h^c(x, x_i). An empty selection uses every
/// zero of F.
ScalarField limit_solution_c1(const TonelliModel& model, double c, const PeriodicGrid& grid,
                              const std::vector<double>& selected_zeros = {});

struct StationarySolution {
  ScalarField u;                 // u(0) = 0
  std::vector<double> jumps;     // final jump positions (last one solved for)
  std::vector<double> momentum;  // c + u_x at the nodes
};

/// Viscosity solution of H(x, c + u_x) = 0 whose momentum runs on S+ up to
/// each jump, drops to S-, and climbs back to S+ at the zero preceding the
/// next jump. All jumps but the last are kept; the last is moved inside its
/// segment until the mean of c + u_x equals c.
StationarySolution build_stationary_solution_1d(const TonelliModel& model, double c,
                                                const std::vector<double>& jump_positions,
                                                const PeriodicGrid& grid);

}  // namespace wkam
