#pragma once

// Occupation measures of trajectories as weighted atom lists in (x, xi)
// space, and the holonomy, action and invariance diagnostics evaluated on
// them.

#include <string>
#include <vector>

#include "wkam/flows.hpp"
#include "wkam/grid.hpp"

namespace wkam {

enum class MeasureKind { uniform, discounted };

const char* to_string(MeasureKind k);

struct Atom {
  RealVec x;       // lifted position
  RealVec p;       // momentum
  RealVec xi;      // velocity H_p(x, p)
  double s = 0.0;  // trajectory time of the sample
  double weight = 0.0;

  PhaseState velocity_state() const { return PhaseState{TorusPoint(x), xi, FiberKind::velocity}; }
};

struct EmpiricalMeasure {
  std::vector<Atom> atoms;
  MeasureKind kind = MeasureKind::uniform;
  double T = 0.0;
  double eps = 0.0;
  RealVec x0{0.0};    // trajectory start
  RealVec x_end{0.0}; // trajectory end, gamma(-T)

  double total_mass() const;
  /// Integral of a function of the atom.
  template <typename Fn>
  double integrate(Fn&& fn) const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight * fn(a);
    return s;
  }
};

/// Uniform occupation measure (1/T) int phi(gamma, gamma') ds with
/// composite Simpson weights on each piece between restarts.
EmpiricalMeasure occupation_uniform(const Trajectory& traj, const TonelliModel& model);

/// Discounted occupation measure eps/(1 - e^{-eps T}) int e^{eps s} phi ds.
EmpiricalMeasure occupation_discounted(const Trajectory& traj, const TonelliModel& model, double eps);

/// Single atom of unit mass.
EmpiricalMeasure dirac_measure(const RealVec& x, const RealVec& p, const TonelliModel& model);

/// psi(x) = sin or cos of 2 pi k.x.
struct TestFunction {
  std::string name;
  std::vector<int> wave;
  bool is_sine = true;

  double value(const RealVec& x) const;
  RealVec gradient(const RealVec& x) const;
  double sup_norm() const { return 1.0; }
};

struct TestFunctionSet {
  std::vector<TestFunction> functions;

  /// sin and cos of 2 pi k.x for every nonzero k with |k|_1 <= degree,
  /// one representative per +-k pair.
  static TestFunctionSet trigonometric(int dim, int degree = 3);
};

/// int psi_x . xi dmu for each test function.
std::vector<double> holonomy_terms(const EmpiricalMeasure& mu, const TestFunctionSet& tests);

/// max over the set of |int psi_x . xi dmu|.
double holonomy_residual(const EmpiricalMeasure& mu, const TestFunctionSet& tests);

/// max over the set of |int phi_x . xi dmu + eps int phi dmu
///   - eps (phi(x0) - e^{-eps T} phi(x_end)) / (1 - e^{-eps T})|.
double discounted_holonomy_defect(const EmpiricalMeasure& mu, const TestFunctionSet& tests);

struct ActionStats {
  double action = 0.0;       // int (L - c.xi) dmu
  double discount = 0.0;     // int eps v dmu
  double m1_defect = 0.0;    // |int (L - c.xi - eps v) dmu + h|
  double mather_defect = 0.0;  // |int (L - c.xi) dmu + h|
};

ActionStats action_stats(const EmpiricalMeasure& mu, const TonelliModel& model, const RealVec& c,
                         double eps, double h, const ScalarField& vfield);

/// |int (L - c.xi + h) dmu - eps (v(x0) - e^{-eps T} v(x_end)) / (1 - e^{-eps T})|
/// for a discounted measure.
double discounted_action_defect(const EmpiricalMeasure& mu, const TonelliModel& model,
                                const RealVec& c, double h, const ScalarField& vfield);

struct InvarianceProbe {
  double mass_ball = 0.0;
  double mass_preimage = 0.0;
};

/// Mass of the phase-space ball B = {(x, xi) : |(x, xi) - center| < delta}
/// and of its time-tau preimage, each atom's membership in the preimage
/// being decided by integrating it forward for time tau.
InvarianceProbe invariance_probe(const EmpiricalMeasure& mu, const TonelliModel& model,
                                 const RealVec& c, double eps, double tau, const PhaseState& center,
                                 double delta, double ds = 1e-3);

/// Closed-form masses of the ball and of its preimage for a discounted
/// measure of horizon T built on an orbit that leaves the ball for good:
///   ball      (1 - e^{-eps tau_minus}) / (1 - e^{-eps T})
///   preimage  (e^{-eps (tau - tau_plus)} - e^{-eps (tau + tau_minus)}) / (1 - e^{-eps T})
InvarianceProbe closed_form_masses(double eps, double tau, double tau_minus, double tau_plus, double T);

/// First elapsed time at which the trajectory leaves the phase-space ball
/// (velocity coordinates); the full span if it never does.
double ball_exit_time(const Trajectory& traj, const TonelliModel& model, const PhaseState& center,
                      double delta);

struct SupportCluster {
  PhaseState center;  // velocity form
  double mass = 0.0;
};

/// Greedy clustering of atoms in order of decreasing weight.
std::vector<SupportCluster> support_clusters(const EmpiricalMeasure& mu, double radius);

/// max over the set of |int phi dmu - int phi dnu| (phi depends on x only).
double dictionary_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           const TestFunctionSet& tests);

/// Columns x0[,x1], p0[,p1], weight, kind, T, eps, start0[,start1].
void write_measure_csv(const std::string& path, const EmpiricalMeasure& mu);

}  // namespace wkam
