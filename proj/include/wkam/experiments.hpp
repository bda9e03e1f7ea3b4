#pragma once

// Studies driven by an ExperimentConfig: rate studies against exact or
// semi-analytic limits, selection and alpha-limit scans, measure
// diagnostics, flow and barrier reports. Every study returns its checks and
// writes its files into a run directory named from the config hash.

#include <cstdint>
#include <string>
#include <vector>

#include "wkam/characteristics.hpp"
#include "wkam/config.hpp"
#include "wkam/measures.hpp"
#include "wkam/report.hpp"

namespace wkam {

struct StudyReport {
  StudyKind kind = StudyKind::solve;
  std::string run_dir;
  std::vector<Check> checks;
  std::vector<std::string> files;     // relative to run_dir
  std::vector<std::string> warnings;

  bool passed() const;
};

/// Where a config's outputs go: <out_dir>/<study>-<config hash>.
std::string run_directory(const ExperimentConfig& cfg, const std::string& out_dir);

struct RunOptions {
  bool timings = true;  // false writes 0 in timing columns
};

/// Runs the configured study, writes its files and summary.ndjson.
StudyReport run_study(const ExperimentConfig& cfg, const std::string& out_dir,
                      const RunOptions& opt = {});

// ------------------------------------------------------------------ fitting

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t used = 0;
  std::vector<std::string> warnings;  // one per dropped row
};

/// Least squares of log y on log x. Rows with nonpositive values are
/// dropped with a warning; fewer than 3 usable rows throws DomainError.
LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

// ------------------------------------------------------------- rate studies

struct RateRow {
  double eps = 0.0;
  double error = 0.0;  // sup-norm error, NaN when the solve failed
  int grid_n = 0;
  double seconds = 0.0;
  std::string failure;  // solver error text, empty on success
};

struct RateStudyResult {
  std::vector<RateRow> rows;  // eps descending
  LogLogFit fit;
  double exponent = 1.0;  // claimed exponent of the bound
  double beta = 0.0;      // fitted constant of error <= beta eps^exponent
  bool monotone = false;  // errors strictly decreasing
  bool pass = false;
  std::vector<Check> checks;
  std::vector<double> selected_zeros;  // C1: zeros used for v*
};

/// sup |v^eps - v*| for a mechanical model, v* the vanishing-discount limit
/// built from separatrix actions. Pass: slope >= 0.8, R^2 >= 0.98, errors
/// strictly decreasing.
RateStudyResult run_rate_study_c1(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// sup |v^eps - (u - mean u) - shift| for a quadraticKam model, the shift
/// being the minimax constant. Pass: every row within beta eps^{1/(1+2 eta)}
/// with beta = 1.5 times the largest-eps ratio.
RateStudyResult run_rate_study_c2(const ExperimentConfig& cfg, const RunOptions& opt = {});

// ------------------------------------------------------- Diophantine vectors

struct DiophantineSpec {
  std::vector<double> omega;
  double eta = 1.0;
  int z_max = 200;
};

struct DiophantineResult {
  double nu = 0.0;
  std::vector<int> argmin;  // minimizing z
  bool diophantine = false; // nu > 1e-6
};

/// Exhaustive min of |omega.z| |z|_1^eta over 0 < |z|_1 <= z_max.
DiophantineResult verify_diophantine(const DiophantineSpec& spec);

/// Smallest sample time T by which the samples omega s mod 1, s in [0, T]
/// with step delta / (4|omega|), meet every cell of the (ceil(2/delta))^n
/// cover of the torus.
double ergodic_cover_time(const std::vector<double>& omega, double delta);

// --------------------------------------------------------------- seed points

/// Golden-ratio (n = 1) or R2 (n = 2) low-discrepancy points, offset by a
/// uniform draw from mt19937_64(rng_seed).
std::vector<RealVec> golden_seeds(int count, int dim, std::uint64_t rng_seed);

// ------------------------------------------------------- alpha and selection

struct SeedOutcome {
  RealVec seed;
  std::vector<AlphaCluster> clusters;
  bool conclusive = false;
  bool blew_up = false;
};

/// Backward characteristics from the seeds of a solved field and their
/// alpha-limit clusters.
std::vector<SeedOutcome> alpha_scan(const ScalarField& field, const MomentumField& mfield,
                                    const TonelliModel& model, const RealVec& c, double eps,
                                    const std::vector<RealVec>& seeds, const ExperimentConfig& cfg);

struct AlphaStudyRow {
  double c = 0.0, eps = 0.0;
  int grid_n = 0;
  int conclusive = 0, seeds = 0;
  double max_p = 0.0;           // largest |p| over the clusters
  double max_zero_dist = 0.0;   // largest distance from a cluster to a zero of F
  double zero_bound = 0.0;      // 1e-3 + 2|c| eps / min F_xx
  double ratio = 0.0;           // largest |v(cluster)| / eps
  std::vector<SeedOutcome> outcomes;
};

struct AlphaStudyResult {
  std::vector<AlphaStudyRow> rows;  // grouped by c, eps descending within a group
  double beta_hat = 0.0;       // largest ratio over all rows
  std::vector<Check> checks;
};

/// Alpha-limit checks per configured c over the eps list: clusters sit at
/// p = 0, next to a zero of F, and |v| / eps there stays bounded.
AlphaStudyResult run_alpha_study(const ExperimentConfig& cfg);

struct SelectionRow {
  double c = 0.0, eps = 0.0;
  double cluster_x = 0.0, cluster_p = 0.0;
  double mass = 0.0;   // share of all clusters landing here
  int seeds_hit = 0;   // seeds with a cluster here
};

struct SelectionResult {
  std::vector<SelectionRow> rows;
  std::vector<double> zeros;
  std::vector<double> actions;   // S_i on [x_i, x_{i+1}]
  /// per c then per zero: number of seeds with a cluster at that zero
  std::vector<std::vector<int>> hits;
  /// per c then per zero: |v^eps(x_i^{c,eps})| / eps
  std::vector<std::vector<double>> ratios;
  std::vector<Check> checks;
};

/// Which wells the alpha-limit clusters of golden-ratio seeds land in, per
/// c, at the first eps of the list.
SelectionResult run_selection_study(const ExperimentConfig& cfg);

// --------------------------------------------------- discounted invariance

struct ShockProbe {
  bool found = false;  // some side of the shock gives an orbit leaving the ball for good
  double x0 = 0.0, p0 = 0.0;
  double tau_minus = 0.0;  // backward exit time from the ball
  double tau_plus = 0.0;   // forward exit time from the ball
  double T = 0.0;
  InvarianceProbe measured, predicted;
};

/// Discounted measure of the backward orbit started 3 cells to one side of
/// the first shock, probed with the phase-space ball of radius delta around
/// its initial state; the first side whose orbit meets the ball only around
/// s = 0 is used. Orbits use step ds over span T, atoms are pushed forward
/// with step 1e-3.
ShockProbe shock_adjacent_probe(const ScalarField& field, const MomentumField& mfield,
                                const TonelliModel& model, double c, double eps, double tau,
                                double delta, double T, double ds = 1e-4);

// -------------------------------------------------------------- file writers

void write_rate_csv(const std::string& path, const RateStudyResult& r, bool timings);
void write_rate_svg(const std::string& path, const RateStudyResult& r, const std::string& title);
void write_selection_csv(const std::string& path, const SelectionResult& r);

}  // namespace wkam
