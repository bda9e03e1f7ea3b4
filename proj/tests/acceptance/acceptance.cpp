// acceptance [criterion ...]: one PASS/FAIL line per criterion, exit 0 iff
// every requested criterion passes.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wkam/barrier.hpp"
#include "wkam/experiments.hpp"
#include "wkam/parallel.hpp"

using namespace wkam;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string vb(const std::string& name, double value, double bound) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s=%.4g (bound %.4g)", name.c_str(), value, bound);
  return buf;
}

// every check of a study; the detail names the first failure or the count
Outcome all_checks(const std::vector<Check>& checks, const std::string& label) {
  Outcome o{!checks.empty(), ""};
  for (const Check& c : checks)
    if (!c.pass) {
      if (o.pass) o.detail = label + ": " + vb(c.name, c.value, c.bound);
      o.pass = false;
    }
  if (o.pass) o.detail = label + ": " + std::to_string(checks.size()) + " checks";
  if (checks.empty()) o.detail = label + ": no checks";
  return o;
}

Outcome merge(std::initializer_list<Outcome> parts) {
  Outcome o{true, ""};
  for (const Outcome& p : parts) {
    o.pass = o.pass && p.pass;
    o.detail += (o.detail.empty() ? "" : "; ") + p.detail;
  }
  return o;
}

std::filesystem::path scratch() {
  return std::filesystem::temp_directory_path() / "wkam_acceptance";
}

// ------------------------------------------------------------------ criteria

Outcome solver_exact_solutions() {
  SolverConfig cfg;
  cfg.tol = 1e-8;
  const double golden = std::numbers::phi;
  const double f0 = solve_discounted(make_preset("F0"), RealVec{0.0}, 0.05, 0.0, PeriodicGrid(1, 1024), cfg).field.sup_norm();
  const RealVec c1{0.4}, c2{0.2, -0.1};
  const double k1 = solve_discounted(make_quadratic_kam(RealVec{1.0}, c1, TrigPolynomial(1, {})), c1, 0.05, 0.0,
                                     PeriodicGrid(1, 1024), cfg).field.sup_norm();
  const double k2 = solve_discounted(make_quadratic_kam(RealVec{1.0, golden}, c2, TrigPolynomial(2, {})), c2, 0.05,
                                     0.0, PeriodicGrid(2, 64), cfg).field.sup_norm();
  const double bound = 10.0 * cfg.tol;
  return {f0 <= bound && k1 <= bound && k2 <= bound,
          vb("F0", f0, bound) + ", " + vb("kam 1-D", k1, bound) + ", " + vb("kam 64^2", k2, bound)};
}

Outcome effective_hamiltonian() {
  const TonelliModel m = make_preset("F1");
  const PeriodicGrid g(1, 2048);
  double worst = 0.0;
  for (double c : {0.0, 1.0, -1.0, 1.9, -1.9})
    worst = std::max(worst, std::abs(estimate_effective_h(m, RealVec{c}, g, SolverConfig{}, {0.04, 0.02, 0.01})));
  return {worst <= 5e-3, vb("max |h(c)|, c in {0, +-1, +-1.9}", worst, 5e-3)};
}

Outcome bellman_properties() {
  const TonelliModel m = make_preset("F1");
  const PeriodicGrid g(1, 256);
  const BellmanOperator op(m, RealVec{0.3}, 0.05, 0.0, g, SolverConfig{});
  const double beta = op.setup().beta;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto random_field = [&] {
    ScalarField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = 0.05 * U(rng);
    return f;
  };
  auto dist = [](const ScalarField& a, const ScalarField& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
  };
  double contraction = -1.0, monotone = -1.0, shift = 0.0;
  for (int t = 0; t < 100; ++t) {
    const ScalarField a = random_field(), b = random_field();
    const ScalarField Ta = op.apply(a, false), Tb = op.apply(b, false);
    contraction = std::max(contraction, dist(Ta, Tb) - beta * dist(a, b));
    ScalarField upper = a, shifted = a;
    for (std::size_t k = 0; k < a.size(); ++k) {
      upper[k] += std::abs(b[k]);
      shifted[k] += 0.37;
    }
    const ScalarField Tu = op.apply(upper, false), Ts = op.apply(shifted, false);
    for (std::size_t k = 0; k < a.size(); ++k) {
      monotone = std::max(monotone, Ta[k] - Tu[k]);
      shift = std::max(shift, std::abs(Ts[k] - Ta[k] - beta * 0.37));
    }
  }
  return {contraction <= 1e-12 && monotone <= 1e-12 && shift <= 1e-12,
          vb("contraction excess", contraction, 1e-12) + ", " + vb("monotonicity excess", monotone, 1e-12) + ", " +
              vb("shift error", shift, 1e-12)};
}

Outcome graph_invariance() {
  const TonelliModel m = make_preset("F1");
  const RealVec c{0.0};
  const double eps = 0.02;
  const ScalarField v = solve_discounted(m, c, eps, 0.0, PeriodicGrid(1, 2048), SolverConfig{}).field;
  const MomentumField mf = reconstruct_momentum(v, m, c, eps, 0.0, SolverConfig{});
  const double dx = v.grid().spacing(0);
  std::vector<double> shocks;
  for (const Shock& s : shock_scan_1d(mf)) shocks.push_back(s.location);
  std::vector<RealVec> seeds;
  for (const RealVec& s : golden_seeds(200, 1, 4)) {
    bool near = false;
    for (double z : shocks) near = near || std::abs(circle_delta(s[0], z)) <= 3.0 * dx;
    if (!near && seeds.size() < 100) seeds.push_back(s);
  }
  int literal = 0, resync = 0, transit = 0;
  double worst = 0.0;
  for (const RealVec& x0 : seeds) {
    CharacteristicOptions o;
    o.T = 10.0;
    const Characteristic a = backward_characteristic(v, mf, m, c, eps, x0, o);
    worst = std::max(worst, a.max_deviation);
    if (!a.blew_up && a.max_deviation <= 5.0 * dx) ++literal;
    o.resync_every = 10;
    if (backward_characteristic(v, mf, m, c, eps, x0, o).max_deviation <= 5.0 * dx) ++resync;
    o.resync_every = 0;
    o.capture_centers = {TorusPoint{0.0}};
    o.capture_radius = 0.05;
    if (backward_characteristic(v, mf, m, c, eps, x0, o).max_deviation_before_capture <= 5.0 * dx) ++transit;
  }
  return {literal >= 95,
          "free flow over T = 10: " + std::to_string(literal) + "/100 seeds within 5 dx (need 95), worst " +
              fmt("%.3g", worst) + "; momentum reset every 10 steps: " + std::to_string(resync) +
              "/100; free flow until within 0.05 of the well: " + std::to_string(transit) + "/100"};
}

Outcome alpha_limits() {
  const std::string common =
      "study.kind = alpha\nstudy.eps_list = 0.04, 0.02, 0.01\ngrid.n = 8192\nstudy.seeds = 50\nstudy.T = 20\n"
      "study.resync = 10\nrng.seed = 3\n";
  const AlphaStudyResult f1 = run_alpha_study(parse_config(common + "model.preset = F1\nstudy.c = 1\n"));
  const AlphaStudyResult f2 = run_alpha_study(parse_config(common + "model.preset = F2\nstudy.c = 0.7\n"));
  return merge({all_checks(f1.checks, "F1 c=1"), all_checks(f2.checks, "F2 c=0.7")});
}

Outcome c1_rate() {
  const RateStudyResult r = run_rate_study_c1(parse_config(
      "study.kind = rate-c1\nmodel.preset = F1\nstudy.c = 0\nstudy.eps_list = 0.04, 0.02, 0.01, 0.005\n"
      "grid.n = 4096\nsolver.tol = 1e-6\n"));
  return {r.fit.slope >= 0.8 && r.fit.r2 >= 0.98 && r.monotone,
          vb("slope", r.fit.slope, 0.8) + ", " + vb("R^2", r.fit.r2, 0.98) + ", strictly decreasing " +
              (r.monotone ? "yes" : "no")};
}

Outcome c2_rate() {
  const ExperimentConfig cfg = parse_config(
      "study.kind = rate-c2\nmodel.preset = kam2d\nstudy.c = 0, 0\nstudy.eps_list = 0.16, 0.08, 0.04, 0.02\n"
      "grid.n = 128\ndiophantine.eta = 1\ndiophantine.z_max = 200\n");
  const DiophantineResult d = verify_diophantine({{1.0, std::numbers::phi}, 1.0, 200});
  const RateStudyResult r = run_rate_study_c2(cfg);
  bool rows = r.rows.size() == 4;
  double worst = 0.0;
  for (const RateRow& row : r.rows) {
    const double bound = r.beta * std::pow(row.eps, r.exponent);
    rows = rows && row.error <= bound;
    worst = std::max(worst, row.error / bound);
  }
  return {d.nu >= 0.2 && rows && r.exponent == 1.0 / 3.0,
          vb("nu", d.nu, 0.2) + ", worst error / (beta eps^{1/3}) = " + fmt("%.3g", worst) + ", beta = " +
              fmt("%.3g", r.beta)};
}

Outcome selection() {
  const SelectionResult r = run_selection_study(parse_config(
      "study.kind = selection\nmodel.preset = F2\nstudy.c = 0.7; -0.7; 0\nstudy.eps_list = 0.02\ngrid.n = 2048\n"
      "study.seeds = 50\nstudy.T = 20\nstudy.resync = 10\nrng.seed = 1\n"));
  std::size_t w0 = 0, whalf = 1;
  if (r.zeros.size() == 2 && std::abs(circle_delta(r.zeros[0], 0.5)) < 1e-9) std::swap(w0, whalf);
  const bool two = r.zeros.size() == 2 && r.actions.size() == 2 && r.hits.size() == 3;
  const double s2 = r.actions.size() == 2 ? std::min(r.actions[0], r.actions[1]) : 0.0;
  const bool ok = two && std::abs(s2 - 0.27338) <= 2e-5 &&
                  r.hits[0][w0] == 0 && r.hits[0][whalf] > 0 &&   // c = 0.7
                  r.hits[1][w0] > 0 && r.hits[1][whalf] == 0 &&   // c = -0.7
                  r.hits[2][w0] > 0 && r.hits[2][whalf] > 0;      // c = 0
  std::string d = "S2 = " + fmt("%.6f", s2) + " (0.27338 +- 2e-5)";
  if (two)
    for (int i = 0; i < 3; ++i)
      d += std::string(", c=") + (i == 0 ? "0.7" : i == 1 ? "-0.7" : "0") + " seeds at x=0/x=0.5: " +
           std::to_string(r.hits[i][w0]) + "/" + std::to_string(r.hits[i][whalf]);
  return {ok, d};
}

Outcome measures() {
  RunOptions opt;
  opt.timings = false;
  const StudyReport rep = run_study(parse_config(
      "study.kind = measure\nmodel.preset = F2\nstudy.c = 0.7\nstudy.eps_list = 0.05\ngrid.n = 2048\n"
      "study.x0 = 0.3\nstudy.T = 1000\nstudy.tau = 1\nstudy.delta = 0.02\n"), scratch().string(), opt);
  return all_checks(rep.checks, "F2 c=0.7 eps=0.05");
}

Outcome hit_times() {
  RunOptions opt;
  opt.timings = false;
  const StudyReport f1 = run_study(parse_config(
      "study.kind = flow\nmodel.preset = F1\nstudy.c = 0\nstudy.eps_list = 0.02\nstudy.x0 = 0.5\nstudy.T = 10\n"
      "study.delta_list = 0.1, 0.01, 0.001\n"), scratch().string(), opt);
  const StudyReport kam = run_study(parse_config(
      "study.kind = flow\nmodel.preset = kam2d\nstudy.c = 0, 0\nstudy.eps_list = 0.02\nstudy.x0 = 0.1, 0.2\n"
      "study.T = 10\nstudy.delta_list = 0.2, 0.1, 0.05, 0.025, 0.0125\ndiophantine.eta = 1\n"),
      scratch().string(), opt);
  bool slope = false;
  for (const Check& c : kam.checks) slope = slope || c.name == "flow.cover_time_slope";
  Outcome o = merge({all_checks(f1.checks, "F1 separatrix hit times"), all_checks(kam.checks, "cover times")});
  o.pass = o.pass && slope;
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double budget;  // seconds
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> wanted;
  unsigned threads = 0;
  app.add_option("criteria", wanted, "criterion numbers (default: all)")->check(CLI::Range(1, 10));
  app.add_option("--threads", threads, "worker threads (0: hardware concurrency)");
  CLI11_PARSE(app, argc, argv);
  set_thread_count(threads);

  const std::vector<Criterion> all = {
      {1, "solver exact zero solutions", 60, solver_exact_solutions},
      {2, "effective Hamiltonian vanishes on the flat piece", 300, effective_hamiltonian},
      {3, "Bellman contraction, monotonicity, shift", 10, bellman_properties},
      {4, "backward graph invariance", 120, graph_invariance},
      {5, "alpha-limit clusters", 300, alpha_limits},
      {6, "C1 rate", 600, c1_rate},
      {7, "C2 rate", 1800, c2_rate},
      {8, "selection of wells", 600, selection},
      {9, "measure identities", 300, measures},
      {10, "cylinder hit times and cover slope", 120, hit_times},
  };
  if (wanted.empty())
    for (const Criterion& c : all) wanted.push_back(c.id);

  bool every = true;
  for (int id : wanted) {
    const Criterion& c = all[static_cast<std::size_t>(id - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.budget;
    every = every && pass;
    std::printf("criterion %d %s: %s; %s; %.1f s (budget %.0f s)\n", c.id, pass ? "PASS" : "FAIL", c.title,
                o.detail.c_str(), secs, c.budget);
    std::fflush(stdout);
  }
  return every ? 0 : 1;
}
