#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "wkam/characteristics.hpp"
#include "wkam/measures.hpp"

using namespace wkam;
using std::numbers::pi;

namespace {

struct Solved {
  TonelliModel model;
  RealVec c;
  double eps;
  ScalarField v;
  MomentumField mf;
};

Solved solve(const std::string& preset, double c, double eps, int N) {
  Solved s{make_preset(preset), RealVec{c}, eps, {}, {}};
  s.v = solve_discounted(s.model, s.c, eps, 0.0, PeriodicGrid(1, N), SolverConfig{}).field;
  s.mf = reconstruct_momentum(s.v, s.model, s.c, eps, 0.0, SolverConfig{});
  return s;
}

const Solved& f1() {
  static const Solved s = solve("F1", 0.0, 0.02, 2048);
  return s;
}

Trajectory orbit(const Solved& s, double x0, double T) {
  CharacteristicOptions o;
  o.T = T;
  o.ds = 1e-3;
  o.resync_every = 10;
  const Characteristic ch = backward_characteristic(s.v, s.mf, s.model, s.c, s.eps, RealVec{x0}, o);
  REQUIRE_FALSE(ch.blew_up);
  return ch.traj;
}

Trajectory constant_trajectory(double x, int n, double ds) {
  Trajectory t;
  t.direction = Direction::backward;
  t.ds = ds;
  for (int i = 0; i < n; ++i) {
    t.s.push_back(-i * ds);
    t.x.push_back(RealVec{x});
    t.p.push_back(RealVec{0.0});
  }
  return t;
}

}  // namespace

TEST_CASE("occupation measure of a rest point") {
  const TonelliModel m = make_preset("F1");
  const EmpiricalMeasure mu = occupation_uniform(constant_trajectory(0.0, 101, 0.01), m);
  CHECK(std::abs(mu.total_mass() - 1.0) < 1e-14);
  CHECK(std::abs(mu.T - 1.0) < 1e-12);
  const double phi = mu.integrate([](const Atom& a) { return std::cos(a.x[0]) + a.xi[0]; });
  CHECK(std::abs(phi - 1.0) < 1e-14);
  const auto cl = support_clusters(mu, 1e-3);
  REQUIRE(cl.size() == 1);
  CHECK(std::abs(cl[0].mass - 1.0) < 1e-14);
}

TEST_CASE("uniform occupation measure of a long F1 orbit") {
  const Solved& s = f1();
  static const Trajectory t = orbit(s, 0.3, 200.0);
  static const EmpiricalMeasure mu = occupation_uniform(t, s.model);
  CHECK(std::abs(mu.total_mass() - 1.0) < 1e-10);

  SUBCASE("mass concentrates at the well") {
    const auto cl = support_clusters(mu, 1e-2);
    REQUIRE_FALSE(cl.empty());
    CHECK(cl[0].center.x.distance(TorusPoint{0.0}) <= 1e-2);
    CHECK(cl[0].mass >= 0.95);
  }
  SUBCASE("holonomy terms telescope to (psi(x0) - psi(x(-T))) / T") {
    const TestFunctionSet tests = TestFunctionSet::trigonometric(1, 3);
    const std::vector<double> terms = holonomy_terms(mu, tests);
    double worst = 0.0;
    for (std::size_t i = 0; i < tests.functions.size(); ++i) {
      const TestFunction& psi = tests.functions[i];
      worst = std::max(worst, std::abs(terms[i] - (psi.value(t.x.front()) - psi.value(t.x.back())) / mu.T));
    }
    CHECK(worst <= 1e-8);
    CHECK(holonomy_residual(mu, tests) <= 2.0 / mu.T);
  }
  SUBCASE("doubling T halves the holonomy residual") {
    const TestFunctionSet tests = TestFunctionSet::trigonometric(1, 3);
    const EmpiricalMeasure half = occupation_uniform(orbit(s, 0.3, 100.0), s.model);
    const double ratio = holonomy_residual(mu, tests) / holonomy_residual(half, tests);
    CHECK(std::abs(ratio - 0.5) <= 0.05);
  }
  SUBCASE("(M1) defect of the discounted problem is small") {
    const ActionStats st = action_stats(mu, s.model, s.c, s.eps, 0.0, s.v);
    CHECK(st.m1_defect <= 1e-2);
    CHECK(st.action >= -1e-3);
  }
  SUBCASE("a ball crossed once has the mass of its preimage") {
    // the orbit crosses x = 0.25 once, far from the well
    std::size_t k = 0;
    while (k < t.size() && t.x[k][0] > 0.25) ++k;
    REQUIRE(k < t.size());
    const double tau = 0.05;
    const PhaseState center{TorusPoint(t.x[k]), s.model.H_p(t.x[k], t.p[k]), FiberKind::velocity};
    const InvarianceProbe pr = invariance_probe(mu, s.model, s.c, s.eps, tau, center, 0.05);
    CHECK(pr.mass_ball > 0.0);
    CHECK(std::abs(pr.mass_ball - pr.mass_preimage) <= 2.0 * tau / mu.T + 2.0 * 1e-3 / mu.T);
  }
  SUBCASE("a tiny ball away from the orbit carries no mass") {
    const PhaseState center{TorusPoint{0.6}, RealVec{3.0}, FiberKind::velocity};
    const InvarianceProbe pr = invariance_probe(mu, s.model, s.c, s.eps, 0.01, center, 1e-6);
    CHECK(pr.mass_ball == 0.0);
    CHECK(pr.mass_preimage == 0.0);
  }
}

TEST_CASE("holonomy of a rest point") {
  const TonelliModel m = make_preset("F1");
  const EmpiricalMeasure d = dirac_measure(RealVec{0.0}, RealVec{0.0}, m);
  CHECK(holonomy_residual(d, TestFunctionSet::trigonometric(1, 3)) == 0.0);
  const ActionStats st = action_stats(d, m, RealVec{0.0}, 0.02, 0.0, ScalarField(PeriodicGrid(1, 16), 0.0));
  CHECK(st.mather_defect == 0.0);
}

TEST_CASE("discounted occupation measures") {
  static const Solved s = solve("F2", 0.7, 0.05, 2048);
  static const EmpiricalMeasure md = occupation_discounted(orbit(s, 0.3, 20.0 / s.eps), s.model, s.eps);
  CHECK(std::abs(md.total_mass() - 1.0) < 1e-10);

  SUBCASE("the last 1/eps carries at least 1 - 1/e") {
    double recent = 0.0;
    for (const Atom& a : md.atoms)
      if (-a.s <= 1.0 / s.eps) recent += a.weight;
    CHECK(recent >= 1.0 - std::exp(-1.0));
  }
  SUBCASE("finite-horizon action identity") {
    CHECK(discounted_action_defect(md, s.model, s.c, 0.0, s.v) <= 1e-3);
  }
  SUBCASE("discounted holonomy") {
    CHECK(discounted_holonomy_defect(md, TestFunctionSet::trigonometric(1, 3)) <= 1e-3);
  }
  SUBCASE("action plus h equals eps v(x0) for long horizons") {
    const ActionStats st = action_stats(md, s.model, s.c, s.eps, 0.0, s.v);
    CHECK(std::abs(st.action - s.eps * s.v.interpolate(RealVec{0.3})) <= 1e-2);
  }
}

TEST_CASE("closed-form ball and preimage masses against direct quadrature") {
  // density eps e^{eps s} / (1 - e^{-eps T}) on [-T, 0]; the orbit sits in
  // the ball for s in (-tau_minus, tau_plus)
  const double eps = 0.05, tau = 1.0, tm = 0.03, tp = 0.02, T = 40.0;
  const int n = 2000000;
  const double h = T / n;
  double ball = 0.0, pre = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = -T + (i + 0.5) * h;
    const double w = eps * std::exp(eps * s) / (1.0 - std::exp(-eps * T)) * h;
    if (s > -tm) ball += w;
    if (s + tau > -tm && s + tau < tp) pre += w;
  }
  const InvarianceProbe cf = closed_form_masses(eps, tau, tm, tp, T);
  CHECK(std::abs(cf.mass_ball - ball) <= 1e-6);
  CHECK(std::abs(cf.mass_preimage - pre) <= 1e-6);
}

TEST_CASE("support clusters and dictionary distance") {
  const TonelliModel m = make_preset("F1");
  const EmpiricalMeasure d = dirac_measure(RealVec{0.2}, RealVec{0.4}, m);
  const auto cl = support_clusters(d, 1e-3);
  REQUIRE(cl.size() == 1);
  CHECK(cl[0].mass == 1.0);
  CHECK(cl[0].center.x.distance(TorusPoint{0.2}) == 0.0);
  CHECK(dictionary_distance(d, d, TestFunctionSet::trigonometric(1, 3)) == 0.0);
  const EmpiricalMeasure e = dirac_measure(RealVec{0.7}, RealVec{0.4}, m);
  CHECK(dictionary_distance(d, e, TestFunctionSet::trigonometric(1, 1)) > 1.0);
}

TEST_CASE("F2, c = 0: both wells carry alpha-limit mass across seeds") {
  const Solved s = solve("F2", 0.0, 0.02, 2048);
  bool well0 = false, well_half = false;
  for (int i = 0; i < 20; ++i) {
    const double x0 = std::fmod(0.1 + i * 0.6180339887498949, 1.0);
    const EmpiricalMeasure mu = occupation_uniform(orbit(s, x0, 50.0), s.model);
    const auto cl = support_clusters(mu, 1e-2);
    REQUIRE_FALSE(cl.empty());
    if (cl[0].center.x.distance(TorusPoint{0.0}) <= 1e-2) well0 = true;
    if (cl[0].center.x.distance(TorusPoint{0.5}) <= 1e-2) well_half = true;
  }
  CHECK(well0);
  CHECK(well_half);
}

TEST_CASE("measure CSV columns") {
  const TonelliModel m = make_preset("F1");
  const EmpiricalMeasure mu = occupation_uniform(constant_trajectory(0.1, 3, 0.5), m);
  const auto path = std::filesystem::temp_directory_path() / "wkam_measure_test.csv";
  write_measure_csv(path.string(), mu);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x0,p0,weight,kind,T,eps,start0");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 3);
  std::filesystem::remove(path);
}
