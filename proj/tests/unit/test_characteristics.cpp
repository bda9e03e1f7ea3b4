#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wkam/barrier.hpp"
#include "wkam/characteristics.hpp"

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

double dx_of(const Solved& s) { return s.v.grid().spacing(0); }

}  // namespace

TEST_CASE("free particle: straight backward characteristic") {
  const TonelliModel m = make_preset("F0");
  const PeriodicGrid g(1, 64);
  const ScalarField v(g, 1.0);
  const MomentumField mf = reconstruct_momentum(v, m, RealVec{0.5}, 0.1, 0.0, SolverConfig{});
  CharacteristicOptions o;
  o.T = 2.0;
  const Characteristic ch = backward_characteristic(v, mf, m, RealVec{0.5}, 0.1, RealVec{0.3}, o);
  REQUIRE_FALSE(ch.blew_up);
  for (std::size_t i = 0; i < ch.traj.size(); ++i) {
    CHECK(std::abs(ch.traj.x[i][0] - (0.3 + 0.5 * ch.traj.s[i])) < 1e-12);
    CHECK(ch.traj.p[i][0] == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("flat quadraticKam graph: p stays at c") {
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const RealVec c{0.3, -0.2};
  const TonelliModel m = make_quadratic_kam(RealVec{1.0, golden}, c, TrigPolynomial(2, {}));
  const PeriodicGrid g(2, 32);
  const ScalarField v = solve_discounted(m, c, 0.1, 0.0, g, SolverConfig{}).field;
  const MomentumField mf = reconstruct_momentum(v, m, c, 0.1, 0.0, SolverConfig{});
  CharacteristicOptions o;
  o.T = 3.0;
  const Characteristic ch = backward_characteristic(v, mf, m, c, 0.1, RealVec{0.1, 0.7}, o);
  double worst = 0.0;
  for (const RealVec& p : ch.traj.p) worst = std::max(worst, (p - c).norm());
  CHECK(worst <= 1e-10);
  // x' = omega
  CHECK(std::abs(ch.traj.x.back()[0] - (0.1 - 3.0)) < 1e-9);
  CHECK(std::abs(ch.traj.x.back()[1] - (0.7 - 3.0 * golden)) < 1e-9);
}

TEST_CASE("backward orbits stay on the graph of c + v_x") {
  const Solved& s = f1();
  const double dx = dx_of(s);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int seeds = 0;
  double worst_resync = 0.0, worst_transit = 0.0;
  while (seeds < 100) {
    const double x0 = U(rng);
    if (std::abs(x0 - 0.5) <= 3.0 * dx) continue;
    ++seeds;
    CharacteristicOptions o;
    o.T = 10.0;
    o.resync_every = 10;
    const Characteristic a = backward_characteristic(s.v, s.mf, s.model, s.c, s.eps, RealVec{x0}, o);
    REQUIRE_FALSE(a.blew_up);
    worst_resync = std::max(worst_resync, a.max_deviation);

    // free flow up to the neighbourhood of the hyperbolic well
    o.resync_every = 0;
    o.capture_centers = {TorusPoint{0.0}};
    o.capture_radius = 0.05;
    const Characteristic b = backward_characteristic(s.v, s.mf, s.model, s.c, s.eps, RealVec{x0}, o);
    worst_transit = std::max(worst_transit, b.max_deviation_before_capture);
  }
  CHECK(worst_resync <= 5.0 * dx);
  CHECK(worst_transit <= 5.0 * dx);
}

TEST_CASE("graph deviation in transit decays with the grid") {
  std::vector<double> worst;
  for (int N : {1024, 2048, 4096}) {
    const Solved s = solve("F1", 0.0, 0.02, N);
    CharacteristicOptions o;
    o.T = 2.0;
    o.capture_centers = {TorusPoint{0.0}};
    o.capture_radius = 0.05;
    double w = 0.0;
    for (double x0 : {0.1, 0.3, 0.45, 0.6, 0.8})
      w = std::max(w, backward_characteristic(s.v, s.mf, s.model, s.c, s.eps, RealVec{x0}, o)
                          .max_deviation_before_capture);
    worst.push_back(w);
  }
  CHECK(worst[1] < 0.75 * worst[0]);
  CHECK(worst[2] < 0.75 * worst[1]);
}

TEST_CASE("resynced trajectories repeat the time of every restart") {
  const Solved& s = f1();
  CharacteristicOptions o;
  o.T = 0.1;
  o.ds = 1e-3;
  o.resync_every = 10;
  const Characteristic ch = backward_characteristic(s.v, s.mf, s.model, s.c, s.eps, RealVec{0.3}, o);
  // 100 steps, 9 interior restarts
  CHECK(ch.traj.size() == 101 + 9);
  int repeats = 0;
  for (std::size_t i = 1; i < ch.traj.size(); ++i)
    if (ch.traj.s[i] == ch.traj.s[i - 1]) {
      ++repeats;
      CHECK(ch.traj.x[i][0] == ch.traj.x[i - 1][0]);
    }
  CHECK(repeats == 9);
}

TEST_CASE("alpha-limit sets") {
  SUBCASE("a constant trajectory is one cluster") {
    Trajectory t;
    for (int i = 0; i < 50; ++i) {
      t.s.push_back(-i * 0.1);
      t.x.push_back(RealVec{0.25});
      t.p.push_back(RealVec{0.0});
    }
    const AlphaLimitSet a = alpha_limit_set(t, 0.2, 1e-3);
    REQUIRE(a.points.size() == 1);
    CHECK(a.conclusive);
    CHECK(a.points[0].center.x.distance(TorusPoint{0.25}) == 0.0);
  }
  SUBCASE("F1, c = 0: the orbit from 0.3 ends at the well (0, 0)") {
    const Solved& s = f1();
    CharacteristicOptions o;
    o.T = 20.0;
    o.resync_every = 10;
    const Characteristic ch = backward_characteristic(s.v, s.mf, s.model, s.c, s.eps, RealVec{0.3}, o);
    const AlphaLimitSet a = alpha_limit_set(ch.traj, 0.2, 1e-3);
    REQUIRE(a.points.size() == 1);
    CHECK(a.points[0].center.x.distance(TorusPoint{0.0}) <= 1e-3);
    CHECK(std::abs(a.points[0].center.y[0]) <= 1e-3);
  }
  SUBCASE("F2, c = 0.7: every seed ends in the well at 1/2") {
    const Solved s = solve("F2", 0.7, 0.02, 2048);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int clusters = 0;
    for (int i = 0; i < 50; ++i) {
      CharacteristicOptions o;
      o.T = 20.0;
      o.resync_every = 10;
      const Characteristic ch = backward_characteristic(s.v, s.mf, s.model, s.c, s.eps, RealVec{U(rng)}, o);
      REQUIRE_FALSE(ch.blew_up);
      for (const AlphaCluster& cl : alpha_limit_set(ch.traj, 0.2, 1e-3).points) {
        ++clusters;
        CHECK(cl.center.x.distance(TorusPoint{0.5}) <= 1e-2);
      }
    }
    CHECK(clusters >= 50);
  }
}

TEST_CASE("dynamic-programming identity along characteristics") {
  SUBCASE("tau = 0") {
    const Solved& s = f1();
    CharacteristicOptions o;
    o.T = 1.0;
    const Characteristic ch = backward_characteristic(s.v, s.mf, s.model, s.c, s.eps, RealVec{0.3}, o);
    CHECK(verify_value_identity(s.v, s.model, s.c, s.eps, 0.0, ch.traj, 0.0) == 0.0);
  }
  SUBCASE("F1, c = 0, eps = 0.02, tau = 5, first-order in the grid") {
    std::vector<double> res;
    for (int N : {1024, 2048, 4096}) {
      const Solved s = N == 2048 ? f1() : solve("F1", 0.0, 0.02, N);
      CharacteristicOptions o;
      o.T = 5.0;
      o.resync_every = 10;
      const Characteristic ch = backward_characteristic(s.v, s.mf, s.model, s.c, s.eps, RealVec{0.3}, o);
      res.push_back(verify_value_identity(s.v, s.model, s.c, s.eps, 0.0, ch.traj, 5.0));
    }
    CHECK(res[1] <= 5e-3);
    CHECK(res[1] < 0.75 * res[0]);
    CHECK(res[2] < 0.75 * res[1]);
  }
  SUBCASE("undiscounted identity along the separatrix with v*") {
    const TonelliModel m = make_preset("F1");
    const ScalarField vstar = limit_solution_c1(m, 0.0, PeriodicGrid(1, 4096));
    const Trajectory t = integrate_lifted(m, RealVec{0.0}, 0.0, RealVec{0.3}, RealVec{pi * std::sin(0.3 * pi)}, -1.0,
                                          1e-3);
    CHECK(verify_value_identity(vstar, m, RealVec{0.0}, 0.0, 0.0, t, 1.0) <= 5e-3);
  }
}

TEST_CASE("gradient identity c + v_x = L_xi along orbits") {
  SUBCASE("free particle on a constant field") {
    const TonelliModel m = make_preset("F0");
    const PeriodicGrid g(1, 64);
    const MomentumField mf = reconstruct_momentum(ScalarField(g, 0.0), m, RealVec{0.5}, 0.1, 0.0, SolverConfig{});
    const Trajectory t = integrate_lifted(m, RealVec{0.5}, 0.1, RealVec{0.2}, RealVec{0.5}, -1.0, 1e-3);
    CHECK(gradient_identity_scan(mf, m, t) < 1e-12);
  }
  SUBCASE("F1 orbits, and stability under seed perturbation") {
    const Solved& s = f1();
    const double dx = dx_of(s);
    CharacteristicOptions o;
    o.T = 10.0;
    o.resync_every = 10;
    for (double x0 : {0.1, 0.3, 0.7, 0.9}) {
      const double a = gradient_identity_scan(
          s.mf, s.model, backward_characteristic(s.v, s.mf, s.model, s.c, s.eps, RealVec{x0}, o).traj);
      const double b = gradient_identity_scan(
          s.mf, s.model, backward_characteristic(s.v, s.mf, s.model, s.c, s.eps, RealVec{x0 + 1e-3}, o).traj);
      CHECK(a <= 5.0 * dx);
      CHECK(std::abs(a - b) <= 5.0 * dx);
    }
  }
}
