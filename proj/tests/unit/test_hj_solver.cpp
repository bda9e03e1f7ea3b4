#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wkam/barrier.hpp"
#include "wkam/hj_solver.hpp"

using namespace wkam;
using std::numbers::pi;

namespace {

double F1_closed(double x) { return pi * pi / 4.0 * (1.0 - std::cos(2.0 * pi * x)); }

// v' = sqrt(2 (F1 - eps v)) from the well at 0 to the symmetric shock at
// 1/2, mirrored onto (1/2, 1): the discounted solution for c = 0.
std::vector<double> shooting_oracle_f1(double eps, int N) {
  const int sub = 64;
  const double h = 1.0 / (static_cast<double>(N) * sub);
  auto rhs = [&](double x, double v) { return std::sqrt(std::max(0.0, 2.0 * (F1_closed(x) - eps * v))); };
  std::vector<double> out(N, 0.0);
  double v = 0.0, x = 0.0;
  for (int k = 1; k <= N / 2; ++k) {
    for (int s = 0; s < sub; ++s) {
      const double k1 = rhs(x, v), k2 = rhs(x + h / 2, v + h / 2 * k1), k3 = rhs(x + h / 2, v + h / 2 * k2),
                   k4 = rhs(x + h, v + h * k3);
      v += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      x += h;
    }
    out[k] = v;
    out[(N - k) % N] = v;
  }
  return out;
}

ScalarField random_field(const PeriodicGrid& g, std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> U(-amp, amp);
  ScalarField f(g);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = U(rng);
  return f;
}

}  // namespace

TEST_CASE("Bellman operator on the zero field of the free particle") {
  const TonelliModel m = make_preset("F0");
  const PeriodicGrid g(1, 256);
  for (double eps : {0.0, 0.01, 1.0}) {
    const ScalarField out = bellman_apply(ScalarField(g, 0.0), m, RealVec{0.0}, eps, 0.0, SolverConfig{});
    CHECK(out.sup_norm() == 0.0);
  }
}

TEST_CASE("Bellman operator on a constant field minimises at rest") {
  const TonelliModel m = make_preset("F1");
  const PeriodicGrid g(1, 256);
  const double K = 0.7, eps = 0.1;
  SolverConfig cfg;
  cfg.cost = CostRule::rectangle;
  const SolverSetup st = resolve_setup(cfg, m, RealVec{0.0}, eps, g);
  const ScalarField out = bellman_apply(ScalarField(g, K), m, RealVec{0.0}, eps, 0.0, cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    worst = std::max(worst, std::abs(out[k] - (st.dt * F1_closed(g.node(k)[0]) + std::exp(-eps * st.dt) * K)));
  CHECK(worst <= 1e-12);

  // the midpoint rule can only undercut the value at rest
  cfg.cost = CostRule::midpoint;
  const ScalarField mid = bellman_apply(ScalarField(g, K), m, RealVec{0.0}, eps, 0.0, cfg);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double at_rest = st.dt * F1_closed(g.node(k)[0]) + std::exp(-eps * st.dt) * K;
    CHECK(mid[k] <= at_rest + 1e-14);
    CHECK(mid[k] >= at_rest - st.dt * st.dt);
  }
}

TEST_CASE("Bellman operator: contraction, monotonicity and constant shifts on random pairs") {
  const TonelliModel m = make_preset("F1");
  const PeriodicGrid g(1, 256);
  std::mt19937_64 rng(2024);
  const BellmanOperator op(m, RealVec{0.3}, 0.05, 0.0, g, SolverConfig{});
  const double beta = op.setup().beta;
  double worst_contraction = -1.0, worst_monotone = -1.0, worst_shift = 0.0;
  for (int t = 0; t < 100; ++t) {
    const ScalarField a = random_field(g, rng, 0.05);
    const ScalarField b = random_field(g, rng, 0.05);
    const ScalarField Ta = op.apply(a, false), Tb = op.apply(b, false);
    worst_contraction = std::max(worst_contraction, sup_distance(Ta, Tb) - beta * sup_distance(a, b));

    ScalarField upper = a;
    for (std::size_t k = 0; k < upper.size(); ++k) upper[k] += std::abs(b[k]);
    const ScalarField Tu = op.apply(upper, false);
    for (std::size_t k = 0; k < g.size(); ++k) worst_monotone = std::max(worst_monotone, Ta[k] - Tu[k]);

    ScalarField shifted = a;
    const double K = 0.37;
    for (std::size_t k = 0; k < shifted.size(); ++k) shifted[k] += K;
    const ScalarField Ts = op.apply(shifted, false);
    for (std::size_t k = 0; k < g.size(); ++k) worst_shift = std::max(worst_shift, std::abs(Ts[k] - Ta[k] - beta * K));
  }
  CHECK(worst_contraction <= 1e-12);
  CHECK(worst_monotone <= 1e-12);
  CHECK(worst_shift <= 1e-12);
}

TEST_CASE("two-dimensional search lands on the exact control of a flat graph") {
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const RealVec c{0.2, -0.1};
  const TonelliModel m = make_quadratic_kam(RealVec{1.0, golden}, c, TrigPolynomial(2, {}));
  const PeriodicGrid g(2, 32);
  const BellmanOperator op(m, c, 0.05, 0.0, g, SolverConfig{});
  // H_p(x, c) = omega at zero slope
  const NodeControl nc = op.minimize(ScalarField(g, 0.0), 37);
  CHECK(std::abs(nc.xi[0] - 1.0) < 1e-9);
  CHECK(std::abs(nc.xi[1] - golden) < 1e-9);
  CHECK(std::abs(nc.running) < 1e-15);
}

TEST_CASE("discounted solve reproduces exact zero solutions") {
  SolverConfig cfg;
  cfg.tol = 1e-8;
  SUBCASE("free particle") {
    const SolveResult r = solve_discounted(make_preset("F0"), RealVec{0.0}, 0.05, 0.0, PeriodicGrid(1, 1024), cfg);
    CHECK(r.field.sup_norm() <= 10.0 * cfg.tol);
  }
  SUBCASE("quadraticKam with u = 0, one and two dimensions") {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    const TonelliModel m1 = make_quadratic_kam(RealVec{1.0}, RealVec{0.4}, TrigPolynomial(1, {}));
    CHECK(solve_discounted(m1, RealVec{0.4}, 0.05, 0.0, PeriodicGrid(1, 64), cfg).field.sup_norm() <= 10.0 * cfg.tol);
    const TonelliModel m2 = make_quadratic_kam(RealVec{1.0, golden}, RealVec{0.2, -0.1}, TrigPolynomial(2, {}));
    CHECK(solve_discounted(m2, RealVec{0.2, -0.1}, 0.05, 0.0, PeriodicGrid(2, 64), cfg).field.sup_norm() <=
          10.0 * cfg.tol);
  }
}

TEST_CASE("discounted solve of F1 against a shooting ODE") {
  const double eps = 0.05;
  const int N = 2048;
  const SolveResult r = solve_discounted(make_preset("F1"), RealVec{0.0}, eps, 0.0, PeriodicGrid(1, N), SolverConfig{});
  const std::vector<double> oracle = shooting_oracle_f1(eps, N);
  double worst = 0.0;
  for (int k = 0; k < N; ++k) worst = std::max(worst, std::abs(r.field[k] - oracle[k]));
  CHECK(worst <= 5e-3);
  // the well is a rest point of cost F1(0) = 0
  CHECK(std::abs(r.field[0]) <= eps);
  CHECK(r.residual <= SolverConfig{}.tol * 10.0);
}

TEST_CASE("coarse-to-fine start does not change the fixed point") {
  SolverConfig cold, warm;
  cold.coarse_min = 0;
  warm.coarse_min = 64;
  const TonelliModel m = make_preset("F2");
  const PeriodicGrid g(1, 1024);
  const SolveResult a = solve_discounted(m, RealVec{0.7}, 0.02, 0.0, g, cold);
  const SolveResult b = solve_discounted(m, RealVec{0.7}, 0.02, 0.0, g, warm);
  CHECK(sup_distance(a.field, b.field) <= 1e-6);
}

TEST_CASE("effective Hamiltonian by vanishing discount") {
  const PeriodicGrid g(1, 1024);
  const std::vector<double> eps_seq{0.04, 0.02, 0.01};
  CHECK(std::abs(estimate_effective_h(make_preset("F1"), RealVec{0.0}, g, SolverConfig{}, eps_seq)) <= 5e-3);
  CHECK(std::abs(estimate_effective_h(make_preset("F1"), RealVec{1.5}, g, SolverConfig{}, eps_seq)) <= 5e-3);
  // F = 0: constants solve the cell problem with h(c) = c^2 / 2
  CHECK(std::abs(estimate_effective_h(make_preset("F0"), RealVec{0.5}, g, SolverConfig{}, eps_seq) - 0.125) <= 5e-3);
}

TEST_CASE("momentum reconstruction") {
  SUBCASE("constant field of the free particle") {
    const PeriodicGrid g(1, 128);
    const MomentumField mf = reconstruct_momentum(ScalarField(g, 0.3), make_preset("F0"), RealVec{0.5}, 0.05, 0.0,
                                                  SolverConfig{});
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(std::abs(mf.momentum[k][0] - 0.5) < 1e-14);
      CHECK_FALSE(mf.is_shock(k));
    }
    CHECK(shock_scan_1d(mf).empty());
  }
  SUBCASE("F1 momenta follow the separatrices away from the shock") {
    const TonelliModel m = make_preset("F1");
    const int N = 2048;
    const double eps = 0.005;
    const SolveResult r = solve_discounted(m, RealVec{0.0}, eps, 0.0, PeriodicGrid(1, N), SolverConfig{});
    const MomentumField mf = reconstruct_momentum(r.field, m, RealVec{0.0}, eps, 0.0, SolverConfig{});
    double worst = 0.0;
    for (int k = 0; k < N; ++k) {
      const double x = static_cast<double>(k) / N;
      if (x < 0.05 || (x > 0.45 && x < 0.55) || x > 0.95) continue;
      const double sep = separatrix_momentum(m, x, x < 0.5 ? Branch::plus : Branch::minus);
      worst = std::max(worst, std::abs(mf.momentum[k][0] - sep));
    }
    // eps v / p plus the grid error
    CHECK(worst <= 0.02);
  }
}

TEST_CASE("shocks of F1 and F2") {
  SUBCASE("F1, c = 0: shocks sit at the jump of v*, every jump goes down") {
    const TonelliModel m = make_preset("F1");
    const int N = 2048;
    const SolveResult r = solve_discounted(m, RealVec{0.0}, 0.02, 0.0, PeriodicGrid(1, N), SolverConfig{});
    const MomentumField mf = reconstruct_momentum(r.field, m, RealVec{0.0}, 0.02, 0.0, SolverConfig{});
    // v* = 1 - |cos pi x| has its concave kink at 1/2
    int flagged = 0;
    for (int k = 0; k < N; ++k)
      if (mf.is_shock(k)) {
        ++flagged;
        CHECK(std::abs(static_cast<double>(k) / N - 0.5) <= 3.0 / N);
      }
    CHECK(flagged >= 1);
    const auto shocks = shock_scan_1d(mf);
    REQUIRE_FALSE(shocks.empty());
    for (const Shock& s : shocks) CHECK(s.left > s.right);
  }
  SUBCASE("F2, c = 0.7: a single downward jump at the kink of v*") {
    const TonelliModel m = make_preset("F2");
    const int N = 2048;
    const SolveResult r = solve_discounted(m, RealVec{0.7}, 0.02, 0.0, PeriodicGrid(1, N), SolverConfig{});
    const MomentumField mf = reconstruct_momentum(r.field, m, RealVec{0.7}, 0.02, 0.0, SolverConfig{});
    const auto shocks = shock_scan_1d(mf);
    REQUIRE(shocks.size() == 1);
    CHECK(shocks[0].left > shocks[0].right);
    const ScalarField vstar = limit_solution_c1(m, 0.7, PeriodicGrid(1, N), {0.5});
    const auto top = std::max_element(vstar.values().begin(), vstar.values().end());
    const double kink = static_cast<double>(top - vstar.values().begin()) / N;
    CHECK(std::abs(circle_delta(shocks[0].location, kink)) <= 0.02);
  }
}

TEST_CASE("Peierls barrier of F1 in closed form") {
  const TonelliModel m = make_preset("F1");
  CHECK(std::abs(peierls_barrier_1d(m, 0.0, 0.0, 0.0)) < 1e-12);
  CHECK(std::abs(peierls_barrier_1d(m, 0.0, 0.5, 0.0) - 1.0) < 1e-9);
  CHECK(std::abs(peierls_barrier_1d(m, 1.0, 0.5, 0.0) - 0.5) < 1e-9);
  const TonelliModel f2 = make_preset("F2");
  CHECK(std::abs(peierls_barrier_1d(f2, 0.7, 0.5, 0.5)) < 1e-12);
}

TEST_CASE("limit solution v*") {
  const int N = 1024;
  const PeriodicGrid g(1, N);
  SUBCASE("F1, c = 0 is 1 - |cos pi x|") {
    const ScalarField v = limit_solution_c1(make_preset("F1"), 0.0, g);
    double worst = 0.0;
    for (int k = 0; k < N; ++k) {
      const double x = static_cast<double>(k) / N;
      worst = std::max(worst, std::abs(v[k] - (1.0 - std::abs(std::cos(pi * x)))));
    }
    CHECK(worst <= 1e-9);
    CHECK(std::abs(v[N / 2] - 1.0) <= 1e-9);
  }
  SUBCASE("vanishes at the zeros of F2 for c between the Aubry thresholds") {
    const TonelliModel m = make_preset("F2");
    for (double c : {0.0, 0.2, -0.2}) {
      const ScalarField v = limit_solution_c1(m, c, g);
      CHECK(std::abs(v[0]) <= 1e-9);
      CHECK(std::abs(v[N / 2]) <= 1e-9);
    }
  }
  SUBCASE("discounted solutions approach v* as eps decreases") {
    const TonelliModel m = make_preset("F1");
    const ScalarField vstar = limit_solution_c1(m, 0.0, PeriodicGrid(1, 4096));
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.04, 0.02, 0.01}) {
      const SolveResult r = solve_discounted(m, RealVec{0.0}, eps, 0.0, PeriodicGrid(1, 4096), SolverConfig{});
      const double err = sup_distance(r.field, vstar);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev <= 2e-3);
  }
}

TEST_CASE("stationary solutions glued from separatrix branches") {
  const TonelliModel m = make_preset("F2");
  const int N = 2048;
  const PeriodicGrid g(1, N);
  const StationarySolution a = build_stationary_solution_1d(m, 0.0, {0.25, 0.75}, g);
  const StationarySolution b = build_stationary_solution_1d(m, 0.0, {0.2, 0.75}, g);

  for (const StationarySolution* s : {&a, &b}) {
    // H(x, c + u_x) = 0 off the jumps
    int bad = 0;
    for (int k = 0; k < N; ++k) {
      const double x = static_cast<double>(k) / N;
      if (std::abs(0.5 * s->momentum[k] * s->momentum[k] - m.F(x)) > 1e-6) ++bad;
    }
    CHECK(bad <= 2 * static_cast<int>(s->jumps.size()));
    // entropy: momentum drops across each jump
    for (double j : s->jumps) {
      const int k = static_cast<int>(std::floor(j * N));
      CHECK(s->momentum[(k - 2 + N) % N] > s->momentum[(k + 3) % N]);
    }
  }
  CHECK(sup_distance(a.u, b.u) > 1e-3);

  // a solution is fixed by its values on the Aubry set:
  // u(x) = min_i u(x_i) + h(x, x_i)
  for (const StationarySolution* s : {&a, &b}) {
    const SeparatrixIntegral G(m);
    double worst = 0.0;
    for (int k = 0; k < N; ++k) {
      const double x = static_cast<double>(k) / N;
      const double rep = std::min(s->u[0] + peierls_barrier_1d(G, 0.0, x, 0.0),
                                  s->u[N / 2] + peierls_barrier_1d(G, 0.0, x, 0.5));
      worst = std::max(worst, std::abs(s->u[k] - rep));
    }
    CHECK(worst <= 1e-6);
  }
}
