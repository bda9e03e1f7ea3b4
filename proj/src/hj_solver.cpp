#include "wkam/hj_solver.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cfloat>
#include <limits>

#include "wkam/parallel.hpp"

namespace wkam {

const char* to_string(SolverMethod m) { return m == SolverMethod::policy ? "policy" : "value"; }
const char* to_string(CostRule r) { return r == CostRule::rectangle ? "rectangle" : "midpoint"; }

namespace {

double sample_sup(const PeriodicGrid& grid, const std::function<double(const RealVec&)>& f) {
  // coarse sampling is enough for a radius heuristic
  const PeriodicGrid probe(grid.dim(), 64);
  double m = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) m = std::max(m, f(probe.node(k)));
  return m;
}

}  // namespace

SolverSetup resolve_setup(const SolverConfig& cfg, const TonelliModel& model, const RealVec& c,
                          double eps, const PeriodicGrid& grid) {
  if (c.size() != model.dim() || grid.dim() != model.dim())
    throw DomainError("solver: model, c and grid dimensions differ");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("solver: eps must be >= 0");
  SolverSetup s;
  s.radius = cfg.control_radius;
  if (s.radius <= 0.0) {
    // |eps v| <= sup |H(x,c) - h|, which bounds the momentum (and so the
    // optimal control) through the Hamiltonian.
    const double A = sample_sup(grid, [&](const RealVec& x) { return std::abs(model.H(x, c)); });
    switch (model.kind()) {
      case ModelKind::mechanical1d: {
        const double Fmax = sample_sup(grid, [&](const RealVec& x) { return model.F(x[0]); });
        s.radius = std::sqrt(2.0 * (Fmax + 2.0 * A)) + 0.5;
        break;
      }
      case ModelKind::quadraticKam:
        s.radius = std::sqrt(model.omega().norm2() + 4.0 * A) + 0.5;
        break;
      case ModelKind::genericTonelli:
        s.radius =
            2.0 * sample_sup(grid, [&](const RealVec& x) { return model.H_p(x, c).norm_inf(); }) +
            2.0;
        break;
    }
  }
  s.dt = cfg.dt;
  if (s.dt <= 0.0) s.dt = grid.max_spacing();
  s.beta = std::exp(-eps * s.dt);
  return s;
}

BellmanOperator::BellmanOperator(const TonelliModel& model, RealVec c, double eps, double h,
                                 const PeriodicGrid& grid, const SolverConfig& cfg)
    : model_(model), c_(c), eps_(eps), h_(h), grid_(grid), cfg_(cfg) {
  setup_ = resolve_setup(cfg, model, c, eps, grid);
}

double BellmanOperator::running_cost(const RealVec& x, const RealVec& xi) const {
  const double dt = setup_.dt;
  if (cfg_.cost == CostRule::midpoint) {
    RealVec xm = x - xi * (0.5 * dt);
    return dt * (model_.L(xm, xi) - c_.dot(xi) + h_);
  }
  return dt * (model_.L(x, xi) - c_.dot(xi) + h_);
}

NodeControl BellmanOperator::minimize(const ScalarField& w, std::size_t k, bool strict) const {
  NodeControl nc = grid_.dim() == 1 ? minimize_1d(w, k) : minimize_2d(w, k);
  if (strict && on_boundary(nc)) {
    std::string where;
    for (int a = 0; a < grid_.dim(); ++a)
      where += (a ? "," : "") + std::to_string(grid_.node(k)[a]);
    throw ControlRadiusError("Bellman argmin reached the control radius " +
                                 std::to_string(setup_.radius) + " at x=(" + where + ")",
                             nc.xi.norm_inf());
  }
  return nc;
}

bool BellmanOperator::on_boundary(const NodeControl& nc) const {
  return nc.xi.norm_inf() >= setup_.radius * (1.0 - 1e-12);
}

// On each grid cell the interpolant is affine in xi, so for the rectangle
// rule the per-cell problem is a convex one with minimiser
// xi = H_p(x, c + beta * slope) clipped to the cell's control interval.
NodeControl BellmanOperator::minimize_1d(const ScalarField& w, std::size_t k) const {
  const double dx = grid_.spacing(0), dt = setup_.dt, R = setup_.radius, beta = setup_.beta;
  const int N = grid_.count(0);
  const double xj = static_cast<double>(k) * dx;
  const RealVec x{xj};
  const long long kmin = static_cast<long long>(std::floor((xj - R * dt) / dx));
  const long long kmax = static_cast<long long>(std::floor((xj + R * dt) / dx));

  double best = std::numeric_limits<double>::infinity();
  double best_xi = 0.0, best_run = 0.0;

  for (long long cell = kmin; cell <= kmax; ++cell) {
    const double left = static_cast<double>(cell) * dx;
    double lo = std::max(-R, (xj - left - dx) / dt);
    double hi = std::min(R, (xj - left) / dt);
    if (lo > hi) continue;
    const int i0 = grid_.wrap_index(0, cell), i1 = (i0 + 1) % N;
    const double w0 = w[i0], slope = (w[i1] - w0) / dx;
    auto objective = [&](double xi, double& run) {
      run = running_cost(x, RealVec{xi});
      return run + beta * (w0 + slope * (xj - xi * dt - left));
    };
    double xi;
    if (cfg_.cost == CostRule::rectangle) {
      xi = std::clamp(model_.H_p(x, RealVec{c_[0] + beta * slope})[0], lo, hi);
    } else {
      // the cell objective is convex for the step sizes used here, so its
      // minimiser is the root of the derivative when that changes sign
      auto slope_of = [&](double q) {
        const RealVec xm{xj - 0.5 * q * dt};
        const LagrangianEval le = model_.lagrangian(xm, RealVec{q});
        return le.L_xi[0] - 0.5 * dt * le.L_x[0] - c_[0] - beta * slope;
      };
      const double dlo = slope_of(lo), dhi = slope_of(hi);
      if (dlo >= 0.0) {
        xi = lo;
      } else if (dhi <= 0.0) {
        xi = hi;
      } else {
        std::uintmax_t iters = 60;
        const auto root = boost::math::tools::toms748_solve(
            slope_of, lo, hi, dlo, dhi, boost::math::tools::eps_tolerance<double>(48), iters);
        xi = 0.5 * (root.first + root.second);
      }
    }
    double run;
    const double val = objective(xi, run);
    if (val < best) {
      best = val;
      best_xi = xi;
      best_run = run;
    }
  }
  NodeControl nc;
  nc.xi = RealVec{best_xi};
  nc.running = best_run;
  nc.foot = interpolation_stencil(grid_, RealVec{xj - best_xi * dt});
  nc.value = best_run + beta * w.interpolate(nc.foot);
  return nc;
}

// 2-D: grid search over the control box followed by successive 5x5
// refinements around the incumbent.
// Newton steps on the bilinear piece of the cell holding the foot point,
// extended beyond the cell; a step is kept only if the true objective drops.
void BellmanOperator::polish_2d(const ScalarField& w, const RealVec& x, double& ba, double& bb,
                                double& best) const {
  const double dt = setup_.dt, R = setup_.radius, beta = setup_.beta;
  const double dx0 = grid_.spacing(0), dx1 = grid_.spacing(1);
  auto objective = [&](double a, double b) {
    return running_cost(x, RealVec{a, b}) + beta * w.interpolate(RealVec{x[0] - a * dt, x[1] - b * dt});
  };
  const double fd = 1e-4;
  for (int it = 0; it < 8; ++it) {
    const double y0 = x[0] - ba * dt, y1 = x[1] - bb * dt;
    const long long i = static_cast<long long>(std::floor(y0 / dx0));
    const long long j = static_cast<long long>(std::floor(y1 / dx1));
    const int i0 = grid_.wrap_index(0, i), i1 = grid_.wrap_index(0, i + 1);
    const int j0 = grid_.wrap_index(1, j), j1 = grid_.wrap_index(1, j + 1);
    const double w00 = w[grid_.flat(i0, j0)], w10 = w[grid_.flat(i1, j0)];
    const double w01 = w[grid_.flat(i0, j1)], w11 = w[grid_.flat(i1, j1)];
    auto piece = [&](double a, double b) {
      const double s = (x[0] - a * dt) / dx0 - static_cast<double>(i);
      const double t = (x[1] - b * dt) / dx1 - static_cast<double>(j);
      const double wi = w00 * (1 - s) * (1 - t) + w10 * s * (1 - t) + w01 * (1 - s) * t + w11 * s * t;
      return running_cost(x, RealVec{a, b}) + beta * wi;
    };
    const double f0 = piece(ba, bb);
    const double fpa = piece(ba + fd, bb), fma = piece(ba - fd, bb);
    const double fpb = piece(ba, bb + fd), fmb = piece(ba, bb - fd);
    const double ga = (fpa - fma) / (2 * fd), gb = (fpb - fmb) / (2 * fd);
    const double haa = (fpa - 2 * f0 + fma) / (fd * fd), hbb = (fpb - 2 * f0 + fmb) / (fd * fd);
    const double hab = (piece(ba + fd, bb + fd) - piece(ba + fd, bb - fd) - piece(ba - fd, bb + fd) +
                        piece(ba - fd, bb - fd)) / (4 * fd * fd);
    const double det = haa * hbb - hab * hab;
    if (!(haa > 0.0) || !(det > 0.0)) return;
    double da = -(hbb * ga - hab * gb) / det, db = -(haa * gb - hab * ga) / det;
    bool moved = false;
    for (int half = 0; half < 4 && !moved; ++half, da *= 0.5, db *= 0.5) {
      const double a = std::clamp(ba + da, -R, R), b = std::clamp(bb + db, -R, R);
      const double f = objective(a, b);
      if (f < best) {
        best = f;
        ba = a;
        bb = b;
        moved = true;
      }
    }
    if (!moved || std::max(std::abs(da), std::abs(db)) < 1e-13) return;
  }
}

NodeControl BellmanOperator::minimize_2d(const ScalarField& w, std::size_t k) const {
  const double dt = setup_.dt, R = setup_.radius, beta = setup_.beta;
  const RealVec x = grid_.node(k);
  auto objective = [&](double a, double b) {
    const RealVec xi{a, b};
    return running_cost(x, xi) + beta * w.interpolate(RealVec{x[0] - a * dt, x[1] - b * dt});
  };
  const int M = std::max(3, cfg_.controls);
  double step = 2.0 * R / (M - 1);
  double ba = 0.0, bb = 0.0, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const double a = -R + i * step, b = -R + j * step;
      const double f = objective(a, b);
      if (f < best) {
        best = f;
        ba = a;
        bb = b;
      }
    }
  for (int level = 0; level < cfg_.refine_levels; ++level) {
    step *= 0.5;
    const double ca = ba, cb = bb;
    for (int i = -2; i <= 2; ++i)
      for (int j = -2; j <= 2; ++j) {
        if (i == 0 && j == 0) continue;
        const double a = std::clamp(ca + i * step, -R, R), b = std::clamp(cb + j * step, -R, R);
        const double f = objective(a, b);
        if (f < best) {
          best = f;
          ba = a;
          bb = b;
        }
      }
  }
  polish_2d(w, x, ba, bb, best);
  NodeControl nc;
  nc.xi = RealVec{ba, bb};
  nc.running = running_cost(x, nc.xi);
  nc.foot = interpolation_stencil(grid_, RealVec{x[0] - ba * dt, x[1] - bb * dt});
  nc.value = nc.running + beta * w.interpolate(nc.foot);
  return nc;
}

ScalarField BellmanOperator::apply(const ScalarField& w, std::vector<NodeControl>& controls,
                                   bool strict) const {
  if (!(w.grid() == grid_)) throw DomainError("bellman_apply: field grid differs from operator grid");
  ScalarField out(grid_);
  out.meta = w.meta;
  controls.resize(grid_.size());
  parallel_for(grid_.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      controls[k] = minimize(w, k, strict);
      out[k] = controls[k].value;
    }
  });
  return out;
}

ScalarField BellmanOperator::apply(const ScalarField& w, bool strict) const {
  std::vector<NodeControl> controls;
  return apply(w, controls, strict);
}

ScalarField bellman_apply(const ScalarField& field, const TonelliModel& model, const RealVec& c,
                          double eps, double h, const SolverConfig& cfg) {
  BellmanOperator T(model, c, eps, h, field.grid(), cfg);
  return T.apply(field);
}

namespace {

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// Policy evaluation: w = running + beta * P w.
ScalarField evaluate_policy(const PeriodicGrid& grid, const std::vector<NodeControl>& controls,
                            double beta) {
  const std::size_t n = grid.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n * 5);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto& nc = controls[k];
    trip.emplace_back(static_cast<int>(k), static_cast<int>(k), 1.0);
    for (int s = 0; s < nc.foot.count; ++s)
      if (nc.foot.weight[s] != 0.0)
        trip.emplace_back(static_cast<int>(k), static_cast<int>(nc.foot.node[s]),
                          -beta * nc.foot.weight[s]);
    rhs[static_cast<Eigen::Index>(k)] = nc.running;
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw ConvergenceError("policy evaluation: factorisation failed", 0.0);
  Eigen::VectorXd sol = lu.solve(rhs);
  ScalarField w(grid);
  for (std::size_t k = 0; k < n; ++k) w[k] = sol[static_cast<Eigen::Index>(k)];
  return w;
}

}  // namespace

SolveResult solve_discounted(const TonelliModel& model, const RealVec& c, double eps, double h,
                             const PeriodicGrid& grid, const SolverConfig& cfg) {
  bool coarsen = cfg.coarse_min > 0;
  std::array<int, kMaxDim> half = grid.counts();
  for (int a = 0; a < grid.dim(); ++a) {
    if (grid.count(a) % 2 != 0 || grid.count(a) / 2 < cfg.coarse_min) coarsen = false;
    half[a] = grid.count(a) / 2;
  }
  if (!coarsen) return solve_discounted(model, c, eps, h, ScalarField(grid, 0.0), cfg);
  const SolveResult coarse = solve_discounted(model, c, eps, h, PeriodicGrid(grid.dim(), half), cfg);
  ScalarField start(grid, 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) start[k] = coarse.field.interpolate(grid.node(k));
  SolveResult r = solve_discounted(model, c, eps, h, start, cfg);
  r.iterations += coarse.iterations;
  r.field.meta.iterations = r.iterations;
  return r;
}

SolveResult solve_discounted(const TonelliModel& model, const RealVec& c, double eps, double h,
                             const ScalarField& initial, const SolverConfig& cfg) {
  if (!(eps > 0.0)) throw DomainError("solve_discounted: eps must be positive");
  const PeriodicGrid& grid = initial.grid();
  BellmanOperator T(model, c, eps, h, grid, cfg);
  const double beta = T.setup().beta;

  SolveResult res;
  res.setup = T.setup();
  ScalarField w(grid, initial.values());
  std::vector<NodeControl> controls;

  // The defect ||Tw - w|| bounds the distance to the fixed point by
  // defect / (1 - beta). Round-off puts a floor under what is reachable.
  auto threshold = [&](const ScalarField& f) {
    return std::max(cfg.tol * (1.0 - beta), 16.0 * DBL_EPSILON * (1.0 + f.sup_norm()));
  };

  if (cfg.method == SolverMethod::value) {
    for (int it = 1; it <= cfg.max_iter; ++it) {
      ScalarField next = T.apply(w, controls, false);
      res.residual = sup_diff(next, w);
      w = std::move(next);
      res.iterations = it;
      if (res.residual <= threshold(w)) break;
      if (it == cfg.max_iter)
        throw ConvergenceError("value iteration hit max_iter", res.residual);
    }
  } else {
    double best = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 1;; ++it) {
      ScalarField next = T.apply(w, controls, false);
      res.residual = sup_diff(next, w);
      res.iterations = it;
      if (res.residual <= threshold(w)) {
        w = std::move(next);
        break;
      }
      // Howard steps can move a shock by only a few cells each, so progress
      // is judged against the best defect so far. Stagnation (inexact 2-D
      // argmin) falls back to plain sweeps from the current iterate.
      if (res.residual < best) {
        best = res.residual;
        stalled = 0;
      } else {
        ++stalled;
      }
      if (stalled >= 100 || it >= std::min(cfg.max_iter, 1000)) {
        for (int vit = 1; vit <= cfg.max_iter; ++vit) {
          ScalarField nx = T.apply(w, controls, false);
          res.residual = sup_diff(nx, w);
          w = std::move(nx);
          ++res.iterations;
          if (res.residual <= threshold(w)) break;
          if (vit == cfg.max_iter)
            throw ConvergenceError("policy iteration stalled and sweeps hit max_iter", res.residual);
        }
        break;
      }
      w = evaluate_policy(grid, controls, beta);
    }
  }
  // the fixed point itself must be reachable with interior controls
  for (const auto& nc : controls)
    if (T.on_boundary(nc))
      throw ControlRadiusError("solve_discounted: argmin on the control radius " +
                                   std::to_string(T.setup().radius) + " at the fixed point",
                               nc.xi.norm_inf());
  w.meta.model = model.name();
  w.meta.c = c;
  w.meta.eps = eps;
  w.meta.h = h;
  w.meta.residual = res.residual;
  w.meta.iterations = res.iterations;
  res.field = std::move(w);
  return res;
}

double estimate_effective_h(const TonelliModel& model, const RealVec& c, const PeriodicGrid& grid,
                            const SolverConfig& cfg, const std::vector<double>& eps_seq) {
  if (eps_seq.size() < 3) throw DomainError("estimate_effective_h: need at least 3 eps values");
  for (std::size_t i = 1; i < eps_seq.size(); ++i)
    if (!(eps_seq[i] < eps_seq[i - 1])) throw DomainError("estimate_effective_h: eps must decrease");
  std::vector<double> est;
  for (double e : eps_seq) {
    const SolveResult r = solve_discounted(model, c, e, 0.0, grid, cfg);
    est.push_back(-e * r.field.mean());
  }
  // -eps mean(w) = h + a eps + O(eps^2): eliminate the linear term using
  // the two smallest eps values
  const std::size_t n = est.size();
  const double e1 = eps_seq[n - 2], e2 = eps_seq[n - 1];
  return (e1 * est[n - 1] - e2 * est[n - 2]) / (e1 - e2);
}

RealVec MomentumField::interpolate(const RealVec& x) const {
  const Stencil s = interpolation_stencil(grid, x);
  RealVec p(grid.dim());
  for (int i = 0; i < s.count; ++i) p += momentum[s.node[i]] * s.weight[i];
  return p;
}

MomentumField reconstruct_momentum(const ScalarField& field, const TonelliModel& model,
                                   const RealVec& c, double eps, double h,
                                   const SolverConfig& cfg) {
  const PeriodicGrid& grid = field.grid();
  BellmanOperator T(model, c, eps, h, grid, cfg);
  MomentumField mf;
  mf.grid = grid;
  const std::size_t n = grid.size();
  mf.momentum.assign(n, RealVec(grid.dim()));
  mf.control.assign(n, RealVec(grid.dim()));
  mf.shock.assign(n, 0);
  mf.threshold = 5.0 * std::max(grid.max_spacing(), T.setup().dt) * field.lipschitz();

  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const NodeControl nc = T.minimize(field, k);
      const RealVec x = grid.node(k);
      mf.control[k] = nc.xi;
      // endpoint momentum of the discrete optimal step
      const double dt = T.setup().dt;
      if (cfg.cost == CostRule::midpoint) {
        const LagrangianEval le = model.lagrangian(x - nc.xi * (0.5 * dt), nc.xi);
        mf.momentum[k] = le.L_xi + le.L_x * (0.5 * dt);
      } else {
        const LagrangianEval le = model.lagrangian(x, nc.xi);
        mf.momentum[k] = le.L_xi + le.L_x * dt;
      }
      const auto ij = grid.unflat(k);
      for (int a = 0; a < grid.dim(); ++a) {
        auto up = ij, dn = ij;
        up[a] = grid.wrap_index(a, ij[a] + 1LL);
        dn[a] = grid.wrap_index(a, ij[a] - 1LL);
        const double dxa = grid.spacing(a);
        const double dplus = (field[grid.flat(up[0], up[1])] - field[k]) / dxa;
        const double dminus = (field[k] - field[grid.flat(dn[0], dn[1])]) / dxa;
        if (dminus - dplus > mf.threshold) mf.shock[k] = 1;
      }
    }
  });
  // away from kinks the centred difference is smoother than the argmin
  // momentum, which locks onto grid nodes whenever xi dt is a multiple of dx
  std::vector<RealVec> centred = mf.momentum;
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      if (mf.shock[k]) continue;
      const auto ij = grid.unflat(k);
      RealVec p = c;
      bool ok = true;
      for (int a = 0; a < grid.dim() && ok; ++a) {
        auto up = ij, dn = ij;
        up[a] = grid.wrap_index(a, ij[a] + 1LL);
        dn[a] = grid.wrap_index(a, ij[a] - 1LL);
        const std::size_t ku = grid.flat(up[0], up[1]), kd = grid.flat(dn[0], dn[1]);
        if (mf.shock[ku] || mf.shock[kd]) ok = false;
        p[a] += (field[ku] - field[kd]) / (2.0 * grid.spacing(a));
      }
      if (ok) centred[k] = p;
    }
  });
  mf.momentum = std::move(centred);
  return mf;
}

std::vector<Shock> shock_scan_1d(const MomentumField& mf) {
  if (mf.grid.dim() != 1) throw DomainError("shock_scan_1d: one-dimensional field required");
  const int N = mf.grid.count(0);
  std::vector<Shock> out;
  int start = -1;
  for (int i = 0; i < N; ++i)
    if (!mf.shock[i]) {
      start = i;
      break;
    }
  if (start < 0) return out;  // everything flagged: no usable one-sided data
  // walk once around the circle beginning at a regular node
  int i = start;
  for (int steps = 0; steps < N;) {
    const int j = (i + 1) % N;
    if (!mf.shock[j]) {
      i = j;
      ++steps;
      continue;
    }
    int run = 0;
    int r = j;
    while (mf.shock[r]) {
      r = (r + 1) % N;
      ++run;
    }
    Shock s;
    const double dx = mf.grid.spacing(0);
    s.location = wrap01((static_cast<double>(j) + 0.5 * (run - 1)) * dx);
    s.left = mf.momentum[i][0];
    s.right = mf.momentum[r][0];
    out.push_back(s);
    steps += run + 1;
    i = r;
  }
  std::sort(out.begin(), out.end(), [](const Shock& a, const Shock& b) { return a.location < b.location; });
  return out;
}

}  // namespace wkam
