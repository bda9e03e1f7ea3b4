#include "wkam/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "wkam/barrier.hpp"
#include "wkam/io.hpp"
#include "wkam/parallel.hpp"

namespace wkam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string tag(const char* key, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s=%g", key, v);
  return buf;
}

std::string ctag(const std::vector<double>& c) {
  std::string s = "c=";
  for (std::size_t i = 0; i < c.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%g", i ? "," : "", c[i]);
    s += buf;
  }
  return s;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double nearest_zero_distance(const std::vector<double>& zeros, double x, std::size_t* which = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    const double d = std::abs(circle_delta(x, zeros[i]));
    if (d < best) {
      best = d;
      if (which) *which = i;
    }
  }
  return best;
}

double min_curvature_at_zeros(const TonelliModel& model, const std::vector<double>& zeros) {
  double m = std::numeric_limits<double>::infinity();
  for (double z : zeros) m = std::min(m, model.F_xx(z));
  return m;
}

}  // namespace

bool StudyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

// ------------------------------------------------------------------ fitting

LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("loglog_fit: x and y differ in length");
  LogLogFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      fit.warnings.push_back("row " + std::to_string(i) + " dropped: nonpositive or non-finite value");
      continue;
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const std::size_t n = lx.size();
  if (n < 3) throw DomainError("loglog_fit: fewer than 3 usable rows");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += lx[i], my += ly[i];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("loglog_fit: x values coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    sse += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  fit.used = n;
  return fit;
}

// ------------------------------------------------------------- rate studies

namespace {

void finish_rate(RateStudyResult& r, const std::string& prefix, bool need_slope) {
  std::vector<double> xs, ys;
  for (const auto& row : r.rows) {
    xs.push_back(row.eps);
    ys.push_back(row.error);
  }
  int increases = 0;
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    if (!(r.rows[i].error < r.rows[i - 1].error)) ++increases;
  for (const auto& row : r.rows)
    if (!row.failure.empty()) ++increases;
  r.monotone = increases == 0;
  try {
    r.fit = loglog_fit(xs, ys);
  } catch (const DomainError& e) {
    r.fit = LogLogFit{};
    r.fit.warnings.push_back(e.what());
    r.fit.slope = kNaN;
    r.fit.r2 = kNaN;
  }
  if (need_slope) {
    r.checks.push_back(check_ge(prefix + ".slope", r.fit.slope, 0.8));
    r.checks.push_back(check_ge(prefix + ".r2", r.fit.r2, 0.98));
    r.checks.push_back(check_le(prefix + ".non_decreasing_steps", increases, 0));
  }
  r.pass = std::all_of(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.pass; });
}

}  // namespace

RateStudyResult run_rate_study_c1(const ExperimentConfig& cfg, const RunOptions& opt) {
  const double c = cfg.c.front().at(0);
  const TonelliModel model = build_model(cfg.model, RealVec{c});
  if (model.kind() != ModelKind::mechanical1d) throw ConfigError("rate-c1: requires a mechanical1d model");
  RateStudyResult r;
  r.exponent = 1.0;

  std::vector<ScalarField> fields(cfg.eps_list.size());
  for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
    RateRow row;
    row.eps = cfg.eps_list[i];
    row.grid_n = grid_size_for(cfg, i);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fields[i] = solve_discounted(model, RealVec{c}, row.eps, 0.0, PeriodicGrid(1, row.grid_n), cfg.solver).field;
    } catch (const Error& e) {
      row.failure = e.what();
    }
    row.seconds = opt.timings ? elapsed_since(t0) : 0.0;
    r.rows.push_back(row);
  }

  // the limit keeps the zeros where v^eps stays O(eps) at the smallest eps
  const std::vector<double> zeros = potential_zeros(model);
  for (std::size_t i = cfg.eps_list.size(); i-- > 0;) {
    if (!r.rows[i].failure.empty()) continue;
    const double eps = r.rows[i].eps;
    for (const auto& sp : find_stationary_points(model, c, eps))
      if (std::abs(fields[i].interpolate(RealVec{sp.x})) <= eps) r.selected_zeros.push_back(sp.seed);
    break;
  }
  if (r.selected_zeros.empty()) r.selected_zeros = zeros;

  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    RateRow& row = r.rows[i];
    if (!row.failure.empty()) {
      row.error = kNaN;
      continue;
    }
    const ScalarField vstar = limit_solution_c1(model, c, fields[i].grid(), r.selected_zeros);
    row.error = sup_distance(fields[i], vstar);
    r.beta = std::max(r.beta, row.error / row.eps);
  }
  finish_rate(r, "rate-c1", true);
  return r;
}

RateStudyResult run_rate_study_c2(const ExperimentConfig& cfg, const RunOptions& opt) {
  const RealVec c = to_realvec(cfg.c.front());
  const TonelliModel model = build_model(cfg.model, c);
  if (model.kind() != ModelKind::quadraticKam) throw ConfigError("rate-c2: requires a quadraticKam model");
  const int n = model.dim();
  RateStudyResult r;
  r.exponent = 1.0 / (1.0 + 2.0 * cfg.eta);
  const TrigPolynomial& u = model.exact_solution();

  for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
    RateRow row;
    row.eps = cfg.eps_list[i];
    row.grid_n = grid_size_for(cfg, i);
    const PeriodicGrid grid(n, row.grid_n);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const ScalarField v = solve_discounted(model, c, row.eps, 0.0, grid, cfg.solver).field;
      std::vector<double> ex(grid.size());
      double mean = 0.0;
      for (std::size_t k = 0; k < grid.size(); ++k) mean += (ex[k] = u.empty() ? 0.0 : u.value(grid.node(k)));
      mean /= static_cast<double>(grid.size());
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double d = v[k] - (ex[k] - mean);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      // the minimax shift makes the sup error half the oscillation
      row.error = 0.5 * (hi - lo);
    } catch (const Error& e) {
      row.failure = e.what();
      row.error = kNaN;
    }
    row.seconds = opt.timings ? elapsed_since(t0) : 0.0;
    r.rows.push_back(row);
  }

  const RateRow& first = r.rows.front();
  r.beta = 1.5 * first.error / std::pow(first.eps, r.exponent);
  const double floor = 10.0 * cfg.solver.tol;
  for (const auto& row : r.rows)
    r.checks.push_back(check_le("rate-c2." + tag("eps", row.eps) + ".bound", row.error,
                                r.beta * std::pow(row.eps, r.exponent) + floor));
  if (n == 2) {
    DiophantineSpec ds{{model.omega()[0], model.omega()[1]}, cfg.eta, cfg.z_max};
    r.checks.push_back(check_ge("rate-c2.diophantine_nu", verify_diophantine(ds).nu, 1e-6));
  }
  finish_rate(r, "rate-c2", false);
  return r;
}

// ------------------------------------------------------- Diophantine vectors

DiophantineResult verify_diophantine(const DiophantineSpec& spec) {
  const int n = static_cast<int>(spec.omega.size());
  if (n < 1 || n > 2) throw DomainError("verify_diophantine: omega needs one or two components");
  if (spec.z_max < 1) throw DomainError("verify_diophantine: z_max must be positive");
  DiophantineResult out;
  out.nu = std::numeric_limits<double>::infinity();
  auto consider = [&](std::vector<int> z) {
    double dot = 0.0;
    int l1 = 0;
    for (int a = 0; a < n; ++a) {
      dot += spec.omega[a] * z[a];
      l1 += std::abs(z[a]);
    }
    const double val = std::abs(dot) * std::pow(static_cast<double>(l1), spec.eta);
    if (val < out.nu) {
      out.nu = val;
      out.argmin = std::move(z);
    }
  };
  if (n == 1) {
    for (int z = 1; z <= spec.z_max; ++z) consider({z});
  } else {
    // z and -z give the same value
    for (int z0 = 0; z0 <= spec.z_max; ++z0)
      for (int z1 = -(spec.z_max - z0); z1 <= spec.z_max - z0; ++z1)
        if (z0 > 0 || z1 > 0) consider({z0, z1});
  }
  out.diophantine = out.nu > 1e-6;
  return out;
}

double ergodic_cover_time(const std::vector<double>& omega, double delta) {
  const int n = static_cast<int>(omega.size());
  if (n < 1 || n > 2) throw DomainError("ergodic_cover_time: omega needs one or two components");
  if (!(delta >= 1e-3 && delta <= 0.2)) throw DomainError("ergodic_cover_time: delta must lie in [1e-3, 0.2]");
  double norm = 0.0;
  for (double w : omega) norm += w * w;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw DomainError("ergodic_cover_time: omega = 0 covers nothing");
  const int m = static_cast<int>(std::ceil(2.0 / delta));
  const std::size_t cells = n == 1 ? static_cast<std::size_t>(m) : static_cast<std::size_t>(m) * m;
  std::vector<char> seen(cells, 0);
  std::size_t covered = 0;
  const double h = delta / (4.0 * norm);
  constexpr double kMaxTime = 1e7;
  for (long long k = 0;; ++k) {
    const double s = static_cast<double>(k) * h;
    if (s > kMaxTime) throw ConvergenceError("ergodic_cover_time: no cover by T = 1e7", s);
    std::size_t idx = 0;
    for (int a = 0; a < n; ++a) {
      const int cell = std::min(m - 1, static_cast<int>(wrap01(omega[a] * s) * m));
      idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(cell);
    }
    if (!seen[idx]) {
      seen[idx] = 1;
      if (++covered == cells) return s;
    }
  }
}

// --------------------------------------------------------------- seed points

std::vector<RealVec> golden_seeds(int count, int dim, std::uint64_t rng_seed) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("golden_seeds: dimension must be 1 or 2");
  std::mt19937_64 eng(rng_seed);
  // top 53 bits, so the offset does not depend on the library's distributions
  auto unit = [&] { return static_cast<double>(eng() >> 11) * 0x1p-53; };
  std::array<double, kMaxDim> start{unit(), unit()};
  std::array<double, kMaxDim> stride{};
  if (dim == 1) {
    stride[0] = std::numbers::phi - 1.0;
  } else {
    constexpr double plastic = 1.324717957244746025960908854;
    stride = {1.0 / plastic, 1.0 / (plastic * plastic)};
  }
  std::vector<RealVec> out;
  out.reserve(count);
  for (int k = 1; k <= count; ++k) {
    RealVec x(dim);
    for (int a = 0; a < dim; ++a) x[a] = wrap01(start[a] + k * stride[a]);
    out.push_back(x);
  }
  return out;
}

// ------------------------------------------------------- alpha and selection

std::vector<SeedOutcome> alpha_scan(const ScalarField& field, const MomentumField& mfield,
                                    const TonelliModel& model, const RealVec& c, double eps,
                                    const std::vector<RealVec>& seeds, const ExperimentConfig& cfg) {
  std::vector<SeedOutcome> out(seeds.size());
  CharacteristicOptions opt;
  opt.T = cfg.T;
  opt.ds = cfg.ds;
  opt.resync_every = cfg.resync;
  parallel_for(seeds.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Characteristic ch = backward_characteristic(field, mfield, model, c, eps, seeds[i], opt);
      SeedOutcome& o = out[i];
      o.seed = seeds[i];
      o.blew_up = ch.blew_up;
      if (ch.blew_up) continue;
      const AlphaLimitSet al = alpha_limit_set(ch.traj, cfg.window, cfg.cluster_radius);
      o.clusters = al.points;
      o.conclusive = al.conclusive;
    }
  });
  return out;
}

namespace {

struct Solved {
  ScalarField field;
  MomentumField mfield;
};

Solved solve_with_momentum(const TonelliModel& model, const RealVec& c, double eps, int N,
                           const SolverConfig& scfg) {
  Solved s;
  s.field = solve_discounted(model, c, eps, 0.0, PeriodicGrid(model.dim(), N), scfg).field;
  s.mfield = reconstruct_momentum(s.field, model, c, eps, 0.0, scfg);
  return s;
}

}  // namespace

AlphaStudyResult run_alpha_study(const ExperimentConfig& cfg) {
  AlphaStudyResult out;
  const std::vector<RealVec> seeds = golden_seeds(cfg.seeds, 1, cfg.rng_seed);
  for (const auto& cv : cfg.c) {
    const double c = cv.at(0);
    const TonelliModel model = build_model(cfg.model, RealVec{c});
    const std::vector<double> zeros = potential_zeros(model);
    const double fxx = min_curvature_at_zeros(model, zeros);
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
      AlphaStudyRow row;
      row.c = c;
      row.eps = cfg.eps_list[i];
      row.grid_n = grid_size_for(cfg, i);
      const Solved s = solve_with_momentum(model, RealVec{c}, row.eps, row.grid_n, cfg.solver);
      row.outcomes = alpha_scan(s.field, s.mfield, model, RealVec{c}, row.eps, seeds, cfg);
      row.seeds = static_cast<int>(seeds.size());
      row.zero_bound = 1e-3 + 2.0 * std::abs(c) * row.eps / fxx;
      for (const auto& o : row.outcomes) {
        if (o.conclusive) ++row.conclusive;
        for (const auto& cl : o.clusters) {
          row.max_p = std::max(row.max_p, cl.center.y.norm_inf());
          row.max_zero_dist = std::max(row.max_zero_dist, nearest_zero_distance(zeros, cl.center.x[0]));
          row.ratio = std::max(row.ratio, std::abs(s.field.interpolate(cl.center.x.coords())) / row.eps);
        }
      }
      out.beta_hat = std::max(out.beta_hat, row.ratio);
      out.rows.push_back(std::move(row));
    }
  }

  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    const AlphaStudyRow& row = out.rows[r];
    const std::string pre = "alpha." + ctag({row.c}) + "." + tag("eps", row.eps);
    const double dx = 1.0 / row.grid_n;
    out.checks.push_back(check_ge(pre + ".conclusive_seeds", row.conclusive, row.seeds));
    out.checks.push_back(check_le(pre + ".cluster_momentum", row.max_p, 2.0 * (dx + out.beta_hat * row.eps)));
    out.checks.push_back(check_le(pre + ".cluster_zero_distance", row.max_zero_dist, row.zero_bound));
    // ratio variation against the next eps of the same c
    if (r + 1 < out.rows.size() && out.rows[r + 1].c == row.c) {
      const double a = row.ratio, b = out.rows[r + 1].ratio;
      // with c = 0 the clusters are the zeros themselves and v vanishes there
      // up to round-off, where a ratio of ratios means nothing
      if (std::max(a, b) > 1e-6) {
        const double var = std::max(a, b) / std::max(std::min(a, b), std::numeric_limits<double>::min());
        out.checks.push_back(check_lt(pre + ".ratio_variation", var, 2.0));
      }
    }
  }
  return out;
}

SelectionResult run_selection_study(const ExperimentConfig& cfg) {
  SelectionResult out;
  const double eps = cfg.eps_list.front();
  const int N = grid_size_for(cfg, 0);
  const std::vector<RealVec> seeds = golden_seeds(cfg.seeds, 1, cfg.rng_seed);
  {
    const TonelliModel m0 = build_model(cfg.model, RealVec{0.0});
    const SegmentActions sa = segment_actions(m0);
    out.zeros = sa.zeros;
    out.actions = sa.actions;
  }
  const std::size_t nz = out.zeros.size();
  for (const auto& cv : cfg.c) {
    const double c = cv.at(0);
    const TonelliModel model = build_model(cfg.model, RealVec{c});
    const Solved s = solve_with_momentum(model, RealVec{c}, eps, N, cfg.solver);
    const std::vector<SeedOutcome> outcomes = alpha_scan(s.field, s.mfield, model, RealVec{c}, eps, seeds, cfg);

    std::vector<int> hits(nz, 0), clusters(nz, 0);
    std::vector<double> sum_dx(nz, 0.0), sum_p(nz, 0.0);
    int total = 0, conclusive = 0;
    double worst_offset = 0.0;
    for (const auto& o : outcomes) {
      if (o.conclusive) ++conclusive;
      std::vector<char> seen(nz, 0);
      for (const auto& cl : o.clusters) {
        std::size_t i = 0;
        const double d = nearest_zero_distance(out.zeros, cl.center.x[0], &i);
        worst_offset = std::max(worst_offset, d);
        ++clusters[i];
        ++total;
        sum_dx[i] += circle_delta(cl.center.x[0], out.zeros[i]);
        sum_p[i] += cl.center.y[0];
        if (!seen[i]) {
          seen[i] = 1;
          ++hits[i];
        }
      }
    }
    for (std::size_t i = 0; i < nz; ++i) {
      if (clusters[i] == 0) continue;
      SelectionRow row;
      row.c = c;
      row.eps = eps;
      row.cluster_x = wrap01(out.zeros[i] + sum_dx[i] / clusters[i]);
      row.cluster_p = sum_p[i] / clusters[i];
      row.mass = static_cast<double>(clusters[i]) / total;
      row.seeds_hit = hits[i];
      out.rows.push_back(row);
    }

    std::vector<double> ratios(nz, kNaN);
    for (const auto& sp : find_stationary_points(model, c, eps)) {
      std::size_t i = 0;
      nearest_zero_distance(out.zeros, sp.seed, &i);
      ratios[i] = std::abs(s.field.interpolate(RealVec{sp.x})) / eps;
    }
    // wells where v^eps is O(eps) are the ones the limit can select
    int mismatches = 0;
    for (std::size_t i = 0; i < nz; ++i) {
      const bool predicted = ratios[i] <= 1.0;
      if (predicted != (hits[i] > 0)) ++mismatches;
    }
    const std::string pre = "selection." + ctag(cv);
    out.checks.push_back(check_ge(pre + ".conclusive_seeds", conclusive, static_cast<double>(seeds.size())));
    out.checks.push_back(check_le(pre + ".cluster_offset", worst_offset, 1e-2));
    out.checks.push_back(check_le(pre + ".wells_differing_from_small_v", mismatches, 0));
    out.hits.push_back(hits);
    out.ratios.push_back(ratios);
  }
  return out;
}

// -------------------------------------------------------------- file writers

void write_rate_csv(const std::string& path, const RateStudyResult& r, bool timings) {
  TextFile f(path);
  f << "epsilon,sup_error,grid_n,seconds\n";
  for (const auto& row : r.rows)
    f << row.eps << "," << row.error << "," << row.grid_n << "," << (timings ? row.seconds : 0.0) << "\n";
  f.close();
}

void write_rate_svg(const std::string& path, const RateStudyResult& r, const std::string& title) {
  SvgPlot plot;
  plot.title = title;
  plot.xlabel = "epsilon";
  plot.ylabel = "sup error";
  plot.logx = plot.logy = true;
  SvgSeries meas{"measured", {}, {}, "#1f77b4", false};
  SvgSeries fit{"fit slope " + format_real(std::round(r.fit.slope * 1000.0) / 1000.0), {}, {}, "#d62728", false};
  SvgSeries bound{"beta eps^" + format_real(std::round(r.exponent * 1000.0) / 1000.0), {}, {}, "#2ca02c", false};
  for (const auto& row : r.rows) {
    meas.x.push_back(row.eps);
    meas.y.push_back(row.error);
    fit.x.push_back(row.eps);
    fit.y.push_back(std::exp(r.fit.intercept) * std::pow(row.eps, r.fit.slope));
    bound.x.push_back(row.eps);
    bound.y.push_back(r.beta * std::pow(row.eps, r.exponent));
  }
  plot.series = {meas, fit, bound};
  write_svg(path, plot);
}

void write_selection_csv(const std::string& path, const SelectionResult& r) {
  TextFile f(path);
  f << "c,epsilon,cluster_x,cluster_p,mass,seeds_hit\n";
  for (const auto& row : r.rows)
    f << row.c << "," << row.eps << "," << row.cluster_x << "," << row.cluster_p << "," << row.mass << ","
      << row.seeds_hit << "\n";
  f.close();
}

}  // namespace wkam
