#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>

#include "wkam/barrier.hpp"
#include "wkam/experiments.hpp"
#include "wkam/io.hpp"

namespace wkam {

namespace {

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

std::string indexed(const char* stem, std::size_t ci, std::size_t ei, const char* ext) {
  return std::string(stem) + "_c" + std::to_string(ci) + "_e" + std::to_string(ei) + ext;
}

struct Ctx {
  const ExperimentConfig& cfg;
  const RunOptions& opt;
  StudyReport& rep;

  std::string path(const std::string& name) {
    rep.files.push_back(name);
    return rep.run_dir + "/" + name;
  }
  void add(const Check& c) { rep.checks.push_back(c); }
  void add(const std::vector<Check>& cs) { rep.checks.insert(rep.checks.end(), cs.begin(), cs.end()); }
};

/// Phase-space polyline with breaks where x wraps around the circle.
SvgSeries phase_series(const Trajectory& traj, const TonelliModel& model, std::string label,
                       std::string color, bool velocity = false) {
  SvgSeries s{std::move(label), {}, {}, std::move(color), false};
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double x = wrap01(traj.x[i][0]);
    if (i > 0 && std::abs(x - wrap01(traj.x[i - 1][0])) > 0.5) {
      s.x.push_back(std::numeric_limits<double>::quiet_NaN());
      s.y.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    s.x.push_back(x);
    s.y.push_back(velocity ? model.H_p(traj.x[i], traj.p[i])[0] : traj.p[i][0]);
  }
  return s;
}

void add_separatrices(SvgPlot& plot, const TonelliModel& model) {
  if (model.kind() != ModelKind::mechanical1d) return;
  SvgSeries up{"S+", {}, {}, "#7f7f7f", false}, dn{"S-", {}, {}, "#bcbd22", false};
  for (int i = 0; i <= 512; ++i) {
    const double x = i / 512.0;
    up.x.push_back(x);
    dn.x.push_back(x);
    up.y.push_back(separatrix_momentum(model, x, Branch::plus));
    dn.y.push_back(separatrix_momentum(model, x, Branch::minus));
  }
  plot.series.push_back(up);
  plot.series.push_back(dn);
}

double residual_floor(const SolveResult& r, const SolverConfig& scfg) {
  return std::max(scfg.tol * (1.0 - r.setup.beta), 16.0 * 2.220446049250313e-16 * (1.0 + r.field.sup_norm()));
}

// ------------------------------------------------------------------- solve

void study_solve(Ctx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  for (std::size_t ci = 0; ci < cfg.c.size(); ++ci) {
    const RealVec c = to_realvec(cfg.c[ci]);
    const TonelliModel model = build_model(cfg.model, c);
    for (std::size_t ei = 0; ei < cfg.eps_list.size(); ++ei) {
      const double eps = cfg.eps_list[ei];
      const PeriodicGrid grid(model.dim(), grid_size_for(cfg, ei));
      const SolveResult r = solve_discounted(model, c, eps, 0.0, grid, cfg.solver);
      const MomentumField mf = reconstruct_momentum(r.field, model, c, eps, 0.0, cfg.solver);
      const std::string pre = "solve." + ctag(cfg.c[ci]) + "." + tag("eps", eps);
      ctx.add(check_le(pre + ".residual", r.residual, residual_floor(r, cfg.solver)));

      bool trivial = false;
      if (model.kind() == ModelKind::mechanical1d) {
        const TrigSeries& F = model.potential();
        trivial = F.a0 == 0.0 && std::all_of(F.cos_coeffs.begin(), F.cos_coeffs.end(), [](double a) { return a == 0.0; }) &&
                  std::all_of(F.sin_coeffs.begin(), F.sin_coeffs.end(), [](double b) { return b == 0.0; }) &&
                  c.norm_inf() == 0.0;
      } else if (model.kind() == ModelKind::quadraticKam) {
        trivial = model.exact_solution().empty();
      }
      if (trivial) ctx.add(check_le(pre + ".exact_zero_solution", r.field.sup_norm(), 10.0 * cfg.solver.tol));

      write_field_csv(ctx.path(indexed("field", ci, ei, ".csv")), r.field, mf);
      write_field_binary(ctx.path(indexed("field", ci, ei, ".wkam")), r.field);

      SvgPlot plot;
      plot.title = model.name() + " " + ctag(cfg.c[ci]) + " " + tag("eps", eps);
      plot.xlabel = "x";
      plot.ylabel = "v, c + v_x";
      SvgSeries v{"v", {}, {}, "#1f77b4", false}, p{"c + v_x", {}, {}, "#d62728", false};
      const int N = grid.count(0);
      for (int i = 0; i < N; ++i) {
        const std::size_t k = grid.dim() == 1 ? grid.flat(i) : grid.flat(i, 0);
        v.x.push_back(grid.node(k)[0]);
        v.y.push_back(r.field[k]);
        p.x.push_back(grid.node(k)[0]);
        p.y.push_back(mf.momentum[k][0]);
      }
      plot.series = {v, p};
      add_separatrices(plot, model);
      write_svg(ctx.path(indexed("profile", ci, ei, ".svg")), plot);
    }
  }
}

// -------------------------------------------------------------------- flow

void study_flow(Ctx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const RealVec c = to_realvec(cfg.c.front());
  const TonelliModel model = build_model(cfg.model, c);
  const double eps = cfg.eps_list.front();
  const RealVec x0 = to_realvec(cfg.x0);

  RealVec p0(model.dim());
  if (!cfg.p0.empty()) p0 = to_realvec(cfg.p0);
  else if (model.kind() == ModelKind::mechanical1d) p0 = RealVec{separatrix_momentum(model, x0[0], Branch::plus)};
  else if (model.kind() == ModelKind::quadraticKam) p0 = c + model.exact_solution().gradient(x0);

  // trajectory and the dissipation identity H(T) - H(0) = int eps H_p.(c - p)
  const Trajectory tr = integrate_lifted(model, c, eps, x0, p0, cfg.T, cfg.ds);
  if (model.dim() == 1) write_trajectory_csv(ctx.path("trajectory.csv"), tr, model);
  double diss = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i)
    diss += 0.5 * (dissipation_rate(model, c, eps, tr.x[i - 1], tr.p[i - 1]) +
                   dissipation_rate(model, c, eps, tr.x[i], tr.p[i])) * (tr.s[i] - tr.s[i - 1]);
  const double dH = model.H(tr.x.back(), tr.p.back()) - model.H(tr.x.front(), tr.p.front());
  ctx.add(check_le("flow.dissipation_identity", std::abs(dH - diss), 1e-6 * std::max(1.0, cfg.T)));

  if (model.kind() == ModelKind::mechanical1d) {
    const std::vector<double> zeros = potential_zeros(model);
    double b = std::numeric_limits<double>::infinity();
    for (double z : zeros) b = std::min(b, std::sqrt(model.F_xx(z)));
    std::vector<TorusPoint> centers;
    for (double z : zeros) centers.push_back(TorusPoint{z});
    // conservative separatrix orbits, backward from x0 on both branches
    for (Branch br : {Branch::plus, Branch::minus}) {
      const RealVec ps{separatrix_momentum(model, x0[0], br)};
      const double dmin = *std::min_element(cfg.delta_list.begin(), cfg.delta_list.end());
      const Trajectory sep = integrate_lifted(model, RealVec{0.0}, 0.0, x0, ps, -cfg.T, cfg.ds,
                                              [&](const Trajectory& t) {
                                                const TorusPoint last(t.x.back());
                                                for (const auto& z : centers)
                                                  if (last.distance(z) <= dmin) return true;
                                                return false;
                                              });
      for (double delta : cfg.delta_list) {
        const auto hit = cylinder_hit_time(sep, centers, delta);
        const std::string name = std::string("flow.hit_time.") + (br == Branch::plus ? "S+" : "S-") + "." + tag("delta", delta);
        const double bound = 2.0 / b * std::log(1.0 / delta) + 0.1;
        ctx.add(check_le(name, hit ? hit->time : std::numeric_limits<double>::infinity(), bound));
      }
    }

    SvgPlot plot;
    plot.title = "phase portrait " + model.name() + " " + ctag(cfg.c.front()) + " " + tag("eps", eps);
    plot.xlabel = "x";
    plot.ylabel = "p";
    add_separatrices(plot, model);
    const char* colors[] = {"#9467bd", "#8c564b", "#e377c2", "#17becf"};
    int k = 0;
    for (const auto& sp : find_stationary_points(model, c[0], eps)) {
      if (sp.kind != PointClass::hyperbolic) continue;
      for (Side side : {Side::left, Side::right}) {
        const Trajectory wu = trace_unstable_manifold(sp, model, c[0], eps, side, 3.0);
        plot.series.push_back(phase_series(wu, model, std::string("W^u ") + tag("x", sp.x) +
                                                          (side == Side::left ? " left" : " right"),
                                           colors[k++ % 4]));
      }
    }
    plot.series.push_back(phase_series(tr, model, "orbit", "#1f77b4"));
    write_svg(ctx.path("phase.svg"), plot);
  } else if (model.kind() == ModelKind::quadraticKam) {
    // on the invariant graph the conservative flow is the translation x' = omega
    const Trajectory lin = integrate_lifted(model, c, 0.0, x0, c + model.exact_solution().gradient(x0), cfg.T, cfg.ds);
    double dev = 0.0;
    for (std::size_t i = 0; i < lin.size(); ++i)
      dev = std::max(dev, (lin.x[i] - x0 - model.omega() * lin.s[i]).norm_inf());
    ctx.add(check_le("flow.linear_flow_on_graph", dev, 1e-8 * std::max(1.0, cfg.T)));
    std::vector<double> omega;
    for (int a = 0; a < model.dim(); ++a) omega.push_back(model.omega()[a]);
    std::vector<double> inv, times;
    TextFile f(ctx.path("cover_times.csv"));
    f << "delta,T_cover\n";
    for (double delta : cfg.delta_list) {
      if (delta < 1e-3 || delta > 0.2) continue;
      const double t = ergodic_cover_time(omega, delta);
      inv.push_back(1.0 / delta);
      times.push_back(t);
      f << delta << "," << t << "\n";
    }
    f.close();
    if (inv.size() >= 3) {
      const LogLogFit fit = loglog_fit(inv, times);
      ctx.add(check_le("flow.cover_time_slope", fit.slope, cfg.eta + 0.2));
    }
  }
}


// ------------------------------------------------------------------- alpha

void study_alpha(Ctx& ctx) {
  const AlphaStudyResult res = run_alpha_study(ctx.cfg);
  ctx.add(res.checks);
  const std::size_t ne = ctx.cfg.eps_list.size();
  SvgPlot plot;
  plot.title = "alpha-limit clusters";
  plot.xlabel = "x";
  plot.ylabel = "p";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  for (std::size_t r = 0; r < res.rows.size(); ++r) {
    const AlphaStudyRow& row = res.rows[r];
    std::vector<AlphaRow> out;
    SvgSeries pts{ctag({row.c}) + " " + tag("eps", row.eps), {}, {}, colors[r % 5], true};
    for (const auto& o : row.outcomes)
      for (const auto& cl : o.clusters) {
        out.push_back(AlphaRow{o.seed[0], cl.center.x[0], cl.center.y[0], cl.revisits, ctx.cfg.cluster_radius});
        pts.x.push_back(cl.center.x[0]);
        pts.y.push_back(cl.center.y[0]);
      }
    write_alpha_csv(ctx.path(indexed("alpha", r / ne, r % ne, ".csv")), out);
    plot.series.push_back(pts);
  }
  write_svg(ctx.path("alpha.svg"), plot);
}

// ----------------------------------------------------------------- measure

void study_measure(Ctx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const double c = cfg.c.front().at(0);
  const double eps = cfg.eps_list.front();
  const TonelliModel model = build_model(cfg.model, RealVec{c});
  const SolveResult sr = solve_discounted(model, RealVec{c}, eps, 0.0, PeriodicGrid(1, grid_size_for(cfg, 0)), cfg.solver);
  const ScalarField& v = sr.field;
  const MomentumField mf = reconstruct_momentum(v, model, RealVec{c}, eps, 0.0, cfg.solver);
  const TestFunctionSet tests = TestFunctionSet::trigonometric(1, 3);
  const RealVec x0 = to_realvec(cfg.x0);
  const std::string pre = "measure." + ctag({c}) + "." + tag("eps", eps);

  CharacteristicOptions opt;
  opt.ds = cfg.ds;
  opt.resync_every = cfg.resync;

  // uniform occupation measure over span T
  opt.T = cfg.T;
  const Characteristic cu = backward_characteristic(v, mf, model, RealVec{c}, eps, x0, opt);
  if (cu.blew_up) throw BlowUpError("measure: backward characteristic blew up", cu.blow_up_time);
  const EmpiricalMeasure mu = occupation_uniform(cu.traj, model);
  const double T = mu.T;
  ctx.add(check_le(pre + ".holonomy_residual", holonomy_residual(mu, tests), 2.0 / T));
  double telescoping = 0.0;
  const std::vector<double> terms = holonomy_terms(mu, tests);
  for (std::size_t i = 0; i < tests.functions.size(); ++i) {
    const auto& psi = tests.functions[i];
    telescoping = std::max(telescoping, std::abs(terms[i] - (psi.value(mu.x0) - psi.value(mu.x_end)) / T));
  }
  ctx.add(check_le(pre + ".holonomy_telescoping", telescoping, 1e-8));
  const ActionStats st = action_stats(mu, model, RealVec{c}, eps, 0.0, v);
  ctx.add(check_ge(pre + ".mather_inequality", st.action, -1e-3));
  ctx.add(check_le(pre + ".m1_defect", st.m1_defect, 1e-2));
  write_measure_csv(ctx.path("measure_uniform.csv"), mu);

  // discounted occupation measure over span 20 / eps
  opt.T = 20.0 / eps;
  const Characteristic cd = backward_characteristic(v, mf, model, RealVec{c}, eps, x0, opt);
  if (cd.blew_up) throw BlowUpError("measure: backward characteristic blew up", cd.blow_up_time);
  const EmpiricalMeasure md = occupation_discounted(cd.traj, model, eps);
  ctx.add(check_le(pre + ".discounted_action_identity", discounted_action_defect(md, model, RealVec{c}, 0.0, v), 1e-3));
  ctx.add(check_le(pre + ".discounted_holonomy", discounted_holonomy_defect(md, tests), 1e-3));
  write_measure_csv(ctx.path("measure_discounted.csv"), md);

  // ball and preimage masses next to a shock
  if (!shock_scan_1d(mf).empty()) {
    const ShockProbe pr = shock_adjacent_probe(v, mf, model, c, eps, cfg.tau, cfg.delta, 3.0 * cfg.tau);
    ctx.add(check_ge(pre + ".probe_side_found", pr.found ? 1.0 : 0.0, 1.0));
    if (pr.found) {
      auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
      ctx.add(check_le(pre + ".probe_ball_mass", rel(pr.measured.mass_ball, pr.predicted.mass_ball), 0.1));
      ctx.add(check_le(pre + ".probe_preimage_mass", rel(pr.measured.mass_preimage, pr.predicted.mass_preimage), 0.1));
      ctx.add(check_le(pre + ".probe_mismatch",
                       rel(pr.measured.mass_ball - pr.measured.mass_preimage,
                           pr.predicted.mass_ball - pr.predicted.mass_preimage),
                       0.1));
      TextFile f(ctx.path("invariance_probe.csv"));
      f << "x0,p0,tau,delta,T,tau_minus,tau_plus,mass_ball,mass_preimage,closed_ball,closed_preimage\n";
      f << pr.x0 << "," << pr.p0 << "," << cfg.tau << "," << cfg.delta << "," << pr.T << "," << pr.tau_minus << ","
        << pr.tau_plus << "," << pr.measured.mass_ball << "," << pr.measured.mass_preimage << ","
        << pr.predicted.mass_ball << "," << pr.predicted.mass_preimage << "\n";
      f.close();
    }
  }
}

// ----------------------------------------------------------------- barrier

void study_barrier(Ctx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const TonelliModel model = build_model(cfg.model, RealVec{0.0});
  const SegmentActions sa = segment_actions(model);
  const SeparatrixIntegral G(model);
  const CriticalValues cv = critical_c(model);
  double sum = 0.0;
  for (double s : sa.actions) sum += s;
  ctx.add(check_le("barrier.action_sum", std::abs(sum - cv.c_plus), 1e-9));
  {
    TextFile f(ctx.path("actions.csv"));
    f << "zero,action\n";
    for (std::size_t i = 0; i < sa.zeros.size(); ++i) f << sa.zeros[i] << "," << sa.actions[i] << "\n";
    f.close();
  }
  const PeriodicGrid grid(1, grid_size_for(cfg, 0));
  for (std::size_t ci = 0; ci < cfg.c.size(); ++ci) {
    const double c = cfg.c[ci].at(0);
    const std::string pre = "barrier." + ctag(cfg.c[ci]);
    double diag = 0.0;
    for (double z : sa.zeros) diag = std::max(diag, std::abs(peierls_barrier_1d(G, c, z, z)));
    if (std::abs(c) <= cv.c_plus) ctx.add(check_le(pre + ".zero_on_aubry_set", diag, 1e-10));
    // triangle inequality on a coarse sample
    double worst = 0.0;
    constexpr int kS = 24;
    for (int i = 0; i < kS; ++i)
      for (int j = 0; j < kS; ++j)
        for (int k = 0; k < kS; ++k) {
          const double x = (i + 0.5) / kS, y = (j + 0.5) / kS, z = (k + 0.5) / kS;
          worst = std::max(worst, peierls_barrier_1d(G, c, x, z) - peierls_barrier_1d(G, c, x, y) -
                                      peierls_barrier_1d(G, c, y, z));
        }
    ctx.add(check_le(pre + ".triangle_inequality", worst, 1e-10));

    const ScalarField vstar = limit_solution_c1(model, c, grid);
    TextFile f(ctx.path("barrier_c" + std::to_string(ci) + ".csv"));
    f << "x";
    for (std::size_t z = 0; z < sa.zeros.size(); ++z) f << ",h_from_zero" << static_cast<int>(z);
    f << ",vstar\n";
    SvgPlot plot;
    plot.title = "barrier " + model.name() + " " + ctag(cfg.c[ci]);
    plot.xlabel = "x";
    plot.ylabel = "h^c(x, x_i), v*";
    std::vector<SvgSeries> series(sa.zeros.size() + 1);
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    for (std::size_t z = 0; z < sa.zeros.size(); ++z)
      series[z] = SvgSeries{"h(x, " + format_real(std::round(sa.zeros[z] * 1e4) / 1e4) + ")", {}, {}, colors[z % 4], false};
    series.back() = SvgSeries{"v*", {}, {}, "#000000", false};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double x = grid.node(k)[0];
      f << x;
      for (std::size_t z = 0; z < sa.zeros.size(); ++z) {
        const double h = peierls_barrier_1d(G, c, x, sa.zeros[z]);
        f << "," << h;
        series[z].x.push_back(x);
        series[z].y.push_back(h);
      }
      f << "," << vstar[k] << "\n";
      series.back().x.push_back(x);
      series.back().y.push_back(vstar[k]);
    }
    f.close();
    plot.series = series;
    write_svg(ctx.path("barrier_c" + std::to_string(ci) + ".svg"), plot);
  }
}

// --------------------------------------------------------------- selection

void study_selection(Ctx& ctx) {
  const SelectionResult res = run_selection_study(ctx.cfg);
  ctx.add(res.checks);
  write_selection_csv(ctx.path("selection.csv"), res);
  SvgPlot plot;
  plot.title = "selected wells";
  plot.xlabel = "c";
  plot.ylabel = "cluster x";
  SvgSeries pts{"clusters", {}, {}, "#d62728", true};
  for (const auto& row : res.rows) {
    pts.x.push_back(row.c);
    pts.y.push_back(row.cluster_x);
  }
  plot.series = {pts};
  write_svg(ctx.path("selection.svg"), plot);
}

// -------------------------------------------------------------------- rate

void study_rate(Ctx& ctx, bool c1) {
  const RateStudyResult r = c1 ? run_rate_study_c1(ctx.cfg, ctx.opt) : run_rate_study_c2(ctx.cfg, ctx.opt);
  ctx.add(r.checks);
  for (const auto& row : r.rows)
    if (!row.failure.empty()) ctx.rep.warnings.push_back(tag("eps", row.eps) + ": " + row.failure);
  for (const auto& w : r.fit.warnings) ctx.rep.warnings.push_back(w);
  const std::string stem = c1 ? "rate_c1" : "rate_c2";
  write_rate_csv(ctx.path(stem + ".csv"), r, ctx.opt.timings);
  write_rate_svg(ctx.path(stem + ".svg"), r, c1 ? "C1 rate" : "C2 rate");
}

}  // namespace

// ------------------------------------------------------------ shock probe

ShockProbe shock_adjacent_probe(const ScalarField& field, const MomentumField& mfield,
                                const TonelliModel& model, double c, double eps, double tau,
                                double delta, double T, double ds) {
  ShockProbe out;
  const std::vector<Shock> shocks = shock_scan_1d(mfield);
  if (shocks.empty()) return out;
  const double dx = mfield.grid.spacing(0);
  CharacteristicOptions opt;
  opt.T = T;
  opt.ds = ds;

  // the orbit may meet the ball only while leaving it
  auto leaves_for_good = [&](const Trajectory& tr, const PhaseState& center) {
    bool left = false;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const PhaseState st{TorusPoint(tr.x[i]), model.H_p(tr.x[i], tr.p[i]), FiberKind::velocity};
      const bool inside = st.distance(center) < delta;
      if (!inside) left = true;
      else if (left) return false;
    }
    return left;
  };

  for (double side : {-1.0, 1.0}) {
    const RealVec seed{shocks.front().location + side * 3.0 * dx};
    const Characteristic ch = backward_characteristic(field, mfield, model, RealVec{c}, eps, seed, opt);
    if (ch.blew_up) continue;
    const RealVec x0 = ch.traj.x.front(), p0 = ch.traj.p.front();
    const PhaseState center{TorusPoint(x0), model.H_p(x0, p0), FiberKind::velocity};
    const Trajectory fwd = integrate_lifted(model, RealVec{c}, eps, x0, p0, tau, ds);
    if (!leaves_for_good(ch.traj, center) || !leaves_for_good(fwd, center)) continue;

    const EmpiricalMeasure mu = occupation_discounted(ch.traj, model, eps);
    out.found = true;
    out.x0 = x0[0];
    out.p0 = p0[0];
    out.T = mu.T;
    out.tau_minus = ball_exit_time(ch.traj, model, center, delta);
    out.tau_plus = ball_exit_time(fwd, model, center, delta);
    out.measured = invariance_probe(mu, model, RealVec{c}, eps, tau, center, delta, 1e-3);
    out.predicted = closed_form_masses(eps, tau, out.tau_minus, out.tau_plus, mu.T);
    return out;
  }
  return out;
}

// -------------------------------------------------------------- dispatch

std::string run_directory(const ExperimentConfig& cfg, const std::string& out_dir) {
  return out_dir + "/" + to_string(cfg.study) + "-" + config_hash(cfg);
}

StudyReport run_study(const ExperimentConfig& cfg, const std::string& out_dir, const RunOptions& opt) {
  validate_config(cfg);
  StudyReport rep;
  rep.kind = cfg.study;
  rep.run_dir = run_directory(cfg, out_dir);
  std::error_code ec;
  std::filesystem::create_directories(rep.run_dir, ec);
  if (ec) throw IoError("cannot create " + rep.run_dir + ": " + ec.message());
  Ctx ctx{cfg, opt, rep};
  {
    TextFile f(ctx.path("config.txt"));
    f << serialize_config(cfg);
    f.close();
  }
  switch (cfg.study) {
    case StudyKind::solve: study_solve(ctx); break;
    case StudyKind::flow: study_flow(ctx); break;
    case StudyKind::alpha: study_alpha(ctx); break;
    case StudyKind::measure: study_measure(ctx); break;
    case StudyKind::rate_c1: study_rate(ctx, true); break;
    case StudyKind::rate_c2: study_rate(ctx, false); break;
    case StudyKind::selection: study_selection(ctx); break;
    case StudyKind::barrier: study_barrier(ctx); break;
  }
  write_summary_ndjson(ctx.path("summary.ndjson"), rep.checks);
  return rep;
}

}  // namespace wkam
