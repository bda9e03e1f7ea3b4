#include "wkam/characteristics.hpp"

#include <algorithm>
#include <cmath>

namespace wkam {

namespace {

bool touches_shock(const MomentumField& mf, const RealVec& x) {
  const Stencil st = interpolation_stencil(mf.grid, x);
  for (int i = 0; i < st.count; ++i)
    if (st.weight[i] > 0.0 && mf.is_shock(st.node[i])) return true;
  return false;
}

}  // namespace

Characteristic backward_characteristic(const ScalarField& field, const MomentumField& mfield,
                                       const TonelliModel& model, const RealVec& c, double eps,
                                       const RealVec& x0, const CharacteristicOptions& opt) {
  if (!(field.grid() == mfield.grid)) throw DomainError("backward_characteristic: grids differ");
  Characteristic out;
  out.seed = x0;
  out.start = TorusPoint(x0).coords();

  if (touches_shock(mfield, out.start)) {
    // nearest regular node, by torus distance
    const PeriodicGrid& g = mfield.grid;
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (mfield.is_shock(k)) continue;
      const double d = TorusPoint(g.node(k)).distance(TorusPoint(out.start));
      if (d < best) {
        best = d;
        arg = k;
      }
    }
    if (!std::isfinite(best)) throw DomainError("backward_characteristic: every node is a shock");
    out.start = g.node(arg);
    out.shift = best;
  }

  const RealVec p0 = mfield.interpolate(out.start);
  // resyncing edits the state in place, so integrate step by step
  try {
    if (opt.resync_every > 0) {
      const DiscountedFlow flow(model, c, eps);
      Trajectory tr;
      tr.direction = Direction::backward;
      tr.ds = opt.ds;
      const long long n = static_cast<long long>(std::ceil(opt.T / opt.ds - 1e-9));
      const double h = -opt.T / static_cast<double>(n);
      RealVec x = out.start, p = p0;
      tr.s.push_back(0.0);
      tr.x.push_back(x);
      tr.p.push_back(p);
      for (long long i = 1; i <= n; ++i) {
        flow.step(x, p, h);
        if (!p.finite() || p.norm() > 1e6)
          throw BlowUpError("backward characteristic blew up", std::abs(i * h));
        tr.s.push_back(static_cast<double>(i) * h);
        tr.x.push_back(x);
        tr.p.push_back(p);
        if (i % opt.resync_every == 0 && i < n) {
          // the restart is recorded as a second sample at the same time, so
          // quadratures along the orbit never straddle the momentum jump
          p = mfield.interpolate(x);
          tr.s.push_back(static_cast<double>(i) * h);
          tr.x.push_back(x);
          tr.p.push_back(p);
        }
      }
      out.traj = std::move(tr);
    } else {
      out.traj = integrate_lifted(model, c, eps, out.start, p0, -opt.T, opt.ds);
    }
  } catch (const BlowUpError& e) {
    out.blew_up = true;
    out.blow_up_time = e.time();
  }

  const Trajectory& tr = out.traj;
  out.deviation.resize(tr.size());
  out.capture_sample = tr.size();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const RealVec P = mfield.interpolate(tr.x[i]);
    out.deviation[i] = (tr.p[i] - P).norm();
    out.max_deviation = std::max(out.max_deviation, out.deviation[i]);
    if (out.capture_sample == tr.size() && opt.capture_radius > 0.0) {
      const TorusPoint xi(tr.x[i]);
      for (const auto& cc : opt.capture_centers)
        if (xi.distance(cc) <= opt.capture_radius) out.capture_sample = i;
    }
    if (i <= out.capture_sample)
      out.max_deviation_before_capture = std::max(out.max_deviation_before_capture, out.deviation[i]);
  }
  return out;
}

AlphaLimitSet alpha_limit_set(const Trajectory& traj, double window_fraction, double radius) {
  AlphaLimitSet out;
  out.window_fraction = window_fraction;
  out.radius = radius;
  if (traj.empty()) return out;
  const std::size_t n = traj.size();
  std::size_t first = static_cast<std::size_t>(std::floor((1.0 - window_fraction) * (n - 1)));
  first = std::min(first, n - 1);

  struct Acc {
    PhaseState center;
    int hits = 0;
  };
  std::vector<Acc> acc;
  for (std::size_t i = first; i < n; ++i) {
    const PhaseState st = traj.state(i);
    bool placed = false;
    for (auto& a : acc)
      if (a.center.distance(st) <= radius) {
        ++a.hits;
        placed = true;
        break;
      }
    if (!placed) acc.push_back(Acc{st, 1});
  }
  // report the latest state of each cluster as its representative
  for (auto& a : acc) {
    if (a.hits < 3) continue;
    PhaseState rep = a.center;
    for (std::size_t i = n; i-- > first;) {
      const PhaseState st = traj.state(i);
      if (a.center.distance(st) <= radius) {
        rep = st;
        break;
      }
    }
    out.points.push_back(AlphaCluster{rep, a.hits});
  }
  out.conclusive = !out.points.empty();
  return out;
}

double verify_value_identity(const ScalarField& field, const TonelliModel& model, const RealVec& c,
                             double eps, double h, const Trajectory& traj, double tau) {
  if (traj.empty()) return 0.0;
  const double v0 = field.interpolate(traj.x[0]);
  if (tau <= 0.0) return std::abs(v0 - field.interpolate(traj.x[0]));
  auto integrand = [&](std::size_t i) {
    const RealVec xi = model.H_p(traj.x[i], traj.p[i]);
    const double L = model.lagrangian(traj.x[i], xi).L;
    return std::exp(eps * traj.s[i]) * (L - c.dot(xi) + h);
  };
  double integral = 0.0;
  std::size_t last = 0;
  double prev = integrand(0);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (traj.elapsed(i) > tau + 1e-12) break;
    const double cur = integrand(i);
    integral += 0.5 * (prev + cur) * std::abs(traj.s[i] - traj.s[i - 1]);
    prev = cur;
    last = i;
  }
  const double t_end = traj.elapsed(last);
  const double rhs = integral + std::exp(-eps * t_end) * field.interpolate(traj.x[last]);
  return std::abs(v0 - rhs);
}

double gradient_identity_scan(const MomentumField& mfield, const TonelliModel& model,
                              const Trajectory& traj) {
  double m = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const RealVec xi = model.H_p(traj.x[i], traj.p[i]);
    const RealVec Lxi = model.lagrangian(traj.x[i], xi).L_xi;
    m = std::max(m, (mfield.interpolate(traj.x[i]) - Lxi).norm());
  }
  return m;
}

}  // namespace wkam
