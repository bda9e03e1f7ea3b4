#include "wkam/flows.hpp"

#include <algorithm>
#include <cmath>

namespace wkam {

void DiscountedFlow::rhs(const RealVec& x, const RealVec& p, RealVec& dx, RealVec& dp) const {
  const HamiltonianEval e = model_.hamiltonian(x, p);
  dx = e.H_p;
  dp = -e.H_x + (c_ - p) * eps_;
}

void DiscountedFlow::step(RealVec& x, RealVec& p, double h) const {
  RealVec k1x, k1p, k2x, k2p, k3x, k3p, k4x, k4p;
  rhs(x, p, k1x, k1p);
  rhs(x + k1x * (0.5 * h), p + k1p * (0.5 * h), k2x, k2p);
  rhs(x + k2x * (0.5 * h), p + k2p * (0.5 * h), k3x, k3p);
  rhs(x + k3x * h, p + k3p * h, k4x, k4p);
  x += (k1x + 2.0 * k2x + 2.0 * k3x + k4x) * (h / 6.0);
  p += (k1p + 2.0 * k2p + 2.0 * k3p + k4p) * (h / 6.0);
}

Trajectory integrate_lifted(const TonelliModel& model, const RealVec& c, double eps,
                            const RealVec& x0, const RealVec& p0, double s_span, double ds,
                            const StopRule& stop) {
  if (!(ds > 0.0 && ds <= 1e-2)) throw DomainError("integrate: step must lie in (0, 1e-2]");
  if (!(std::abs(s_span) < 1e6)) throw DomainError("integrate: |s_span| must be below 1e6");
  if (!x0.finite() || !p0.finite()) throw DomainError("integrate: non-finite start state");
  if (x0.size() != model.dim() || p0.size() != model.dim())
    throw DomainError("integrate: dimension mismatch");

  const DiscountedFlow flow(model, c, eps);
  Trajectory tr;
  tr.direction = s_span < 0.0 ? Direction::backward : Direction::forward;
  tr.ds = ds;
  const long long n = static_cast<long long>(std::ceil(std::abs(s_span) / ds - 1e-9));
  const double h = n > 0 ? s_span / static_cast<double>(n) : 0.0;
  tr.s.reserve(static_cast<std::size_t>(n) + 1);
  tr.x.reserve(static_cast<std::size_t>(n) + 1);
  tr.p.reserve(static_cast<std::size_t>(n) + 1);

  RealVec x = x0, p = p0;
  tr.s.push_back(0.0);
  tr.x.push_back(x);
  tr.p.push_back(p);
  if (stop && stop(tr)) return tr;
  for (long long i = 1; i <= n; ++i) {
    flow.step(x, p, h);
    const double s = static_cast<double>(i) * h;
    if (!x.finite() || !p.finite() || p.norm() > 1e6)
      throw BlowUpError("integrate: state norm exceeded 1e6 at s=" + std::to_string(s), s);
    tr.s.push_back(s);
    tr.x.push_back(x);
    tr.p.push_back(p);
    if (stop && stop(tr)) break;
  }
  return tr;
}

Trajectory integrate(const TonelliModel& model, const RealVec& c, double eps,
                     const PhaseState& start, double s_span, double ds, const StopRule& stop) {
  if (start.kind != FiberKind::momentum) throw DomainError("integrate: start state must carry a momentum");
  return integrate_lifted(model, c, eps, start.x.coords(), start.y, s_span, ds, stop);
}

std::vector<StationaryPoint> find_stationary_points(const TonelliModel& model, double c, double eps) {
  if (model.kind() != ModelKind::mechanical1d)
    throw DomainError("find_stationary_points: mechanical1d model required");
  const std::vector<double> zeros = potential_zeros(model);
  double gap = 1.0;
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    const double next = i + 1 < zeros.size() ? zeros[i + 1] : zeros[0] + 1.0;
    gap = std::min(gap, next - zeros[i]);
  }
  std::vector<StationaryPoint> out;
  for (double z : zeros) {
    const double fxx0 = model.F_xx(z);
    if (std::abs(c * eps) >= 0.5 * fxx0 * 0.25 * gap)
      throw ConvergenceError("find_stationary_points: c*eps too large for the well at x=" +
                                 std::to_string(z),
                             std::abs(c * eps));
    double x = z;
    double r = model.F_x(x) + c * eps;
    for (int it = 0; it < 100 && std::abs(r) > 1e-13; ++it) {
      const double d = model.F_xx(x);
      if (!(d > 0.0)) break;
      x -= r / d;
      r = model.F_x(x) + c * eps;
    }
    if (!(std::abs(r) <= 1e-12) || std::abs(x - z) > 0.25 * gap)
      throw ConvergenceError("find_stationary_points: Newton failed from seed x=" + std::to_string(z),
                             std::abs(r));
    StationaryPoint sp;
    sp.x = wrap01(x);
    sp.seed = z;
    sp.eps = eps;
    sp.c = c;
    const double fxx = model.F_xx(x);
    // Jacobian [[0, 1], [F_xx, -eps]]: lambda^2 + eps lambda - F_xx = 0
    const double disc = eps * eps + 4.0 * fxx;
    sp.kind = fxx > 0.0 ? PointClass::hyperbolic : PointClass::nonhyperbolic;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      sp.lambda_plus = 0.5 * (-eps + sq);
      sp.lambda_minus = 0.5 * (-eps - sq);
      const double nu = std::hypot(1.0, sp.lambda_plus), ns = std::hypot(1.0, sp.lambda_minus);
      sp.unstable = {1.0 / nu, sp.lambda_plus / nu};
      sp.stable = {1.0 / ns, sp.lambda_minus / ns};
    } else {
      sp.lambda_plus = sp.lambda_minus = -0.5 * eps;  // real part of a focus
    }
    out.push_back(sp);
  }
  return out;
}

Trajectory trace_unstable_manifold(const StationaryPoint& sp, const TonelliModel& model, double c,
                                   double eps, Side side, double arc_budget, double ds,
                                   double max_time) {
  if (sp.kind != PointClass::hyperbolic)
    throw DomainError("trace_unstable_manifold: stationary point is not hyperbolic");
  const std::vector<StationaryPoint> all = find_stationary_points(model, c, eps);
  const double sign = side == Side::right ? 1.0 : -1.0;
  const RealVec x0{sp.x + sign * 1e-6 * sp.unstable[0]};
  const RealVec p0{sign * 1e-6 * sp.unstable[1]};
  if (arc_budget <= 0.0) {
    Trajectory tr;
    tr.ds = ds;
    tr.s.push_back(0.0);
    tr.x.push_back(x0);
    tr.p.push_back(p0);
    return tr;
  }
  double arc = 0.0;
  bool left_home = false;
  auto stop = [&](const Trajectory& tr) {
    const std::size_t n = tr.size();
    if (n >= 2) {
      const double dx = tr.x[n - 1][0] - tr.x[n - 2][0], dp = tr.p[n - 1][0] - tr.p[n - 2][0];
      arc += std::hypot(dx, dp);
    }
    if (arc > arc_budget) return true;
    const double xm = tr.x[n - 1][0], pm = tr.p[n - 1][0];
    // the lifted copy of sp we started from only counts once the orbit has left it
    const bool near_home = std::hypot(xm - sp.x, pm) < 1e-4;
    if (!near_home) left_home = true;
    for (const auto& q : all) {
      const double lifted = q.x + std::round(xm - q.x);
      if (std::hypot(xm - lifted, pm) >= 1e-4) continue;
      const bool home = std::abs(lifted - sp.x) < 1e-9;
      if (!home || left_home) return true;
    }
    return false;
  };
  return integrate_lifted(model, RealVec{c}, eps, x0, p0, max_time, ds, stop);
}

std::optional<CylinderHit> cylinder_hit_time(const Trajectory& traj,
                                             const std::vector<TorusPoint>& centers, double delta) {
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const TorusPoint xi(traj.x[i]);
    for (std::size_t k = 0; k < centers.size(); ++k)
      if (xi.distance(centers[k]) <= delta) return CylinderHit{traj.elapsed(i), k, i};
  }
  return std::nullopt;
}

double dissipation_rate(const TonelliModel& model, const RealVec& c, double eps, const RealVec& x,
                        const RealVec& p) {
  return eps * model.H_p(x, p).dot(c - p);
}

}  // namespace wkam
