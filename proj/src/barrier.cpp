#include "wkam/barrier.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>

namespace wkam {

SeparatrixIntegral::SeparatrixIntegral(const TonelliModel& model, int panels) : model_(model) {
  if (model.kind() != ModelKind::mechanical1d)
    throw DomainError("separatrix integral: mechanical1d model required");
  try {
    zeros_ = potential_zeros(model);
  } catch (const Error&) {
    zeros_.clear();
  }
  table_.resize(static_cast<std::size_t>(panels) + 1);
  table_[0] = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = static_cast<double>(i) / panels, b = static_cast<double>(i + 1) / panels;
    table_[i + 1] = table_[i] + piece(a, b);
  }
  total_ = table_.back();
}

// Fixed 30-point Gauss rule on [a, b] inside [0, 1], split at zeros of F
// where sqrt(2F) has a corner. Panels are short, so this is exact to round-off
// and, unlike adaptive schemes, is not thrown off by the cancellation noise
// of F near its zeros.
double SeparatrixIntegral::piece(double a, double b) const {
  if (b <= a) return 0.0;
  std::vector<double> pts{a};
  for (double z : zeros_)
    if (z > a && z < b) pts.push_back(z);
  pts.push_back(b);
  double s = 0.0;
  const TrigSeries& F = model_.potential();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    s += boost::math::quadrature::gauss<double, 30>::integrate(
        [&](double x) { return std::sqrt(2.0 * std::max(0.0, F.value(x))); }, pts[i], pts[i + 1]);
  return s;
}

double SeparatrixIntegral::operator()(double x) const {
  const double fl = std::floor(x);
  const double r = x - fl;
  const int panels = static_cast<int>(table_.size()) - 1;
  int i = std::min(panels - 1, static_cast<int>(r * panels));
  const double left = static_cast<double>(i) / panels;
  return fl * total_ + table_[i] + piece(left, r);
}

double peierls_barrier_1d(const SeparatrixIntegral& G, double c, double x, double y) {
  if (!(std::abs(c) < G.period_action()))
    throw DomainError("peierls_barrier_1d: |c| must be below c_plus");
  const double forward = y + wrap01(x - y);   // reach x moving right
  const double backward = y - wrap01(y - x);  // reach x moving left
  const double right = G.integral(y, forward) - c * (forward - y);
  const double left = G.integral(backward, y) + c * (y - backward);
  return std::min(right, left);
}

double peierls_barrier_1d(const TonelliModel& model, double c, double x, double y) {
  const CriticalValues cv = critical_c(model);
  if (!(std::abs(c) < cv.c_plus)) throw DomainError("peierls_barrier_1d: |c| must be below c_plus");
  const SeparatrixIntegral G(model);
  return peierls_barrier_1d(G, c, x, y);
}

ScalarField limit_solution_c1(const TonelliModel& model, double c, const PeriodicGrid& grid,
                              const std::vector<double>& selected_zeros) {
  if (grid.dim() != 1) throw DomainError("limit_solution_c1: one-dimensional grid required");
  const SeparatrixIntegral G(model);
  if (!(std::abs(c) < G.period_action()))
    throw DomainError("limit_solution_c1: |c| must be below c_plus");
  const std::vector<double> zeros = selected_zeros.empty() ? potential_zeros(model) : selected_zeros;
  ScalarField v(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid.node(k)[0];
    double best = std::numeric_limits<double>::infinity();
    for (double z : zeros) best = std::min(best, peierls_barrier_1d(G, c, x, z));
    v[k] = best;
  }
  v.meta.model = model.name();
  v.meta.c = RealVec{c};
  return v;
}

namespace {

struct Profile {
  std::vector<double> jumps;  // lifted, increasing, span < 1
  std::vector<double> zeros;  // switch-back zero preceding each jump (lifted)
};

// Integral of the momentum profile over one period ending at the last jump.
double profile_mean(const SeparatrixIntegral& G, const Profile& P) {
  const std::size_t m = P.jumps.size();
  double s = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double prev = k == 0 ? P.jumps[m - 1] - 1.0 : P.jumps[k - 1];
    s += -G.integral(prev, P.zeros[k]) + G.integral(P.zeros[k], P.jumps[k]);
  }
  return s;
}

// Last zero strictly inside (a, b) on the lifted line, or NaN.
double last_zero_between(const std::vector<double>& zeros, double a, double b) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (int shift = static_cast<int>(std::floor(a)) - 1; shift <= static_cast<int>(std::floor(b)) + 1;
       ++shift)
    for (double z : zeros) {
      const double zl = z + shift;
      if (zl > a && zl < b && !(zl <= best)) best = zl;
    }
  return best;
}

double first_zero_after(const std::vector<double>& zeros, double a) {
  double best = std::numeric_limits<double>::infinity();
  for (int shift = static_cast<int>(std::floor(a)) - 1; shift <= static_cast<int>(std::floor(a)) + 2;
       ++shift)
    for (double z : zeros) {
      const double zl = z + shift;
      if (zl > a) best = std::min(best, zl);
    }
  return best;
}

bool assign_zeros(const std::vector<double>& zeros, Profile& P) {
  const std::size_t m = P.jumps.size();
  P.zeros.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double prev = k == 0 ? P.jumps[m - 1] - 1.0 : P.jumps[k - 1];
    const double z = last_zero_between(zeros, prev, P.jumps[k]);
    if (std::isnan(z)) return false;
    P.zeros[k] = z;
  }
  return true;
}

}  // namespace

StationarySolution build_stationary_solution_1d(const TonelliModel& model, double c,
                                                const std::vector<double>& jump_positions,
                                                const PeriodicGrid& grid) {
  if (grid.dim() != 1) throw DomainError("build_stationary_solution_1d: one-dimensional grid required");
  const SeparatrixIntegral G(model);
  if (!(std::abs(c) < G.period_action()))
    throw DomainError("build_stationary_solution_1d: |c| must be below c_plus");
  if (jump_positions.empty())
    throw FeasibilityError("build_stationary_solution_1d: at least one jump is needed for |c| < c_plus");
  const std::vector<double> zeros = potential_zeros(model);

  Profile P;
  for (double j : jump_positions) P.jumps.push_back(wrap01(j));
  std::sort(P.jumps.begin(), P.jumps.end());
  for (std::size_t k = 1; k < P.jumps.size(); ++k)
    if (P.jumps[k] - P.jumps[k - 1] < 1e-12)
      throw FeasibilityError("build_stationary_solution_1d: repeated jump position");
  for (double j : P.jumps)
    for (double z : zeros)
      if (std::abs(circle_delta(j, z)) < 1e-12)
        throw FeasibilityError("build_stationary_solution_1d: jump placed on a zero of F");
  if (!assign_zeros(zeros, P))
    throw FeasibilityError("build_stationary_solution_1d: two jumps without a zero between them");

  // move the last jump inside (its switch-back zero, next zero) until the
  // period integral of the momentum equals c; the integral increases with it
  const std::size_t m = P.jumps.size();
  double lo = P.zeros[m - 1];
  double hi = std::min(first_zero_after(zeros, P.zeros[m - 1]), P.jumps[0] + 1.0);
  auto mean_at = [&](double j) {
    Profile Q = P;
    Q.jumps[m - 1] = j;
    return profile_mean(G, Q) - c;
  };
  const double flo = mean_at(lo), fhi = mean_at(hi);
  if (!(flo <= 0.0 && fhi >= 0.0))
    throw FeasibilityError("build_stationary_solution_1d: mean constraint cannot be met by moving the last jump");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_at(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  P.jumps[m - 1] = 0.5 * (lo + hi);
  if (std::abs(P.jumps[m - 1] - P.zeros[m - 1]) < 1e-12)
    throw FeasibilityError("build_stationary_solution_1d: solved jump collapsed onto a zero");

  // cumulative momentum integral on [J_m - 1, J_m], extended by periodicity
  const double base = P.jumps[m - 1] - 1.0;
  auto momentum_at = [&](double x) {
    const double xl = base + wrap01(x - base);
    for (std::size_t k = 0; k < m; ++k) {
      const double prev = k == 0 ? base : P.jumps[k - 1];
      if (xl >= prev && xl < P.jumps[k]) {
        const double s = std::sqrt(2.0 * std::max(0.0, model.F(wrap01(xl))));
        return xl < P.zeros[k] ? -s : s;
      }
    }
    return 0.0;
  };
  auto cumulative = [&](double x) {
    const double n = std::floor(x - base);
    const double xl = x - n;  // in [base, base + 1)
    double s = n * c;
    for (std::size_t k = 0; k < m; ++k) {
      const double prev = k == 0 ? base : P.jumps[k - 1];
      if (xl <= prev) break;
      const double a = prev, z = P.zeros[k], b = std::min(xl, P.jumps[k]);
      s -= G.integral(a, std::min(z, b));
      if (b > z) s += G.integral(z, b);
    }
    return s;
  };

  StationarySolution out;
  out.u = ScalarField(grid);
  out.momentum.resize(grid.size());
  const double origin = cumulative(0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid.node(k)[0];
    out.u[k] = cumulative(x) - origin - c * x;
    out.momentum[k] = momentum_at(x);
  }
  out.u.meta.model = model.name();
  out.u.meta.c = RealVec{c};
  for (double j : P.jumps) out.jumps.push_back(wrap01(j));
  std::sort(out.jumps.begin(), out.jumps.end());
  return out;
}

}  // namespace wkam
