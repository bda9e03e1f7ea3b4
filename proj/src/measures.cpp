#include "wkam/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "wkam/io.hpp"
#include "wkam/parallel.hpp"

namespace wkam {

const char* to_string(MeasureKind k) { return k == MeasureKind::uniform ? "uniform" : "discounted"; }

double EmpiricalMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

namespace {

EmpiricalMeasure atoms_from(const Trajectory& traj, const TonelliModel& model,
                            const std::vector<double>& raw) {
  EmpiricalMeasure mu;
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  mu.atoms.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (!(raw[i] > 0.0)) continue;
    Atom a;
    a.x = traj.x[i];
    a.p = traj.p[i];
    a.xi = model.H_p(traj.x[i], traj.p[i]);
    a.s = traj.s[i];
    a.weight = raw[i] / total;
    mu.atoms.push_back(a);
  }
  mu.T = traj.elapsed(traj.size() - 1);
  mu.x0 = traj.x.front();
  mu.x_end = traj.x.back();
  return mu;
}

// Composite Simpson on each smooth piece; pieces are separated by repeated
// sample times. An odd interval count closes with the 3/8 rule, a single
// interval or uneven spacing falls back to the trapezoid rule.
void piece_weights(const Trajectory& traj, std::size_t a, std::size_t b, std::vector<double>& w) {
  const std::size_t m = b - a;
  const double h = std::abs(traj.s[b] - traj.s[a]) / static_cast<double>(m);
  bool uniform = true;
  for (std::size_t i = a + 1; i <= b; ++i)
    if (std::abs(std::abs(traj.s[i] - traj.s[i - 1]) - h) > 1e-9 * h) uniform = false;
  if (m < 2 || !uniform) {
    for (std::size_t i = a + 1; i <= b; ++i) {
      const double hi = std::abs(traj.s[i] - traj.s[i - 1]);
      w[i - 1] += 0.5 * hi;
      w[i] += 0.5 * hi;
    }
    return;
  }
  std::size_t end = b;
  if (m % 2 == 1) {
    end = b - 3;
    const double k = 3.0 * h / 8.0;
    w[end] += k;
    w[end + 1] += 3.0 * k;
    w[end + 2] += 3.0 * k;
    w[end + 3] += k;
  }
  for (std::size_t i = a; i + 2 <= end; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
}

std::vector<double> quadrature_weights(const Trajectory& traj) {
  const std::size_t n = traj.size();
  std::vector<double> w(n, 0.0);
  std::size_t a = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && traj.s[i] != traj.s[i - 1]) continue;
    if (i - 1 > a) piece_weights(traj, a, i - 1, w);
    a = i;
  }
  return w;
}

}  // namespace

EmpiricalMeasure occupation_uniform(const Trajectory& traj, const TonelliModel& model) {
  if (traj.size() < 2) throw DomainError("occupation_uniform: trajectory needs two samples");
  EmpiricalMeasure mu = atoms_from(traj, model, quadrature_weights(traj));
  mu.kind = MeasureKind::uniform;
  return mu;
}

EmpiricalMeasure occupation_discounted(const Trajectory& traj, const TonelliModel& model, double eps) {
  if (traj.size() < 2) throw DomainError("occupation_discounted: trajectory needs two samples");
  if (!(eps > 0.0)) throw DomainError("occupation_discounted: eps must be positive");
  std::vector<double> w = quadrature_weights(traj);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] *= std::exp(-eps * traj.elapsed(i));
  EmpiricalMeasure mu = atoms_from(traj, model, w);
  mu.kind = MeasureKind::discounted;
  mu.eps = eps;
  return mu;
}

EmpiricalMeasure dirac_measure(const RealVec& x, const RealVec& p, const TonelliModel& model) {
  EmpiricalMeasure mu;
  mu.atoms.push_back(Atom{x, p, model.H_p(x, p), 0.0, 1.0});
  mu.x0 = x;
  mu.x_end = x;
  return mu;
}

double TestFunction::value(const RealVec& x) const {
  double arg = 0.0;
  for (int a = 0; a < x.size(); ++a) arg += wave[a] * x[a];
  arg *= 2.0 * std::numbers::pi;
  return is_sine ? std::sin(arg) : std::cos(arg);
}

RealVec TestFunction::gradient(const RealVec& x) const {
  double arg = 0.0;
  for (int a = 0; a < x.size(); ++a) arg += wave[a] * x[a];
  arg *= 2.0 * std::numbers::pi;
  const double d = 2.0 * std::numbers::pi * (is_sine ? std::cos(arg) : -std::sin(arg));
  RealVec g(x.size());
  for (int a = 0; a < x.size(); ++a) g[a] = d * wave[a];
  return g;
}

TestFunctionSet TestFunctionSet::trigonometric(int dim, int degree) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("TestFunctionSet: dimension must be 1 or 2");
  TestFunctionSet set;
  auto add = [&](std::vector<int> k) {
    std::string tag;
    for (std::size_t a = 0; a < k.size(); ++a) tag += (a ? "," : "") + std::to_string(k[a]);
    set.functions.push_back(TestFunction{"sin(" + tag + ")", k, true});
    set.functions.push_back(TestFunction{"cos(" + tag + ")", k, false});
  };
  if (dim == 1) {
    for (int k = 1; k <= degree; ++k) add({k});
  } else {
    // one of each +-k pair: first nonzero entry positive
    for (int k0 = 0; k0 <= degree; ++k0)
      for (int k1 = -degree; k1 <= degree; ++k1) {
        if (std::abs(k0) + std::abs(k1) > degree || (k0 == 0 && k1 <= 0)) continue;
        add({k0, k1});
      }
  }
  return set;
}

std::vector<double> holonomy_terms(const EmpiricalMeasure& mu, const TestFunctionSet& tests) {
  std::vector<double> out;
  out.reserve(tests.functions.size());
  for (const auto& psi : tests.functions)
    out.push_back(mu.integrate([&](const Atom& a) { return psi.gradient(a.x).dot(a.xi); }));
  return out;
}

double holonomy_residual(const EmpiricalMeasure& mu, const TestFunctionSet& tests) {
  if (mu.kind != MeasureKind::uniform) throw DomainError("holonomy_residual: uniform measure required");
  double m = 0.0;
  for (double t : holonomy_terms(mu, tests)) m = std::max(m, std::abs(t));
  return m;
}

double discounted_holonomy_defect(const EmpiricalMeasure& mu, const TestFunctionSet& tests) {
  if (mu.kind != MeasureKind::discounted)
    throw DomainError("discounted_holonomy_defect: discounted measure required");
  const double eps = mu.eps, tail = std::exp(-eps * mu.T);
  double m = 0.0;
  for (const auto& phi : tests.functions) {
    const double flux = mu.integrate([&](const Atom& a) { return phi.gradient(a.x).dot(a.xi); });
    const double mass = mu.integrate([&](const Atom& a) { return phi.value(a.x); });
    const double boundary = eps * (phi.value(mu.x0) - tail * phi.value(mu.x_end)) / (1.0 - tail);
    m = std::max(m, std::abs(flux + eps * mass - boundary));
  }
  return m;
}

ActionStats action_stats(const EmpiricalMeasure& mu, const TonelliModel& model, const RealVec& c,
                         double eps, double h, const ScalarField& vfield) {
  ActionStats st;
  st.action = mu.integrate([&](const Atom& a) { return model.L(a.x, a.xi) - c.dot(a.xi); });
  st.discount = mu.integrate([&](const Atom& a) { return eps * vfield.interpolate(a.x); });
  st.m1_defect = std::abs(st.action - st.discount + h);
  st.mather_defect = std::abs(st.action + h);
  return st;
}

double discounted_action_defect(const EmpiricalMeasure& mu, const TonelliModel& model,
                                const RealVec& c, double h, const ScalarField& vfield) {
  if (mu.kind != MeasureKind::discounted)
    throw DomainError("discounted_action_defect: discounted measure required");
  const double eps = mu.eps, tail = std::exp(-eps * mu.T);
  const double lhs = mu.integrate([&](const Atom& a) { return model.L(a.x, a.xi) - c.dot(a.xi) + h; });
  const double rhs = eps * (vfield.interpolate(mu.x0) - tail * vfield.interpolate(mu.x_end)) / (1.0 - tail);
  return std::abs(lhs - rhs);
}

InvarianceProbe invariance_probe(const EmpiricalMeasure& mu, const TonelliModel& model,
                                 const RealVec& c, double eps, double tau, const PhaseState& center,
                                 double delta, double ds) {
  if (center.kind != FiberKind::velocity)
    throw DomainError("invariance_probe: ball center must be a velocity-form state");
  if (!(tau > 0.0)) throw DomainError("invariance_probe: tau must be positive");
  InvarianceProbe out;
  const std::size_t n = mu.atoms.size();
  std::vector<double> pre(n, 0.0);
  if (!(ds > 0.0 && ds <= 1e-2)) throw DomainError("invariance_probe: step must lie in (0, 1e-2]");
  const DiscountedFlow flow(model, c, eps);
  const long long steps = static_cast<long long>(std::ceil(tau / ds - 1e-9));
  const double h = tau / static_cast<double>(steps);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Atom& a = mu.atoms[i];
      RealVec x = a.x, p = a.p;
      for (long long k = 0; k < steps; ++k) flow.step(x, p, h);
      const PhaseState end{TorusPoint(x), model.H_p(x, p), FiberKind::velocity};
      if (end.distance(center) < delta) pre[i] = a.weight;
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (mu.atoms[i].velocity_state().distance(center) < delta) out.mass_ball += mu.atoms[i].weight;
    out.mass_preimage += pre[i];
  }
  return out;
}

InvarianceProbe closed_form_masses(double eps, double tau, double tau_minus, double tau_plus, double T) {
  const double norm = 1.0 - std::exp(-eps * T);
  InvarianceProbe m;
  m.mass_ball = (1.0 - std::exp(-eps * tau_minus)) / norm;
  m.mass_preimage = (std::exp(-eps * (tau - tau_plus)) - std::exp(-eps * (tau + tau_minus))) / norm;
  return m;
}

double ball_exit_time(const Trajectory& traj, const TonelliModel& model, const PhaseState& center,
                      double delta) {
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const PhaseState st{TorusPoint(traj.x[i]), model.H_p(traj.x[i], traj.p[i]), FiberKind::velocity};
    if (st.distance(center) >= delta) {
      if (i == 0) return 0.0;
      // linear interpolation of the crossing between the two samples
      const PhaseState prev{TorusPoint(traj.x[i - 1]), model.H_p(traj.x[i - 1], traj.p[i - 1]),
                            FiberKind::velocity};
      const double d0 = prev.distance(center), d1 = st.distance(center);
      const double f = d1 > d0 ? (delta - d0) / (d1 - d0) : 1.0;
      return traj.elapsed(i - 1) + f * (traj.elapsed(i) - traj.elapsed(i - 1));
    }
  }
  return traj.empty() ? 0.0 : traj.elapsed(traj.size() - 1);
}

std::vector<SupportCluster> support_clusters(const EmpiricalMeasure& mu, double radius) {
  std::vector<std::size_t> order(mu.atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mu.atoms[a].weight > mu.atoms[b].weight; });
  std::vector<SupportCluster> out;
  std::vector<char> taken(mu.atoms.size(), 0);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (taken[i]) continue;
    SupportCluster cl{mu.atoms[i].velocity_state(), 0.0};
    for (std::size_t j = 0; j < mu.atoms.size(); ++j)
      if (!taken[j] && mu.atoms[j].velocity_state().distance(cl.center) <= radius) {
        taken[j] = 1;
        cl.mass += mu.atoms[j].weight;
      }
    out.push_back(cl);
  }
  return out;
}

double dictionary_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           const TestFunctionSet& tests) {
  double m = 0.0;
  for (const auto& phi : tests.functions) {
    const double a = mu.integrate([&](const Atom& at) { return phi.value(at.x); });
    const double b = nu.integrate([&](const Atom& at) { return phi.value(at.x); });
    m = std::max(m, std::abs(a - b));
  }
  return m;
}

void write_measure_csv(const std::string& path, const EmpiricalMeasure& mu) {
  const int n = mu.x0.size();
  TextFile f(path);
  f << (n == 1 ? "x0,p0,weight,kind,T,eps,start0\n" : "x0,x1,p0,p1,weight,kind,T,eps,start0,start1\n");
  const std::string prov = std::string(to_string(mu.kind)) + "," + format_real(mu.T) + "," +
                           format_real(mu.eps);
  for (const auto& a : mu.atoms) {
    for (int i = 0; i < n; ++i) f << wrap01(a.x[i]) << ",";
    for (int i = 0; i < n; ++i) f << a.p[i] << ",";
    f << a.weight << "," << prov;
    for (int i = 0; i < n; ++i) f << "," << mu.x0[i];
    f << "\n";
  }
  f.close();
}

}  // namespace wkam
