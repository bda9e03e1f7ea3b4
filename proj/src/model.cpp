#include "wkam/model.hpp"

#include <algorithm>
#include <numbers>
#include <random>

#include "wkam/quadrature.hpp"

namespace wkam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_finite(const RealVec& a, const RealVec& b, const char* where) {
  if (!a.finite() || !b.finite()) throw DomainError(std::string(where) + ": non-finite input");
}

// Fourth-order central difference of g along axis i.
template <class G>
double diff5(const G& g, RealVec at, int i, double h) {
  const double x0 = at[i];
  auto eval = [&](double dx) {
    at[i] = x0 + dx;
    return g(at);
  };
  return (eval(-2 * h) - 8 * eval(-h) + 8 * eval(h) - eval(2 * h)) / (12 * h);
}

constexpr double kGenericStep = 1e-3;

}  // namespace

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::mechanical1d: return "mechanical1d";
    case ModelKind::quadraticKam: return "quadraticKam";
    case ModelKind::genericTonelli: return "genericTonelli";
  }
  return "?";
}

// ---------------------------------------------------------------- TrigSeries

void TrigSeries::eval(double x, double& f, double& fx, double& fxx) const {
  f = a0;
  fx = 0.0;
  fxx = 0.0;
  const std::size_t K = std::max(cos_coeffs.size(), sin_coeffs.size());
  if (K == 0) return;
  // cos/sin of k*theta by the angle-addition recurrence
  const double theta = kTwoPi * x;
  const double c1 = std::cos(theta), s1 = std::sin(theta);
  double ck = c1, sk = s1;
  for (std::size_t k = 1; k <= K; ++k) {
    const double a = k <= cos_coeffs.size() ? cos_coeffs[k - 1] : 0.0;
    const double b = k <= sin_coeffs.size() ? sin_coeffs[k - 1] : 0.0;
    const double w = kTwoPi * static_cast<double>(k);
    f += a * ck + b * sk;
    fx += w * (-a * sk + b * ck);
    fxx += -w * w * (a * ck + b * sk);
    const double cn = ck * c1 - sk * s1;
    const double sn = sk * c1 + ck * s1;
    ck = cn;
    sk = sn;
  }
}

double TrigSeries::value(double x) const {
  double f, fx, fxx;
  eval(x, f, fx, fxx);
  return f;
}
double TrigSeries::d1(double x) const {
  double f, fx, fxx;
  eval(x, f, fx, fxx);
  return fx;
}
double TrigSeries::d2(double x) const {
  double f, fx, fxx;
  eval(x, f, fx, fxx);
  return fxx;
}

TrigSeries TrigSeries::shifted(double shift) const {
  // a cos(k(t - s)) + b sin(k(t - s)) with t = 2 pi x, s = 2 pi shift
  TrigSeries out;
  out.a0 = a0;
  const std::size_t K = std::max(cos_coeffs.size(), sin_coeffs.size());
  out.cos_coeffs.assign(K, 0.0);
  out.sin_coeffs.assign(K, 0.0);
  for (std::size_t k = 1; k <= K; ++k) {
    const double a = k <= cos_coeffs.size() ? cos_coeffs[k - 1] : 0.0;
    const double b = k <= sin_coeffs.size() ? sin_coeffs[k - 1] : 0.0;
    const double ks = kTwoPi * static_cast<double>(k) * shift;
    out.cos_coeffs[k - 1] = a * std::cos(ks) - b * std::sin(ks);
    out.sin_coeffs[k - 1] = a * std::sin(ks) + b * std::cos(ks);
  }
  return out;
}

TrigSeries preset_F1() {
  const double q = std::numbers::pi * std::numbers::pi / 4.0;
  return TrigSeries{q, {-q}, {}};
}

TrigSeries preset_F2() {
  // (1 + sin(t)/2)^2 sin^2(t), t = 2 pi x, expanded into harmonics
  return TrigSeries{19.0 / 32.0, {0.0, -0.625, 0.0, 1.0 / 32.0}, {0.75, 0.0, -0.25}};
}

// ------------------------------------------------------------ TrigPolynomial

TrigPolynomial::TrigPolynomial(int dim, std::vector<TrigTerm> terms)
    : dim_(dim), terms_(std::move(terms)) {
  if (dim < 1 || dim > kMaxDim) throw ModelError("TrigPolynomial: dimension must be 1 or 2");
  for (const auto& t : terms_)
    if (static_cast<int>(t.wave.size()) != dim)
      throw ModelError("TrigPolynomial: wave vector length must equal dimension");
}

namespace {
double phase(const TrigTerm& t, const RealVec& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.wave.size(); ++i) s += t.wave[i] * x[static_cast<int>(i)];
  return kTwoPi * s;
}
}  // namespace

double TrigPolynomial::value(const RealVec& x) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    const double th = phase(t, x);
    s += t.amplitude * (t.is_sine ? std::sin(th) : std::cos(th));
  }
  return s;
}

RealVec TrigPolynomial::gradient(const RealVec& x) const {
  RealVec g(dim_);
  for (const auto& t : terms_) {
    const double th = phase(t, x);
    const double d = t.amplitude * (t.is_sine ? std::cos(th) : -std::sin(th));
    for (int i = 0; i < dim_; ++i) g[i] += d * kTwoPi * t.wave[i];
  }
  return g;
}

std::array<double, 4> TrigPolynomial::hessian(const RealVec& x) const {
  std::array<double, 4> h{0, 0, 0, 0};
  for (const auto& t : terms_) {
    const double th = phase(t, x);
    const double d2 = -t.amplitude * (t.is_sine ? std::sin(th) : std::cos(th));
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        h[i * 2 + j] += d2 * kTwoPi * kTwoPi * t.wave[i] * t.wave[j];
  }
  return h;
}

// -------------------------------------------------------------- TonelliModel

TonelliModel TonelliModel::mechanical(TrigSeries F, std::string name) {
  constexpr int kSamples = 10000;
  for (int i = 0; i < kSamples; ++i) {
    const double x = static_cast<double>(i) / kSamples;
    const double f = F.value(x);
    if (!(f >= -1e-12))
      throw ModelError("mechanical1d: F is negative at x=" + std::to_string(x) +
                       " (F=" + std::to_string(f) + ")");
  }
  TonelliModel m;
  m.kind_ = ModelKind::mechanical1d;
  m.dim_ = 1;
  m.name_ = std::move(name);
  m.F_ = std::make_shared<const TrigSeries>(std::move(F));
  return m;
}

TonelliModel TonelliModel::quadratic_kam(RealVec omega, RealVec offset, TrigPolynomial u,
                                         std::string name) {
  const int n = omega.size();
  if (offset.size() != n || u.dim() != n)
    throw ModelError("quadraticKam: omega, offset and u must share a dimension");
  if (omega.norm() == 0.0) throw ModelError("quadraticKam: omega must be nonzero");
  TonelliModel m;
  m.kind_ = ModelKind::quadraticKam;
  m.dim_ = n;
  m.name_ = std::move(name);
  m.kam_ = std::make_shared<const KamData>(KamData{omega, offset, std::move(u)});
  return m;
}

TonelliModel TonelliModel::generic(GenericHamiltonian h, std::string name) {
  if (!h.H) throw ModelError("genericTonelli: H evaluator missing");
  if (h.dim < 1 || h.dim > kMaxDim) throw ModelError("genericTonelli: dimension must be 1 or 2");
  TonelliModel m;
  m.kind_ = ModelKind::genericTonelli;
  m.dim_ = h.dim;
  m.name_ = std::move(name);
  m.gen_ = std::make_shared<const GenericHamiltonian>(std::move(h));

  // spot convexity check: H_pp positive definite at 32 random (x,p)
  std::mt19937_64 rng(0x5eed0001ULL);
  std::uniform_real_distribution<double> ux(0.0, 1.0), up(-5.0, 5.0);
  for (int k = 0; k < 32; ++k) {
    RealVec x(m.dim_), p(m.dim_);
    for (int i = 0; i < m.dim_; ++i) {
      x[i] = ux(rng);
      p[i] = up(rng);
    }
    const double hstep = 1e-3;
    std::array<double, 4> hpp{0, 0, 0, 0};
    for (int j = 0; j < m.dim_; ++j) {
      RealVec pp = p, pm = p;
      pp[j] += hstep;
      pm[j] -= hstep;
      const RealVec gp = m.H_p(x, pp), gm = m.H_p(x, pm);
      for (int i = 0; i < m.dim_; ++i) hpp[i * 2 + j] = (gp[i] - gm[i]) / (2 * hstep);
    }
    bool pd;
    if (m.dim_ == 1) {
      pd = hpp[0] > 0.0;
    } else {
      const double a = hpp[0], b = 0.5 * (hpp[1] + hpp[2]), d = hpp[3];
      pd = a > 0.0 && a * d - b * b > 0.0;
    }
    if (!pd) throw ModelError("genericTonelli: H_pp is not positive definite at a sample point");
  }
  return m;
}

const TrigSeries& TonelliModel::potential() const {
  if (kind_ != ModelKind::mechanical1d) throw DomainError("potential(): model is not mechanical1d");
  return *F_;
}
const RealVec& TonelliModel::omega() const {
  if (kind_ != ModelKind::quadraticKam) throw DomainError("omega(): model is not quadraticKam");
  return kam_->omega;
}
const RealVec& TonelliModel::offset() const {
  if (kind_ != ModelKind::quadraticKam) throw DomainError("offset(): model is not quadraticKam");
  return kam_->offset;
}
const TrigPolynomial& TonelliModel::exact_solution() const {
  if (kind_ != ModelKind::quadraticKam)
    throw DomainError("exact_solution(): model is not quadraticKam");
  return kam_->u;
}

double TonelliModel::H(const RealVec& x, const RealVec& p) const {
  switch (kind_) {
    case ModelKind::mechanical1d:
      return 0.5 * p[0] * p[0] - F_->value(x[0]);
    case ModelKind::quadraticKam: {
      const RealVec q = p - kam_->offset - kam_->u.gradient(x);
      return kam_->omega.dot(q) + 0.5 * q.norm2();
    }
    case ModelKind::genericTonelli:
      return gen_->H(x, p);
  }
  return 0.0;
}

RealVec TonelliModel::H_p(const RealVec& x, const RealVec& p) const {
  switch (kind_) {
    case ModelKind::mechanical1d:
      return p;
    case ModelKind::quadraticKam:
      return kam_->omega + (p - kam_->offset - kam_->u.gradient(x));
    case ModelKind::genericTonelli: {
      RealVec g(dim_);
      for (int i = 0; i < dim_; ++i)
        g[i] = diff5([&](const RealVec& pp) { return gen_->H(x, pp); }, p, i, kGenericStep);
      return g;
    }
  }
  return p;
}

RealVec TonelliModel::H_x(const RealVec& x, const RealVec& p) const {
  switch (kind_) {
    case ModelKind::mechanical1d:
      return RealVec{-F_->d1(x[0])};
    case ModelKind::quadraticKam: {
      const RealVec q = p - kam_->offset - kam_->u.gradient(x);
      const RealVec w = kam_->omega + q;
      const auto hess = kam_->u.hessian(x);
      RealVec g(dim_);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) g[i] -= hess[j * 2 + i] * w[j];
      return g;
    }
    case ModelKind::genericTonelli: {
      RealVec g(dim_);
      for (int i = 0; i < dim_; ++i)
        g[i] = diff5([&](const RealVec& xx) { return gen_->H(xx, p); }, x, i, kGenericStep);
      return g;
    }
  }
  return p;
}

HamiltonianEval TonelliModel::hamiltonian(const RealVec& x, const RealVec& p) const {
  require_finite(x, p, "eval_hamiltonian");
  if (x.size() != dim_ || p.size() != dim_) throw DomainError("eval_hamiltonian: dimension mismatch");
  HamiltonianEval e;
  if (kind_ == ModelKind::mechanical1d) {
    double f, fx, fxx;
    F_->eval(x[0], f, fx, fxx);
    e.H = 0.5 * p[0] * p[0] - f;
    e.H_x = RealVec{-fx};
    e.H_p = p;
    return e;
  }
  e.H = H(x, p);
  e.H_x = H_x(x, p);
  e.H_p = H_p(x, p);
  return e;
}

LagrangianEval TonelliModel::lagrangian(const RealVec& x, const RealVec& xi) const {
  require_finite(x, xi, "eval_lagrangian");
  if (x.size() != dim_ || xi.size() != dim_) throw DomainError("eval_lagrangian: dimension mismatch");
  LagrangianEval e;
  switch (kind_) {
    case ModelKind::mechanical1d: {
      double f, fx, fxx;
      F_->eval(x[0], f, fx, fxx);
      e.L = 0.5 * xi[0] * xi[0] + f;
      e.L_x = RealVec{fx};
      e.L_xi = xi;
      return e;
    }
    case ModelKind::quadraticKam: {
      // L = xi.(c + Du) + |xi - w|^2 / 2
      const RealVec du = kam_->u.gradient(x);
      const RealVec d = xi - kam_->omega;
      e.L = xi.dot(kam_->offset + du) + 0.5 * d.norm2();
      const auto hess = kam_->u.hessian(x);
      e.L_x = RealVec(dim_);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) e.L_x[i] += hess[i * 2 + j] * xi[j];
      e.L_xi = kam_->offset + du + d;
      return e;
    }
    case ModelKind::genericTonelli:
      break;
  }

  // Damped Newton on H_p(x,p) = xi seeded at p = xi.
  RealVec p = xi;
  auto residual_of = [&](const RealVec& pp) { return H_p(x, pp) - xi; };
  RealVec r = residual_of(p);
  double rn = r.norm();
  for (int it = 0; it < 50 && rn >= 1e-10; ++it) {
    const double h = 1e-4;
    std::array<double, 4> J{0, 0, 0, 0};
    for (int j = 0; j < dim_; ++j) {
      RealVec pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      const RealVec gp = H_p(x, pp), gm = H_p(x, pm);
      for (int i = 0; i < dim_; ++i) J[i * 2 + j] = (gp[i] - gm[i]) / (2 * h);
    }
    RealVec step(dim_);
    if (dim_ == 1) {
      step[0] = r[0] / J[0];
    } else {
      const double det = J[0] * J[3] - J[1] * J[2];
      step[0] = (J[3] * r[0] - J[1] * r[1]) / det;
      step[1] = (-J[2] * r[0] + J[0] * r[1]) / det;
    }
    double lambda = 1.0;
    for (int k = 0; k < 30; ++k) {
      const RealVec trial = p - step * lambda;
      const RealVec rt = residual_of(trial);
      if (rt.norm() < rn || k == 29) {
        p = trial;
        r = rt;
        rn = rt.norm();
        break;
      }
      lambda *= 0.5;
    }
  }
  if (!(rn < 1e-10)) throw ConvergenceError("Legendre inversion did not converge", rn);
  e.L = xi.dot(p) - gen_->H(x, p);
  e.L_x = -H_x(x, p);
  e.L_xi = p;
  return e;
}

// ------------------------------------------------------------------ presets

TonelliModel make_quadratic_kam(const RealVec& omega, const RealVec& c, const TrigPolynomial& u,
                                std::string name) {
  return TonelliModel::quadratic_kam(omega, c, u, std::move(name));
}

TonelliModel make_preset(const std::string& name) {
  if (name == "F0") return TonelliModel::mechanical(TrigSeries{}, "F0");
  if (name == "F1") return TonelliModel::mechanical(preset_F1(), "F1");
  if (name == "F2") return TonelliModel::mechanical(preset_F2(), "F2");
  if (name == "kam1d") {
    TrigPolynomial u(1, {TrigTerm{0.05, {1}, true}});
    return make_quadratic_kam(RealVec{1.0}, RealVec{0.0}, u, "kam1d");
  }
  if (name == "kam2d") {
    const double golden = 0.5 * (1.0 + std::sqrt(5.0));
    TrigPolynomial u(2, {TrigTerm{0.02, {1, 0}, true}, TrigTerm{0.03, {0, 1}, false}});
    return make_quadratic_kam(RealVec{1.0, golden}, RealVec{0.0, 0.0}, u, "kam2d");
  }
  throw ConfigError("unknown model preset '" + name + "'");
}

// ---------------------------------------------------- mechanical1d analysis

namespace {
const TonelliModel& require_mechanical(const TonelliModel& m, const char* op) {
  if (m.kind() != ModelKind::mechanical1d)
    throw DomainError(std::string(op) + ": requires a mechanical1d model");
  return m;
}

double sqrt2F(const TrigSeries& F, double x) { return std::sqrt(2.0 * std::max(0.0, F.value(x))); }
}  // namespace

double separatrix_momentum(const TonelliModel& model, double x, Branch branch) {
  require_mechanical(model, "separatrix_momentum");
  const double s = sqrt2F(model.potential(), x);
  return branch == Branch::plus ? s : -s;
}

std::vector<double> potential_zeros(const TonelliModel& model) {
  require_mechanical(model, "potential_zeros");
  const TrigSeries& F = model.potential();
  constexpr int kScan = 4096;
  std::vector<double> fx(kScan);
  for (int i = 0; i < kScan; ++i) fx[i] = F.d1(static_cast<double>(i) / kScan);

  std::vector<double> zeros;
  auto add = [&](double z) {
    z = wrap01(z);
    if (F.value(z) >= 1e-10) return;
    for (double q : zeros)
      if (std::abs(circle_delta(q, z)) < 1e-8) return;
    zeros.push_back(z);
  };
  for (int i = 0; i < kScan; ++i) {
    const double a = static_cast<double>(i) / kScan, b = static_cast<double>(i + 1) / kScan;
    const double fa = fx[i], fb = fx[(i + 1) % kScan];
    if (fa == 0.0) {
      add(a);
      continue;
    }
    if (fa < 0.0 && fb > 0.0) {
      double lo = a, hi = b;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (F.d1(mid) < 0.0) lo = mid;
        else hi = mid;
      }
      add(0.5 * (lo + hi));
    }
  }
  std::sort(zeros.begin(), zeros.end());
  return zeros;
}

CriticalValues critical_c(const TonelliModel& model) {
  require_mechanical(model, "critical_c");
  const TrigSeries& F = model.potential();
  // split at zeros of F where sqrt(2F) has kinks
  std::vector<double> cuts;
  try {
    cuts = potential_zeros(model);
  } catch (const Error&) {
    cuts.clear();
  }
  std::vector<double> pts{0.0};
  for (double z : cuts)
    if (z > 0.0 && z < 1.0) pts.push_back(z);
  pts.push_back(1.0);
  double total = 0.0;
  const double tol = 1e-10 / static_cast<double>(pts.size());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += integrate([&](double x) { return sqrt2F(F, x); }, pts[i], pts[i + 1], tol);
  return CriticalValues{-total, total};
}

SegmentActions segment_actions(const TonelliModel& model) {
  require_mechanical(model, "segment_actions");
  const TrigSeries& F = model.potential();
  SegmentActions out;
  out.zeros = potential_zeros(model);
  if (out.zeros.empty()) throw ModelError("segment_actions: F has no zeros");
  for (double z : out.zeros)
    if (F.d2(z) <= 1e-6)
      throw ModelError("segment_actions: degenerate zero at x=" + std::to_string(z));
  const std::size_t I = out.zeros.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    const double a = out.zeros[i];
    const double b = i + 1 < I ? out.zeros[i + 1] : out.zeros[0] + 1.0;
    const double s = integrate([&](double x) { return sqrt2F(F, x); }, a, b, 1e-11);
    out.actions.push_back(s);
    sum += s;
  }
  out.c_plus = sum;
  out.c_minus = -sum;
  return out;
}

}  // namespace wkam
