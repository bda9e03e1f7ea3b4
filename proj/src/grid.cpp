#include "wkam/grid.hpp"

#include <algorithm>
#include <numeric>

namespace wkam {

PeriodicGrid::PeriodicGrid(int dim, int N) : PeriodicGrid(dim, std::array<int, kMaxDim>{N, N}) {}

PeriodicGrid::PeriodicGrid(int dim, std::array<int, kMaxDim> counts) : dim_(dim), N_(counts) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("PeriodicGrid: dimension must be 1 or 2");
  for (int a = 0; a < dim; ++a)
    if (N_[a] < 16) throw DomainError("PeriodicGrid: at least 16 nodes per axis required");
  if (dim == 1) N_[1] = 1;
}

double PeriodicGrid::max_spacing() const {
  double m = 0.0;
  for (int a = 0; a < dim_; ++a) m = std::max(m, spacing(a));
  return m;
}

std::size_t PeriodicGrid::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dim_; ++a) s *= static_cast<std::size_t>(N_[a]);
  return s;
}

std::array<int, kMaxDim> PeriodicGrid::unflat(std::size_t k) const {
  if (dim_ == 1) return {static_cast<int>(k), 0};
  return {static_cast<int>(k / N_[1]), static_cast<int>(k % N_[1])};
}

RealVec PeriodicGrid::node(std::size_t k) const {
  const auto ij = unflat(k);
  RealVec x(dim_);
  for (int a = 0; a < dim_; ++a) x[a] = ij[a] * spacing(a);
  return x;
}

int PeriodicGrid::wrap_index(int axis, long long i) const {
  const long long n = N_[axis];
  long long r = i % n;
  if (r < 0) r += n;
  return static_cast<int>(r);
}

Stencil interpolation_stencil(const PeriodicGrid& grid, const RealVec& x) {
  Stencil s;
  if (grid.dim() == 1) {
    const double t = x[0] * grid.count(0);
    const double fl = std::floor(t);
    const double f = t - fl;
    const long long i = static_cast<long long>(fl);
    s.count = 2;
    s.node[0] = grid.wrap_index(0, i);
    s.node[1] = grid.wrap_index(0, i + 1);
    s.weight[0] = 1.0 - f;
    s.weight[1] = f;
    return s;
  }
  const double t0 = x[0] * grid.count(0), t1 = x[1] * grid.count(1);
  const double fl0 = std::floor(t0), fl1 = std::floor(t1);
  const double f0 = t0 - fl0, f1 = t1 - fl1;
  const long long i0 = static_cast<long long>(fl0), i1 = static_cast<long long>(fl1);
  const int a0 = grid.wrap_index(0, i0), b0 = grid.wrap_index(0, i0 + 1);
  const int a1 = grid.wrap_index(1, i1), b1 = grid.wrap_index(1, i1 + 1);
  s.count = 4;
  s.node = {grid.flat(a0, a1), grid.flat(a0, b1), grid.flat(b0, a1), grid.flat(b0, b1)};
  s.weight = {(1 - f0) * (1 - f1), (1 - f0) * f1, f0 * (1 - f1), f0 * f1};
  return s;
}

ScalarField::ScalarField(PeriodicGrid grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(PeriodicGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("ScalarField: value count does not match grid");
}

double ScalarField::interpolate(const Stencil& s) const {
  double v = 0.0;
  for (int k = 0; k < s.count; ++k) v += s.weight[k] * values_[s.node[k]];
  return v;
}

double ScalarField::interpolate(const RealVec& x) const {
  return interpolate(interpolation_stencil(grid_, x));
}

double ScalarField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::mean() const {
  if (values_.empty()) return 0.0;
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::lipschitz() const {
  double L = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const auto ij = grid_.unflat(k);
    for (int a = 0; a < grid_.dim(); ++a) {
      auto nb = ij;
      nb[a] = grid_.wrap_index(a, ij[a] + 1LL);
      const double d = std::abs(values_[grid_.flat(nb[0], nb[1])] - values_[k]) / grid_.spacing(a);
      L = std::max(L, d);
    }
  }
  return L;
}

double sup_distance(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw DomainError("sup_distance: grids differ");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace wkam
