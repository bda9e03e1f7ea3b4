#pragma once

// Uniform periodic grids on T^n (n = 1, 2) and node-sampled scalar fields
// with periodic multilinear interpolation.

#include <array>
#include <string>
#include <vector>

#include "wkam/core.hpp"

namespace wkam {

class PeriodicGrid {
 public:
  PeriodicGrid() = default;
  /// Square grid with N nodes per axis.
  PeriodicGrid(int dim, int N);
  PeriodicGrid(int dim, std::array<int, kMaxDim> counts);

  int dim() const { return dim_; }
  int count(int axis) const { return N_[axis]; }
  const std::array<int, kMaxDim>& counts() const { return N_; }
  double spacing(int axis) const { return 1.0 / N_[axis]; }
  double max_spacing() const;
  std::size_t size() const;

  /// Row-major flat index; the last axis varies fastest.
  std::size_t flat(int i0, int i1 = 0) const {
    return dim_ == 1 ? static_cast<std::size_t>(i0)
                     : static_cast<std::size_t>(i0) * N_[1] + static_cast<std::size_t>(i1);
  }
  std::array<int, kMaxDim> unflat(std::size_t k) const;
  RealVec node(std::size_t k) const;

  int wrap_index(int axis, long long i) const;

  bool operator==(const PeriodicGrid& o) const { return dim_ == o.dim_ && N_ == o.N_; }

 private:
  int dim_ = 1;
  std::array<int, kMaxDim> N_{16, 1};
};

/// Interpolation stencil: up to four nodes with weights summing to one.
struct Stencil {
  std::array<std::size_t, 4> node{0, 0, 0, 0};
  std::array<double, 4> weight{0, 0, 0, 0};
  int count = 0;
};

/// Periodic linear (1-D) or bilinear (2-D) interpolation stencil at a
/// lifted point.
Stencil interpolation_stencil(const PeriodicGrid& grid, const RealVec& x);

struct FieldMeta {
  std::string model;
  RealVec c{0.0};
  double eps = 0.0;
  double h = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(PeriodicGrid grid, double fill = 0.0);
  ScalarField(PeriodicGrid grid, std::vector<double> values);

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  FieldMeta meta;

  double interpolate(const RealVec& x) const;
  double interpolate(const Stencil& s) const;
  double sup_norm() const;
  double mean() const;
  double min() const;
  double max() const;
  bool all_finite() const;

  /// Largest absolute difference quotient between neighbouring nodes.
  double lipschitz() const;

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

/// ||a - b||_inf on a shared grid.
double sup_distance(const ScalarField& a, const ScalarField& b);

}  // namespace wkam
