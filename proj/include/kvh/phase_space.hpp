#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "kvh/errors.hpp"

namespace kvh {

using cplx = std::complex<double>;

// A point z = (q, p) in 2n-dimensional phase space, n in {1, 2, 3}.
struct PhasePoint {
  int n = 1;
  std::array<double, 3> q{};
  std::array<double, 3> p{};

  double coord(int axis) const { return axis < n ? q[axis] : p[axis - n]; }
  void set_coord(int axis, double v) {
    if (axis < n)
      q[axis] = v;
    else
      p[axis - n] = v;
  }
  bool finite() const;
};

PhasePoint make_point(int n, std::span<const double> q, std::span<const double> p);

// Rectangular grid over [lo, hi] per axis with endpoints included. Axes are
// ordered q1..qn, p1..pn. Flat indices are lexicographic with axis 0 most
// significant. Quadrature is the trapezoid rule: interior weight equals the
// product of spacings, endpoint axis weights are halved, so the total weight
// equals the domain volume.
class PhaseGrid {
public:
  PhaseGrid() = default;
  PhaseGrid(int n, std::span<const double> lo, std::span<const double> hi, std::span<const int> counts);

  int dim() const { return n_; }
  int axes() const { return 2 * n_; }
  std::size_t size() const { return total_; }
  int count(int axis) const { return counts_[axis]; }
  double lower(int axis) const { return lo_[axis]; }
  double upper(int axis) const { return hi_[axis]; }
  double spacing(int axis) const { return dx_[axis]; }
  std::size_t stride(int axis) const { return strides_[axis]; }
  double coord(int axis, int i) const { return lo_[axis] + dx_[axis] * i; }
  double min_spacing() const;
  double volume() const;

  double axis_weight(int axis, int i) const {
    return (i == 0 || i == counts_[axis] - 1) ? 0.5 * dx_[axis] : dx_[axis];
  }

  void decompose(std::size_t flat, std::span<int> idx) const;
  PhasePoint point(std::size_t flat) const;
  double weight(std::size_t flat) const;

  // True when the index lies within `band` cells of any axis boundary.
  bool in_boundary_band(std::size_t flat, int band = 2) const;

  bool same_layout(const PhaseGrid& other) const;

private:
  int n_ = 0;
  std::size_t total_ = 0;
  std::array<double, 6> lo_{}, hi_{}, dx_{};
  std::array<int, 6> counts_{};
  std::array<std::size_t, 6> strides_{};
};

std::vector<PhasePoint> grid_points(const PhaseGrid& grid);

// Trapezoid quadrature of a sampled field, deterministic pairwise reduction.
cplx integrate(const PhaseGrid& grid, std::span<const cplx> samples);
double integrate(const PhaseGrid& grid, std::span<const double> samples);

// Quadrature of |f|^2, same reduction shape as integrate.
double integrate_norm_sq(const PhaseGrid& grid, std::span<const cplx> samples);

// 4th-order central difference along one axis; values outside the domain are
// taken as zero (decay boundary condition).
void partial_derivative_into(std::span<const cplx> field, const PhaseGrid& grid, int axis, std::span<cplx> out);
std::vector<cplx> partial_derivative(std::span<const cplx> field, const PhaseGrid& grid, int axis);
void partial_derivative_into(std::span<const double> field, const PhaseGrid& grid, int axis, std::span<double> out);

}  // namespace kvh
