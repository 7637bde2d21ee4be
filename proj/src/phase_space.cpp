#include "kvh/phase_space.hpp"

#include <cmath>

#include "kvh/parallel.hpp"

namespace kvh {

bool PhasePoint::finite() const {
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(q[i]) || !std::isfinite(p[i])) return false;
  return true;
}

PhasePoint make_point(int n, std::span<const double> q, std::span<const double> p) {
  if (n < 1 || n > 3) fail(ErrorCode::unsupported_dimension, "phase point dimension must be 1, 2 or 3");
  if (q.size() != static_cast<std::size_t>(n) || p.size() != static_cast<std::size_t>(n))
    fail(ErrorCode::invalid_argument, "q and p must both have length n");
  PhasePoint z;
  z.n = n;
  for (int i = 0; i < n; ++i) {
    z.q[i] = q[i];
    z.p[i] = p[i];
  }
  if (!z.finite()) fail(ErrorCode::invalid_argument, "phase point has non-finite components");
  return z;
}

PhaseGrid::PhaseGrid(int n, std::span<const double> lo, std::span<const double> hi, std::span<const int> counts) {
  if (n < 1 || n > 3) fail(ErrorCode::unsupported_dimension, "grid dimension must be 1, 2 or 3");
  const std::size_t axes = 2 * static_cast<std::size_t>(n);
  if (lo.size() != axes || hi.size() != axes || counts.size() != axes)
    fail(ErrorCode::invalid_argument, "grid needs 2n bounds and 2n point counts");
  n_ = n;
  total_ = 1;
  for (std::size_t a = 0; a < axes; ++a) {
    if (!(lo[a] < hi[a])) fail(ErrorCode::invalid_argument, "grid bounds must satisfy lo < hi on every axis");
    if (counts[a] < 2) fail(ErrorCode::invalid_argument, "grid needs at least 2 points per axis");
    lo_[a] = lo[a];
    hi_[a] = hi[a];
    counts_[a] = counts[a];
    dx_[a] = (hi[a] - lo[a]) / (counts[a] - 1);
    total_ *= static_cast<std::size_t>(counts[a]);
  }
  std::size_t s = 1;
  for (int a = static_cast<int>(axes) - 1; a >= 0; --a) {
    strides_[a] = s;
    s *= static_cast<std::size_t>(counts_[a]);
  }
}

double PhaseGrid::min_spacing() const {
  double m = dx_[0];
  for (int a = 1; a < axes(); ++a) m = std::min(m, dx_[a]);
  return m;
}

double PhaseGrid::volume() const {
  double v = 1.0;
  for (int a = 0; a < axes(); ++a) v *= hi_[a] - lo_[a];
  return v;
}

void PhaseGrid::decompose(std::size_t flat, std::span<int> idx) const {
  for (int a = axes() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(counts_[a]));
    flat /= static_cast<std::size_t>(counts_[a]);
  }
}

PhasePoint PhaseGrid::point(std::size_t flat) const {
  std::array<int, 6> idx;
  decompose(flat, std::span<int>(idx.data(), axes()));
  PhasePoint z;
  z.n = n_;
  for (int a = 0; a < axes(); ++a) z.set_coord(a, coord(a, idx[a]));
  return z;
}

double PhaseGrid::weight(std::size_t flat) const {
  std::array<int, 6> idx;
  decompose(flat, std::span<int>(idx.data(), axes()));
  double w = 1.0;
  for (int a = 0; a < axes(); ++a) w *= axis_weight(a, idx[a]);
  return w;
}

bool PhaseGrid::in_boundary_band(std::size_t flat, int band) const {
  std::array<int, 6> idx;
  decompose(flat, std::span<int>(idx.data(), axes()));
  for (int a = 0; a < axes(); ++a)
    if (idx[a] < band || idx[a] >= counts_[a] - band) return true;
  return false;
}

bool PhaseGrid::same_layout(const PhaseGrid& other) const {
  if (n_ != other.n_ || total_ != other.total_) return false;
  for (int a = 0; a < axes(); ++a)
    if (lo_[a] != other.lo_[a] || hi_[a] != other.hi_[a] || counts_[a] != other.counts_[a]) return false;
  return true;
}

std::vector<PhasePoint> grid_points(const PhaseGrid& grid) {
  std::vector<PhasePoint> pts;
  pts.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) pts.push_back(grid.point(i));
  return pts;
}

namespace {

// Row-by-row quadrature: inner axis handled with a per-point weight table,
// outer rows each reduce to one partial, partials reduced pairwise. The
// reduction shape depends only on the grid, never on worker count.
template <class T>
T integrate_impl(const PhaseGrid& grid, std::span<const T> samples) {
  if (samples.size() != grid.size()) fail(ErrorCode::invalid_argument, "sample count does not match grid size");
  const int axes = grid.axes();
  const int inner_axis = axes - 1;
  const std::size_t inner = static_cast<std::size_t>(grid.count(inner_axis));
  const std::size_t rows = grid.size() / inner;
  std::vector<double> wi(inner);
  for (std::size_t i = 0; i < inner; ++i) wi[i] = grid.axis_weight(inner_axis, static_cast<int>(i));

  std::vector<T> row_sums(rows);
  std::vector<T> buf(inner);
  std::array<int, 6> idx;
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t rest = r;
    double wrow = 1.0;
    for (int a = axes - 2; a >= 0; --a) {
      idx[a] = static_cast<int>(rest % static_cast<std::size_t>(grid.count(a)));
      rest /= static_cast<std::size_t>(grid.count(a));
      wrow *= grid.axis_weight(a, idx[a]);
    }
    const T* f = samples.data() + r * inner;
    for (std::size_t i = 0; i < inner; ++i) buf[i] = f[i] * wi[i];
    row_sums[r] = pairwise_sum(std::span<const T>(buf.data(), inner)) * wrow;
  }
  return pairwise_sum(std::span<const T>(row_sums.data(), rows));
}

template <class T>
void derivative_impl(std::span<const T> field, const PhaseGrid& grid, int axis, std::span<T> out) {
  if (axis < 0 || axis >= grid.axes()) fail(ErrorCode::invalid_argument, "derivative axis out of range");
  if (field.size() != grid.size() || out.size() != grid.size())
    fail(ErrorCode::invalid_argument, "field size does not match grid size");
  const std::size_t N = static_cast<std::size_t>(grid.count(axis));
  const std::size_t suffix = grid.stride(axis);
  const std::size_t prefix = grid.size() / (N * suffix);
  const double h = grid.spacing(axis);
  const double c1 = 8.0 / (12.0 * h);
  const double c2 = 1.0 / (12.0 * h);
  const T* in = field.data();
  T* o = out.data();

  parallel_for(prefix, [&](std::size_t pb, std::size_t pe) {
    for (std::size_t ip = pb; ip < pe; ++ip) {
      const std::size_t base = ip * N * suffix;
      for (std::size_t j = 0; j < N; ++j) {
        const T* fp1 = j + 1 < N ? in + base + (j + 1) * suffix : nullptr;
        const T* fm1 = j >= 1 ? in + base + (j - 1) * suffix : nullptr;
        const T* fp2 = j + 2 < N ? in + base + (j + 2) * suffix : nullptr;
        const T* fm2 = j >= 2 ? in + base + (j - 2) * suffix : nullptr;
        T* dst = o + base + j * suffix;
        if (fp1 && fm1 && fp2 && fm2) {
          for (std::size_t k = 0; k < suffix; ++k)
            dst[k] = c1 * (fp1[k] - fm1[k]) - c2 * (fp2[k] - fm2[k]);
        } else {
          const T zero{};
          for (std::size_t k = 0; k < suffix; ++k) {
            const T a1 = fp1 ? fp1[k] : zero;
            const T b1 = fm1 ? fm1[k] : zero;
            const T a2 = fp2 ? fp2[k] : zero;
            const T b2 = fm2 ? fm2[k] : zero;
            dst[k] = c1 * (a1 - b1) - c2 * (a2 - b2);
          }
        }
      }
    }
  });
}

}  // namespace

cplx integrate(const PhaseGrid& grid, std::span<const cplx> samples) { return integrate_impl(grid, samples); }
double integrate(const PhaseGrid& grid, std::span<const double> samples) { return integrate_impl(grid, samples); }

double integrate_norm_sq(const PhaseGrid& grid, std::span<const cplx> samples) {
  if (samples.size() != grid.size()) fail(ErrorCode::invalid_argument, "sample count does not match grid size");
  std::vector<double> sq(samples.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(samples[i]);
  return integrate_impl(grid, std::span<const double>(sq));
}

void partial_derivative_into(std::span<const cplx> field, const PhaseGrid& grid, int axis, std::span<cplx> out) {
  derivative_impl(field, grid, axis, out);
}

std::vector<cplx> partial_derivative(std::span<const cplx> field, const PhaseGrid& grid, int axis) {
  std::vector<cplx> out(field.size());
  partial_derivative_into(field, grid, axis, std::span<cplx>(out));
  return out;
}

void partial_derivative_into(std::span<const double> field, const PhaseGrid& grid, int axis, std::span<double> out) {
  derivative_impl(field, grid, axis, out);
}

}  // namespace kvh
