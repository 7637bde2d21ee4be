#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kvh/parallel.hpp"
#include "kvh/phase_space.hpp"

using namespace kvh;

namespace {

PhaseGrid square_grid(double lo, double hi, int pts) {
  const double los[2] = {lo, lo}, his[2] = {hi, hi};
  const int counts[2] = {pts, pts};
  return PhaseGrid(1, std::span<const double>(los, 2), std::span<const double>(his, 2),
                   std::span<const int>(counts, 2));
}

// chi(q,p) = exp(-(q^2+p^2)/2), sampled
std::vector<cplx> gaussian_field(const PhaseGrid& g) {
  std::vector<cplx> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PhasePoint z = g.point(i);
    f[i] = std::exp(-0.5 * (z.q[0] * z.q[0] + z.p[0] * z.p[0]));
  }
  return f;
}

double interior_max_error(const PhaseGrid& g, std::span<const cplx> got, std::span<const cplx> want, int band) {
  double m = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.in_boundary_band(i, band)) continue;
    m = std::max(m, std::abs(got[i] - want[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("grid points are lexicographic, q block first") {
  PhaseGrid g = square_grid(0.0, 1.0, 2);
  auto pts = grid_points(g);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].q[0] == 0.0);
  CHECK(pts[0].p[0] == 0.0);
  CHECK(pts[1].q[0] == 0.0);
  CHECK(pts[1].p[0] == 1.0);
  CHECK(pts[2].q[0] == 1.0);
  CHECK(pts[2].p[0] == 0.0);
  CHECK(pts[3].q[0] == 1.0);
  CHECK(pts[3].p[0] == 1.0);
}

TEST_CASE("grid sizes follow the product rule") {
  CHECK(square_grid(-1, 1, 8).size() == 64);
  const double lo[6] = {-1, -1, -1, -1, -1, -1}, hi[6] = {1, 1, 1, 1, 1, 1};
  const int counts[6] = {16, 16, 16, 16, 16, 16};
  PhaseGrid g3(3, std::span<const double>(lo, 6), std::span<const double>(hi, 6), std::span<const int>(counts, 6));
  CHECK(g3.size() == 16777216);  // 16^6
}

TEST_CASE("total quadrature weight equals domain volume") {
  PhaseGrid g = square_grid(0.0, 1.0, 2);
  std::vector<cplx> ones(g.size(), 1.0);
  CHECK(integrate(g, std::span<const cplx>(ones)).real() == doctest::Approx(1.0).epsilon(1e-14));

  PhaseGrid g2 = square_grid(-2.0, 3.0, 17);
  std::vector<double> ones2(g2.size(), 1.0);
  CHECK(integrate(g2, std::span<const double>(ones2)) == doctest::Approx(25.0).epsilon(1e-13));
}

TEST_CASE("odd function integrates to zero on a symmetric grid") {
  PhaseGrid g = square_grid(-4.0, 4.0, 33);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PhasePoint z = g.point(i);
    f[i] = z.q[0] * std::exp(-z.p[0] * z.p[0]);
  }
  CHECK(std::abs(integrate(g, std::span<const double>(f))) < 1e-12);
}

TEST_CASE("normalized gaussian integrates to one") {
  PhaseGrid g = square_grid(-8.0, 8.0, 128);
  auto raw = gaussian_field(g);  // exp(-|z|^2/2), the density shape for sigma = 1
  const double n2 = 1.0 / (2.0 * std::numbers::pi);  // closed-form normalization in 2d
  std::vector<double> density(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) density[i] = n2 * raw[i].real();
  CHECK(integrate(g, std::span<const double>(density)) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("integrate rejects length mismatch") {
  PhaseGrid g = square_grid(0, 1, 8);
  std::vector<cplx> f(g.size() - 1, 1.0);
  CHECK_THROWS_AS((void)integrate(g, std::span<const cplx>(f)), Error);
}

TEST_CASE("derivative of a constant vanishes") {
  PhaseGrid g = square_grid(-1, 1, 16);
  std::vector<cplx> f(g.size(), cplx(2.5, -1.0));
  for (int axis = 0; axis < 2; ++axis) {
    auto d = partial_derivative(std::span<const cplx>(f), g, axis);
    double m = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!g.in_boundary_band(i, 2)) m = std::max(m, std::abs(d[i]));
    CHECK(m == 0.0);
  }
}

TEST_CASE("derivative of the coordinate is one in the interior") {
  PhaseGrid g = square_grid(-1, 1, 16);
  for (int axis = 0; axis < 2; ++axis) {
    std::vector<cplx> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = g.point(i).coord(axis);
    auto d = partial_derivative(std::span<const cplx>(f), g, axis);
    std::vector<cplx> want(g.size(), 1.0);
    CHECK(interior_max_error(g, d, want, 2) < 1e-10);
  }
}

TEST_CASE("derivative matches the analytic gaussian derivative") {
  // sigma = 1: the truncation bound is dx^4 |d^5 f|/30 ~ 5e-5 at this spacing
  PhaseGrid g = square_grid(-8, 8, 128);
  auto f = gaussian_field(g);
  auto d = partial_derivative(std::span<const cplx>(f), g, 0);
  std::vector<cplx> want(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) want[i] = -g.point(i).q[0] * f[i];
  CHECK(interior_max_error(g, d, want, 2) < 1e-4);

  // a wider gaussian is resolved to 1e-6 at the same spacing
  const double s2 = 2.5 * 2.5;
  std::vector<cplx> wide(g.size()), dwide_want(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PhasePoint z = g.point(i);
    wide[i] = std::exp(-0.5 * (z.q[0] * z.q[0] + z.p[0] * z.p[0]) / s2);
    dwide_want[i] = -(z.q[0] / s2) * wide[i];
  }
  auto dwide = partial_derivative(std::span<const cplx>(wide), g, 0);
  CHECK(interior_max_error(g, dwide, dwide_want, 2) < 1e-6);
}

TEST_CASE("derivative axis bounds are checked") {
  PhaseGrid g = square_grid(-1, 1, 8);
  std::vector<cplx> f(g.size(), 1.0);
  CHECK_THROWS_AS((void)partial_derivative(std::span<const cplx>(f), g, 2), Error);
}

TEST_CASE("derivative is linear") {
  PhaseGrid g = square_grid(-6, 6, 48);
  std::vector<cplx> phi(g.size()), psi(g.size()), mix(g.size());
  const cplx a(1.7, -0.3), b(-0.4, 2.2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PhasePoint z = g.point(i);
    phi[i] = std::exp(-0.5 * (z.q[0] * z.q[0] + z.p[0] * z.p[0]));
    psi[i] = std::exp(-0.7 * (z.q[0] - 0.5) * (z.q[0] - 0.5) - 0.6 * z.p[0] * z.p[0]) * cplx(0.2, 1.0);
    mix[i] = a * phi[i] + b * psi[i];
  }
  auto d_mix = partial_derivative(std::span<const cplx>(mix), g, 0);
  auto d_phi = partial_derivative(std::span<const cplx>(phi), g, 0);
  auto d_psi = partial_derivative(std::span<const cplx>(psi), g, 0);
  double m = 0, scale = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    m = std::max(m, std::abs(d_mix[i] - (a * d_phi[i] + b * d_psi[i])));
    scale = std::max(scale, std::abs(d_mix[i]));
  }
  CHECK(m / scale < 1e-13);
}

TEST_CASE("discrete integration by parts holds for decaying fields") {
  PhaseGrid g = square_grid(-8, 8, 96);
  std::vector<cplx> phi(g.size()), psi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PhasePoint z = g.point(i);
    phi[i] = std::exp(-0.5 * (z.q[0] * z.q[0] + z.p[0] * z.p[0]));
    psi[i] = std::exp(-0.5 * ((z.q[0] - 0.4) * (z.q[0] - 0.4) + z.p[0] * z.p[0]));
  }
  for (int axis = 0; axis < 2; ++axis) {
    auto d_phi = partial_derivative(std::span<const cplx>(phi), g, axis);
    auto d_psi = partial_derivative(std::span<const cplx>(psi), g, axis);
    std::vector<cplx> t1(g.size()), t2(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      t1[i] = d_phi[i] * psi[i];
      t2[i] = phi[i] * d_psi[i];
    }
    const cplx total = integrate(g, std::span<const cplx>(t1)) + integrate(g, std::span<const cplx>(t2));
    CHECK(std::abs(total) < 1e-10);
  }
}

TEST_CASE("mixed partials commute") {
  PhaseGrid g = square_grid(-8, 8, 128);
  auto f = gaussian_field(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PhasePoint z = g.point(i);
    f[i] *= cplx(std::cos(0.8 * z.q[0]), std::sin(0.6 * z.p[0]));
  }
  auto dq = partial_derivative(std::span<const cplx>(f), g, 0);
  auto dqp = partial_derivative(std::span<const cplx>(dq), g, 1);
  auto dp = partial_derivative(std::span<const cplx>(f), g, 1);
  auto dpq = partial_derivative(std::span<const cplx>(dp), g, 0);
  double m = 0;
  for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, std::abs(dqp[i] - dpq[i]));
  CHECK(m < 1e-8);
}

TEST_CASE("derivative refinement order is at least 3.5") {
  double errs[2];
  int idx = 0;
  for (int pts : {64, 128}) {
    PhaseGrid g = square_grid(-8, 8, pts);
    auto f = gaussian_field(g);
    auto d = partial_derivative(std::span<const cplx>(f), g, 0);
    std::vector<cplx> want(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) want[i] = -g.point(i).q[0] * f[i];
    errs[idx++] = interior_max_error(g, d, want, 2);
  }
  const double order = std::log2(errs[0] / errs[1]);
  CHECK(order >= 3.5);
}

TEST_CASE("results are identical across worker counts") {
  PhaseGrid g = square_grid(-8, 8, 128);
  auto f = gaussian_field(g);
  set_thread_count(1);
  auto d1 = partial_derivative(std::span<const cplx>(f), g, 1);
  const cplx s1 = integrate(g, std::span<const cplx>(f));
  set_thread_count(4);
  auto d4 = partial_derivative(std::span<const cplx>(f), g, 1);
  const cplx s4 = integrate(g, std::span<const cplx>(f));
  set_thread_count(0);
  CHECK(s1.real() == s4.real());
  CHECK(s1.imag() == s4.imag());
  bool same = true;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (d1[i] != d4[i]) same = false;
  CHECK(same);
}
