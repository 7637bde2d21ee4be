#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kvh/operators.hpp"
#include "kvh/wavefunction.hpp"

using namespace kvh;

namespace {

PhaseGrid square_grid(double lo, double hi, int pts) {
  const double los[2] = {lo, lo}, his[2] = {hi, hi};
  const int counts[2] = {pts, pts};
  return PhaseGrid(1, std::span<const double>(los, 2), std::span<const double>(his, 2),
                   std::span<const int>(counts, 2));
}

InitialStateSpec gaussian_spec(double qc, double pc, double sigma) {
  InitialStateSpec s;
  s.center.n = 1;
  s.center.q[0] = qc;
  s.center.p[0] = pc;
  s.sigma = sigma;
  return s;
}

}  // namespace

TEST_CASE("gaussian state is normalized on the grid") {
  PhaseGrid g = square_grid(-8, 8, 128);
  auto chi = make_initial(gaussian_spec(0, 0, 1.0), g, 1.0);
  CHECK(std::abs(norm_sq(chi) - 1.0) < 1e-10);
}

TEST_CASE("center shift does not change the norm") {
  PhaseGrid g = square_grid(-9, 9, 161);  // dx = 0.1125; node-aligned shifts below
  const double dx = g.spacing(0);
  auto a = make_initial(gaussian_spec(0, 0, 1.0), g, 1.0);
  auto b = make_initial(gaussian_spec(8 * dx, -4 * dx, 1.0), g, 1.0);
  CHECK(std::abs(norm_sq(a) - norm_sq(b)) < 1e-12);
  CHECK(max_abs(a) == doctest::Approx(max_abs(b)).epsilon(1e-12));
}

TEST_CASE("a linear phase changes no magnitude") {
  PhaseGrid g = square_grid(-8, 8, 96);
  auto plain = make_initial(gaussian_spec(0.5, -0.25, 1.0), g, 1.0);
  auto spec = gaussian_spec(0.5, -0.25, 1.0);
  spec.phase_wavevector = {1.3, -0.7, 0, 0, 0, 0};
  auto phased = make_initial(spec, g, 1.0);
  double worst = 0;
  for (std::size_t i = 0; i < plain.size(); ++i)
    worst = std::max(worst, std::abs(std::abs(phased.values[i]) - std::abs(plain.values[i])));
  CHECK(worst < 1e-14);
}

TEST_CASE("insufficient 6 sigma coverage is rejected") {
  PhaseGrid g = square_grid(-8, 8, 64);
  CHECK_THROWS_AS((void)make_initial(gaussian_spec(0, 0, 2.0), g, 1.0), Error);
  try {
    (void)make_initial(gaussian_spec(4.0, 0, 1.0), g, 1.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::domain_too_small);
  }
}

TEST_CASE("inner products: hermitian symmetry and positivity") {
  PhaseGrid g = square_grid(-8, 8, 96);
  auto spec_a = gaussian_spec(0.5, 0, 0.9);
  spec_a.phase_wavevector = {0.8, 0, 0, 0, 0, 0};
  auto spec_b = gaussian_spec(-0.5, 0.25, 1.1);
  spec_b.phase_wavevector = {0, -1.2, 0, 0, 0, 0};
  auto a = make_initial(spec_a, g, 1.0);
  auto b = make_initial(spec_b, g, 1.0);

  const cplx aa = inner(a, a);
  CHECK(aa.real() >= 0.0);
  CHECK(std::abs(aa.imag()) <= 1e-14);
  CHECK(aa.real() == doctest::Approx(norm_sq(a)).epsilon(1e-13));

  const cplx ab = inner(a, b), ba = inner(b, a);
  CHECK(ab.real() == std::conj(ba).real());
  CHECK(ab.imag() == std::conj(ba).imag());
}

TEST_CASE("disjointly supported bumps are orthogonal") {
  PhaseGrid g = square_grid(-10, 10, 128);
  auto a = make_initial(gaussian_spec(-5.5, 0, 0.5), g, 1.0);
  auto b = make_initial(gaussian_spec(5.5, 0, 0.5), g, 1.0);
  CHECK(std::abs(inner(a, b)) < 1e-14);
}

TEST_CASE("inner rejects mismatched grids") {
  auto a = make_initial(gaussian_spec(0, 0, 1.0), square_grid(-8, 8, 96), 1.0);
  auto b = make_initial(gaussian_spec(0, 0, 1.0), square_grid(-8, 8, 97), 1.0);
  CHECK_THROWS_AS((void)inner(a, b), Error);
}

TEST_CASE("kvn density integrates to one, ignores global phase, vanishes for zero states") {
  PhaseGrid g = square_grid(-8, 8, 128);
  auto chi = make_initial(gaussian_spec(0.5, -1, 1.0), g, 1.0);
  auto rho = density_kvn(chi);
  CHECK(std::abs(integrate(g, std::span<const double>(rho)) - 1.0) < 1e-10);
  for (const double r : rho) CHECK(r >= 0.0);

  GridWaveFunction rotated = chi;
  const cplx phase = std::polar(1.0, 0.7);
  for (auto& v : rotated.values) v *= phase;
  auto rho2 = density_kvn(rotated);
  double worst = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) worst = std::max(worst, std::abs(rho[i] - rho2[i]));
  CHECK(worst < 1e-16);

  GridWaveFunction zero = chi;
  for (auto& v : zero.values) v = 0;
  for (const double r : density_kvn(zero)) CHECK(r == 0.0);
}

TEST_CASE("kvh density: closed form at the center, mass preserved, phase invariant") {
  PhaseGrid g = square_grid(-8, 8, 257);  // odd count puts a node at the origin
  auto chi = make_initial(gaussian_spec(0, 0, 1.0), g, 1.0);
  auto rho = density_kvh(chi);

  // rho_kvh = |chi|^2 (1 + n - |z|^2/(2 sigma^2)) for this state; at z = 0 that is 2 |chi(0)|^2
  const std::size_t center = (g.size() - 1) / 2;
  CHECK(g.point(center).q[0] == 0.0);
  CHECK(g.point(center).p[0] == 0.0);
  CHECK(rho[center] == doctest::Approx(2.0 * std::norm(chi.values[center])).epsilon(5e-5));

  CHECK(std::abs(integrate(g, std::span<const double>(rho)) - 1.0) < 1e-8);

  // closed form across the interior
  double worst = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.in_boundary_band(i, 4)) continue;
    const PhasePoint z = g.point(i);
    const double z2 = z.q[0] * z.q[0] + z.p[0] * z.p[0];
    const double want = std::norm(chi.values[i]) * (2.0 - 0.5 * z2);
    worst = std::max(worst, std::abs(rho[i] - want));
  }
  CHECK(worst < 5e-5);

  GridWaveFunction rotated = chi;
  const cplx phase = std::polar(1.0, -1.1);
  for (auto& v : rotated.values) v *= phase;
  auto rho2 = density_kvh(rotated);
  worst = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) worst = std::max(worst, std::abs(rho[i] - rho2[i]));
  CHECK(worst < 1e-14);
}

TEST_CASE("kvh density may be negative pointwise but keeps total mass") {
  PhaseGrid g = square_grid(-9, 9, 144);
  auto spec = gaussian_spec(0.4, -0.3, 1.0);
  spec.phase_wavevector = {0.9, 0.4, 0, 0, 0, 0};
  auto chi = make_initial(spec, g, 1.0);
  auto rho = density_kvh(chi);
  bool negative_somewhere = false;
  for (double r : rho)
    if (r < 0) negative_somewhere = true;
  CHECK(negative_somewhere);
  CHECK(std::abs(integrate(g, std::span<const double>(rho)) - 1.0) < 1e-8);
}

TEST_CASE("imaginary residue of the kvh divergence is (hbar/2) laplacian of |chi|^2") {
  PhaseGrid g = square_grid(-9.5, 9.5, 128);
  const double hbar = 0.7;
  auto spec = gaussian_spec(0.2, -0.4, 1.5);
  spec.phase_wavevector = {0.5, -0.3, 0, 0, 0, 0};
  auto chi = make_initial(spec, g, hbar);
  auto residue = density_kvh_imag_residue(chi);

  std::vector<double> sq(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) sq[i] = std::norm(chi.values[i]);
  std::vector<double> lap(g.size(), 0.0), d1(g.size()), d2(g.size());
  for (int a = 0; a < 2; ++a) {
    partial_derivative_into(std::span<const double>(sq), g, a, std::span<double>(d1));
    partial_derivative_into(std::span<const double>(d1), g, a, std::span<double>(d2));
    for (std::size_t i = 0; i < g.size(); ++i) lap[i] += d2[i];
  }
  double worst = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.in_boundary_band(i, 4)) continue;
    worst = std::max(worst, std::abs(residue[i] - 0.5 * hbar * lap[i]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("expectations reproduce gaussian moments") {
  PhaseGrid g = square_grid(-9, 9, 144);
  auto chi = make_initial(gaussian_spec(0.75, -0.4, 1.0), g, 1.0);

  CHECK(std::abs(expectation(chi, chi) - cplx(1, 0)) < 1e-10);

  const cplx q_mean = expectation(apply_position(0, chi), chi);
  const cplx p_mean = expectation(apply_position(1, chi), chi);
  CHECK(std::abs(q_mean - cplx(0.75, 0)) < 1e-8);
  CHECK(std::abs(p_mean - cplx(-0.4, 0)) < 1e-8);

  // Lambda on a real gaussian: purely imaginary integrand, zero expectation
  const cplx lam = expectation(apply_momentum(0, chi), chi);
  CHECK(std::abs(lam) < 1e-8);
}
