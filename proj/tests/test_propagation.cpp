#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kvh/propagation.hpp"

using namespace kvh;

namespace {

PhaseGrid square_grid(double lo, double hi, int pts) {
  const double los[2] = {lo, lo}, his[2] = {hi, hi};
  const int counts[2] = {pts, pts};
  return PhaseGrid(1, std::span<const double>(los, 2), std::span<const double>(his, 2),
                   std::span<const int>(counts, 2));
}

PhasePoint pt1(double q, double p) {
  PhasePoint z;
  z.n = 1;
  z.q[0] = q;
  z.p[0] = p;
  return z;
}

GridWaveFunction harmonic_state(const PhaseGrid& g, double sigma, double q0, double p0, double kq, double kp) {
  InitialStateSpec spec;
  spec.center = pt1(q0, p0);
  spec.sigma = sigma;
  spec.phase_wavevector = {kq, kp, 0, 0, 0, 0};
  return make_initial(spec, g, 1.0);
}

double l2_diff(const PhaseGrid& g, std::span<const cplx> a, std::span<const cplx> b) {
  std::vector<double> sq(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) sq[i] = std::norm(a[i] - b[i]);
  return std::sqrt(integrate(g, std::span<const double>(sq)));
}

}  // namespace

TEST_CASE("rk4 step: zero hamiltonian leaves the state untouched") {
  const double zero1[1] = {0.0};
  auto model = HamiltonianModel::quadratic(std::span<const double>(zero1, 1), std::span<const double>(zero1, 1));
  PhaseGrid g = square_grid(-8, 8, 64);
  auto chi = harmonic_state(g, 0.8, 0.2, 0, 0.5, 0);
  auto out = step_rk4(chi, model, Formalism::kvh, 1e-3);
  double worst = 0;
  for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(out.values[i] - chi.values[i]));
  CHECK(worst == 0.0);
}

TEST_CASE("rk4 step changes the norm by at most 1e-12 relative") {
  auto model = HamiltonianModel::harmonic(1.0);
  PhaseGrid g = square_grid(-10, 10, 128);
  auto chi = harmonic_state(g, 1.0, 0.3, 0, 1.0, 0);
  const double before = norm_sq(chi);
  auto out = step_rk4(chi, model, Formalism::kvh, 1e-3);
  const double after = norm_sq(out);
  CHECK(std::abs(after - before) / before <= 1e-12);
}

TEST_CASE("cfl violations are rejected with the bound in the message") {
  auto model = HamiltonianModel::harmonic(1.0);
  PhaseGrid g = square_grid(-10, 10, 128);
  auto chi = harmonic_state(g, 1.0, 0.0, 0, 0.5, 0);
  PropagationConfig cfg;
  cfg.dt = 1.0;
  cfg.steps = 1;
  try {
    (void)propagate_grid(chi, model, cfg);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::cfl_violation);
    CHECK(std::string(e.what()).find("max |X_H|") != std::string::npos);
  }
}

TEST_CASE("propagation rejects states violating the decay condition") {
  auto model = HamiltonianModel::harmonic(1.0);
  PhaseGrid g = square_grid(-8, 8, 128);
  auto chi = harmonic_state(g, 1.2, 0.5, 0, 0, 0);  // boundary band ~ 2e-7 relative
  PropagationConfig cfg;
  cfg.dt = 1e-3;
  cfg.steps = 1;
  CHECK_THROWS_AS((void)propagate_grid(chi, model, cfg), Error);
  cfg.decay_tolerance = 1e-4;
  CHECK_NOTHROW((void)propagate_grid(chi, model, cfg));
}

TEST_CASE("harmonic propagation matches the rigidly rotated closed form") {
  // H = p^2 + k q^2/2 with k = 2: the flow is a rigid rotation at omega = 2,
  // so chi_t(z) = chi_0(R(-2t) z) in closed form
  auto model = HamiltonianModel::harmonic(2.0);
  PhaseGrid g = square_grid(-10, 10, 256);
  const double sigma = 0.9, q0 = 1.2, kq = 0.8, kp = 0.4;
  auto chi = harmonic_state(g, sigma, q0, 0, kq, kp);

  PropagationConfig cfg;
  cfg.dt = 1e-3;
  cfg.steps = 500;
  cfg.diagnostics_every = 100;
  auto [fin, series] = propagate_grid(chi, model, cfg);

  // rebuild the rotated state through the same normalization path
  const double ang = -2.0 * 0.5, c = std::cos(ang), sn = std::sin(ang);
  std::vector<cplx> want(g.size());
  const double inv = 1.0 / (4.0 * sigma * sigma);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PhasePoint z = g.point(i);
    const double qr = c * z.q[0] + sn * z.p[0];
    const double pr = -sn * z.q[0] + c * z.p[0];
    const double d2 = (qr - q0) * (qr - q0) + pr * pr;
    want[i] = std::exp(-d2 * inv) * std::polar(1.0, kq * qr + kp * pr);
  }
  // scale to the grid normalization of chi0
  double raw_norm = integrate_norm_sq(g, std::span<const cplx>(want));
  const double scale = 1.0 / std::sqrt(raw_norm);
  for (auto& v : want) v *= scale;

  CHECK(l2_diff(g, fin.values, want) <= 1e-4);

  const double n0 = series.front().norm, e0 = series.front().energy;
  REQUIRE(std::abs(e0) > 0.1);  // the phase-carrying state has nonzero KvH energy
  for (const auto& rec : series) {
    CHECK(std::abs(rec.norm - n0) / n0 <= 1e-8);
    CHECK(std::abs(rec.energy - e0) / std::abs(e0) <= 1e-6);
  }
}

TEST_CASE("propagation composes as a semigroup") {
  auto model = HamiltonianModel::harmonic(0.5);
  PhaseGrid g = square_grid(-10, 10, 128);
  auto chi = harmonic_state(g, 0.9, 0.3, 0, 0.8, 0);
  PropagationConfig cfg;
  cfg.dt = 1e-3;
  cfg.steps = 300;
  cfg.diagnostics_every = 300;
  auto [direct, s1] = propagate_grid(chi, model, cfg);
  cfg.steps = 120;
  auto [half, s2] = propagate_grid(chi, model, cfg);
  cfg.steps = 180;
  auto [rest, s3] = propagate_grid(half, model, cfg);
  double worst = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    worst = std::max(worst, std::abs(direct.values[i] - rest.values[i]));
  CHECK(worst == 0.0);  // identical step sequence, bit-identical composition
}

TEST_CASE("characteristics: t = 0 returns the initial state exactly") {
  CharacteristicGaussian chi0;
  chi0.center = pt1(0.4, -0.2);
  chi0.sigma = 0.7;
  chi0.wavevector = {0.9, 0.1, 0, 0, 0, 0};
  auto model = HamiltonianModel::anharmonic(1.0, 1.0);
  std::vector<PhasePoint> pts = {pt1(0, 0), pt1(0.3, 0.3), pt1(-1, 0.5)};
  auto samples = propagate_characteristics(chi0, model, Formalism::kvh, 0.0, 1e-3, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(samples[i].state.ok);
    CHECK(samples[i].state.theta == 0.0);
    CHECK(std::abs(samples[i].value - chi0.eval(pts[i])) == 0.0);
  }
}

TEST_CASE("characteristics: quadratic models transport magnitudes with zero phase accrual") {
  CharacteristicGaussian chi0;
  chi0.center = pt1(0.8, 0.1);
  chi0.sigma = 0.5;
  auto model = HamiltonianModel::harmonic(1.3);
  std::vector<PhasePoint> pts = {pt1(0.5, 0.2), pt1(-0.4, 0.9), pt1(1.2, -0.7)};
  auto samples = propagate_characteristics(chi0, model, Formalism::kvh, 0.6, 1e-3, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    REQUIRE(samples[i].state.ok);
    CHECK(samples[i].state.theta == 0.0);
    const FlowResult back = flow_to(model, pts[i], -0.6, 1e-3);
    CHECK(std::abs(std::abs(samples[i].value) - std::abs(chi0.eval(back.z))) < 1e-14);
  }
}

TEST_CASE("grid solution converges to the characteristics oracle") {
  auto model = HamiltonianModel::anharmonic(1.0, 1.0);
  const double los[2] = {-1, -1}, his[2] = {1, 1};
  const int counts[2] = {256, 256};
  PhaseGrid g(1, std::span<const double>(los, 2), std::span<const double>(his, 2), std::span<const int>(counts, 2));
  InitialStateSpec spec;
  spec.center = pt1(0.25, 0.2);
  spec.sigma = 0.075;
  spec.phase_wavevector = {1.5, -1.0, 0, 0, 0, 0};
  auto chi = make_initial(spec, g, 1.0);

  PropagationConfig cfg;
  cfg.dt = 1e-3;
  cfg.steps = 300;
  cfg.diagnostics_every = 300;
  auto [fin, series] = propagate_grid(chi, model, cfg);

  CharacteristicGaussian cg;
  cg.center = spec.center;
  cg.sigma = spec.sigma;
  cg.wavevector = spec.phase_wavevector;
  auto pts = grid_points(g);
  auto oracle = propagate_characteristics(cg, model, Formalism::kvh, 0.3, 1e-4, pts);
  std::vector<cplx> want(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    REQUIRE(oracle[i].state.ok);
    want[i] = oracle[i].value;
  }
  CHECK(l2_diff(g, fin.values, want) <= 1e-4);
}

TEST_CASE("free-particle density transport is an exact drift") {
  CharacteristicGaussian chi0;
  chi0.center = pt1(0.2, -0.4);
  chi0.sigma = 0.6;
  auto model = HamiltonianModel::free_particle(2.0);
  const double t = 0.9;
  std::vector<PhasePoint> pts = {pt1(0.3, 0.5), pt1(-0.8, -0.2), pt1(1.4, 1.0)};
  auto got = transport_density(chi0, DensityPrescription::kvn, model, t, 1e-3, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    REQUIRE(got[i].ok);
    const PhasePoint back = pt1(pts[i].q[0] - pts[i].p[0] * t / 2.0, pts[i].p[0]);
    const double want = std::norm(chi0.eval(back));
    CHECK(std::abs(got[i].value - want) < 1e-12);
  }
}

TEST_CASE("transported density keeps unit mass on a covering grid") {
  CharacteristicGaussian chi0;
  chi0.center = pt1(1.2, 0.0);
  chi0.sigma = 0.9;
  auto model = HamiltonianModel::harmonic(0.5);
  PhaseGrid g = square_grid(-10, 10, 128);
  auto pts = grid_points(g);
  for (auto kind : {DensityPrescription::kvn, DensityPrescription::kvh}) {
    auto got = transport_density(chi0, kind, model, 0.7, 1e-3, pts);
    std::vector<double> rho(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      REQUIRE(got[i].ok);
      rho[i] = got[i].value;
    }
    CHECK(std::abs(integrate(g, std::span<const double>(rho)) - 1.0) < 1e-4);
  }
}

TEST_CASE("kvh density of the propagated state obeys the transported liouville density") {
  auto model = HamiltonianModel::anharmonic(1.0, 1.0);
  const double los[2] = {-1, -1}, his[2] = {1, 1};
  const int counts[2] = {256, 256};
  PhaseGrid g(1, std::span<const double>(los, 2), std::span<const double>(his, 2), std::span<const int>(counts, 2));
  InitialStateSpec spec;
  spec.center = pt1(0.25, 0.2);
  spec.sigma = 0.075;
  auto chi = make_initial(spec, g, 1.0);

  PropagationConfig cfg;
  cfg.dt = 1e-3;
  cfg.steps = 300;
  cfg.diagnostics_every = 300;
  cfg.formalism = Formalism::kvh;
  auto [fin, series] = propagate_grid(chi, model, cfg);
  auto rho_grid = density_kvh(fin);

  CharacteristicGaussian cg;
  cg.center = spec.center;
  cg.sigma = spec.sigma;
  auto pts = grid_points(g);
  auto rho_ref = transport_density(cg, DensityPrescription::kvh, model, 0.3, 1e-4, pts);

  std::vector<double> absdiff(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    REQUIRE(rho_ref[i].ok);
    absdiff[i] = std::abs(rho_grid[i] - rho_ref[i].value);
  }
  CHECK(integrate(g, std::span<const double>(absdiff)) <= 1e-3);  // L1
}

TEST_CASE("heisenberg expectation of the hamiltonian is constant") {
  auto model = HamiltonianModel::harmonic(0.5);
  PhaseGrid g = square_grid(-10, 10, 192);
  auto chi = harmonic_state(g, 0.9, 1.0, 0, 1.0, 0.5);
  const double times[4] = {0.0, 0.1, 0.2, 0.3};
  auto f = heisenberg_expectation(Observable::hamiltonian(model), chi, model, Formalism::kvh, 1e-3,
                                  std::span<const double>(times, 4));
  REQUIRE(std::abs(f[0]) > 0.1);
  for (double v : f) CHECK(std::abs(v - f[0]) / std::abs(f[0]) <= 1e-6);
}

TEST_CASE("heisenberg rate of p.xi matches the bracket observable") {
  auto model = HamiltonianModel::harmonic(0.5);
  PhaseGrid g = square_grid(-10, 10, 192);
  auto chi = harmonic_state(g, 0.9, 1.0, 0.4, 0.8, -0.3);
  const std::array<double, 3> xi{1, 0, 0};
  const double dt = 1e-3, delta = 1e-2, t0 = 0.2;
  const double times[3] = {t0 - delta, t0, t0 + delta};
  auto f = heisenberg_expectation(Observable::linear_p(xi), chi, model, Formalism::kvh, dt,
                                  std::span<const double>(times, 3));
  const double fd_rate = (f[2] - f[0]) / (2 * delta);
  const double t_mid[1] = {t0};
  auto rhs = heisenberg_expectation(bracket_linear_p_with(xi, model), chi, model, Formalism::kvh, dt,
                                    std::span<const double>(t_mid, 1));
  CHECK(std::abs(fd_rate - rhs[0]) / std::abs(rhs[0]) <= 1e-3);
}
