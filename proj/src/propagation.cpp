#include "kvh/propagation.hpp"

#include <cmath>
#include <numbers>

#include "kvh/parallel.hpp"

namespace kvh {

GridPropagator::GridPropagator(const HamiltonianModel& model, const PhaseGrid& grid, double hbar,
                               Formalism formalism)
    : grid_(grid), hbar_(hbar), use_phase_(formalism == Formalism::kvh && !model.quadratic_class()) {
  const std::size_t N = grid.size();
  const int axes = grid.axes();
  speed_.assign(axes, std::vector<double>(N));
  if (use_phase_) phase_.assign(N, 0.0);
  std::vector<double> local_max(axes, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const PhasePoint z = grid.point(i);
    const PhasePoint x = model.vector_field(z);  // SingularRegion if the grid touches it
    for (int a = 0; a < axes; ++a) {
      speed_[a][i] = x.coord(a);
      local_max[a] = std::max(local_max[a], std::abs(x.coord(a)));
    }
    if (use_phase_) phase_[i] = model.phase_term(z);
  }
  for (int a = 0; a < axes; ++a) max_speed_ = std::max(max_speed_, local_max[a]);
  deriv_.resize(N);
  acc_.resize(N);
  k1_.resize(N);
  k2_.resize(N);
  k3_.resize(N);
  k4_.resize(N);
  tmp_.resize(N);
}

double GridPropagator::cfl_limit(double cfl_safety) const {
  return cfl_safety * grid_.min_spacing() / std::max(max_speed_, 1e-300);
}

void GridPropagator::check_cfl(double dt, double cfl_safety) const {
  const double limit = cfl_limit(cfl_safety);
  if (dt > limit)
    fail(ErrorCode::cfl_violation, "dt = " + std::to_string(dt) + " exceeds the CFL bound " +
                                       std::to_string(limit) + " (cfl_safety * min dx / max |X_H|, max |X_H| = " +
                                       std::to_string(max_speed_) + ")");
}

void GridPropagator::rhs(const std::vector<cplx>& in, std::vector<cplx>& out) {
  const std::size_t N = grid_.size();
  const int axes = grid_.axes();
  for (int a = 0; a < axes; ++a) {
    partial_derivative_into(std::span<const cplx>(in), grid_, a, std::span<cplx>(deriv_));
    const double* s = speed_[a].data();
    if (a == 0) {
      parallel_for(N, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) acc_[i] = s[i] * deriv_[i];
      });
    } else {
      parallel_for(N, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) acc_[i] += s[i] * deriv_[i];
      });
    }
  }
  // i hbar dchi/dt = -i hbar X.grad chi + a chi  =>  dchi/dt = -X.grad chi - (i/hbar) a chi
  if (use_phase_) {
    const double inv_h = 1.0 / hbar_;
    const double* ph = phase_.data();
    parallel_for(N, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        out[i] = -acc_[i] - cplx(0, inv_h * ph[i]) * in[i];
    });
  } else {
    parallel_for(N, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) out[i] = -acc_[i];
    });
  }
}

void GridPropagator::step(GridWaveFunction& chi, double dt) {
  const std::size_t N = grid_.size();
  std::vector<cplx>& y = chi.values;
  rhs(y, k1_);
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) tmp_[i] = y[i] + 0.5 * dt * k1_[i];
  });
  rhs(tmp_, k2_);
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) tmp_[i] = y[i] + 0.5 * dt * k2_[i];
  });
  rhs(tmp_, k3_);
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) tmp_[i] = y[i] + dt * k3_[i];
  });
  rhs(tmp_, k4_);
  const double w = dt / 6.0;
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) y[i] += w * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
  });
}

GridWaveFunction step_rk4(const GridWaveFunction& chi, const HamiltonianModel& model, Formalism formalism,
                          double dt) {
  GridPropagator prop(model, chi.grid, chi.hbar, formalism);
  prop.check_cfl(dt, 1.0);
  GridWaveFunction out = chi;
  prop.step(out, dt);
  for (const auto& v : out.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      fail(ErrorCode::non_finite, "step_rk4 produced a non-finite value");
  return out;
}

std::pair<GridWaveFunction, std::vector<DiagnosticRecord>> propagate_grid(
    const GridWaveFunction& chi0, const HamiltonianModel& model, const PropagationConfig& config,
    const std::function<void(long long, const GridWaveFunction&)>& on_step) {
  if (!(config.dt > 0) || config.steps < 1)
    fail(ErrorCode::invalid_argument, "propagation needs dt > 0 and steps >= 1");
  if (config.diagnostics_every < 1) fail(ErrorCode::invalid_argument, "diagnostics_every must be >= 1");
  for (int a = 0; a < chi0.grid.axes(); ++a)
    if (chi0.grid.count(a) < 8)
      fail(ErrorCode::invalid_argument, "propagation grids need at least 8 points per axis");
  const double band = boundary_band_max(chi0, 2);
  const double scale = max_abs(chi0);
  if (scale > 0 && band > config.decay_tolerance * scale)
    fail(ErrorCode::invalid_argument,
         "initial state does not satisfy the boundary decay condition (band magnitude " +
             std::to_string(band / scale) + " relative, tolerance " + std::to_string(config.decay_tolerance) +
             ")");

  GridPropagator prop(model, chi0.grid, chi0.hbar, config.formalism);
  prop.check_cfl(config.dt, config.cfl_safety);

  GridWaveFunction chi = chi0;
  std::vector<DiagnosticRecord> series;
  series.push_back(compute_record(0.0, chi, model, config.formalism));
  for (long long s = 1; s <= config.steps; ++s) {
    prop.step(chi, config.dt);
    if (on_step) on_step(s, chi);
    if (s % config.diagnostics_every == 0 || s == config.steps) {
      try {
        series.push_back(compute_record(static_cast<double>(s) * config.dt, chi, model, config.formalism));
      } catch (const Error& err) {
        fail(err.code(), std::string(err.what()) + " (at step " + std::to_string(s) + ")");
      }
    }
  }
  return {std::move(chi), std::move(series)};
}

double CharacteristicGaussian::norm_factor() const {
  const int n = center.n;
  return std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * n);
}

cplx CharacteristicGaussian::eval(const PhasePoint& z) const {
  double r2 = 0, kz = 0;
  for (int a = 0; a < 2 * center.n; ++a) {
    const double d = z.coord(a) - center.coord(a);
    r2 += d * d;
    kz += wavevector[a] * z.coord(a);
  }
  return norm_factor() * std::exp(-r2 / (4.0 * sigma * sigma)) * cplx(std::cos(kz), std::sin(kz));
}

std::vector<CharacteristicSample> propagate_characteristics(const CharacteristicGaussian& chi0,
                                                            const HamiltonianModel& model, Formalism formalism,
                                                            double t, double dt,
                                                            std::span<const PhasePoint> eval_points) {
  std::vector<CharacteristicSample> out(eval_points.size());
  const bool with_phase = formalism == Formalism::kvh;
  parallel_for(eval_points.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      CharacteristicSample& s = out[i];
      s.state.z = eval_points[i];
      if (t == 0.0) {
        s.state.z_back = eval_points[i];
        s.state.theta = 0.0;
        s.value = chi0.eval(eval_points[i]);
        continue;
      }
      const FlowResult back = flow_to(model, eval_points[i], -t, dt);
      if (back.aborted) {
        s.state.ok = false;
        s.state.z_back = back.z;
        continue;
      }
      s.state.z_back = back.z;
      // the backward integral of a(z) is minus the integral along the
      // trajectory that arrives at z
      s.state.theta = with_phase ? -back.phase : 0.0;
      const cplx phase_factor = std::polar(1.0, -s.state.theta / chi0.hbar);
      s.value = phase_factor * chi0.eval(back.z);
    }
  });
  return out;
}

double closed_form_density(const CharacteristicGaussian& chi0, DensityPrescription kind, const PhasePoint& z) {
  const cplx v = chi0.eval(z);
  const double sq = std::norm(v);
  if (kind == DensityPrescription::kvn) return sq;
  // rho = |chi|^2 [1 + n - sum_a (z_a/2 + hbar (J k)_a) dz_a / sigma^2]
  const int n = chi0.center.n;
  const double inv_s2 = 1.0 / (chi0.sigma * chi0.sigma);
  double corr = 1.0 + n;
  for (int a = 0; a < 2 * n; ++a) {
    const double dz = z.coord(a) - chi0.center.coord(a);
    const double jk = a < n ? chi0.wavevector[a + n] : -chi0.wavevector[a - n];
    corr -= (0.5 * z.coord(a) + chi0.hbar * jk) * dz * inv_s2;
  }
  return sq * corr;
}

std::vector<TransportSample> transport_density(const CharacteristicGaussian& chi0, DensityPrescription kind,
                                               const HamiltonianModel& model, double t, double dt,
                                               std::span<const PhasePoint> eval_points) {
  std::vector<TransportSample> out(eval_points.size());
  parallel_for(eval_points.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (t == 0.0) {
        out[i].value = closed_form_density(chi0, kind, eval_points[i]);
        continue;
      }
      const FlowResult back = flow_to(model, eval_points[i], -t, dt);
      if (back.aborted) {
        out[i].ok = false;
        continue;
      }
      out[i].value = closed_form_density(chi0, kind, back.z);
    }
  });
  return out;
}

std::vector<double> heisenberg_expectation(const Observable& symbol, const GridWaveFunction& chi0,
                                           const HamiltonianModel& model, Formalism formalism, double dt,
                                           std::span<const double> times) {
  if (times.empty()) return {};
  GridPropagator prop(model, chi0.grid, chi0.hbar, formalism);
  prop.check_cfl(dt, 1.0);
  std::vector<double> values;
  values.reserve(times.size());
  GridWaveFunction chi = chi0;
  long long step_now = 0;
  const double nchi0 = std::sqrt(norm_sq(chi0));
  for (const double t : times) {
    const double steps_d = t / dt;
    const long long target = std::llround(steps_d);
    if (target < step_now || std::abs(steps_d - static_cast<double>(target)) > 1e-6)
      fail(ErrorCode::invalid_argument, "heisenberg times must be increasing multiples of dt");
    for (; step_now < target; ++step_now) prop.step(chi, dt);
    const GridWaveFunction applied = kvh_transform(symbol, chi);
    const cplx f = expectation(applied, chi);
    const double scale = nchi0 * std::sqrt(norm_sq(applied));
    if (scale > 0 && std::abs(f.imag()) > 1e-7 * scale)
      fail(ErrorCode::non_finite, "heisenberg expectation has a non-negligible imaginary part");
    values.push_back(f.real());
  }
  return values;
}

}  // namespace kvh
