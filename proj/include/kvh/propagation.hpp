#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "kvh/diagnostics.hpp"
#include "kvh/hamiltonian.hpp"
#include "kvh/observables.hpp"
#include "kvh/wavefunction.hpp"

namespace kvh {

struct PropagationConfig {
  double dt = 1e-3;
  long long steps = 1;
  Formalism formalism = Formalism::kvh;
  double cfl_safety = 0.5;         // dt must not exceed cfl_safety * min dx / max |X_H|
  long long diagnostics_every = 1;
  double decay_tolerance = 1e-10;  // boundary-band gate on the initial state
};

// Grid solver for i hbar d chi/dt = (script-)L_H chi: classical RK4 on
// d chi/dt = -(i/hbar) L chi with cached advection and phase coefficient
// fields. No renormalization is ever applied.
class GridPropagator {
public:
  GridPropagator(const HamiltonianModel& model, const PhaseGrid& grid, double hbar, Formalism formalism);

  void step(GridWaveFunction& chi, double dt);
  double max_speed() const { return max_speed_; }
  double cfl_limit(double cfl_safety) const;
  void check_cfl(double dt, double cfl_safety) const;

  // d chi/dt into out (the RK4 right-hand side); exposed for tests
  void rhs(const std::vector<cplx>& in, std::vector<cplx>& out);

private:
  PhaseGrid grid_;
  double hbar_;
  bool use_phase_;
  std::vector<std::vector<double>> speed_;
  std::vector<double> phase_;
  std::vector<cplx> deriv_, acc_, k1_, k2_, k3_, k4_, tmp_;
  double max_speed_ = 0;
};

// One RK4 step (spec operation). Enforces dt <= min dx / max |X_H|.
GridWaveFunction step_rk4(const GridWaveFunction& chi, const HamiltonianModel& model, Formalism formalism,
                          double dt);

// on_step (optional) is invoked after every completed step with the current
// state; it must not modify the state.
std::pair<GridWaveFunction, std::vector<DiagnosticRecord>> propagate_grid(
    const GridWaveFunction& chi0, const HamiltonianModel& model, const PropagationConfig& config,
    const std::function<void(long long, const GridWaveFunction&)>& on_step = {});

// Closed-form Gaussian initial state for the characteristics solver:
// chi0(z) = (2 pi sigma^2)^(-n/2) exp(-|z - z0|^2/(4 sigma^2)) exp(i k.z)
struct CharacteristicGaussian {
  PhasePoint center;
  double sigma = 1.0;
  std::array<double, 6> wavevector{};
  double hbar = 1.0;

  cplx eval(const PhasePoint& z) const;
  double norm_factor() const;
};

struct CharacteristicState {
  PhasePoint z;       // evaluation point
  PhasePoint z_back;  // backward-flow endpoint Phi_{-t}(z)
  double theta = 0;   // phase integral of a(z) along the trajectory arriving at z
  bool ok = true;
};

struct CharacteristicSample {
  cplx value{};
  CharacteristicState state;
};

// Exact-in-space solution chi(t, z) = exp(-i theta/hbar) chi0(Phi_{-t}(z));
// for the kvn formalism theta is identically zero.
std::vector<CharacteristicSample> propagate_characteristics(const CharacteristicGaussian& chi0,
                                                            const HamiltonianModel& model, Formalism formalism,
                                                            double t, double dt,
                                                            std::span<const PhasePoint> eval_points);

enum class DensityPrescription { kvn, kvh };

struct TransportSample {
  double value = 0;
  bool ok = true;
};

// Liouville transport rho(t, z) = rho0(Phi_{-t}(z)) with rho0 the closed-form
// KvN or KvH density of the Gaussian state.
std::vector<TransportSample> transport_density(const CharacteristicGaussian& chi0, DensityPrescription kind,
                                               const HamiltonianModel& model, double t, double dt,
                                               std::span<const PhasePoint> eval_points);

double closed_form_density(const CharacteristicGaussian& chi0, DensityPrescription kind, const PhasePoint& z);

// f(t_k) = <chi_t|script-L_A chi_t> along the propagated state. Times must be
// nonnegative multiples of dt in increasing order.
std::vector<double> heisenberg_expectation(const Observable& symbol, const GridWaveFunction& chi0,
                                           const HamiltonianModel& model, Formalism formalism, double dt,
                                           std::span<const double> times);

}  // namespace kvh
