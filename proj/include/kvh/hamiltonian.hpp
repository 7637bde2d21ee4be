#pragma once

#include <array>
#include <span>
#include <string>

#include "kvh/phase_space.hpp"

namespace kvh {

enum class HamiltonianKind { harmonic, anharmonic, kepler_reduced, free_particle, quadratic };

// Catalogued Hamiltonians with analytic gradients:
//   harmonic        H = p^2 + k q^2 / 2
//   anharmonic      H = p^2 - a|q|^2 + b|q|^4
//   kepler_reduced  H = p^2/(2 mu) - lambda/|q|, defined for |q| >= r_min
//   free            H = p^2/(2 m)
//   quadratic       H = sum_i alpha_i q_i^2 + beta_i p_i^2
class HamiltonianModel {
public:
  static HamiltonianModel harmonic(double k);
  static HamiltonianModel anharmonic(double a, double b);
  static HamiltonianModel kepler_reduced(double mu, double lambda, double r_min = 1e-3);
  static HamiltonianModel free_particle(double mass);
  static HamiltonianModel quadratic(std::span<const double> alpha, std::span<const double> beta);

  HamiltonianKind kind() const { return kind_; }
  double r_min() const { return r_min_; }
  // The phase term vanishes identically for these kinds (degree-2 homogeneous H).
  bool quadratic_class() const {
    return kind_ == HamiltonianKind::harmonic || kind_ == HamiltonianKind::quadratic ||
           kind_ == HamiltonianKind::free_particle;
  }
  std::string describe() const;

  double value(const PhasePoint& z) const;
  PhasePoint grad(const PhasePoint& z) const;           // (dH/dq, dH/dp)
  PhasePoint vector_field(const PhasePoint& z) const;   // X_H = (dH/dp, -dH/dq)
  double phase_term(const PhasePoint& z) const;         // a(z) = H - z.grad(H)/2

  // Every catalogued kinetic part is diagonal quadratic, dT/dp_i = c_i p_i.
  std::array<double, 3> kinetic_drift_coefficients(int n) const;

  double param(const char* name) const;  // named parameter lookup for reports

private:
  HamiltonianKind kind_ = HamiltonianKind::harmonic;
  double k_ = 1.0;
  double a_ = 0.0, b_ = 1.0;
  double mu_ = 1.0, lambda_ = 1.0, r_min_ = 1e-3;
  double mass_ = 1.0;
  int quad_n_ = 0;
  std::array<double, 3> alpha_{}, beta_{};

  void check_regular(const PhasePoint& z) const;
};

// Canonical bracket of two gradients at a common point:
// {F,G} = dF/dq . dG/dp - dF/dp . dG/dq.
double poisson_bracket(const PhasePoint& f_grad, const PhasePoint& g_grad);

struct FlowResult {
  PhasePoint z;
  double phase = 0.0;   // integral of the phase term along the trajectory
  bool aborted = false; // entered the singular region
  double abort_time = 0.0;
};

// One position-Verlet step for the separable catalogued models. dt may be
// negative. Throws SingularRegion if |q| drops below r_min mid-step (Kepler).
PhasePoint flow_step(const HamiltonianModel& model, const PhasePoint& z, double dt);

// Composes uniform Verlet steps to time t (step size ~ dt, exact arrival),
// accumulating the phase integral with the midpoint rule. Never throws on
// singular trajectories; reports them via FlowResult.
FlowResult flow_to(const HamiltonianModel& model, const PhasePoint& z, double t, double dt);

}  // namespace kvh
