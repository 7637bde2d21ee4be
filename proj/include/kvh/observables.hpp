#pragma once

#include <array>

#include "kvh/hamiltonian.hpp"
#include "kvh/phase_space.hpp"

namespace kvh {

// A smooth phase-space function with analytic gradient, usable as the symbol
// of a van Hove transform. Covers the catalogued Hamiltonians plus the
// momentum-map symbols p.xi, q.xi and (q x p).xi.
class Observable {
public:
  static Observable hamiltonian(const HamiltonianModel& model);
  static Observable linear_p(const std::array<double, 3>& xi);  // A = p . xi
  static Observable linear_q(const std::array<double, 3>& xi);  // A = q . xi
  static Observable angular(const std::array<double, 3>& xi);   // A = (q x p) . xi

  double value(const PhasePoint& z) const;
  PhasePoint grad(const PhasePoint& z) const;
  PhasePoint vector_field(const PhasePoint& z) const;  // (dA/dp, -dA/dq)
  double phase_term(const PhasePoint& z) const;        // A - z.grad(A)/2

private:
  enum class Kind { model, linear_p, linear_q, angular };
  Kind kind_ = Kind::linear_p;
  HamiltonianModel model_ = HamiltonianModel::harmonic(1.0);
  std::array<double, 3> xi_{};
};

// Analytic canonical bracket {A, H} for the symbol pairs needed by the
// Heisenberg-picture checks: A = p.xi against a catalogued model. The result
// is again an Observable when representable.
Observable bracket_linear_p_with(const std::array<double, 3>& xi, const HamiltonianModel& model);

}  // namespace kvh
