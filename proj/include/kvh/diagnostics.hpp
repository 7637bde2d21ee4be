#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "kvh/hamiltonian.hpp"
#include "kvh/operators.hpp"
#include "kvh/wavefunction.hpp"

namespace kvh {

enum class Formalism { kvn, kvh };

enum class RateObservable { angular_L, linear_P };

// The four-way split of d<O>/dt = (2/hbar) Im<O chi | script-L_H chi>:
// operator = KvN part + delta, script-L_H = L_H + alpha_H. Per component:
//   black = KvN x L_H, red = KvN x alpha, blue = delta x L_H, green = delta x alpha.
// total is evaluated independently from the unsplit operators.
struct RateDecomposition {
  int components = 0;
  std::array<double, 3> black{}, red{}, blue{}, green{}, total{};
};

RateDecomposition rate_decomposition(const GridWaveFunction& chi, const HamiltonianModel& model,
                                     RateObservable which);

struct DiagnosticRecord {
  double t = 0;
  double norm = 0;
  double energy = 0;                     // <chi|script-L_H chi> (kvh) or <chi|L_H chi> (kvn)
  std::array<double, 3> L{};             // <angular momentum>, zero-filled for n = 1
  std::array<double, 3> P{}, P_kvn{};    // <linear momentum>, n components used
  RateDecomposition dec_L, dec_P;
  std::map<std::string, double> residuals;
};

// Evaluates every recorded expectation for one state; asserts imaginary parts
// are small relative to operator scales.
DiagnosticRecord compute_record(double t, const GridWaveFunction& chi, const HamiltonianModel& model,
                                Formalism formalism);

struct RateIdentityReport {
  double max_rel_residual = 0;
  double scale = 0;      // denominator used
  int samples = 0;       // interior times checked
};

// Centered finite difference of the recorded <O> against the recorded
// right-hand side at interior times.
RateIdentityReport rate_identity_check(const std::vector<DiagnosticRecord>& series, RateObservable which,
                                       Formalism formalism);

// max |script-L_H chi - L_H chi| over the grid; the model must be harmonic or
// quadratic (WrongModelKind otherwise).
double quadratic_coincidence_check(const HamiltonianModel& model, const GridWaveFunction& chi);

struct PlanarityReport {
  cplx value;
  double scale = 0;        // L1 norm of the integrand
  bool real_state = false; // assertable case
};

// Quadrature of i hbar (p x q) . (grad_p chi) chi chi*; asserted ~0 only for
// real states, reported otherwise.
PlanarityReport planarity_report(const GridWaveFunction& chi);

struct KvnMismatchReport {
  double h_kvn = 0;             // <chi|L_H chi>
  double physical = 0;          // integral of H |chi|^2
  double gap = 0;               // h_kvn - physical
  double bracket_integral = 0;  // integral of Im{chi*, chi}
  double h_kvn_bracket_form = 0;  // hbar * integral of H Im{chi*, chi}
};

KvnMismatchReport kvn_energy_mismatch_report(const GridWaveFunction& chi, const HamiltonianModel& model);

struct CoincidenceReport {
  double lhs = 0;       // <chi|script-L_H chi>
  double rhs = 0;       // integral of H rho_kvh
  double residual = 0;  // relative
  bool degenerate = false;
};

CoincidenceReport kvh_energy_coincidence_check(const GridWaveFunction& chi, const HamiltonianModel& model);

struct TranslationGeneratorReport {
  double fd_vs_plus = 0;   // |[T(t xi) chi - chi]/t - (+i/2hbar p.xi - xi.grad_q) chi|
  double fd_vs_minus = 0;  // same against the -i/2hbar variant (= B_xi)
  double scale = 0;
};

// Measures which multiplicative sign the candidate translation action's
// generator actually carries. Reported, never asserted.
TranslationGeneratorReport translation_generator_report(const GridWaveFunction& chi,
                                                        const std::array<double, 3>& xi, double t);

}  // namespace kvh
