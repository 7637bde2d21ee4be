#pragma once

#include <array>
#include <vector>

#include "kvh/phase_space.hpp"

namespace kvh {

// Complex field on a phase-space grid carrying the action scale hbar.
struct GridWaveFunction {
  PhaseGrid grid;
  std::vector<cplx> values;
  double hbar = 1.0;

  std::size_t size() const { return values.size(); }
};

// Isotropic Gaussian with optional linear phase:
//   chi(z) = N exp(-|z - z0|^2 / (4 sigma^2)) exp(i k.z)
// N is fixed by quadrature so that the grid norm is exactly 1.
struct InitialStateSpec {
  PhasePoint center;
  double sigma = 1.0;
  std::array<double, 6> phase_wavevector{};  // 2n entries used, q block then p block
};

GridWaveFunction make_initial(const InitialStateSpec& spec, const PhaseGrid& grid, double hbar);

cplx inner(const GridWaveFunction& a, const GridWaveFunction& b);
double norm_sq(const GridWaveFunction& chi);

// expectation of an already-applied operator: <chi|A chi> = inner(chi, applied)
cplx expectation(const GridWaveFunction& applied, const GridWaveFunction& chi);

std::vector<double> density_kvn(const GridWaveFunction& chi);

// Modified prescription rho = |chi|^2 + Re div(chi* Zhat chi), Zhat = Z/2 - Lambda.
// The raw divergence has the pointwise imaginary residue (hbar/2) Lap |chi|^2;
// the real part is taken.
std::vector<double> density_kvh(const GridWaveFunction& chi);

// Pointwise imaginary part of div(chi* Zhat chi) (for the residue identity).
std::vector<double> density_kvh_imag_residue(const GridWaveFunction& chi);

// max |values| over the outer `band` cells of the domain
double boundary_band_max(const GridWaveFunction& chi, int band = 2);

// max |values|
double max_abs(const GridWaveFunction& chi);

}  // namespace kvh
