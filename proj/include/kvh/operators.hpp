#pragma once

#include <array>

#include "kvh/hamiltonian.hpp"
#include "kvh/observables.hpp"
#include "kvh/wavefunction.hpp"

namespace kvh {

// --- primitive operators -------------------------------------------------

// Z_axis: pointwise z_axis * chi
GridWaveFunction apply_position(int axis, const GridWaveFunction& chi);
// Lambda_axis: -i hbar d chi / d z_axis
GridWaveFunction apply_momentum(int axis, const GridWaveFunction& chi);
// Zeta_axis = Z_axis/2 - Lambda_axis: z_axis/2 chi + i hbar d chi
GridWaveFunction apply_zeta(int axis, const GridWaveFunction& chi);

// Max-norm of ([Z_m, Lambda_m] - i hbar) chi over the interior, relative to
// max |chi|. Exact identity analytically; residual is stencil truncation.
double commutator_residual(int axis, const GridWaveFunction& chi);

// --- Liouvillians and the generic van Hove transform ----------------------

// KvN: L_H chi = X_H . Lambda chi = -i hbar X_H . grad chi
GridWaveFunction kvn_liouvillian(const HamiltonianModel& model, const GridWaveFunction& chi);
// KvH: script-L_H chi = L_H chi + a(z) chi with a = H - z.grad(H)/2
GridWaveFunction kvh_liouvillian(const HamiltonianModel& model, const GridWaveFunction& chi);

// Same pair for a general observable symbol.
GridWaveFunction kvn_transform(const Observable& symbol, const GridWaveFunction& chi);
GridWaveFunction kvh_transform(const Observable& symbol, const GridWaveFunction& chi);

// --- momentum operators ----------------------------------------------------

// L chi = i hbar (dchi/dp x p + dchi/dq x q). Components x, y vanish
// identically for n = 2; n = 1 is an error.
std::array<GridWaveFunction, 3> angular_momentum(const GridWaveFunction& chi);

enum class LinearMomentumVariant { kvh, kvn };
// kvh: P_i chi = -i hbar dchi/dq_i + p_i chi / 2; kvn drops the p term.
std::array<GridWaveFunction, 3> linear_momentum(LinearMomentumVariant variant, const GridWaveFunction& chi);

// --- momentum-map generators ------------------------------------------------

// A_xi chi = xi . (grad_q chi x q + grad_p chi x p); satisfies <L_xi> = hbar <chi|i A_xi chi>.
GridWaveFunction generator_A(const std::array<double, 3>& xi, const GridWaveFunction& chi);
// B_xi chi = -xi . grad_q chi - (i/(2 hbar)) (p.xi) chi; satisfies <P_xi> = hbar <chi|i B_xi chi>.
GridWaveFunction generator_B(const std::array<double, 3>& xi, const GridWaveFunction& chi);

// --- group actions -----------------------------------------------------------

// chi -> chi(R^-1 q, R^-1 p), resampled with tensor cubic interpolation,
// zero outside the domain. Requires n = 3 and a state that decays in the
// boundary band (else SupportEscapesDomain).
GridWaveFunction rotation_action(const std::array<std::array<double, 3>, 3>& rot, const GridWaveFunction& chi);

// Candidate translation action chi -> exp(i p.v / (2 hbar)) chi(q - v, p).
// Its generator is measured and reported, never asserted.
GridWaveFunction translation_action(const std::array<double, 3>& v, const GridWaveFunction& chi);

// Rotation matrix exp(t xi^) about axis xi (Rodrigues). Helper for tests and
// generator studies.
std::array<std::array<double, 3>, 3> rotation_about(const std::array<double, 3>& xi, double t);

}  // namespace kvh
