#include "kvh/wavefunction.hpp"

#include <cmath>

#include "kvh/parallel.hpp"

namespace kvh {

GridWaveFunction make_initial(const InitialStateSpec& spec, const PhaseGrid& grid, double hbar) {
  if (!(spec.sigma > 0)) fail(ErrorCode::invalid_argument, "initial state: sigma must be > 0");
  if (!(hbar > 0)) fail(ErrorCode::invalid_argument, "initial state: hbar must be > 0");
  if (spec.center.n != grid.dim()) fail(ErrorCode::invalid_argument, "initial state: center dimension mismatch");
  for (int a = 0; a < grid.axes(); ++a) {
    const double c = spec.center.coord(a);
    if (c - 6.0 * spec.sigma < grid.lower(a) || c + 6.0 * spec.sigma > grid.upper(a))
      fail(ErrorCode::domain_too_small,
           "initial state: grid must cover +-6 sigma around the center on every axis (axis " + std::to_string(a) +
               ")");
  }

  GridWaveFunction chi;
  chi.grid = grid;
  chi.hbar = hbar;
  chi.values.resize(grid.size());
  const double inv4s2 = 1.0 / (4.0 * spec.sigma * spec.sigma);
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const PhasePoint z = grid.point(i);
      double r2 = 0.0, kz = 0.0;
      for (int a = 0; a < grid.axes(); ++a) {
        const double d = z.coord(a) - spec.center.coord(a);
        r2 += d * d;
        kz += spec.phase_wavevector[a] * z.coord(a);
      }
      chi.values[i] = std::exp(-r2 * inv4s2) * cplx(std::cos(kz), std::sin(kz));
    }
  });
  const double nrm = std::sqrt(integrate_norm_sq(chi.grid, chi.values));
  if (!(nrm > 0) || !std::isfinite(nrm)) fail(ErrorCode::non_finite, "initial state: degenerate norm");
  const double scale = 1.0 / nrm;
  for (auto& v : chi.values) v *= scale;
  return chi;
}

cplx inner(const GridWaveFunction& a, const GridWaveFunction& b) {
  if (!a.grid.same_layout(b.grid)) fail(ErrorCode::invalid_argument, "inner: grid mismatch");
  if (a.hbar != b.hbar) fail(ErrorCode::invalid_argument, "inner: hbar mismatch");
  std::vector<cplx> prod(a.values.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = std::conj(a.values[i]) * b.values[i];
  return integrate(a.grid, std::span<const cplx>(prod));
}

double norm_sq(const GridWaveFunction& chi) { return integrate_norm_sq(chi.grid, chi.values); }

cplx expectation(const GridWaveFunction& applied, const GridWaveFunction& chi) { return inner(chi, applied); }

std::vector<double> density_kvn(const GridWaveFunction& chi) {
  std::vector<double> rho(chi.values.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(chi.values[i]);
  return rho;
}

namespace {

// per-axis coordinate along a flat index walk
inline double axis_coord(const PhaseGrid& g, int axis, std::size_t flat) {
  const std::size_t n_axis = static_cast<std::size_t>(g.count(axis));
  return g.lower(axis) + g.spacing(axis) * static_cast<double>((flat / g.stride(axis)) % n_axis);
}

}  // namespace

std::vector<double> density_kvh(const GridWaveFunction& chi) {
  // rho = |chi|^2 + div F with F = z |chi|^2 / 2 + hbar J Im(chi* grad chi).
  // The symplectic twist J on the current term is what makes rho transport by
  // the Liouville equation and pair with the van Hove energy; for real states
  // it coincides with the raw chi* Zeta chi flux.
  const PhaseGrid& g = chi.grid;
  const std::size_t N = g.size();
  const int n = g.dim();
  std::vector<double> s(N);
  for (std::size_t i = 0; i < N; ++i) s[i] = std::norm(chi.values[i]);

  std::vector<std::vector<double>> current(2 * n, std::vector<double>(N));
  std::vector<cplx> dchi(N);
  for (int a = 0; a < 2 * n; ++a) {
    partial_derivative_into(std::span<const cplx>(chi.values), g, a, std::span<cplx>(dchi));
    auto& I = current[a];
    parallel_for(N, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) I[i] = (std::conj(chi.values[i]) * dchi[i]).imag();
    });
  }

  std::vector<double> rho = s, flux(N), dflux(N);
  for (int a = 0; a < 2 * n; ++a) {
    // (J I)_a: q block takes +I_p, p block takes -I_q
    const int partner = a < n ? a + n : a - n;
    const double sign = a < n ? 1.0 : -1.0;
    parallel_for(N, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        flux[i] = 0.5 * axis_coord(g, a, i) * s[i] + sign * chi.hbar * current[partner][i];
    });
    partial_derivative_into(std::span<const double>(flux), g, a, std::span<double>(dflux));
    for (std::size_t i = 0; i < N; ++i) rho[i] += dflux[i];
  }
  return rho;
}

std::vector<double> density_kvh_imag_residue(const GridWaveFunction& chi) {
  // imaginary part of the raw divergence div(chi* (z/2 + i hbar grad) chi),
  // kept as a measured quantity: it equals (hbar/2) Lap |chi|^2
  const PhaseGrid& g = chi.grid;
  const std::size_t N = g.size();
  std::vector<double> im(N, 0.0);
  std::vector<cplx> dchi(N), flux(N), dflux(N);
  for (int a = 0; a < g.axes(); ++a) {
    partial_derivative_into(std::span<const cplx>(chi.values), g, a, std::span<cplx>(dchi));
    parallel_for(N, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const double za = axis_coord(g, a, i);
        flux[i] = std::conj(chi.values[i]) * (0.5 * za * chi.values[i] + cplx(0, chi.hbar) * dchi[i]);
      }
    });
    partial_derivative_into(std::span<const cplx>(flux), g, a, std::span<cplx>(dflux));
    for (std::size_t i = 0; i < N; ++i) im[i] += dflux[i].imag();
  }
  return im;
}

double boundary_band_max(const GridWaveFunction& chi, int band) {
  double m = 0.0;
  for (std::size_t i = 0; i < chi.values.size(); ++i)
    if (chi.grid.in_boundary_band(i, band)) m = std::max(m, std::abs(chi.values[i]));
  return m;
}

double max_abs(const GridWaveFunction& chi) {
  double m = 0.0;
  for (const auto& v : chi.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace kvh
