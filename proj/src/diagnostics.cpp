#include "kvh/diagnostics.hpp"

#include <cmath>

#include "kvh/parallel.hpp"

namespace kvh {
namespace {

// (2/hbar) Im <a|b>
double rate_pairing(const GridWaveFunction& a, const GridWaveFunction& b) {
  return 2.0 / a.hbar * inner(a, b).imag();
}

GridWaveFunction phase_times(const HamiltonianModel& model, const GridWaveFunction& chi) {
  GridWaveFunction out = chi;
  const PhaseGrid& g = chi.grid;
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out.values[i] = model.phase_term(g.point(i)) * chi.values[i];
  });
  return out;
}

GridWaveFunction half_p_times(int comp, const GridWaveFunction& chi) {
  GridWaveFunction out = chi;
  const PhaseGrid& g = chi.grid;
  const int axis = g.dim() + comp;
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out.values[i] = 0.5 * g.point(i).coord(axis) * chi.values[i];
  });
  return out;
}

double imag_scale_check(const cplx& v, double scale, const char* what) {
  if (scale > 0 && std::abs(v.imag()) > 1e-6 * scale)
    fail(ErrorCode::non_finite, std::string(what) + ": expectation has a non-negligible imaginary part");
  return v.real();
}

}  // namespace

RateDecomposition rate_decomposition(const GridWaveFunction& chi, const HamiltonianModel& model,
                                     RateObservable which) {
  RateDecomposition out;
  const GridWaveFunction kvn_l = kvn_liouvillian(model, chi);
  const GridWaveFunction kvh_l = kvh_liouvillian(model, chi);
  const GridWaveFunction alpha = phase_times(model, chi);

  if (which == RateObservable::angular_L) {
    if (chi.grid.dim() < 2) return out;  // angular momentum undefined at n = 1; all zero
    out.components = 3;
    const auto L = angular_momentum(chi);
    for (int c = 0; c < 3; ++c) {
      out.black[c] = rate_pairing(L[c], kvn_l);
      out.red[c] = rate_pairing(L[c], alpha);
      out.blue[c] = 0.0;   // the KvH and KvN angular momentum operators coincide
      out.green[c] = 0.0;
      out.total[c] = rate_pairing(L[c], kvh_l);
    }
  } else {
    const int n = chi.grid.dim();
    out.components = n;
    const auto P_kvn = linear_momentum(LinearMomentumVariant::kvn, chi);
    for (int c = 0; c < n; ++c) {
      const GridWaveFunction delta = half_p_times(c, chi);
      GridWaveFunction full = P_kvn[c];
      for (std::size_t i = 0; i < full.size(); ++i) full.values[i] += delta.values[i];
      out.black[c] = rate_pairing(P_kvn[c], kvn_l);
      out.red[c] = rate_pairing(P_kvn[c], alpha);
      out.blue[c] = rate_pairing(delta, kvn_l);
      out.green[c] = rate_pairing(delta, alpha);
      out.total[c] = rate_pairing(full, kvh_l);
    }
  }
  return out;
}

DiagnosticRecord compute_record(double t, const GridWaveFunction& chi, const HamiltonianModel& model,
                                Formalism formalism) {
  DiagnosticRecord rec;
  rec.t = t;
  rec.norm = norm_sq(chi);
  if (!std::isfinite(rec.norm)) fail(ErrorCode::non_finite, "diagnostics: non-finite norm");
  const double nchi = std::sqrt(rec.norm);

  const GridWaveFunction applied =
      formalism == Formalism::kvh ? kvh_liouvillian(model, chi) : kvn_liouvillian(model, chi);
  rec.energy = imag_scale_check(expectation(applied, chi), nchi * std::sqrt(norm_sq(applied)), "energy");

  const int n = chi.grid.dim();
  if (n >= 2) {
    const auto L = angular_momentum(chi);
    for (int c = 0; c < 3; ++c)
      rec.L[c] = imag_scale_check(expectation(L[c], chi), nchi * std::sqrt(norm_sq(L[c])) + 1e-30, "angular");
  }
  const auto P = linear_momentum(LinearMomentumVariant::kvh, chi);
  const auto Pk = linear_momentum(LinearMomentumVariant::kvn, chi);
  for (int c = 0; c < n; ++c) {
    rec.P[c] = imag_scale_check(expectation(P[c], chi), nchi * std::sqrt(norm_sq(P[c])) + 1e-30, "linear");
    rec.P_kvn[c] =
        imag_scale_check(expectation(Pk[c], chi), nchi * std::sqrt(norm_sq(Pk[c])) + 1e-30, "linear_kvn");
  }
  rec.dec_L = rate_decomposition(chi, model, RateObservable::angular_L);
  rec.dec_P = rate_decomposition(chi, model, RateObservable::linear_P);
  return rec;
}

RateIdentityReport rate_identity_check(const std::vector<DiagnosticRecord>& series, RateObservable which,
                                       Formalism formalism) {
  if (series.size() < 3) fail(ErrorCode::insufficient_samples, "rate identity needs at least 3 records");
  RateIdentityReport rep;
  const int comps = which == RateObservable::angular_L ? series.front().dec_L.components
                                                       : series.front().dec_P.components;
  // scale: the largest |rhs| seen, floored by a Cauchy-Schwarz-flavoured floor
  double scale = 0;
  for (const auto& r : series) {
    const RateDecomposition& d = which == RateObservable::angular_L ? r.dec_L : r.dec_P;
    for (int c = 0; c < comps; ++c) {
      const double rhs = formalism == Formalism::kvh ? d.total[c] : d.black[c] + d.blue[c];
      scale = std::max(scale, std::abs(rhs));
    }
  }
  const double floor = 1e-3;  // identities on conserved components compare 0 to 0
  rep.scale = std::max(scale, floor);

  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    const double dt_minus = series[i].t - series[i - 1].t;
    const double dt_plus = series[i + 1].t - series[i].t;
    if (std::abs(dt_plus - dt_minus) > 1e-12 * std::max(std::abs(dt_plus), 1.0))
      fail(ErrorCode::invalid_argument, "rate identity needs uniformly sampled records");
    const RateDecomposition& d = which == RateObservable::angular_L ? series[i].dec_L : series[i].dec_P;
    for (int c = 0; c < comps; ++c) {
      const double prev = which == RateObservable::angular_L ? series[i - 1].L[c] : series[i - 1].P[c];
      const double next = which == RateObservable::angular_L ? series[i + 1].L[c] : series[i + 1].P[c];
      const double lhs = (next - prev) / (dt_minus + dt_plus);
      const double rhs = formalism == Formalism::kvh ? d.total[c] : d.black[c] + d.blue[c];
      rep.max_rel_residual = std::max(rep.max_rel_residual, std::abs(lhs - rhs) / rep.scale);
      ++rep.samples;
    }
  }
  return rep;
}

double quadratic_coincidence_check(const HamiltonianModel& model, const GridWaveFunction& chi) {
  if (!model.quadratic_class())
    fail(ErrorCode::wrong_model_kind, "quadratic coincidence check needs a quadratic-class model");
  const GridWaveFunction a = kvh_liouvillian(model, chi);
  const GridWaveFunction b = kvn_liouvillian(model, chi);
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  return worst;
}

PlanarityReport planarity_report(const GridWaveFunction& chi) {
  const PhaseGrid& g = chi.grid;
  if (g.dim() != 3) fail(ErrorCode::unsupported_dimension, "planarity report needs n = 3");
  PlanarityReport rep;

  const std::size_t N = g.size();
  std::vector<std::vector<cplx>> dp(3, std::vector<cplx>(N));
  for (int c = 0; c < 3; ++c)
    partial_derivative_into(std::span<const cplx>(chi.values), g, 3 + c, std::span<cplx>(dp[c]));

  std::vector<cplx> integrand(N);
  std::vector<double> absval(N);
  const cplx ih(0, chi.hbar);
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const PhasePoint z = g.point(i);
      const std::array<double, 3> pxq{z.p[1] * z.q[2] - z.p[2] * z.q[1], z.p[2] * z.q[0] - z.p[0] * z.q[2],
                                      z.p[0] * z.q[1] - z.p[1] * z.q[0]};
      cplx grad_dot{};
      for (int c = 0; c < 3; ++c) grad_dot += pxq[c] * dp[c][i];
      integrand[i] = ih * grad_dot * chi.values[i] * std::conj(chi.values[i]);
      absval[i] = std::abs(integrand[i]);
    }
  });
  rep.value = integrate(g, std::span<const cplx>(integrand));
  rep.scale = integrate(g, std::span<const double>(absval));

  double max_im = 0, max_abs_v = 0;
  for (const auto& v : chi.values) {
    max_im = std::max(max_im, std::abs(v.imag()));
    max_abs_v = std::max(max_abs_v, std::abs(v));
  }
  rep.real_state = max_abs_v == 0 || max_im <= 1e-12 * max_abs_v;
  return rep;
}

KvnMismatchReport kvn_energy_mismatch_report(const GridWaveFunction& chi, const HamiltonianModel& model) {
  KvnMismatchReport rep;
  const PhaseGrid& g = chi.grid;
  const std::size_t N = g.size();

  const GridWaveFunction applied = kvn_liouvillian(model, chi);
  rep.h_kvn = expectation(applied, chi).real();

  std::vector<double> h_density(N);
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) h_density[i] = model.value(g.point(i)) * std::norm(chi.values[i]);
  });
  rep.physical = integrate(g, std::span<const double>(h_density));
  rep.gap = rep.h_kvn - rep.physical;

  // Im{chi*, chi} pointwise and its plain / H-weighted integrals
  const int n = g.dim();
  std::vector<double> bracket(N, 0.0);
  std::vector<cplx> dq(N), dp(N);
  for (int c = 0; c < n; ++c) {
    partial_derivative_into(std::span<const cplx>(chi.values), g, c, std::span<cplx>(dq));
    partial_derivative_into(std::span<const cplx>(chi.values), g, n + c, std::span<cplx>(dp));
    for (std::size_t i = 0; i < N; ++i) bracket[i] += 2.0 * (std::conj(dq[i]) * dp[i]).imag();
  }
  rep.bracket_integral = integrate(g, std::span<const double>(bracket));
  std::vector<double> weighted(N);
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) weighted[i] = model.value(g.point(i)) * bracket[i];
  });
  rep.h_kvn_bracket_form = chi.hbar * integrate(g, std::span<const double>(weighted));
  return rep;
}

CoincidenceReport kvh_energy_coincidence_check(const GridWaveFunction& chi, const HamiltonianModel& model) {
  CoincidenceReport rep;
  const PhaseGrid& g = chi.grid;
  const GridWaveFunction applied = kvh_liouvillian(model, chi);
  rep.lhs = expectation(applied, chi).real();

  const auto rho = density_kvh(chi);
  std::vector<double> weighted(g.size());
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) weighted[i] = model.value(g.point(i)) * rho[i];
  });
  rep.rhs = integrate(g, std::span<const double>(weighted));

  const double scale = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
  if (scale < 1e-300) {
    rep.degenerate = true;
    rep.residual = 0.0;
  } else {
    rep.residual = std::abs(rep.lhs - rep.rhs) / scale;
  }
  return rep;
}

TranslationGeneratorReport translation_generator_report(const GridWaveFunction& chi,
                                                        const std::array<double, 3>& xi, double t) {
  TranslationGeneratorReport rep;
  const PhaseGrid& g = chi.grid;
  const int n = g.dim();
  const std::array<double, 3> v{t * xi[0], t * xi[1], t * xi[2]};
  const GridWaveFunction moved = translation_action(v, chi);

  std::vector<std::vector<cplx>> dq(n, std::vector<cplx>(g.size()));
  for (int c = 0; c < n; ++c)
    partial_derivative_into(std::span<const cplx>(chi.values), g, c, std::span<cplx>(dq[c]));

  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.in_boundary_band(i, 4)) continue;
    const PhasePoint z = g.point(i);
    const cplx fd = (moved.values[i] - chi.values[i]) / t;
    cplx adv{};
    double pxi = 0;
    for (int c = 0; c < n; ++c) {
      adv -= xi[c] * dq[c][i];
      pxi += z.p[c] * xi[c];
    }
    const cplx mul(0, 0.5 * pxi / chi.hbar);
    rep.fd_vs_plus = std::max(rep.fd_vs_plus, std::abs(fd - (adv + mul * chi.values[i])));
    rep.fd_vs_minus = std::max(rep.fd_vs_minus, std::abs(fd - (adv - mul * chi.values[i])));
    rep.scale = std::max(rep.scale, std::abs(adv + mul * chi.values[i]));
  }
  return rep;
}

}  // namespace kvh
