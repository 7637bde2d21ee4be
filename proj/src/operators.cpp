#include "kvh/operators.hpp"

#include <cmath>

#include "kvh/parallel.hpp"

namespace kvh {
namespace {

GridWaveFunction like(const GridWaveFunction& chi) {
  GridWaveFunction out;
  out.grid = chi.grid;
  out.hbar = chi.hbar;
  out.values.assign(chi.size(), cplx{});
  return out;
}

void check_axis(const GridWaveFunction& chi, int axis) {
  if (axis < 0 || axis >= chi.grid.axes()) fail(ErrorCode::invalid_argument, "operator axis out of range");
}

double coord_of(const PhaseGrid& g, int axis, std::size_t flat) {
  const std::size_t n_axis = static_cast<std::size_t>(g.count(axis));
  return g.lower(axis) + g.spacing(axis) * static_cast<double>((flat / g.stride(axis)) % n_axis);
}

}  // namespace

GridWaveFunction apply_position(int axis, const GridWaveFunction& chi) {
  check_axis(chi, axis);
  GridWaveFunction out = like(chi);
  const PhaseGrid& g = chi.grid;
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out.values[i] = coord_of(g, axis, i) * chi.values[i];
  });
  return out;
}

GridWaveFunction apply_momentum(int axis, const GridWaveFunction& chi) {
  check_axis(chi, axis);
  GridWaveFunction out = like(chi);
  partial_derivative_into(std::span<const cplx>(chi.values), chi.grid, axis, std::span<cplx>(out.values));
  const cplx f(0, -chi.hbar);
  for (auto& v : out.values) v *= f;
  return out;
}

GridWaveFunction apply_zeta(int axis, const GridWaveFunction& chi) {
  check_axis(chi, axis);
  GridWaveFunction out = like(chi);
  partial_derivative_into(std::span<const cplx>(chi.values), chi.grid, axis, std::span<cplx>(out.values));
  const PhaseGrid& g = chi.grid;
  const cplx ih(0, chi.hbar);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      out.values[i] = 0.5 * coord_of(g, axis, i) * chi.values[i] + ih * out.values[i];
  });
  return out;
}

double commutator_residual(int axis, const GridWaveFunction& chi) {
  check_axis(chi, axis);
  const GridWaveFunction lam = apply_momentum(axis, chi);
  const GridWaveFunction z_lam = apply_position(axis, lam);
  const GridWaveFunction zc = apply_position(axis, chi);
  const GridWaveFunction lam_z = apply_momentum(axis, zc);
  const cplx ih(0, chi.hbar);
  double scale = max_abs(chi);
  if (scale == 0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < chi.size(); ++i) {
    if (chi.grid.in_boundary_band(i, 4)) continue;
    const cplx r = z_lam.values[i] - lam_z.values[i] - ih * chi.values[i];
    worst = std::max(worst, std::abs(r));
  }
  return worst / scale;
}

namespace {

GridWaveFunction advective_transform(const Observable& symbol, const GridWaveFunction& chi, bool with_phase) {
  const PhaseGrid& g = chi.grid;
  const std::size_t N = g.size();
  const int axes = g.axes();
  GridWaveFunction out = like(chi);
  std::vector<std::vector<cplx>> d(axes, std::vector<cplx>(N));
  for (int a = 0; a < axes; ++a)
    partial_derivative_into(std::span<const cplx>(chi.values), g, a, std::span<cplx>(d[a]));
  const cplx f(0, -chi.hbar);
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const PhasePoint z = g.point(i);
      const PhasePoint x = symbol.vector_field(z);
      cplx acc{};
      for (int a = 0; a < axes; ++a) acc += x.coord(a) * d[a][i];
      out.values[i] = f * acc;
      if (with_phase) out.values[i] += symbol.phase_term(z) * chi.values[i];
    }
  });
  return out;
}

}  // namespace

GridWaveFunction kvn_liouvillian(const HamiltonianModel& model, const GridWaveFunction& chi) {
  return advective_transform(Observable::hamiltonian(model), chi, false);
}

GridWaveFunction kvh_liouvillian(const HamiltonianModel& model, const GridWaveFunction& chi) {
  return advective_transform(Observable::hamiltonian(model), chi, true);
}

GridWaveFunction kvn_transform(const Observable& symbol, const GridWaveFunction& chi) {
  return advective_transform(symbol, chi, false);
}

GridWaveFunction kvh_transform(const Observable& symbol, const GridWaveFunction& chi) {
  return advective_transform(symbol, chi, true);
}

std::array<GridWaveFunction, 3> angular_momentum(const GridWaveFunction& chi) {
  const PhaseGrid& g = chi.grid;
  const int n = g.dim();
  if (n < 2) fail(ErrorCode::unsupported_dimension, "angular momentum needs n >= 2");
  const std::size_t N = g.size();
  std::array<GridWaveFunction, 3> L{like(chi), like(chi), like(chi)};
  std::vector<std::vector<cplx>> dq(n, std::vector<cplx>(N)), dp(n, std::vector<cplx>(N));
  for (int j = 0; j < n; ++j) {
    partial_derivative_into(std::span<const cplx>(chi.values), g, j, std::span<cplx>(dq[j]));
    partial_derivative_into(std::span<const cplx>(chi.values), g, n + j, std::span<cplx>(dp[j]));
  }
  const cplx ih(0, chi.hbar);
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const PhasePoint z = g.point(i);
      std::array<cplx, 3> gq{}, gp{};
      std::array<double, 3> q{}, p{};
      for (int j = 0; j < n; ++j) {
        gq[j] = dq[j][i];
        gp[j] = dp[j][i];
        q[j] = z.q[j];
        p[j] = z.p[j];
      }
      for (int c = 0; c < 3; ++c) {
        const int j = (c + 1) % 3, k = (c + 2) % 3;
        L[c].values[i] = ih * (gp[j] * p[k] - gp[k] * p[j] + gq[j] * q[k] - gq[k] * q[j]);
      }
    }
  });
  return L;
}

std::array<GridWaveFunction, 3> linear_momentum(LinearMomentumVariant variant, const GridWaveFunction& chi) {
  const PhaseGrid& g = chi.grid;
  const int n = g.dim();
  std::array<GridWaveFunction, 3> P{like(chi), like(chi), like(chi)};
  const cplx f(0, -chi.hbar);
  for (int i = 0; i < n; ++i) {
    partial_derivative_into(std::span<const cplx>(chi.values), g, i, std::span<cplx>(P[i].values));
    const int p_axis = n + i;
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t idx = b; idx < e; ++idx) {
        P[i].values[idx] *= f;
        if (variant == LinearMomentumVariant::kvh)
          P[i].values[idx] += 0.5 * coord_of(g, p_axis, idx) * chi.values[idx];
      }
    });
  }
  return P;
}

GridWaveFunction generator_A(const std::array<double, 3>& xi, const GridWaveFunction& chi) {
  const PhaseGrid& g = chi.grid;
  const int n = g.dim();
  if (n != 3) fail(ErrorCode::unsupported_dimension, "generator A_xi needs n = 3");
  const std::size_t N = g.size();
  GridWaveFunction out = like(chi);
  std::vector<std::vector<cplx>> dq(3, std::vector<cplx>(N)), dp(3, std::vector<cplx>(N));
  for (int j = 0; j < 3; ++j) {
    partial_derivative_into(std::span<const cplx>(chi.values), g, j, std::span<cplx>(dq[j]));
    partial_derivative_into(std::span<const cplx>(chi.values), g, 3 + j, std::span<cplx>(dp[j]));
  }
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const PhasePoint z = g.point(i);
      cplx acc{};
      for (int c = 0; c < 3; ++c) {
        const int j = (c + 1) % 3, k = (c + 2) % 3;
        acc += xi[c] * (dq[j][i] * z.q[k] - dq[k][i] * z.q[j] + dp[j][i] * z.p[k] - dp[k][i] * z.p[j]);
      }
      out.values[i] = acc;
    }
  });
  return out;
}

GridWaveFunction generator_B(const std::array<double, 3>& xi, const GridWaveFunction& chi) {
  const PhaseGrid& g = chi.grid;
  const int n = g.dim();
  const std::size_t N = g.size();
  GridWaveFunction out = like(chi);
  std::vector<cplx> dchi(N);
  for (int i = 0; i < n; ++i) {
    if (xi[i] == 0.0) continue;
    partial_derivative_into(std::span<const cplx>(chi.values), g, i, std::span<cplx>(dchi));
    for (std::size_t idx = 0; idx < N; ++idx) out.values[idx] -= xi[i] * dchi[idx];
  }
  const cplx m(0, -0.5 / chi.hbar);
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    for (std::size_t idx = b; idx < e; ++idx) {
      double pxi = 0.0;
      for (int i = 0; i < n; ++i) pxi += coord_of(g, n + i, idx) * xi[i];
      out.values[idx] += m * pxi * chi.values[idx];
    }
  });
  return out;
}

namespace {

struct AxisTaps {
  int count = 0;          // number of contributing nodes (0 = target outside)
  int node[4] = {0, 0, 0, 0};
  double w[4] = {0, 0, 0, 0};
};

// Lagrange cubic weights along one axis. Targets within 1e-12 spacings of a
// node collapse to that node, so node-aligned maps are exact.
AxisTaps cubic_taps(const PhaseGrid& g, int axis, double x) {
  AxisTaps t;
  const double lo = g.lower(axis), dx = g.spacing(axis);
  const int count = g.count(axis);
  const double u = (x - lo) / dx;
  if (u < -0.5 || u > count - 0.5) return t;  // outside: value is zero
  int j = static_cast<int>(std::floor(u));
  if (j < 0) j = 0;
  if (j > count - 2) j = count - 2;
  double s = u - j;
  if (std::abs(s) < 1e-12) s = 0.0;
  if (std::abs(s - 1.0) < 1e-12) {
    ++j;
    s = 0.0;
  }
  if (s == 0.0) {
    if (j >= 0 && j < count) {
      t.node[0] = j;
      t.w[0] = 1.0;
      t.count = 1;
    }
    return t;
  }
  const double lw[4] = {-s * (s - 1.0) * (s - 2.0) / 6.0, (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
                        -(s + 1.0) * s * (s - 2.0) / 2.0, (s + 1.0) * s * (s - 1.0) / 6.0};
  for (int k = 0; k < 4; ++k) {
    const int node = j - 1 + k;
    if (node < 0 || node >= count) continue;  // zero ghost values
    t.node[t.count] = node;
    t.w[t.count] = lw[k];
    ++t.count;
  }
  return t;
}

// tensor-product cubic interpolation at an arbitrary phase-space target
cplx sample_cubic(const PhaseGrid& g, const std::vector<cplx>& values, const std::array<double, 6>& target) {
  const int axes = g.axes();
  std::array<AxisTaps, 6> taps;
  for (int a = 0; a < axes; ++a) {
    taps[a] = cubic_taps(g, a, target[a]);
    if (taps[a].count == 0) return cplx{};
  }
  cplx acc{};
  std::array<int, 6> pick{};
  for (;;) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int a = 0; a < axes; ++a) {
      w *= taps[a].w[pick[a]];
      flat += static_cast<std::size_t>(taps[a].node[pick[a]]) * g.stride(a);
    }
    acc += w * values[flat];
    int a = axes - 1;
    while (a >= 0 && ++pick[a] == taps[a].count) pick[a--] = 0;
    if (a < 0) break;
  }
  return acc;
}

void check_decaying_support(const GridWaveFunction& chi, const char* op) {
  const double band = boundary_band_max(chi, 2);
  const double scale = max_abs(chi);
  if (scale > 0 && band > 1e-6 * scale)
    fail(ErrorCode::support_escapes_domain,
         std::string(op) + ": state does not decay in the boundary band, support would leave the domain");
}

}  // namespace

GridWaveFunction rotation_action(const std::array<std::array<double, 3>, 3>& rot, const GridWaveFunction& chi) {
  const PhaseGrid& g = chi.grid;
  if (g.dim() != 3) fail(ErrorCode::unsupported_dimension, "rotation action needs n = 3");
  check_decaying_support(chi, "rotation_action");
  GridWaveFunction out = like(chi);
  // R^-1 = R^T for rotations
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const PhasePoint z = g.point(i);
      std::array<double, 6> target{};
      for (int r = 0; r < 3; ++r) {
        target[r] = rot[0][r] * z.q[0] + rot[1][r] * z.q[1] + rot[2][r] * z.q[2];
        target[3 + r] = rot[0][r] * z.p[0] + rot[1][r] * z.p[1] + rot[2][r] * z.p[2];
      }
      out.values[i] = sample_cubic(g, chi.values, target);
    }
  });
  return out;
}

GridWaveFunction translation_action(const std::array<double, 3>& v, const GridWaveFunction& chi) {
  const PhaseGrid& g = chi.grid;
  const int n = g.dim();
  check_decaying_support(chi, "translation_action");
  GridWaveFunction out = like(chi);
  const double inv2h = 0.5 / chi.hbar;
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    std::array<AxisTaps, 3> taps;
    std::array<int, 6> idx{};
    for (std::size_t i = b; i < e; ++i) {
      g.decompose(i, std::span<int>(idx.data(), g.axes()));
      const PhasePoint z = g.point(i);
      bool outside = false;
      for (int a = 0; a < n; ++a) {
        taps[a] = cubic_taps(g, a, z.q[a] - v[a]);
        if (taps[a].count == 0) outside = true;
      }
      cplx val{};
      if (!outside) {
        // tensor over the q axes only; p indices stay on nodes
        std::size_t p_part = 0;
        for (int a = n; a < g.axes(); ++a) p_part += static_cast<std::size_t>(idx[a]) * g.stride(a);
        std::array<int, 3> pick{};
        for (;;) {
          double w = 1.0;
          std::size_t flat = p_part;
          for (int a = 0; a < n; ++a) {
            w *= taps[a].w[pick[a]];
            flat += static_cast<std::size_t>(taps[a].node[pick[a]]) * g.stride(a);
          }
          val += w * chi.values[flat];
          int a = n - 1;
          while (a >= 0 && ++pick[a] == taps[a].count) pick[a--] = 0;
          if (a < 0) break;
        }
      }
      double pv = 0.0;
      for (int a = 0; a < n; ++a) pv += z.p[a] * v[a];
      out.values[i] = std::polar(1.0, inv2h * pv) * val;
    }
  });
  return out;
}

std::array<std::array<double, 3>, 3> rotation_about(const std::array<double, 3>& xi, double t) {
  const double norm = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
  std::array<std::array<double, 3>, 3> r{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  if (norm == 0.0 || t == 0.0) return r;
  const double angle = norm * t;
  const std::array<double, 3> u{xi[0] / norm, xi[1] / norm, xi[2] / norm};
  const double c = std::cos(angle), s = std::sin(angle), ic = 1.0 - c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = ic * u[i] * u[j] + (i == j ? c : 0.0);
  r[0][1] -= s * u[2];
  r[0][2] += s * u[1];
  r[1][0] += s * u[2];
  r[1][2] -= s * u[0];
  r[2][0] -= s * u[1];
  r[2][1] += s * u[0];
  return r;
}

}  // namespace kvh
