#include "kvh/qmc.hpp"

#include <cmath>

#include "kvh/parallel.hpp"
#include "kvh/sobol.hpp"

namespace kvh {
namespace {

constexpr int kNorm = 0, kEnergy = 1, kL = 2, kP = 5, kPk = 8;
constexpr int kDecL = 11;  // black, red, blue, green, total (x3 each)
constexpr int kDecP = 26;
constexpr int kQuantities = 41;
constexpr std::size_t kChunk = 512;

struct ChunkSums {
  // [quantity][parity of the sample index]
  double sums[kQuantities][2];
  long long count[2];
};

}  // namespace

std::vector<QmcCheckpoint> qmc_expectations(const CharacteristicGaussian& chi0, const HamiltonianModel& model,
                                            Formalism formalism, const QmcRequest& request) {
  const int n = chi0.center.n;
  if (n != 3) fail(ErrorCode::unsupported_dimension, "qmc expectations are built for n = 3");
  if (request.sample_count < 16) fail(ErrorCode::insufficient_samples, "qmc needs at least 16 samples");
  if (request.checkpoints.empty()) fail(ErrorCode::invalid_argument, "qmc needs at least one checkpoint");
  for (std::size_t k = 1; k < request.checkpoints.size(); ++k)
    if (!(request.checkpoints[k] > request.checkpoints[k - 1]))
      fail(ErrorCode::invalid_argument, "qmc checkpoints must be strictly increasing");
  if (!(request.checkpoints.front() >= 0)) fail(ErrorCode::invalid_argument, "qmc checkpoints must be >= 0");

  const int K = static_cast<int>(request.checkpoints.size());
  const long long N = request.sample_count;
  const int axes = 2 * n;
  const double h_fd = request.fd_step_rel * chi0.sigma;
  const double hbar = chi0.hbar;
  const bool kvh = formalism == Formalism::kvh;

  double lo[6], width = 12.0 * chi0.sigma, volume = 1.0;
  for (int a = 0; a < axes; ++a) {
    lo[a] = chi0.center.coord(a) - 6.0 * chi0.sigma;
    volume *= width;
  }

  const SobolSequence sobol(axes, request.seed);

  const std::size_t chunks = (static_cast<std::size_t>(N) + kChunk - 1) / kChunk;
  std::vector<std::vector<ChunkSums>> partials(K, std::vector<ChunkSums>(chunks));
  for (auto& per_k : partials)
    for (auto& c : per_k) {
      for (int q = 0; q < kQuantities; ++q) c.sums[q][0] = c.sums[q][1] = 0.0;
      c.count[0] = c.count[1] = 0;
    }
  std::vector<std::vector<long long>> abort_counts(K, std::vector<long long>(chunks, 0));

  parallel_for_grain(static_cast<std::size_t>(N), kChunk, [&](std::size_t begin, std::size_t end) {
    const std::size_t chunk = begin / kChunk;
    double u[6];
    for (std::size_t i = begin; i < end; ++i) {
      sobol.point(i, std::span<double>(u, axes));
      PhasePoint z0;
      z0.n = n;
      for (int a = 0; a < axes; ++a) z0.set_coord(a, lo[a] + width * u[a]);
      const cplx chi_at_z0 = chi0.eval(z0);
      const int parity = static_cast<int>(i & 1);

      PhasePoint w = z0;
      double theta = 0.0;
      double t_prev = 0.0;
      int k_dead = K;
      for (int k = 0; k < K && k_dead == K; ++k) {
        const double t_k = request.checkpoints[k];
        if (t_k > t_prev) {
          const FlowResult seg = flow_to(model, w, t_k - t_prev, request.dt);
          if (seg.aborted) {
            k_dead = k;
            break;
          }
          w = seg.z;
          theta += seg.phase;
          t_prev = t_k;
        }

        // chi_t and its gradient at the transported point
        const cplx chi_w = (kvh ? std::polar(1.0, -theta / hbar) : cplx(1.0, 0.0)) * chi_at_z0;
        cplx grad[6];
        bool fd_dead = false;
        for (int a = 0; a < axes && !fd_dead; ++a) {
          cplx side[2];
          for (int s = 0; s < 2; ++s) {
            PhasePoint wp = w;
            wp.set_coord(a, w.coord(a) + (s == 0 ? h_fd : -h_fd));
            if (t_k == 0.0) {
              side[s] = chi0.eval(wp);
              continue;
            }
            const FlowResult back = flow_to(model, wp, -t_k, request.dt);
            if (back.aborted) {
              fd_dead = true;
              break;
            }
            const double theta_arrive = -back.phase;
            side[s] = (kvh ? std::polar(1.0, -theta_arrive / hbar) : cplx(1.0, 0.0)) * chi0.eval(back.z);
          }
          if (!fd_dead) grad[a] = (side[0] - side[1]) / (2.0 * h_fd);
        }
        if (fd_dead) {
          k_dead = k;
          break;
        }

        const PhasePoint x = model.vector_field(w);
        const double a_w = model.phase_term(w);
        cplx kvn_app{};
        for (int a = 0; a < axes; ++a) kvn_app += x.coord(a) * grad[a];
        kvn_app *= cplx(0, -hbar);
        const cplx alpha_app = a_w * chi_w;
        const cplx kvh_app = kvn_app + alpha_app;
        const cplx energy_app = kvh ? kvh_app : kvn_app;
        const cplx cbar = std::conj(chi_w);

        cplx L_app[3], P_app[3], Pk_app[3];
        for (int c = 0; c < 3; ++c) {
          const int j = (c + 1) % 3, l = (c + 2) % 3;
          L_app[c] = cplx(0, hbar) * (grad[3 + j] * w.p[l] - grad[3 + l] * w.p[j] + grad[j] * w.q[l] -
                                      grad[l] * w.q[j]);
          Pk_app[c] = cplx(0, -hbar) * grad[c];
          P_app[c] = Pk_app[c] + 0.5 * w.p[c] * chi_w;
        }

        ChunkSums& acc = partials[k][chunk];
        acc.count[parity] += 1;
        acc.sums[kNorm][parity] += std::norm(chi_w);
        acc.sums[kEnergy][parity] += (cbar * energy_app).real();
        const double two_over_h = 2.0 / hbar;
        for (int c = 0; c < 3; ++c) {
          acc.sums[kL + c][parity] += (cbar * L_app[c]).real();
          acc.sums[kP + c][parity] += (cbar * P_app[c]).real();
          acc.sums[kPk + c][parity] += (cbar * Pk_app[c]).real();
          const cplx lbar = std::conj(L_app[c]);
          acc.sums[kDecL + 0 + c][parity] += two_over_h * (lbar * kvn_app).imag();
          acc.sums[kDecL + 3 + c][parity] += two_over_h * (lbar * alpha_app).imag();
          // blue and green vanish for the angular momentum (no operator delta)
          acc.sums[kDecL + 12 + c][parity] += two_over_h * (lbar * kvh_app).imag();
          const cplx pkbar = std::conj(Pk_app[c]);
          const cplx dbar = std::conj(0.5 * w.p[c] * chi_w);
          acc.sums[kDecP + 0 + c][parity] += two_over_h * (pkbar * kvn_app).imag();
          acc.sums[kDecP + 3 + c][parity] += two_over_h * (pkbar * alpha_app).imag();
          acc.sums[kDecP + 6 + c][parity] += two_over_h * (dbar * kvn_app).imag();
          acc.sums[kDecP + 9 + c][parity] += two_over_h * (dbar * alpha_app).imag();
          acc.sums[kDecP + 12 + c][parity] += two_over_h * (std::conj(P_app[c]) * kvh_app).imag();
        }
      }
      for (int k = k_dead; k < K; ++k) ++abort_counts[k][chunk];
    }
  });

  std::vector<QmcCheckpoint> out(K);
  long long worst_aborts = 0;
  for (int k = 0; k < K; ++k) {
    QmcCheckpoint& cp = out[k];
    cp.t = request.checkpoints[k];
    double sums[kQuantities][2] = {};
    long long counts[2] = {0, 0};
    for (std::size_t c = 0; c < chunks; ++c) {
      for (int q = 0; q < kQuantities; ++q) {
        sums[q][0] += partials[k][c].sums[q][0];
        sums[q][1] += partials[k][c].sums[q][1];
      }
      counts[0] += partials[k][c].count[0];
      counts[1] += partials[k][c].count[1];
      cp.aborted += abort_counts[k][c];
    }
    worst_aborts = std::max(worst_aborts, cp.aborted);
    const long long total_count = counts[0] + counts[1];
    if (total_count == 0) fail(ErrorCode::too_many_aborts, "qmc: all samples aborted");
    auto estimate = [&](int q) {
      QmcValue v;
      v.value = volume * (sums[q][0] + sums[q][1]) / static_cast<double>(total_count);
      if (counts[0] > 0 && counts[1] > 0) {
        const double even = volume * sums[q][0] / static_cast<double>(counts[0]);
        const double odd = volume * sums[q][1] / static_cast<double>(counts[1]);
        v.error = 0.5 * std::abs(even - odd);
      }
      return v;
    };
    cp.norm = estimate(kNorm);
    cp.energy = estimate(kEnergy);
    cp.dec_L.components = 3;
    cp.dec_P.components = 3;
    for (int c = 0; c < 3; ++c) {
      cp.L[c] = estimate(kL + c);
      cp.P[c] = estimate(kP + c);
      cp.P_kvn[c] = estimate(kPk + c);
      cp.dec_L.black[c] = estimate(kDecL + 0 + c).value;
      cp.dec_L.red[c] = estimate(kDecL + 3 + c).value;
      cp.dec_L.blue[c] = estimate(kDecL + 6 + c).value;
      cp.dec_L.green[c] = estimate(kDecL + 9 + c).value;
      cp.dec_L.total[c] = estimate(kDecL + 12 + c).value;
      cp.dec_P.black[c] = estimate(kDecP + 0 + c).value;
      cp.dec_P.red[c] = estimate(kDecP + 3 + c).value;
      cp.dec_P.blue[c] = estimate(kDecP + 6 + c).value;
      cp.dec_P.green[c] = estimate(kDecP + 9 + c).value;
      cp.dec_P.total[c] = estimate(kDecP + 12 + c).value;
    }
  }
  if (worst_aborts * 1000 > N)
    fail(ErrorCode::too_many_aborts, "qmc: more than 0.1% of samples hit the singular region (" +
                                         std::to_string(worst_aborts) + " of " + std::to_string(N) + ")");
  return out;
}

}  // namespace kvh
