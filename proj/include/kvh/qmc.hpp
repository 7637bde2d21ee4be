#pragma once

#include <cstdint>
#include <vector>

#include "kvh/diagnostics.hpp"
#include "kvh/propagation.hpp"

namespace kvh {

// Quasi-Monte Carlo expectations for n = 3 characteristics states, where
// grids are infeasible. Initial points are Sobol samples of the box covering
// +-6 sigma of the initial Gaussian; the integrand is evaluated at the
// transported points (the flow preserves volume). Derivatives of chi_t at a
// transported point use central differences of backward characteristics with
// step h_fd = fd_step_rel * sigma.
struct QmcRequest {
  long long sample_count = 1 << 16;
  std::uint64_t seed = 0;
  double dt = 2e-3;
  double fd_step_rel = 1e-4;
  std::vector<double> checkpoints;  // increasing, first may be 0
};

// value + interleaved-half-sample error estimate
struct QmcValue {
  double value = 0;
  double error = 0;
};

struct QmcCheckpoint {
  double t = 0;
  QmcValue norm;     // <chi|chi>
  QmcValue energy;   // <chi|script-L_H chi> (or KvN for the kvn formalism)
  std::array<QmcValue, 3> L, P, P_kvn;
  RateDecomposition dec_L, dec_P;
  long long aborted = 0;  // samples lost to the singular region at this time
};

std::vector<QmcCheckpoint> qmc_expectations(const CharacteristicGaussian& chi0, const HamiltonianModel& model,
                                            Formalism formalism, const QmcRequest& request);

}  // namespace kvh
