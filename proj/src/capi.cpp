#include "kvh_lab.h"

#include <cstring>
#include <string>

#include "kvh/lab.hpp"
#include "kvh/propagation.hpp"

namespace {

thread_local std::string t_last_error;

void set_error(const std::string& msg) { t_last_error = msg; }

int status_for(const kvh::Error& e) {
  switch (e.code()) {
    case kvh::ErrorCode::non_finite:
    case kvh::ErrorCode::singular_region:
    case kvh::ErrorCode::too_many_aborts:
      return KVH_ERR_NUMERICAL;
    case kvh::ErrorCode::config_error:
    case kvh::ErrorCode::io_error:
      return KVH_ERR_CONFIG;
    default:
      return KVH_ERR_INVALID;
  }
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const kvh::Error& e) {
    set_error(e.what());
    return status_for(e);
  } catch (const std::exception& e) {
    set_error(e.what());
    return KVH_ERR_INVALID;
  }
}

template <class T, class Fn>
T* guarded_create(Fn&& fn) {
  try {
    return fn();
  } catch (const kvh::Error& e) {
    set_error(e.what());
    return nullptr;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

kvh::LabOptions to_lab_options(const kvh_options* options) {
  kvh::LabOptions out;
  if (options) {
    if (options->has_seed) out.seed = options->seed;
    out.threads = options->threads;
  }
  return out;
}

kvh::PhasePoint to_point(int n, const double* q, const double* p) {
  return kvh::make_point(n, std::span<const double>(q, static_cast<std::size_t>(n)),
                         std::span<const double>(p, static_cast<std::size_t>(n)));
}

}  // namespace

struct kvh_model {
  kvh::HamiltonianModel model;
};

struct kvh_grid {
  kvh::PhaseGrid grid;
};

struct kvh_state {
  kvh::GridWaveFunction chi;
};

extern "C" {

const char* kvh_last_error(void) { return t_last_error.c_str(); }

const char* kvh_version(void) { return "kvh-lab 1.0.0"; }

int kvh_run(const char* config_path, const char* out_dir, const kvh_options* options) {
  if (!config_path) {
    set_error("config_path is required");
    return KVH_ERR_INVALID;
  }
  std::string message;
  const int rc = kvh::lab_run(config_path, out_dir ? out_dir : "", to_lab_options(options), message);
  if (rc != 0) set_error(message);
  return rc;
}

int kvh_check(const char* config_path, const char* out_dir, const kvh_options* options) {
  if (!config_path) {
    set_error("config_path is required");
    return KVH_ERR_INVALID;
  }
  std::string message;
  const int rc = kvh::lab_check(config_path, out_dir ? out_dir : "", to_lab_options(options), message);
  if (rc != 0) set_error(message);
  return rc;
}

int kvh_oracle(const char* config_path, const char* points_csv, const char* out_csv,
               const kvh_options* options) {
  if (!config_path || !points_csv || !out_csv) {
    set_error("config_path, points_csv and out_csv are required");
    return KVH_ERR_INVALID;
  }
  std::string message;
  const int rc = kvh::lab_oracle(config_path, points_csv, out_csv, to_lab_options(options), message);
  if (!message.empty()) set_error(message);  // abort summary even on success
  return rc;
}

kvh_model* kvh_model_harmonic(double k) {
  return guarded_create<kvh_model>([&] { return new kvh_model{kvh::HamiltonianModel::harmonic(k)}; });
}

kvh_model* kvh_model_anharmonic(double a, double b) {
  return guarded_create<kvh_model>([&] { return new kvh_model{kvh::HamiltonianModel::anharmonic(a, b)}; });
}

kvh_model* kvh_model_kepler(double mu, double lambda, double r_min) {
  return guarded_create<kvh_model>(
      [&] { return new kvh_model{kvh::HamiltonianModel::kepler_reduced(mu, lambda, r_min)}; });
}

kvh_model* kvh_model_free(double mass) {
  return guarded_create<kvh_model>([&] { return new kvh_model{kvh::HamiltonianModel::free_particle(mass)}; });
}

void kvh_model_destroy(kvh_model* model) { delete model; }

int kvh_model_value(const kvh_model* model, int n, const double* q, const double* p, double* out) {
  if (!model || !q || !p || !out) {
    set_error("null argument");
    return KVH_ERR_INVALID;
  }
  return guarded([&] {
    *out = model->model.value(to_point(n, q, p));
    return KVH_OK;
  });
}

int kvh_model_gradient(const kvh_model* model, int n, const double* q, const double* p, double* dq,
                       double* dp) {
  if (!model || !q || !p || !dq || !dp) {
    set_error("null argument");
    return KVH_ERR_INVALID;
  }
  return guarded([&] {
    const kvh::PhasePoint g = model->model.grad(to_point(n, q, p));
    for (int i = 0; i < n; ++i) {
      dq[i] = g.q[i];
      dp[i] = g.p[i];
    }
    return KVH_OK;
  });
}

int kvh_model_phase_term(const kvh_model* model, int n, const double* q, const double* p, double* out) {
  if (!model || !q || !p || !out) {
    set_error("null argument");
    return KVH_ERR_INVALID;
  }
  return guarded([&] {
    *out = model->model.phase_term(to_point(n, q, p));
    return KVH_OK;
  });
}

int kvh_model_flow(const kvh_model* model, int n, const double* q, const double* p, double t, double dt,
                   double* q_out, double* p_out, double* phase_out) {
  if (!model || !q || !p || !q_out || !p_out) {
    set_error("null argument");
    return KVH_ERR_INVALID;
  }
  return guarded([&]() -> int {
    const kvh::FlowResult res = kvh::flow_to(model->model, to_point(n, q, p), t, dt);
    if (res.aborted) {
      set_error("trajectory entered the singular region at t = " + std::to_string(res.abort_time));
      return KVH_ERR_NUMERICAL;
    }
    for (int i = 0; i < n; ++i) {
      q_out[i] = res.z.q[i];
      p_out[i] = res.z.p[i];
    }
    if (phase_out) *phase_out = res.phase;
    return KVH_OK;
  });
}

kvh_grid* kvh_grid_create(int n, const double* lo, const double* hi, const int* counts) {
  if (!lo || !hi || !counts) {
    set_error("null argument");
    return nullptr;
  }
  return guarded_create<kvh_grid>([&] {
    const std::size_t axes = 2 * static_cast<std::size_t>(n);
    return new kvh_grid{kvh::PhaseGrid(n, std::span<const double>(lo, axes), std::span<const double>(hi, axes),
                                       std::span<const int>(counts, axes))};
  });
}

void kvh_grid_destroy(kvh_grid* grid) { delete grid; }

long long kvh_grid_size(const kvh_grid* grid) {
  return grid ? static_cast<long long>(grid->grid.size()) : 0;
}

kvh_state* kvh_state_gaussian(const kvh_grid* grid, const double* center_q, const double* center_p,
                              double sigma, const double* wavevector, double hbar) {
  if (!grid || !center_q || !center_p) {
    set_error("null argument");
    return nullptr;
  }
  return guarded_create<kvh_state>([&] {
    kvh::InitialStateSpec spec;
    const int n = grid->grid.dim();
    spec.center = to_point(n, center_q, center_p);
    spec.sigma = sigma;
    if (wavevector)
      for (int a = 0; a < 2 * n; ++a) spec.phase_wavevector[a] = wavevector[a];
    return new kvh_state{kvh::make_initial(spec, grid->grid, hbar)};
  });
}

void kvh_state_destroy(kvh_state* state) { delete state; }

long long kvh_state_size(const kvh_state* state) {
  return state ? static_cast<long long>(state->chi.size()) : 0;
}

double kvh_state_norm_sq(const kvh_state* state) { return state ? kvh::norm_sq(state->chi) : 0.0; }

int kvh_state_values(const kvh_state* state, double* re, double* im) {
  if (!state || !re || !im) {
    set_error("null argument");
    return KVH_ERR_INVALID;
  }
  for (std::size_t i = 0; i < state->chi.size(); ++i) {
    re[i] = state->chi.values[i].real();
    im[i] = state->chi.values[i].imag();
  }
  return KVH_OK;
}

int kvh_state_energy(const kvh_state* state, const kvh_model* model, int kvh_formalism, double* out) {
  if (!state || !model || !out) {
    set_error("null argument");
    return KVH_ERR_INVALID;
  }
  return guarded([&] {
    const kvh::GridWaveFunction applied = kvh_formalism
                                              ? kvh::kvh_liouvillian(model->model, state->chi)
                                              : kvh::kvn_liouvillian(model->model, state->chi);
    *out = kvh::expectation(applied, state->chi).real();
    return KVH_OK;
  });
}

int kvh_state_propagate(kvh_state* state, const kvh_model* model, int kvh_formalism, double dt,
                        long long steps, double cfl_safety, double decay_tolerance) {
  if (!state || !model) {
    set_error("null argument");
    return KVH_ERR_INVALID;
  }
  return guarded([&] {
    kvh::PropagationConfig cfg;
    cfg.dt = dt;
    cfg.steps = steps;
    cfg.formalism = kvh_formalism ? kvh::Formalism::kvh : kvh::Formalism::kvn;
    cfg.cfl_safety = cfl_safety;
    cfg.diagnostics_every = steps;  // endpoints only
    cfg.decay_tolerance = decay_tolerance;
    auto [fin, series] = kvh::propagate_grid(state->chi, model->model, cfg);
    state->chi = std::move(fin);
    return KVH_OK;
  });
}

}  // extern "C"
