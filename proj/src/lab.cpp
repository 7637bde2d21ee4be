#include "kvh/lab.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "kvh/operators.hpp"
#include "kvh/parallel.hpp"
#include "kvh/propagation.hpp"
#include "kvh/qmc.hpp"

namespace kvh {
namespace {

using nlohmann::ordered_json;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void resolve_threads(const LabOptions& options) {
  int threads = options.threads;
  if (threads < 0) {
    threads = 0;
    if (const char* env = std::getenv("KVH_LAB_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end && *end == '\0' && v >= 0) threads = static_cast<int>(v);
    }
  }
  set_thread_count(threads);
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::non_finite:
    case ErrorCode::singular_region:
    case ErrorCode::too_many_aborts:
      return 3;
    default:
      return 1;
  }
}

// ---------------------------------------------------------------------------
// run artifacts, computed lazily so checks can share them

struct GridRun {
  GridWaveFunction final;
  std::vector<DiagnosticRecord> series;
};

struct CheckContext {
  CheckContext(const RunConfig& config, std::uint64_t seed_value, std::string dir)
      : cfg(config), seed(seed_value), out_dir(std::move(dir)) {}

  const RunConfig& cfg;
  std::uint64_t seed;
  std::string out_dir;

  std::optional<PhaseGrid> grid_;
  std::optional<GridWaveFunction> chi0_;
  std::optional<GridRun> run_;
  std::optional<std::vector<QmcCheckpoint>> qmc_;
  std::vector<std::pair<long long, std::string>> snapshot_files;

  const PhaseGrid& grid() {
    if (!grid_) grid_ = cfg.make_grid();
    return *grid_;
  }
  const GridWaveFunction& chi0() {
    if (!chi0_) chi0_ = make_initial(cfg.initial_state, grid(), cfg.hbar);
    return *chi0_;
  }
  CharacteristicGaussian characteristic_state() const {
    CharacteristicGaussian cg;
    cg.center = cfg.initial_state.center;
    cg.sigma = cfg.initial_state.sigma;
    cg.wavevector = cfg.initial_state.phase_wavevector;
    cg.hbar = cfg.hbar;
    return cg;
  }
  double t_final() const {
    return cfg.representation == Representation::grid ? static_cast<double>(cfg.steps) * cfg.dt
                                                      : cfg.checkpoints.back();
  }

  const GridRun& run();
  const std::vector<QmcCheckpoint>& qmc();
  double tol(const std::string& name, double fallback) const {
    auto it = cfg.tolerance_overrides.find(name);
    return it == cfg.tolerance_overrides.end() ? fallback : it->second;
  }
};

void write_snapshot(const std::string& path, const GridWaveFunction& chi) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  const PhaseGrid& g = chi.grid;
  for (int a = 0; a < g.axes(); ++a) out << "z" << a + 1 << ",";
  out << "re,im\r\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PhasePoint z = g.point(i);
    for (int a = 0; a < g.axes(); ++a) out << g17(z.coord(a)) << ",";
    out << g17(chi.values[i].real()) << "," << g17(chi.values[i].imag()) << "\r\n";
  }
}

const GridRun& CheckContext::run() {
  if (!run_) {
    PropagationConfig pc;
    pc.dt = cfg.dt;
    pc.steps = cfg.steps;
    pc.formalism = cfg.formalism;
    pc.cfl_safety = cfg.cfl_safety;
    pc.diagnostics_every = cfg.diagnostics_every;
    pc.decay_tolerance = cfg.decay_tolerance;

    std::map<long long, std::size_t> snapshot_steps;
    for (std::size_t i = 0; i < cfg.snapshots.size(); ++i) {
      const long long step = std::llround(cfg.snapshots[i] / cfg.dt);
      if (step < 0 || step > cfg.steps)
        fail(ErrorCode::config_error, "config error at $.snapshots: time outside the run");
      snapshot_steps[step] = i;
    }
    if (snapshot_steps.count(0)) {
      const std::string path = out_dir + "/snapshot_" + std::to_string(snapshot_steps[0]) + ".csv";
      write_snapshot(path, chi0());
      snapshot_files.emplace_back(0, path);
    }
    auto on_step = [&](long long step, const GridWaveFunction& chi) {
      auto it = snapshot_steps.find(step);
      if (it != snapshot_steps.end()) {
        const std::string path = out_dir + "/snapshot_" + std::to_string(it->second) + ".csv";
        write_snapshot(path, chi);
        snapshot_files.emplace_back(step, path);
      }
    };
    auto [fin, series] = propagate_grid(chi0(), cfg.model, pc,
                                        snapshot_steps.empty() ? std::function<void(long long, const GridWaveFunction&)>{}
                                                               : on_step);
    run_ = GridRun{std::move(fin), std::move(series)};
  }
  return *run_;
}

const std::vector<QmcCheckpoint>& CheckContext::qmc() {
  if (!qmc_) {
    QmcRequest req;
    req.sample_count = cfg.sampler.sample_count;
    req.seed = seed;
    req.dt = cfg.dt;
    req.fd_step_rel = cfg.sampler.fd_step_rel;
    req.checkpoints = cfg.checkpoints;
    qmc_ = qmc_expectations(characteristic_state(), cfg.model, cfg.formalism, req);
  }
  return *qmc_;
}

// ---------------------------------------------------------------------------
// csv writers

void write_series_csv(const std::string& path, const std::vector<DiagnosticRecord>& series) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << "t,norm,energy,Lx,Ly,Lz,Px,Py,Pz,Pkvnx,Pkvny,Pkvnz";
  const char* axes = "xyz";
  for (const char* obs : {"L", "P"})
    for (const char* color : {"black", "red", "blue", "green", "total"})
      for (int c = 0; c < 3; ++c) out << ",rate_" << color << "_" << obs << axes[c];
  out << "\r\n";
  for (const auto& r : series) {
    out << g17(r.t) << "," << g17(r.norm) << "," << g17(r.energy);
    for (int c = 0; c < 3; ++c) out << "," << g17(r.L[c]);
    for (int c = 0; c < 3; ++c) out << "," << g17(r.P[c]);
    for (int c = 0; c < 3; ++c) out << "," << g17(r.P_kvn[c]);
    for (const auto* dec : {&r.dec_L, &r.dec_P}) {
      for (const auto* arr : {&dec->black, &dec->red, &dec->blue, &dec->green, &dec->total})
        for (int c = 0; c < 3; ++c) out << "," << g17((*arr)[c]);
    }
    out << "\r\n";
  }
}

void write_qmc_series_csv(const std::string& path, const std::vector<QmcCheckpoint>& cps) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << "t,norm,energy,Lx,Ly,Lz,Px,Py,Pz,Pkvnx,Pkvny,Pkvnz";
  const char* axes = "xyz";
  for (const char* obs : {"L", "P"})
    for (const char* color : {"black", "red", "blue", "green", "total"})
      for (int c = 0; c < 3; ++c) out << ",rate_" << color << "_" << obs << axes[c];
  out << "\r\n";
  for (const auto& cp : cps) {
    out << g17(cp.t) << "," << g17(cp.norm.value) << "," << g17(cp.energy.value);
    for (int c = 0; c < 3; ++c) out << "," << g17(cp.L[c].value);
    for (int c = 0; c < 3; ++c) out << "," << g17(cp.P[c].value);
    for (int c = 0; c < 3; ++c) out << "," << g17(cp.P_kvn[c].value);
    for (const auto* dec : {&cp.dec_L, &cp.dec_P}) {
      for (const auto* arr : {&dec->black, &dec->red, &dec->blue, &dec->green, &dec->total})
        for (int c = 0; c < 3; ++c) out << "," << g17((*arr)[c]);
    }
    out << "\r\n";
  }
}

// ---------------------------------------------------------------------------
// the named checks

struct CheckSpec {
  std::string name;
  std::function<bool(const RunConfig&)> applicable;
  std::function<CheckResult(CheckContext&)> runner;
};

double dec_sum_residual_scaled(const RateDecomposition& d) {
  double worst = 0;
  for (int c = 0; c < d.components; ++c) {
    const double sum = d.black[c] + d.red[c] + d.blue[c] + d.green[c];
    double scale = 1.0;
    for (double v : {d.black[c], d.red[c], d.blue[c], d.green[c], d.total[c]})
      scale = std::max(scale, std::abs(v));
    worst = std::max(worst, std::abs(sum - d.total[c]) / scale);
  }
  return worst;
}

double red_term_norm(const HamiltonianModel& model, const PhasePoint& center, double sigma, double hbar) {
  const int n = center.n;
  std::vector<double> lo(2 * n), hi(2 * n);
  std::vector<int> counts(2 * n, 32);
  for (int a = 0; a < 2 * n; ++a) {
    lo[a] = center.coord(a) - 8.0 * sigma;
    hi[a] = center.coord(a) + 8.0 * sigma;
  }
  PhaseGrid g(n, lo, hi, counts);
  InitialStateSpec spec;
  spec.center = center;
  spec.sigma = sigma;
  GridWaveFunction chi = make_initial(spec, g, hbar);
  auto kvh = kvh_liouvillian(model, chi);
  auto kvn = kvn_liouvillian(model, chi);
  std::vector<double> sq(chi.size());
  for (std::size_t i = 0; i < chi.size(); ++i) sq[i] = std::norm(kvh.values[i] - kvn.values[i]);
  return std::sqrt(integrate(g, std::span<const double>(sq)));
}

std::vector<CheckSpec> build_registry() {
  std::vector<CheckSpec> reg;
  auto grid_rep = [](const RunConfig& c) { return c.representation == Representation::grid; };
  auto char_rep = [](const RunConfig& c) { return c.representation == Representation::characteristics; };

  reg.push_back({"norm_drift", grid_rep, [](CheckContext& ctx) {
                   const auto& series = ctx.run().series;
                   const double n0 = series.front().norm;
                   double worst = 0;
                   for (const auto& r : series) worst = std::max(worst, std::abs(r.norm - n0) / n0);
                   const double tol = ctx.tol("norm_drift", 1e-8);
                   return CheckResult{"norm_drift", worst, tol, worst <= tol, false,
                                      "max relative drift of the state norm"};
                 }});

  reg.push_back({"energy_drift", grid_rep, [](CheckContext& ctx) {
                   const auto& series = ctx.run().series;
                   const double e0 = series.front().energy;
                   const double scale = std::max(std::abs(e0), 1e-12);
                   double worst = 0;
                   for (const auto& r : series) worst = std::max(worst, std::abs(r.energy - e0) / scale);
                   const double tol = ctx.tol("energy_drift", 1e-6);
                   return CheckResult{"energy_drift", worst, tol, worst <= tol, false,
                                      "max relative drift of <chi|L chi>, reference " + g17(e0)};
                 }});

  reg.push_back({"rate_identity_L",
                 [](const RunConfig& c) { return c.representation == Representation::grid && c.n >= 2; },
                 [](CheckContext& ctx) {
                   auto rep = rate_identity_check(ctx.run().series, RateObservable::angular_L, ctx.cfg.formalism);
                   const double tol = ctx.tol("rate_identity_L", 1e-4);
                   return CheckResult{"rate_identity_L", rep.max_rel_residual, tol, rep.max_rel_residual <= tol,
                                      false, "centered-FD d<L>/dt vs (2/hbar) Im<L chi|L_H chi>"};
                 }});

  reg.push_back({"rate_identity_P", grid_rep, [](CheckContext& ctx) {
                   auto rep = rate_identity_check(ctx.run().series, RateObservable::linear_P, ctx.cfg.formalism);
                   const double tol = ctx.tol("rate_identity_P", 1e-4);
                   return CheckResult{"rate_identity_P", rep.max_rel_residual, tol, rep.max_rel_residual <= tol,
                                      false, "centered-FD d<P>/dt vs (2/hbar) Im<P chi|L_H chi>"};
                 }});

  reg.push_back({"decomposition_sum", grid_rep, [](CheckContext& ctx) {
                   double worst = 0;
                   for (const auto& r : ctx.run().series) {
                     worst = std::max(worst, dec_sum_residual_scaled(r.dec_L));
                     worst = std::max(worst, dec_sum_residual_scaled(r.dec_P));
                   }
                   const double tol = ctx.tol("decomposition_sum", 1e-12);
                   return CheckResult{"decomposition_sum", worst, tol, worst <= tol, false,
                                      "black+red+blue+green vs the unsplit rate, every record"};
                 }});

  reg.push_back({"decomposition_pattern", grid_rep, [](CheckContext& ctx) {
                   // structurally-zero channels: blue/green for L always; red/green
                   // for both observables under quadratic-class models
                   double worst = 0;
                   const bool quad = ctx.cfg.model.quadratic_class();
                   for (const auto& r : ctx.run().series) {
                     for (int c = 0; c < r.dec_L.components; ++c) {
                       worst = std::max(worst, std::abs(r.dec_L.blue[c]));
                       worst = std::max(worst, std::abs(r.dec_L.green[c]));
                       if (quad) worst = std::max(worst, std::abs(r.dec_L.red[c]));
                     }
                     for (int c = 0; c < r.dec_P.components; ++c) {
                       worst = std::max(worst, std::abs(r.dec_P.green[c]));
                       if (quad) worst = std::max(worst, std::abs(r.dec_P.red[c]));
                     }
                   }
                   const double tol = ctx.tol("decomposition_pattern", 1e-12);
                   return CheckResult{"decomposition_pattern", worst, tol, worst <= tol, false,
                                      "L has the red channel only; quadratic models drop red and green"};
                 }});

  reg.push_back({"quadratic_coincidence",
                 [](const RunConfig& c) {
                   return c.representation == Representation::grid && c.model.quadratic_class();
                 },
                 [](CheckContext& ctx) {
                   const double worst = quadratic_coincidence_check(ctx.cfg.model, ctx.chi0());
                   const double tol = ctx.tol("quadratic_coincidence", 0.0);
                   return CheckResult{"quadratic_coincidence", worst, tol, worst <= tol, false,
                                      "max |script-L_H chi - L_H chi| on the initial state"};
                 }});

  reg.push_back({"commutators", grid_rep, [](CheckContext& ctx) {
                   // canonical probe: a wide centered gaussian the stencil
                   // resolves at the grid's own spacing
                   const PhaseGrid& g = ctx.grid();
                   GridWaveFunction probe;
                   probe.grid = g;
                   probe.hbar = ctx.cfg.hbar;
                   probe.values.resize(g.size());
                   for (std::size_t i = 0; i < g.size(); ++i) {
                     const PhasePoint z = g.point(i);
                     double e = 0;
                     for (int a = 0; a < g.axes(); ++a) {
                       const double center = 0.5 * (g.lower(a) + g.upper(a));
                       const double span = g.upper(a) - g.lower(a);
                       // the residual depends on sigma/dx only; 20 spacings
                       // put the stencil truncation below 1e-6
                       const double sigma = std::min(20.0 * g.spacing(a), span / 6.5);
                       const double d = z.coord(a) - center;
                       e += d * d / (4.0 * sigma * sigma);
                     }
                     probe.values[i] = std::exp(-e);
                   }
                   double worst = 0;
                   for (int a = 0; a < g.axes(); ++a)
                     worst = std::max(worst, commutator_residual(a, probe));
                   const double tol = ctx.tol("commutators", 1e-6);
                   return CheckResult{"commutators", worst, tol, worst <= tol, false,
                                      "[Z_m, Lambda_m] = i hbar on a grid-matched gaussian probe"};
                 }});

  reg.push_back({"kvh_energy_coincidence", grid_rep, [](CheckContext& ctx) {
                   auto rep = kvh_energy_coincidence_check(ctx.chi0(), ctx.cfg.model);
                   const double fallback = ctx.cfg.scenario == Scenario::harmonic ? 2e-6 : 1e-5;
                   const double tol = ctx.tol("kvh_energy_coincidence", fallback);
                   return CheckResult{"kvh_energy_coincidence", rep.residual, tol, rep.residual <= tol, false,
                                      "<chi|script-L_H chi> = " + g17(rep.lhs) + " vs int H rho_kvh = " + g17(rep.rhs)};
                 }});

  reg.push_back({"kvn_bracket_integral", grid_rep, [](CheckContext& ctx) {
                   auto rep = kvn_energy_mismatch_report(ctx.chi0(), ctx.cfg.model);
                   const double v = std::abs(rep.bracket_integral);
                   const double tol = ctx.tol("kvn_bracket_integral", 1e-8);
                   return CheckResult{"kvn_bracket_integral", v, tol, v <= tol, false,
                                      "integral of Im{chi*, chi} over phase space"};
                 }});

  reg.push_back({"kvn_energy_gap_ratio", grid_rep, [](CheckContext& ctx) {
                   auto rep = kvn_energy_mismatch_report(ctx.chi0(), ctx.cfg.model);
                   const double scale = std::max(std::abs(rep.physical), 1e-12);
                   const double v = std::abs(rep.gap) / scale;
                   const double tol = ctx.tol("kvn_energy_gap_ratio", 0.01);
                   return CheckResult{"kvn_energy_gap_ratio", v, tol, v > tol, true,
                                      "KvN energy " + g17(rep.h_kvn) + " vs physical " + g17(rep.physical) +
                                          "; the gap must exceed the threshold"};
                 }});

  reg.push_back({"oracle_equivalence",
                 [](const RunConfig& c) { return c.representation == Representation::grid && c.n == 1; },
                 [](CheckContext& ctx) {
                   const auto& fin = ctx.run().final;
                   auto pts = grid_points(ctx.grid());
                   auto oracle = propagate_characteristics(ctx.characteristic_state(), ctx.cfg.model,
                                                           ctx.cfg.formalism, ctx.t_final(),
                                                           std::min(ctx.cfg.dt, 1e-4), pts);
                   std::vector<double> sq(pts.size());
                   for (std::size_t i = 0; i < pts.size(); ++i) {
                     if (!oracle[i].state.ok) fail(ErrorCode::singular_region, "oracle trajectory aborted");
                     sq[i] = std::norm(fin.values[i] - oracle[i].value);
                   }
                   const double l2 = std::sqrt(integrate(ctx.grid(), std::span<const double>(sq)));
                   const double tol = ctx.tol("oracle_equivalence", 1e-4);
                   return CheckResult{"oracle_equivalence", l2, tol, l2 <= tol, false,
                                      "L2 distance between the grid solution and characteristics at t = " +
                                          g17(ctx.t_final())};
                 }});

  for (const bool kvh : {true, false}) {
    const std::string name = kvh ? "density_transport_kvh" : "density_transport_kvn";
    reg.push_back({name,
                   [kvh](const RunConfig& c) {
                     if (c.representation != Representation::grid || c.n != 1) return false;
                     return !kvh || c.formalism == Formalism::kvh;
                   },
                   [name, kvh](CheckContext& ctx) {
                     const auto& fin = ctx.run().final;
                     auto pts = grid_points(ctx.grid());
                     const auto kind = kvh ? DensityPrescription::kvh : DensityPrescription::kvn;
                     auto ref = transport_density(ctx.characteristic_state(), kind, ctx.cfg.model, ctx.t_final(),
                                                  std::min(ctx.cfg.dt, 1e-4), pts);
                     std::vector<double> rho =
                         kvh ? density_kvh(fin) : density_kvn(fin);
                     std::vector<double> absdiff(pts.size());
                     for (std::size_t i = 0; i < pts.size(); ++i) {
                       if (!ref[i].ok) fail(ErrorCode::singular_region, "transport trajectory aborted");
                       absdiff[i] = std::abs(rho[i] - ref[i].value);
                     }
                     const double l1 = integrate(ctx.grid(), std::span<const double>(absdiff));
                     const double tol = ctx.tol(name, 1e-3);
                     return CheckResult{name, l1, tol, l1 <= tol, false,
                                        "L1 distance to the Liouville-transported density at t = " +
                                            g17(ctx.t_final())};
                   }});
  }

  reg.push_back({"translation_generator", grid_rep, [](CheckContext& ctx) {
                   auto rep = translation_generator_report(ctx.chi0(), {1.0, 0, 0}, 1e-3);
                   const double v = rep.scale > 0 ? rep.fd_vs_plus / rep.scale : 0.0;
                   return CheckResult{"translation_generator", v, 0.0, true, false,
                                      "reported, not asserted: FD generator vs +i p.xi/(2 hbar) variant " +
                                          g17(rep.fd_vs_plus) + ", vs -i variant (B_xi) " + g17(rep.fd_vs_minus)};
                 }});

  for (const bool anharmonic : {true, false}) {
    const std::string name = anharmonic ? "scaling_anharmonic" : "scaling_kepler";
    const double expected = anharmonic ? 16.0 : 0.5;
    reg.push_back({name,
                   [anharmonic](const RunConfig& c) {
                     return anharmonic ? c.scenario == Scenario::anharmonic : c.scenario == Scenario::kepler;
                   },
                   [name, expected](CheckContext& ctx) {
                     PhasePoint c1 = ctx.cfg.initial_state.center;
                     double r = 0;
                     for (int i = 0; i < c1.n; ++i) r += c1.q[i] * c1.q[i];
                     r = std::sqrt(r);
                     if (r <= 0) fail(ErrorCode::config_error, name + ": the state center must have |q| > 0");
                     PhasePoint base = c1, doubled = c1;
                     for (int i = 0; i < c1.n; ++i) doubled.q[i] = 2.0 * c1.q[i];
                     const double sigma = std::min(0.05 * r, ctx.cfg.initial_state.sigma);
                     const double m1 = red_term_norm(ctx.cfg.model, base, sigma, ctx.cfg.hbar);
                     const double m2 = red_term_norm(ctx.cfg.model, doubled, sigma, ctx.cfg.hbar);
                     const double ratio = m2 / m1;
                     const double v = std::abs(ratio / expected - 1.0);
                     const double tol = ctx.tol(name, 0.2);
                     return CheckResult{name, v, tol, v <= tol, false,
                                        "red-term norm ratio under center doubling: " + g17(ratio) +
                                            " (expected about " + g17(expected) + ")"};
                   }});
  }

  // ---- characteristics / qmc checks ----

  reg.push_back({"qmc_norm", char_rep, [](CheckContext& ctx) {
                   double worst = 0, bound = ctx.tol("qmc_norm", 1e-3);
                   bool pass = true;
                   for (const auto& cp : ctx.qmc()) {
                     const double dev = std::abs(cp.norm.value - 1.0);
                     worst = std::max(worst, dev);
                     if (dev > std::max(bound, 3 * cp.norm.error)) pass = false;
                   }
                   return CheckResult{"qmc_norm", worst, bound, pass, false,
                                      "max |<1> - 1| across checkpoints, error-estimate aware"};
                 }});

  reg.push_back({"qmc_energy_conservation", char_rep, [](CheckContext& ctx) {
                   const auto& cps = ctx.qmc();
                   const auto& ref = cps.front();
                   double worst = 0, bound = ctx.tol("qmc_energy_conservation", 1e-3);
                   bool pass = true;
                   for (const auto& cp : cps) {
                     const double dev = std::abs(cp.energy.value - ref.energy.value);
                     worst = std::max(worst, dev);
                     if (dev > std::max(bound, 3 * (cp.energy.error + ref.energy.error))) pass = false;
                   }
                   return CheckResult{"qmc_energy_conservation", worst, bound, pass, false,
                                      "energy drift across checkpoints, reference " + g17(ref.energy.value)};
                 }});

  reg.push_back({"qmc_angular_conservation", char_rep, [](CheckContext& ctx) {
                   const auto& cps = ctx.qmc();
                   const auto& ref = cps.front();
                   double worst = 0, bound = ctx.tol("qmc_angular_conservation", 1e-3);
                   bool pass = true;
                   for (const auto& cp : cps)
                     for (int c = 0; c < 3; ++c) {
                       const double dev = std::abs(cp.L[c].value - ref.L[c].value);
                       worst = std::max(worst, dev);
                       if (dev > std::max(bound, 3 * (cp.L[c].error + ref.L[c].error))) pass = false;
                     }
                   return CheckResult{"qmc_angular_conservation", worst, bound, pass, false,
                                      "max drift of <L> components across checkpoints"};
                 }});

  reg.push_back({"qmc_decomposition_sum", char_rep, [](CheckContext& ctx) {
                   double worst = 0;
                   for (const auto& cp : ctx.qmc()) {
                     worst = std::max(worst, dec_sum_residual_scaled(cp.dec_L));
                     worst = std::max(worst, dec_sum_residual_scaled(cp.dec_P));
                   }
                   const double tol = ctx.tol("qmc_decomposition_sum", 1e-12);
                   return CheckResult{"qmc_decomposition_sum", worst, tol, worst <= tol, false,
                                      "sample-level four-way split vs the unsplit rate"};
                 }});

  reg.push_back({"planarity",
                 [](const RunConfig& c) { return c.n == 3; },
                 [](CheckContext& ctx) {
                   // a small dedicated grid around the state; accuracy is not
                   // needed, the real-state cancellation is exact
                   const auto& st = ctx.cfg.initial_state;
                   std::vector<double> lo(6), hi(6);
                   std::vector<int> counts(6, 9);
                   for (int a = 0; a < 6; ++a) {
                     lo[a] = st.center.coord(a) - 6.5 * st.sigma;
                     hi[a] = st.center.coord(a) + 6.5 * st.sigma;
                   }
                   PhaseGrid g(3, lo, hi, counts);
                   GridWaveFunction chi = make_initial(st, g, ctx.cfg.hbar);
                   auto rep = planarity_report(chi);
                   const double v = rep.scale > 0 ? std::abs(rep.value) / rep.scale : 0.0;
                   const double tol = ctx.tol("planarity", 1e-6);
                   if (rep.real_state)
                     return CheckResult{"planarity", v, tol, v <= tol, false,
                                        "<L.Q> integrand quadrature, real state, scale-relative"};
                   return CheckResult{"planarity", v, tol, true, false,
                                      "complex state: value " + g17(rep.value.real()) + " + " +
                                          g17(rep.value.imag()) + "i reported, not asserted"};
                 }});

  return reg;
}

const std::vector<CheckSpec>& registry() {
  static const std::vector<CheckSpec> reg = build_registry();
  return reg;
}

std::vector<std::string> default_checks(const RunConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& spec : registry())
    if (spec.applicable(cfg)) names.push_back(spec.name);
  return names;
}

std::vector<std::string> notes_for(const RunConfig& cfg) {
  std::vector<std::string> notes;
  if (cfg.scenario == Scenario::kepler) {
    PhasePoint z0 = cfg.initial_state.center;
    const double a_general = cfg.model.phase_term(z0);
    double r = 0;
    for (int i = 0; i < z0.n; ++i) r += z0.q[i] * z0.q[i];
    r = std::sqrt(r);
    const double a_paper = -cfg.model.param("lambda") / (2.0 * r);
    notes.push_back(
        "kepler multiplicative term: the general formula H - z.grad(H)/2 gives " + g17(a_general) +
        " at the state center (-(3/2) lambda/|q|); the per-scenario constant -(1/2) lambda/|q| = " + g17(a_paper) +
        " follows from a sign slip in dH/dq and is not used");
  }
  notes.push_back(
      "rotation action: implemented as chi(R^-1 q, R^-1 p); the displayed extra minus signs would not be the "
      "identity at R = Id");
  notes.push_back(
      "translation action candidate exp(i p.v/(2 hbar)) chi(q - v, p): its measured generator carries the "
      "+i p.xi/(2 hbar) multiplicative sign, the conjugate of the pairing generator B_xi; see the "
      "translation_generator check");
  notes.push_back(
      "modified density: implemented as |chi|^2 + div(z |chi|^2 / 2 + hbar J Im(chi* grad chi)); the untwisted "
      "flux breaks both the Liouville transport and the energy pairing, its imaginary residue (hbar/2) "
      "Lap|chi|^2 is tracked separately");
  return notes;
}

struct Emitted {
  std::vector<CheckResult> results;
  bool all_pass = true;
};

Emitted run_checks(CheckContext& ctx, const std::vector<std::string>& names) {
  Emitted out;
  for (const std::string& name : names) {
    const CheckSpec* found = nullptr;
    for (const auto& spec : registry())
      if (spec.name == name) found = &spec;
    if (!found) {
      std::string known;
      for (const auto& spec : registry()) known += (known.empty() ? "" : ", ") + spec.name;
      fail(ErrorCode::config_error, "unknown check name '" + name + "'; known checks: " + known);
    }
    if (!found->applicable(ctx.cfg))
      fail(ErrorCode::config_error,
           "check '" + name + "' does not apply to this scenario/representation/dimension");
    CheckResult res = found->runner(ctx);
    out.all_pass = out.all_pass && res.pass;
    out.results.push_back(std::move(res));
  }
  return out;
}

ordered_json summary_json(const RunConfig& cfg, std::uint64_t seed, const Emitted& emitted,
                          const std::vector<std::string>& outputs) {
  ordered_json j;
  j["tool"] = "kvh-lab";
  j["config"] = {{"scenario", scenario_name(cfg.scenario)},
                 {"model", cfg.model.describe()},
                 {"n", cfg.n},
                 {"hbar", cfg.hbar},
                 {"formalism", formalism_name(cfg.formalism)},
                 {"representation", representation_name(cfg.representation)},
                 {"dt", cfg.dt},
                 {"seed", seed}};
  ordered_json checks = ordered_json::array();
  for (const auto& r : emitted.results) {
    ordered_json c;
    c["name"] = r.name;
    c["value"] = r.value;
    c["tolerance"] = r.tolerance;
    c["comparison"] = r.exceed ? "value_must_exceed_tolerance" : "value_must_not_exceed_tolerance";
    c["pass"] = r.pass;
    c["details"] = r.details;
    checks.push_back(std::move(c));
  }
  j["checks"] = std::move(checks);
  j["notes"] = notes_for(cfg);
  j["outputs"] = outputs;
  return j;
}

void write_summary(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << j.dump(2) << "\n";
}

std::string prepare_out_dir(const RunConfig& cfg, const std::string& cli_out_dir) {
  std::string dir = !cli_out_dir.empty() ? cli_out_dir : cfg.output_dir;
  if (dir.empty()) dir = ".";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create output directory " + dir);
  return dir;
}

}  // namespace

std::vector<std::string> known_check_names() {
  std::vector<std::string> names;
  for (const auto& spec : registry()) names.push_back(spec.name);
  return names;
}

int lab_run(const std::string& config_path, const std::string& out_dir, const LabOptions& options,
            std::string& message) {
  try {
    resolve_threads(options);
    RunConfig cfg = load_config(config_path);
    const std::uint64_t seed = options.seed.value_or(cfg.sampler.seed);
    CheckContext ctx(cfg, seed, prepare_out_dir(cfg, out_dir));

    std::vector<std::string> outputs;
    const std::string series_path = ctx.out_dir + "/series.csv";
    if (cfg.representation == Representation::grid) {
      const auto& run = ctx.run();
      write_series_csv(series_path, run.series);
      outputs.push_back("series.csv");
      for (const auto& [step, path] : ctx.snapshot_files)
        outputs.push_back(std::filesystem::path(path).filename().string());
    } else {
      write_qmc_series_csv(series_path, ctx.qmc());
      outputs.push_back("series.csv");
    }

    Emitted emitted;
    if (!cfg.checks.empty()) emitted = run_checks(ctx, cfg.checks);
    ordered_json j = summary_json(cfg, seed, emitted, outputs);
    if (cfg.representation == Representation::characteristics) {
      ordered_json q = ordered_json::array();
      for (const auto& cp : ctx.qmc()) {
        ordered_json e;
        e["t"] = cp.t;
        e["norm"] = {{"value", cp.norm.value}, {"error", cp.norm.error}};
        e["energy"] = {{"value", cp.energy.value}, {"error", cp.energy.error}};
        for (int c = 0; c < 3; ++c) {
          const char* axes = "xyz";
          e[std::string("L") + axes[c]] = {{"value", cp.L[c].value}, {"error", cp.L[c].error}};
        }
        e["aborted_samples"] = cp.aborted;
        q.push_back(std::move(e));
      }
      j["qmc"] = std::move(q);
    }
    write_summary(ctx.out_dir + "/summary.json", j);
    if (!emitted.all_pass) {
      for (const auto& r : emitted.results)
        if (!r.pass) message += (message.empty() ? "failed check: " : ", ") + r.name;
      return 2;
    }
    return 0;
  } catch (const Error& e) {
    message = e.what();
    return exit_code_for(e);
  } catch (const std::exception& e) {
    message = e.what();
    return 1;
  }
}

int lab_check(const std::string& config_path, const std::string& out_dir, const LabOptions& options,
              std::string& message) {
  try {
    resolve_threads(options);
    RunConfig cfg = load_config(config_path);
    const std::uint64_t seed = options.seed.value_or(cfg.sampler.seed);
    CheckContext ctx(cfg, seed, prepare_out_dir(cfg, out_dir));
    const std::vector<std::string> names = cfg.checks.empty() ? default_checks(cfg) : cfg.checks;
    Emitted emitted = run_checks(ctx, names);
    write_summary(ctx.out_dir + "/summary.json", summary_json(cfg, seed, emitted, {}));
    if (!emitted.all_pass) {
      for (const auto& r : emitted.results)
        if (!r.pass) message += (message.empty() ? "failed check: " : ", ") + r.name;
      return 2;
    }
    return 0;
  } catch (const Error& e) {
    message = e.what();
    return exit_code_for(e);
  } catch (const std::exception& e) {
    message = e.what();
    return 1;
  }
}

int lab_oracle(const std::string& config_path, const std::string& points_path, const std::string& out_path,
               const LabOptions& options, std::string& message) {
  try {
    resolve_threads(options);
    RunConfig cfg = load_config(config_path);

    std::ifstream in(points_path);
    if (!in) fail(ErrorCode::io_error, "cannot open evaluation points file: " + points_path);
    std::vector<PhasePoint> pts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
      if (line.empty()) continue;
      if (lineno == 1 && line.find("z1") != std::string::npos) continue;  // header
      std::stringstream ss(line);
      std::vector<double> vals;
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        try {
          vals.push_back(std::stod(cell));
        } catch (...) {
          fail(ErrorCode::io_error, "malformed evaluation point at line " + std::to_string(lineno));
        }
      }
      if (vals.size() != static_cast<std::size_t>(2 * cfg.n))
        fail(ErrorCode::io_error, "evaluation point at line " + std::to_string(lineno) + " needs " +
                                      std::to_string(2 * cfg.n) + " coordinates");
      pts.push_back(make_point(cfg.n, std::span<const double>(vals.data(), cfg.n),
                               std::span<const double>(vals.data() + cfg.n, cfg.n)));
    }

    CharacteristicGaussian cg;
    cg.center = cfg.initial_state.center;
    cg.sigma = cfg.initial_state.sigma;
    cg.wavevector = cfg.initial_state.phase_wavevector;
    cg.hbar = cfg.hbar;
    const double t_final = cfg.representation == Representation::grid
                               ? static_cast<double>(cfg.steps) * cfg.dt
                               : cfg.checkpoints.back();
    auto samples = propagate_characteristics(cg, cfg.model, cfg.formalism, t_final, cfg.dt, pts);

    std::ofstream out(out_path);
    if (!out) fail(ErrorCode::io_error, "cannot write " + out_path);
    for (int a = 0; a < 2 * cfg.n; ++a) out << "z" << a + 1 << ",";
    out << "re,im,theta,status\r\n";
    long long aborts = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (int a = 0; a < 2 * cfg.n; ++a) out << g17(pts[i].coord(a)) << ",";
      const auto& s = samples[i];
      if (s.state.ok) {
        out << g17(s.value.real()) << "," << g17(s.value.imag()) << "," << g17(s.state.theta) << ",ok\r\n";
      } else {
        out << "0,0,0,singular_abort\r\n";
        ++aborts;
      }
    }
    if (aborts > 0)
      message = std::to_string(aborts) + " of " + std::to_string(pts.size()) +
                " evaluation points aborted in the singular region";
    return 0;
  } catch (const Error& e) {
    message = e.what();
    return exit_code_for(e);
  } catch (const std::exception& e) {
    message = e.what();
    return 1;
  }
}

}  // namespace kvh
