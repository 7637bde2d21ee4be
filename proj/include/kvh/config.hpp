#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kvh/diagnostics.hpp"
#include "kvh/hamiltonian.hpp"
#include "kvh/phase_space.hpp"
#include "kvh/wavefunction.hpp"

namespace kvh {

enum class Scenario { harmonic, anharmonic, kepler };
enum class Representation { grid, characteristics };

struct GridSpec {
  std::vector<double> lower, upper;  // 2n entries, q block then p block
  std::vector<int> points;
};

struct SamplerSpec {
  long long sample_count = 1 << 16;
  std::uint64_t seed = 0;
  double fd_step_rel = 1e-4;
};

struct RunConfig {
  Scenario scenario = Scenario::harmonic;
  HamiltonianModel model = HamiltonianModel::harmonic(1.0);
  int n = 1;
  double hbar = 1.0;
  Formalism formalism = Formalism::kvh;
  Representation representation = Representation::grid;
  GridSpec grid;
  SamplerSpec sampler;
  InitialStateSpec initial_state;
  double dt = 1e-3;
  long long steps = 100;
  long long diagnostics_every = 1;
  double cfl_safety = 0.5;
  double decay_tolerance = 1e-10;
  std::vector<double> checkpoints;      // characteristics representation
  std::vector<double> snapshots;        // grid representation, times
  std::string output_dir;               // empty = current directory
  std::vector<std::string> checks;      // named checks to run
  std::map<std::string, double> tolerance_overrides;

  PhaseGrid make_grid() const;
};

// Parses and validates a config. Errors carry a JSON-path message and the
// ConfigError code. Unknown keys anywhere are errors.
RunConfig parse_config_text(const std::string& json_text);
RunConfig load_config(const std::string& path);

const char* scenario_name(Scenario s);
const char* formalism_name(Formalism f);
const char* representation_name(Representation r);

}  // namespace kvh
