#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kvh/config.hpp"

namespace kvh {

struct LabOptions {
  std::optional<std::uint64_t> seed;  // overrides the config sampler seed
  int threads = -1;                   // -1: KVH_LAB_THREADS env, then auto
};

struct CheckResult {
  std::string name;
  double value = 0;
  double tolerance = 0;
  bool pass = false;
  bool exceed = false;  // true when the check requires value > tolerance
  std::string details;
};

// Exit codes shared by the library entry points and the CLI:
// 0 success, 1 config/usage error, 2 check failure, 3 numerical abort.
int lab_run(const std::string& config_path, const std::string& out_dir, const LabOptions& options,
            std::string& message);
int lab_check(const std::string& config_path, const std::string& out_dir, const LabOptions& options,
              std::string& message);
int lab_oracle(const std::string& config_path, const std::string& points_path, const std::string& out_path,
               const LabOptions& options, std::string& message);

std::vector<std::string> known_check_names();

}  // namespace kvh
