#pragma once
// Command layer behind the CLI binary. Each command is an ordinary function so
// tests can drive it directly; the binary only parses flags and dispatches.
#include <cstdint>
#include <string>

#include "json.hpp"

#include "fermisea/io.hpp"
#include "fermisea/rng.hpp"

namespace fermisea {

struct RunConfig {
  std::string command;
  nlohmann::json parameters;
  std::uint64_t master_seed = 0;
  std::string output_dir = ".";
  int workers = 1;
  bool override_audit = false;
};

// strict parse of the config file ("spec_version" must equal 1)
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const nlohmann::json& j);

// per-task generator: same (seed, index) always yields the same stream
RngStream seed_stream(std::uint64_t master_seed, std::uint64_t task_index);

struct RunResult {
  int exit_code = 0;  // 0 pass, 2 fail with report, 1 error
  std::string artifact_dir;
};

// dispatches, writes <command>-<timestamp>/{report.json, *.csv, fields/*}
RunResult run(const RunConfig& rc);

}  // namespace fermisea
