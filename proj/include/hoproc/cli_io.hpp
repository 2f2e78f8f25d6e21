// Run configuration, simulation dispatch and persistence for the command-line
// tool. Configs are flat JSON objects; command-line flags arrive as a second
// object with the same keys and win over the file.

#ifndef HOPROC_CLI_IO_HPP_
#define HOPROC_CLI_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hoproc/root_algebra.hpp"

namespace hop {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  // Either family + rank (+ k per orbit) or a custom root list.
  Family family = Family::A;
  int rank = 0;
  std::vector<double> k{1.0};
  std::vector<std::vector<double>> roots;  // custom systems only
  std::vector<double> multiplicities;      // one per listed root

  std::string process = "ho_radial";
  double dt = 1e-3;
  double T = 1.0;
  std::size_t paths = 10;
  std::uint64_t seed = 42;
  double wall_floor = 0.0;  // 0 selects the dt-dependent default
  double rate_cap = 1e6;
  std::vector<double> start;  // empty: the origin
  std::size_t stride = 1;
  std::string out;            // output directory
  std::vector<std::string> verify;
  std::size_t workers = 0;
  double budget_scale = 1.0;

  std::vector<std::string> overridden;  // keys set by flags over the file

  bool custom() const { return !roots.empty(); }
  bool jump_process() const;
  RootSystem system() const;
  nlohmann::json echo() const;
};

// Keys accepted in a config file or as flags.
const std::vector<std::string>& config_keys();

// `file` may be null (no file). Throws ConfigError naming the offending key.
RunConfig parse_config(const nlohmann::json& file, const nlohmann::json& flags);
nlohmann::json read_json_file(const std::filesystem::path& path);

// SHA-1 of "blob <size>\0" + content, hex encoded; equals `git hash-object`.
std::string git_blob_hash(std::string_view content);

struct SimulateOutputs {
  std::filesystem::path paths_csv;
  std::filesystem::path events_csv;  // empty for radial processes
  std::filesystem::path sidecar;
};

// Writes paths.csv (and events.csv for jump processes) plus run.json into
// config.out. Engine failures are rethrown with the failing path index.
SimulateOutputs run_simulate(const RunConfig& config);

struct VerifyOutcome {
  nlohmann::json report;  // {config_echo, anchor_audit, entries}
  bool all_pass = false;  // over selected non-skipped entries
};
VerifyOutcome run_verify(const RunConfig& config);

}  // namespace hop

#endif
