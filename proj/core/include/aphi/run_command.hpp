#pragma once

// Run orchestration behind the command line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aphi/controller.hpp"
#include "aphi/sim_engine.hpp"

namespace aphi {

inline constexpr const char* kOutDirEnv = "APHI_OUT_DIR";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,     // bad request or I/O failure
  kExitInvalid = 2,   // scenario file did not parse or validate
  kExitAborted = 3,   // a simulation aborted
};

struct RunRequest {
  std::filesystem::path scenario_path;
  std::optional<ControllerVariant> controller;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;  // empty: $APHI_OUT_DIR, else ./out
  int repetitions = 1;
  bool compare = false;  // run all three variants
  int jobs = 0;          // worker threads, 0 = hardware concurrency

  void validate() const;
};

/// Output directory after applying the environment default.
std::filesystem::path resolve_out_dir(const std::filesystem::path& requested);

/// One entry per simulation the request expands to, in output order.
std::vector<Scenario> expand_request(const RunRequest& req, const Scenario& base);

/// File stem for a run: <name>_<controller>_seed<N>.
std::string run_stem(const Scenario& s);

/// Loads, runs and writes artifacts. Messages go to `log`.
int run_command(const RunRequest& req, std::ostream& log);

/// Loads and validates only.
int validate_command(const std::filesystem::path& path, std::ostream& log);

}  // namespace aphi
