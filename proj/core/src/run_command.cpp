#include "aphi/run_command.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "aphi/log_io.hpp"
#include "aphi/metrics.hpp"
#include "aphi/scenario_io.hpp"

namespace aphi {

void RunRequest::validate() const {
  if (repetitions < 1) throw ValidationError("RunRequest: repetitions >= 1");
  if (jobs < 0) throw ValidationError("RunRequest: jobs >= 0");
  if (duration && !(*duration >= 0.0))
    throw ValidationError("RunRequest: duration >= 0");
  if (compare && controller)
    throw ValidationError("RunRequest: compare runs every controller");
}

std::filesystem::path resolve_out_dir(const std::filesystem::path& requested) {
  if (!requested.empty()) return requested;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "out";
}

std::vector<Scenario> expand_request(const RunRequest& req,
                                     const Scenario& base) {
  std::vector<ControllerVariant> variants;
  if (req.compare) {
    variants = {ControllerVariant::kNoFilter, ControllerVariant::kDirectClamp,
                ControllerVariant::kSafetyFilter};
  } else {
    variants = {req.controller.value_or(base.controller)};
  }
  const std::uint64_t seed0 = req.seed.value_or(base.seed);
  std::vector<Scenario> out;
  for (ControllerVariant v : variants) {
    for (int k = 0; k < req.repetitions; ++k) {
      Scenario s = base;
      s.controller = v;
      s.seed = seed0 + static_cast<std::uint64_t>(k);
      if (req.duration) s.duration = *req.duration;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string run_stem(const Scenario& s) {
  return s.name + "_" + to_string(s.controller) + "_seed" +
         std::to_string(s.seed);
}

namespace {

struct RunResult {
  SimLog log;
  MetricsReport report;
  std::string error;  // I/O failure while writing
};

RunResult execute(const Scenario& s, const std::filesystem::path& dir) {
  RunResult r;
  r.log = run(s);
  r.report = compute_metrics(r.log);
  const std::string stem = run_stem(s);
  std::ofstream csv(dir / (stem + ".csv"), std::ios::binary);
  write_csv(csv, r.log);
  std::ofstream met(dir / (stem + ".metrics.txt"), std::ios::binary);
  write_metrics(met, r.log, r.report);
  if (!csv || !met) r.error = "failed writing " + (dir / stem).string() + ".*";
  return r;
}

}  // namespace

int run_command(const RunRequest& req, std::ostream& log) {
  Scenario base;
  try {
    req.validate();
    base = load_scenario(req.scenario_path);
  } catch (const ParseError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::vector<Scenario> runs;
  try {
    runs = expand_request(req, base);
    for (const Scenario& s : runs) s.validate();
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  const std::filesystem::path dir = resolve_out_dir(req.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    log << "error: cannot create " << dir << ": " << ec.message() << '\n';
    return kExitUsage;
  }

  std::vector<RunResult> results(runs.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(
      runs.size(), req.jobs > 0 ? static_cast<std::size_t>(req.jobs) : hw);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++)
      results[i] = execute(runs[i], dir);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  int code = kExitOk;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunResult& r = results[i];
    const std::string stem = run_stem(runs[i]);
    for (const auto& w : r.log.warnings) log << stem << ": warning: " << w << '\n';
    if (!r.error.empty()) {
      log << "error: " << r.error << '\n';
      code = kExitUsage;
    }
    if (r.log.aborted) {
      log << stem << ": aborted: " << r.log.abort_reason << '\n';
      // Diverging baselines are an expected outcome of a comparison.
      const bool expected = req.compare && runs[i].controller !=
                                               ControllerVariant::kSafetyFilter;
      if (!expected && code == kExitOk) code = kExitAborted;
    } else {
      log << stem << ": " << r.log.rows.size() << " rows, thrust ["
          << format_number(r.report.thrust_min) << ", "
          << format_number(r.report.thrust_max) << "], violations "
          << r.report.violation_steps << '\n';
    }
  }

  if (req.compare) {
    // One table per seed.
    for (int k = 0; k < req.repetitions; ++k) {
      std::vector<ComparisonEntry> entries;
      for (std::size_t i = 0; i < runs.size(); ++i)
        if (runs[i].seed == runs[0].seed + static_cast<std::uint64_t>(k))
          entries.push_back({to_string(runs[i].controller), results[i].report});
      const std::string name = base.name + "_comparison_seed" +
                               std::to_string(runs[0].seed + k) + ".txt";
      std::ofstream out(dir / name, std::ios::binary);
      write_comparison(out, entries);
      if (!out) {
        log << "error: failed writing " << (dir / name) << '\n';
        code = kExitUsage;
      } else if (k == 0) {
        write_comparison(log, entries);
      }
    }
  }
  return code;
}

int validate_command(const std::filesystem::path& path, std::ostream& log) {
  try {
    const Scenario s = load_scenario(path);
    log << path.string() << ": ok (" << s.name << ", "
        << to_string(s.controller) << ", " << s.step_count() << " steps)\n";
    return kExitOk;
  } catch (const ParseError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace aphi
