// aphi_sim: run scenario files through the closed-loop simulator.
//
//   aphi_sim run --scenario FILE [--controller none|clamp|filter] [--seed N]
//                [--reps N] [--duration S] [--out DIR] [--jobs N]
//   aphi_sim compare --scenario FILE [--seed N] [--reps N] [--out DIR]
//   aphi_sim validate FILE
//
// Output defaults to $APHI_OUT_DIR, then ./out.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "aphi/run_command.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Safety-filtered aerial manipulator simulator"};
  app.require_subcommand(1);

  aphi::RunRequest req;
  std::string controller;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", req.scenario_path, "Scenario file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Base seed; repetition k uses seed + k");
    sub->add_option("--reps", req.repetitions, "Repetitions")
        ->check(CLI::PositiveNumber);
    sub->add_option("--duration", duration, "Override the scenario duration (s)");
    sub->add_option("--out", req.out_dir,
                    std::string("Output directory (default $") +
                        aphi::kOutDirEnv + " or ./out)");
    sub->add_option("--jobs", req.jobs, "Worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
  };

  CLI::App* run = app.add_subcommand("run", "Simulate one controller");
  add_common(run);
  run->add_option("--controller", controller, "Controller variant")
      ->check(CLI::IsMember({"none", "clamp", "filter", "no_filter",
                             "direct_clamp", "safety_filter"}));

  CLI::App* compare = app.add_subcommand("compare", "Simulate all three controllers");
  add_common(compare);

  CLI::App* validate = app.add_subcommand("validate", "Check a scenario file");
  std::string validate_path;
  validate->add_option("path", validate_path, "Scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) return aphi::validate_command(validate_path, std::cerr);

  req.compare = compare->parsed();
  req.duration = duration;
  req.seed = seed;
  if (!controller.empty()) req.controller = aphi::parse_controller_variant(controller);
  return aphi::run_command(req, std::cerr);
}
