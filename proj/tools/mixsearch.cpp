// Command-line driver for the mixture search loop.
//
// Exit codes: 0 ok, 1 internal error, 2 config error, 3 data or fixture
// error, 4 backend error. MIXSEARCH_LOG_LEVEL sets log verbosity
// (trace, debug, info, warn, error, off; default warn).

#include "mixsearch/fixtures.hpp"
#include "mixsearch/orchestrator.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

namespace {

using namespace mixsearch;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitBackend = 4;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Data:
    case ErrorKind::Fixture: return kExitData;
    case ErrorKind::Backend: return kExitBackend;
    case ErrorKind::Contract: return kExitInternal;
  }
  return kExitInternal;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("mixsearch");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("MIXSEARCH_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(lvl));
  }
}

void print_summary(const RunSummary& s) {
  fmt::print("{} rounds completed{} in {}\n", s.completed_rounds, s.complete ? "" : " (incomplete)", s.dir.string());
  fmt::print("archive: {}\n", fmt::join(s.archive_labels, ", "));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Closed-loop search over training data mixtures"};
  app.require_subcommand(1);

  std::string config_path, fixture_path, out_dir, in_dir, format = "text";
  int stop_after = -1;

  auto* run_cmd = app.add_subcommand("run", "Run the closed loop from a config file");
  run_cmd->add_option("--config", config_path, "Loop config (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "Run directory (resumed if it exists)")->required();
  run_cmd->add_option("--stop-after", stop_after, "Stop after this many rounds in this invocation");

  auto* replay_cmd = app.add_subcommand("replay", "Replay a recorded trajectory fixture");
  replay_cmd->add_option("--fixture", fixture_path, "Replay fixture (JSON)")->required();
  replay_cmd->add_option("--out", out_dir, "Run directory")->required();

  auto* pareto_cmd = app.add_subcommand("pareto", "Print the non-dominated set of a run");
  pareto_cmd->add_option("--in", in_dir, "Run directory")->required();
  pareto_cmd->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

  auto* report_cmd = app.add_subcommand("report", "Print and write the run report");
  report_cmd->add_option("--in", in_dir, "Run directory")->required();
  report_cmd->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) {
      RunOptions options;
      if (stop_after >= 0) options.stop_after_rounds = stop_after;
      print_summary(run(load_loop_config(config_path), out_dir, options));
    } else if (*replay_cmd) {
      require_valid_fixture(ReplayFixture::load(fixture_path));
      const auto summary = run(replay_config(fixture_path), out_dir);
      std::cout << report(out_dir).trajectory_text;
      print_summary(summary);
    } else if (*pareto_cmd) {
      const auto bundle = report(in_dir);
      std::cout << (format == "csv" ? bundle.archive_csv : bundle.archive_text);
    } else if (*report_cmd) {
      const auto bundle = report(in_dir);
      write_report(bundle, in_dir);
      if (format == "csv") {
        std::cout << bundle.trajectory_csv;
      } else {
        std::cout << bundle.trajectory_text << "\nNon-dominated set\n"
                  << bundle.archive_text << "\nFailure slices\n"
                  << bundle.slices_text;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
