// qrwt: run quantum random walk experiments from a JSON config.
//
// Exit codes: 0 all checks passed, 1 a certification check failed or the run
// aborted, 2 invalid configuration or arguments.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qrwt/experiment.hpp"
#include "qrwt/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quantum random walks with particles in a normal state"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;

  for (const std::string& name : qrwt::subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "directory for <command>.json and <command>.csv");
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--threads", threads, "worker threads (default: $QRWT_THREADS or 1)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    const qrwt::ExperimentConfig cfg = qrwt::load_config(config_path);
    qrwt::RunOptions opts;
    if (sub->count("--seed")) opts.seed = seed;
    opts.threads = qrwt::resolve_threads(sub->count("--threads") ? std::optional<int>(threads)
                                                                   : std::nullopt);
    const qrwt::RunReport report = qrwt::run_experiment(command, cfg, opts);
    for (const auto& [stage, seconds] : report.timings)
      std::cerr << "time " << stage << " " << seconds << " s\n";
    if (out_dir.empty()) {
      std::cout << qrwt::format_json(report);
    } else {
      qrwt::write_report(report, out_dir);
      std::cout << command << ": " << (report.passed ? "PASS" : "FAIL") << "\n";
    }
    return report.passed ? 0 : 1;
  } catch (const qrwt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
