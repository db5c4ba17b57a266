// bench: generate benchmark instances, run the solver suite, and emit
// plot-ready data. See README.md for the config file schema.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bopt/config.hpp"
#include "bopt/harness.hpp"
#include "bopt/trace_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"composite Bregman optimization benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("--config", config_path, "experiment config file")->required();

  std::string in_dir;
  std::string out_dir;
  std::string mode = "iter";
  CLI::App* plotdata = app.add_subcommand("plotdata", "emit plot-ready TSV series from traces");
  plotdata->add_option("--in", in_dir, "directory holding trace CSV files")->required();
  plotdata->add_option("--out", out_dir, "output directory (defaults to --in)");
  plotdata->add_option("--mode", mode, "x axis: iter | time")
      ->check(CLI::IsMember({"iter", "time"}));

  CLI::App* verify = app.add_subcommand("verify", "run the diagnostic check suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const bopt::ExperimentConfig cfg = bopt::parse_config_file(config_path);
      const bopt::ExperimentReport report = bopt::run_experiment(cfg, &std::cout);
      std::cout << "wrote " << report.trace_files.size() << " trace files and "
                << report.summary_file << '\n';
      return report.failures == 0 ? 0 : 1;
    }
    if (plotdata->parsed()) {
      const bopt::PlotMode plot_mode =
          mode == "time" ? bopt::PlotMode::PerTime : bopt::PlotMode::PerIteration;
      const auto written = bopt::emit_plot_data(in_dir, plot_mode, out_dir);
      std::cout << "wrote " << written.size() << " series files\n";
      return 0;
    }
    if (verify->parsed()) {
      const bopt::VerifyReport report = bopt::verify_suite(&std::cout);
      std::cout << (report.ok() ? "verify: all checks passed\n" : "verify: FAILURES\n");
      return report.ok() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
