#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>

#include "qsp/cli.hpp"
#include "qsp/common.hpp"

// Batch front end for the stochastic Schrodinger / master-equation engine.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical guard tripped,
// 3 I/O failure.

namespace {

void add_common_options(CLI::App* cmd, qsp::cli::CliOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Path to a JSON config file")
      ->required();
  cmd->add_option("--out", opts.out_dir,
                  "Output directory (created if missing; default '.')");
  cmd->add_option("--seed", opts.seed,
                  "Master seed override (wins over the config)");
  cmd->add_option("--workers", opts.workers,
                  "Worker-thread override (wins over the config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qsp - trajectory ensembles, correlation-time sweeps, and "
      "convention comparisons for stochastic Schrodinger dynamics"};
  app.require_subcommand(1);

  qsp::cli::CliOptions opts;
  CLI::App* validate = app.add_subcommand(
      "validate", "Check a config's model structure and print diagnostics");
  CLI::App* run = app.add_subcommand(
      "run", "Run one trajectory ensemble and write its outputs");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Sweep the noise correlation time against the master "
               "equation reference");
  CLI::App* compare = app.add_subcommand(
      "compare", "Run several conventions side by side and compare them");
  for (CLI::App* cmd : {validate, run, sweep, compare})
    add_common_options(cmd, opts);

  try {
    app.parse(argc, argv);
    if (validate->parsed()) return qsp::cli::cmd_validate(opts);
    if (run->parsed()) return qsp::cli::cmd_run(opts);
    if (sweep->parsed()) return qsp::cli::cmd_sweep(opts);
    return qsp::cli::cmd_compare(opts);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const qsp::config_error& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 1;
  } catch (const qsp::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << std::endl;
    return 2;
  } catch (const qsp::io_error& e) {
    std::cerr << "io error: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}
