// contactlab command line: run / validate experiment configs, list the
// catalog, export plot data.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "contactlab/contactlab.hpp"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfigError = 2, kRuntimeError = 3 };

int report_config_error(const contactlab::ConfigError& e) {
  std::cerr << "config error: " << e.what() << '\n';
  return kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contactlab: dissipation of contactomorphisms of tori"};
  app.require_subcommand(1);

  std::string out_dir;
  double refine = 1.0;

  auto* run = app.add_subcommand("run", "run every task of a config and write the report");
  std::string run_config;
  run->add_option("config", run_config, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--refine", refine, "multiply every grid resolution by this factor");

  auto* validate = app.add_subcommand("validate", "check a config and list every problem");
  std::string validate_config;
  validate->add_option("config", validate_config, "experiment config (JSON)")->required();

  app.add_subcommand("catalog", "list map primitives, contact forms and task types");

  auto* plot = app.add_subcommand("plot", "write the series of one task as a two-column .dat file");
  std::string plot_report, plot_task;
  plot->add_option("report", plot_report, "report.json produced by run")->required();
  plot->add_option("task", plot_task, "task id")->required();
  plot->add_option("--out", out_dir, "output directory (default: next to the report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      const auto cfg = contactlab::load_config(run_config);
      contactlab::RunOptions opt;
      opt.output_dir = out_dir;
      opt.refine = refine;
      const auto res = contactlab::run(cfg, opt);
      for (const auto& a : res.artifacts) std::cout << "wrote " << a << '\n';
      if (!res.checks_passed) {
        for (const auto& f : res.failed_checks) std::cerr << "check failed: " << f << '\n';
        return kCheckFailed;
      }
      std::cout << "all checks passed\n";
      return kOk;
    }
    if (*validate) {
      const auto cfg = contactlab::load_config(validate_config);
      std::cout << cfg.id << ": valid (n=" << cfg.dim << ", " << cfg.tasks.size() << " tasks, map '"
                << cfg.map.id() << "', form '" << cfg.form.id() << "')\n";
      return kOk;
    }
    if (app.got_subcommand("catalog")) {
      std::cout << contactlab::catalog_text();
      return kOk;
    }
    if (*plot) {
      const auto report = contactlab::read_report(plot_report);
      const std::string dir =
          out_dir.empty() ? std::filesystem::path(plot_report).parent_path().string() : out_dir;
      std::cout << "wrote " << contactlab::emit_plot_data(report, plot_task, dir.empty() ? "." : dir) << '\n';
      return kOk;
    }
  } catch (const contactlab::ConfigError& e) {
    return report_config_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
