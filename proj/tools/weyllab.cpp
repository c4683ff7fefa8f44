#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "weyl/config.hpp"
#include "weyl/errors.hpp"
#include "weyl/harness.hpp"
#include "weyl/report.hpp"

namespace {

enum Exit { kPass = 0, kFail = 1, kConfig = 2, kNumerical = 3 };

struct RunFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  bool dump_matrix = false;
  bool strict = false;
};

void print_summary(const weyl::SweepReport& report) {
  std::cerr << report.name << ": volume " << report.volume;
  if (report.monte_carlo_volume) std::cerr << " (monte carlo " << *report.monte_carlo_volume << ")";
  std::cerr << "\n";
  for (const auto& r : report.rows) {
    std::cerr << "  hbar " << r.hbar << "  N " << r.n_count << "  scaled " << r.scaled_count << "  remainder "
              << r.remainder << "\n";
  }
  for (const auto& v : report.verdicts) {
    std::cerr << "  " << weyl::to_string(v.check) << " [" << v.subject << "] " << weyl::to_string(v.status) << ": "
              << v.detail << "\n";
  }
}

int run(const RunFlags& flags) {
  weyl::ExperimentFile file = weyl::load_experiment_file(flags.config);
  const std::filesystem::path out = std::filesystem::path(flags.out.empty() ? file.output_dir : flags.out);
  int status = kPass;
  for (auto& e : file.experiments) {
    if (flags.seed) e.seed = *flags.seed;
    if (flags.jobs) e.jobs = *flags.jobs;
    e.strict = e.strict || flags.strict;
    e.dump_matrix = flags.dump_matrix;
    e.validate();

    const weyl::SweepReport report = weyl::run_weyl_sweep(e);
    weyl::write_report_files(report, out);
    if (e.dump_matrix) {
      for (std::size_t i = 0; i < e.hbar_grid.size(); ++i) {
        const auto op = weyl::row_operator(e, e.hbar_grid[i]);
        weyl::write_matrix_file(op, out / (e.name + ".hbar" + std::to_string(i) + ".coo"));
      }
    }
    print_summary(report);
    if (!report.complete) {
      std::cerr << "error: experiment '" << e.name << "' incomplete: " << report.failure_detail << "\n";
      const int code = report.failure == weyl::FailureKind::Numerical ? kNumerical : kConfig;
      status = std::max(status, code);
      continue;
    }
    if (report.any_fail(e.strict)) status = std::max(status, static_cast<int>(kFail));
  }
  return status;
}

int validate(const std::string& path) {
  const weyl::ExperimentFile file = weyl::load_experiment_file(path);
  std::cout << "OK\n" << weyl::resolved_defaults(file);
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical eigenvalue counting experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", weyl::library_version());

  RunFlags flags;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  auto* run_cmd = app.add_subcommand("run", "Run every experiment in a config file");
  run_cmd->add_option("config", flags.config, "Experiment file (JSON)")->required();
  run_cmd->add_option("--out", flags.out, "Output directory (overrides output_dir)");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Seed for Monte Carlo volumes");
  auto* jobs_opt = run_cmd->add_option("--jobs", jobs, "Worker threads per sweep")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--dump-matrix", flags.dump_matrix, "Write each operator in coordinate text format");
  run_cmd->add_flag("--strict", flags.strict, "Treat vacuous-regime rows as failures");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a config file without computing");
  validate_cmd->add_option("config", validate_path, "Experiment file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfig;
  }
  if (*seed_opt) flags.seed = seed;
  if (*jobs_opt) flags.jobs = jobs;

  try {
    if (*validate_cmd) return validate(validate_path);
    return run(flags);
  } catch (const weyl::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const weyl::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}
