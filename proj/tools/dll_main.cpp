// Command-line runner for dual-label learning experiments.
//
//   dll run      --config cfg.json --out out/
//   dll sweep    --config cfg.json --out out/ [--rates 0.1 ...]
//   dll ablate   --config cfg.json --out out/
//   dll trace    --config cfg.json --out out/
//   dll gen-data --task regression --n 1000 --d 10 --gen-seed 7 --out out/
//
// Exit codes: 0 success, 2 configuration/usage error, 3 numeric failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dll/data_io.hpp"
#include "dll/error.hpp"
#include "dll/experiment.hpp"
#include "dll/synthetic.hpp"

namespace {

void print_summary(const dll::ExperimentOutput& output) {
  for (const auto& [method, panels] : output.table.cells()) {
    std::printf("%-9s", method.c_str());
    for (const auto& [panel, metrics] : panels) {
      // One headline metric per panel: f1 for classification, mape
      // otherwise.
      const auto it = metrics.count("f1") ? metrics.find("f1")
                                          : metrics.find("mape");
      const dll::MetricSummary s = dll::summarize(it->second);
      std::printf("  %s %s=%.4f±%.4f", panel.c_str(), it->first.c_str(),
                  s.mean, s.sd);
    }
    std::printf("\n");
  }
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string preset;
  std::vector<std::uint64_t> seeds;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  auto* config =
      cmd->add_option("--config", args.config_path, "Experiment config JSON");
  if (config_required) config->required();
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--preset", args.preset,
                  "Hyperparameter preset (tox21, higgs, mof)");
  cmd->add_option("--seed", args.seeds, "Seed (repeatable)");
}

dll::ExperimentConfig load_config(const CommonArgs& args) {
  dll::ExperimentConfig config =
      dll::load_experiment_config(args.config_path);
  // Command-line overrides win over the document.
  if (!args.preset.empty()) {
    dll::apply_preset(config, dll::get_preset(args.preset));
  }
  if (!args.seeds.empty()) config.seeds = args.seeds;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-label learning experiment runner"};
  app.require_subcommand(1);

  CommonArgs run_args, sweep_args, ablate_args, trace_args;
  std::vector<double> sweep_rates;

  CLI::App* run = app.add_subcommand(
      "run", "Train and evaluate the configured methods");
  add_common(run, run_args, true);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Repeat the experiment over a grid of missing rates");
  add_common(sweep, sweep_args, true);
  sweep->add_option("--rates", sweep_rates,
                    "Missing rates (default: config sweep_rates)");

  CLI::App* ablate = app.add_subcommand(
      "ablate", "Evaluate cumulative training-mode stacks");
  add_common(ablate, ablate_args, true);

  CLI::App* trace = app.add_subcommand(
      "trace", "Per-iteration quality of alternate inference");
  add_common(trace, trace_args, true);

  CLI::App* gen = app.add_subcommand("gen-data", "Write a synthetic CSV");
  std::string gen_task = "regression";
  int gen_n = 1000;
  int gen_d = 10;
  std::uint64_t gen_seed = 7;
  std::string gen_out = "out";
  std::string gen_file = "data.csv";
  gen->add_option("--task", gen_task, "regression or binary_classification");
  gen->add_option("--n", gen_n, "Sample count")->check(CLI::PositiveNumber);
  gen->add_option("--d", gen_d, "Feature count")->check(CLI::PositiveNumber);
  gen->add_option("--gen-seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--file", gen_file, "File name inside --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      const dll::ExperimentOutput output =
          dll::run_experiment(load_config(run_args), run_args.out_dir);
      print_summary(output);
      std::cout << "wrote " << run_args.out_dir << "/results.json\n";
    } else if (sweep->parsed()) {
      const dll::ExperimentConfig config = load_config(sweep_args);
      const std::vector<double>& rates =
          sweep_rates.empty() ? config.sweep_rates : sweep_rates;
      dll::sweep_missing_rates(config, rates, sweep_args.out_dir);
      std::cout << "wrote " << sweep_args.out_dir << "/sweep.csv\n";
    } else if (ablate->parsed()) {
      dll::run_ablation(load_config(ablate_args), ablate_args.out_dir);
      std::cout << "wrote " << ablate_args.out_dir << "/results.json and "
                << ablate_args.out_dir << "/ablation.csv\n";
    } else if (trace->parsed()) {
      dll::convergence_report(load_config(trace_args), trace_args.out_dir);
      std::cout << "wrote " << trace_args.out_dir << "/convergence.csv and "
                << trace_args.out_dir << "/trace.csv\n";
    } else if (gen->parsed()) {
      const dll::TaskKind task = dll::task_kind_from_string(gen_task);
      const dll::Dataset data =
          task == dll::TaskKind::Regression
              ? dll::gen_synthetic_regression(
                    static_cast<std::size_t>(gen_n),
                    static_cast<std::size_t>(gen_d), gen_seed)
              : dll::gen_synthetic_classification(
                    static_cast<std::size_t>(gen_n),
                    static_cast<std::size_t>(gen_d), gen_seed);
      std::filesystem::create_directories(gen_out);
      const std::string path =
          (std::filesystem::path(gen_out) / gen_file).string();
      dll::save_csv(path, data);
      std::cout << "wrote " << path << "\n";
    }
  } catch (const dll::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const dll::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dll::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dll::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
