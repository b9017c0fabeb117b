#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "aicau/harness.hpp"
#include "selftest.hpp"

namespace {

struct RunOptions {
  std::string config_path;
  std::string preset = "desk";
  std::optional<int> problem_type;
  std::optional<std::string> strategy;
  std::optional<std::string> estimator;
  std::optional<std::string> batch_mode;
  std::optional<int> init_points;
  std::optional<int> rounds;
  std::optional<int> batch_size;
  std::optional<int> grid;
  std::optional<int> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs;
};

aicau::ExperimentConfig build_config(const RunOptions& o) {
  aicau::ExperimentConfig config;
  if (o.preset == "desk") {
    config = aicau::desk_preset();
  } else if (o.preset == "full") {
    config = aicau::full_preset(false);
  } else if (o.preset == "full-batch") {
    config = aicau::full_preset(true);
  } else {
    throw std::invalid_argument("unknown preset: " + o.preset);
  }
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw std::runtime_error("cannot read " + o.config_path);
    config = aicau::ExperimentConfig::from_json(nlohmann::json::parse(in), config);
  }
  if (o.problem_type) config.problem_type = aicau::parse_problem_type(*o.problem_type);
  if (o.strategy) config.strategy = aicau::parse_strategy(*o.strategy);
  if (o.estimator) config.estimator = aicau::parse_estimator(*o.estimator);
  if (o.batch_mode) config.batch_mode = aicau::parse_batch_mode(*o.batch_mode);
  if (o.init_points) config.n_init = *o.init_points;
  if (o.rounds) config.n_rounds = *o.rounds;
  if (o.batch_size) config.batch_size = *o.batch_size;
  if (o.grid) config.grid_resolution = *o.grid;
  if (o.replicates) config.n_replicates = *o.replicates;
  if (o.seed) config.base_seed = *o.seed;
  if (o.out) config.output_path = *o.out;
  if (o.jobs) config.jobs = *o.jobs;
  config.validate();
  return config;
}

int run(const RunOptions& o) {
  const aicau::ExperimentConfig config = build_config(o);
  const std::filesystem::path dir = config.output_path;
  aicau::ensure_writable(dir);
  const auto records = aicau::run_experiment(config);
  aicau::emit_outputs(records, config, dir);
  int failed = 0;
  for (const auto& r : records) {
    if (r.failed) {
      ++failed;
      std::cerr << "replicate seed " << r.seed << " failed: " << r.error << '\n';
    }
  }
  for (const auto& s : aicau::summarize_runs(records)) {
    std::cout << "round " << s.round << "  median mse " << s.median << "  iqr "
              << s.q75 - s.q25 << '\n';
  }
  std::cout << "wrote " << dir.string() << '\n';
  return failed == 0 ? 0 : 3;
}

int plot(const std::string& in) {
  const auto curves = aicau::load_summary_curves(in);
  if (curves.empty()) {
    std::cerr << "no summary.csv under " << in << '\n';
    return 1;
  }
  const auto path = std::filesystem::path(in) / "mse_curve.svg";
  std::ofstream out(path);
  out << aicau::mse_curve_svg(curves);
  if (!out) {
    std::cerr << "cannot write " << path.string() << '\n';
    return 1;
  }
  std::cout << "wrote " << path.string() << " (" << curves.size() << " curves)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning benchmark with bias and cobias-covariance acquisition"};
  app.require_subcommand(1);
  app.set_version_flag("--version", aicau::kVersion);

  RunOptions o;
  auto* run_cmd = app.add_subcommand("run", "run an experiment");
  run_cmd->add_option("--config", o.config_path, "flat JSON config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--preset", o.preset, "base settings: desk, full or full-batch");
  run_cmd->add_option("--problem-type", o.problem_type, "1, 2 or 3")->check(CLI::Range(1, 3));
  run_cmd->add_option("--strategy", o.strategy,
                      "random, lc, bald, br, pemse, diff-lc, diff-br, diff-pemse");
  run_cmd->add_option("--estimator", o.estimator, "cheat, direct or quadratic");
  run_cmd->add_option("--batch-mode", o.batch_mode, "single, topm or eigen");
  run_cmd->add_option("--init-points", o.init_points);
  run_cmd->add_option("--rounds", o.rounds);
  run_cmd->add_option("--batch-size", o.batch_size);
  run_cmd->add_option("--grid", o.grid, "points per axis");
  run_cmd->add_option("--replicates", o.replicates);
  run_cmd->add_option("--seed", o.seed, "base seed; replicate r uses seed + r");
  run_cmd->add_option("--out", o.out, "output directory");
  run_cmd->add_option("--jobs", o.jobs, "replicate worker threads");

  std::string plot_dir;
  auto* plot_cmd = app.add_subcommand("plot", "draw mse_curve.svg from summary.csv files");
  plot_cmd->add_option("--in", plot_dir, "run directory or a parent of run directories")
      ->required();

  auto* selftest_cmd = app.add_subcommand("selftest", "run the identity checks");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run(o);
    if (*plot_cmd) return plot(plot_dir);
    if (*selftest_cmd) return aicau::tools::run_selftest(std::cout) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
