#include "aicau/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "aicau/errors.hpp"
#include "aicau/pool.hpp"

namespace aicau {

namespace {

using nlohmann::json;
using Config = ExperimentConfig;

struct Field {
  const char* key;
  std::function<json(const Config&)> get;
  std::function<void(Config&, const json&)> set;
};

template <typename T, typename Member>
Field plain(const char* key, Member member) {
  return {key, [member](const Config& c) { return json(std::invoke(member, c)); },
          [member](Config& c, const json& v) { std::invoke(member, c) = v.get<T>(); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"problem_type", [](const Config& c) { return json(static_cast<int>(c.problem_type)); },
       [](Config& c, const json& v) { c.problem_type = parse_problem_type(v.get<int>()); }},
      {"strategy", [](const Config& c) { return json(std::string(to_string(c.strategy))); },
       [](Config& c, const json& v) { c.strategy = parse_strategy(v.get<std::string>()); }},
      {"estimator", [](const Config& c) { return json(std::string(to_string(c.estimator))); },
       [](Config& c, const json& v) { c.estimator = parse_estimator(v.get<std::string>()); }},
      {"batch_mode", [](const Config& c) { return json(std::string(to_string(c.batch_mode))); },
       [](Config& c, const json& v) { c.batch_mode = parse_batch_mode(v.get<std::string>()); }},
      plain<int>("n_init", &Config::n_init),
      plain<int>("n_rounds", &Config::n_rounds),
      plain<int>("batch_size", &Config::batch_size),
      plain<int>("grid_resolution", &Config::grid_resolution),
      plain<int>("n_replicates", &Config::n_replicates),
      plain<std::uint64_t>("base_seed", &Config::base_seed),
      plain<std::string>("output_path", &Config::output_path),
      plain<int>("jobs", &Config::jobs),
      plain<int>("cheat_realizations", &Config::cheat_realizations),
      plain<bool>("distinct_batch", &Config::distinct_batch),
      {"bald_noise_variance", [](const Config& c) { return json(c.scoring.bald_noise_variance); },
       [](Config& c, const json& v) { c.scoring.bald_noise_variance = v.get<double>(); }},
      {"noise_scale", [](const Config& c) { return json(c.oracle.noise_scale); },
       [](Config& c, const json& v) { c.oracle.noise_scale = v.get<double>(); }},
      {"correlation_rate", [](const Config& c) { return json(c.oracle.correlation_rate); },
       [](Config& c, const json& v) { c.oracle.correlation_rate = v.get<double>(); }},
      {"correlation_metric",
       [](const Config& c) { return json(std::string(to_string(c.oracle.correlation_metric))); },
       [](Config& c, const json& v) {
         c.oracle.correlation_metric = parse_correlation_metric(v.get<std::string>());
       }},
      {"ensemble_members", [](const Config& c) { return json(c.ensemble.n_members); },
       [](Config& c, const json& v) { c.ensemble.n_members = v.get<int>(); }},
      {"ensemble_hidden", [](const Config& c) { return json(c.ensemble.hidden_sizes); },
       [](Config& c, const json& v) { c.ensemble.hidden_sizes = v.get<std::vector<int>>(); }},
      {"ensemble_learning_rate", [](const Config& c) { return json(c.ensemble.adam.learning_rate); },
       [](Config& c, const json& v) { c.ensemble.adam.learning_rate = v.get<double>(); }},
      {"ensemble_bag_fraction", [](const Config& c) { return json(c.ensemble.bag_fraction); },
       [](Config& c, const json& v) { c.ensemble.bag_fraction = v.get<double>(); }},
      {"ensemble_min_delta", [](const Config& c) { return json(c.ensemble.min_delta); },
       [](Config& c, const json& v) { c.ensemble.min_delta = v.get<double>(); }},
      {"ensemble_patience", [](const Config& c) { return json(c.ensemble.patience); },
       [](Config& c, const json& v) { c.ensemble.patience = v.get<int>(); }},
      {"ensemble_max_epochs", [](const Config& c) { return json(c.ensemble.max_epochs); },
       [](Config& c, const json& v) { c.ensemble.max_epochs = v.get<int>(); }},
      {"ensemble_batch_size", [](const Config& c) { return json(c.ensemble.batch_size); },
       [](Config& c, const json& v) { c.ensemble.batch_size = v.get<int>(); }},
      {"gp_constant_init", [](const Config& c) { return json(c.direct.constant_init); },
       [](Config& c, const json& v) { c.direct.constant_init = v.get<double>(); }},
      {"gp_length_init", [](const Config& c) { return json(c.direct.length_init); },
       [](Config& c, const json& v) { c.direct.length_init = v.get<double>(); }},
      {"gp_alpha", [](const Config& c) { return json(c.direct.alpha); },
       [](Config& c, const json& v) { c.direct.alpha = v.get<double>(); }},
      {"gp_restarts", [](const Config& c) { return json(c.direct.restarts); },
       [](Config& c, const json& v) { c.direct.restarts = v.get<int>(); }},
      {"gp_max_iterations", [](const Config& c) { return json(c.direct.max_iterations); },
       [](Config& c, const json& v) { c.direct.max_iterations = v.get<int>(); }},
      {"direct_target",
       [](const Config& c) {
         return json(c.direct.target == DirectTarget::Pemse ? "pemse" : "bias");
       },
       [](Config& c, const json& v) {
         const auto s = v.get<std::string>();
         if (s == "bias") {
           c.direct.target = DirectTarget::Bias;
         } else if (s == "pemse") {
           c.direct.target = DirectTarget::Pemse;
         } else {
           throw std::invalid_argument("unknown direct_target: " + s);
         }
       }},
      {"quadratic_embedding_dim", [](const Config& c) { return json(c.quadratic.embedding_dim); },
       [](Config& c, const json& v) { c.quadratic.embedding_dim = v.get<int>(); }},
      {"quadratic_hidden", [](const Config& c) { return json(c.quadratic.hidden_sizes); },
       [](Config& c, const json& v) { c.quadratic.hidden_sizes = v.get<std::vector<int>>(); }},
      {"quadratic_dropout", [](const Config& c) { return json(c.quadratic.dropout); },
       [](Config& c, const json& v) { c.quadratic.dropout = v.get<double>(); }},
      {"quadratic_batch_norm", [](const Config& c) { return json(c.quadratic.batch_norm); },
       [](Config& c, const json& v) { c.quadratic.batch_norm = v.get<bool>(); }},
      {"quadratic_learning_rate", [](const Config& c) { return json(c.quadratic.adam.learning_rate); },
       [](Config& c, const json& v) { c.quadratic.adam.learning_rate = v.get<double>(); }},
      {"quadratic_beta1", [](const Config& c) { return json(c.quadratic.adam.beta1); },
       [](Config& c, const json& v) { c.quadratic.adam.beta1 = v.get<double>(); }},
      {"quadratic_beta2", [](const Config& c) { return json(c.quadratic.adam.beta2); },
       [](Config& c, const json& v) { c.quadratic.adam.beta2 = v.get<double>(); }},
      {"quadratic_weight_decay", [](const Config& c) { return json(c.quadratic.adam.weight_decay); },
       [](Config& c, const json& v) { c.quadratic.adam.weight_decay = v.get<double>(); }},
      {"quadratic_patience", [](const Config& c) { return json(c.quadratic.patience); },
       [](Config& c, const json& v) { c.quadratic.patience = v.get<int>(); }},
      {"quadratic_max_epochs", [](const Config& c) { return json(c.quadratic.max_epochs); },
       [](Config& c, const json& v) { c.quadratic.max_epochs = v.get<int>(); }},
      {"quadratic_validation_fraction",
       [](const Config& c) { return json(c.quadratic.validation_fraction); },
       [](Config& c, const json& v) { c.quadratic.validation_fraction = v.get<double>(); }},
      {"quadratic_overwrite_observed",
       [](const Config& c) { return json(c.quadratic.overwrite_observed); },
       [](Config& c, const json& v) { c.quadratic.overwrite_observed = v.get<bool>(); }},
  };
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("config: " + message);
}

bool needs_matrix(const Config& config) { return config.batch_mode == BatchMode::Eigen; }

/// The matrix eigen batching decomposes for `strategy`, before differencing.
SymMatrix strategy_matrix(Strategy strategy, const PredictiveSummary& summary,
                          const BiasEstimate* estimate) {
  switch (base_strategy(strategy)) {
    case Strategy::LeastConfidence:
      return sigma_F_from_members(summary.member_matrix);
    case Strategy::BiasReduction:
      return estimate->omega->delta_mat;
    case Strategy::Pemse:
      return estimate->omega->omega;
    default:
      throw std::invalid_argument("eigen batching needs lc, br, pemse or a difference strategy");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(grid_resolution >= 2, "grid_resolution must be at least 2");
  const long n = static_cast<long>(grid_resolution) * grid_resolution;
  require(n_init >= 1 && n_init <= n, "n_init must lie in [1, grid size]");
  require(n_rounds >= 0, "n_rounds must be non-negative");
  require(batch_size >= 1, "batch_size must be positive");
  require(batch_mode != BatchMode::Single || batch_size == 1, "single mode requires batch_size 1");
  require(n_replicates >= 1, "n_replicates must be positive");
  require(jobs >= 1, "jobs must be positive");
  require(cheat_realizations >= 1, "cheat_realizations must be positive");
  require(ensemble.n_members >= 2, "ensemble_members must be at least 2");
  require(oracle.noise_scale >= 0.0, "noise_scale must be non-negative");
  require(oracle.correlation_rate > 0.0, "correlation_rate must be positive");
  require(scoring.bald_noise_variance > 0.0, "bald_noise_variance must be positive");
  require(estimator == EstimatorKind::Cheat || is_difference(strategy) || needs_bias(strategy),
          "direct and quadratic estimators apply to br, pemse and difference strategies");
  if (batch_mode == BatchMode::Eigen) {
    const Strategy base = base_strategy(strategy);
    require(base == Strategy::LeastConfidence || base == Strategy::BiasReduction ||
                base == Strategy::Pemse,
            "eigen batching needs lc, br, pemse or a difference strategy");
  }
  if (problem_type == ProblemType::TypeI) {
    require(n_init + static_cast<long>(n_rounds) * batch_size <= n,
            "TypeI budget exceeds the grid size");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  json j = json::object();
  for (const auto& f : fields()) j[f.key] = f.get(*this);
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, ExperimentConfig base) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = std::find_if(fields().begin(), fields().end(),
                                 [&](const Field& f) { return key == f.key; });
    if (it == fields().end()) throw std::invalid_argument("config: unknown key '" + key + "'");
    try {
      it->set(base, value);
    } catch (const json::exception& e) {
      throw std::invalid_argument("config: bad value for '" + key + "': " + e.what());
    }
  }
  return base;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  return from_json(j, ExperimentConfig{});
}

ExperimentConfig desk_preset() { return ExperimentConfig{}; }

ExperimentConfig full_preset(bool batched) {
  ExperimentConfig c;
  c.grid_resolution = 50;
  c.n_replicates = 10;
  if (batched) {
    c.n_init = 10;
    c.n_rounds = 10;
    c.batch_size = 10;
    c.batch_mode = BatchMode::TopM;
  } else {
    c.n_init = 100;
    c.n_rounds = 50;
  }
  return c;
}

double mse_vs_truth(const Eigen::VectorXd& prediction, const Eigen::VectorXd& truth) {
  if (prediction.size() != truth.size() || truth.size() == 0) {
    throw std::invalid_argument("mse_vs_truth: size mismatch");
  }
  return (prediction - truth).squaredNorm() / static_cast<double>(truth.size());
}

RunRecord run_replicate(const ExperimentConfig& config, std::uint64_t replicate_seed) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  RunRecord record;
  record.seed = replicate_seed;

  const StateGrid grid = build_grid(config.grid_resolution);
  OracleSpec oracle_spec = config.oracle;
  oracle_spec.problem_type = config.problem_type;
  const Oracle oracle(oracle_spec, grid);
  const Eigen::VectorXd truth = oracle.mean_field();

  // One training stream per replicate: every round and every strategy starts
  // the members from the same initial weights.
  EnsembleConfig ensemble_config = config.ensemble;
  ensemble_config.rng_seed = stream_seed(replicate_seed, "ensemble");

  Rng pool_rng(replicate_seed, "pool-init");
  Rng init_oracle_rng(replicate_seed, "oracle", 0);
  LabeledPool pool = init_pool(grid, config.n_init, oracle, pool_rng, init_oracle_rng);
  EnsembleModel model = fit(pool, grid, ensemble_config, 0);
  PredictiveSummary summary = predict(model, grid);
  record.initial_mse = mse_vs_truth(summary.mean, truth);
  record.initial_labeled = static_cast<int>(pool.observation_count());

  const bool bias = needs_bias(config.strategy) ||
                    (needs_matrix(config) && base_strategy(config.strategy) != Strategy::LeastConfidence);
  const bool matrix = needs_matrix(config);
  std::optional<TauVector> prev_tau;
  std::optional<SymMatrix> prev_matrix;

  for (int k = 1; k <= config.n_rounds; ++k) {
    const auto start = Clock::now();
    RoundRow row;
    row.round = k;
    try {
      const auto uk = static_cast<std::uint64_t>(k);
      std::optional<BiasEstimate> estimate;
      if (bias) {
        switch (config.estimator) {
          case EstimatorKind::Cheat: {
            Rng cheat_rng(replicate_seed, "cheat", uk);
            estimate = cheat_estimate(summary, oracle, cheat_rng, config.cheat_realizations,
                                      matrix);
            break;
          }
          case EstimatorKind::Direct: {
            DirectEstimatorConfig c = config.direct;
            c.rng_seed = stream_seed(replicate_seed, "gp", uk);
            estimate = direct_estimate(summary, pool, grid, c, matrix);
            break;
          }
          case EstimatorKind::Quadratic: {
            QuadraticEstimatorConfig c = config.quadratic;
            c.rng_seed = stream_seed(replicate_seed, "quadratic", uk);
            estimate = quadratic_estimate(summary, pool, grid, c, matrix);
            break;
          }
        }
      }
      const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(summary.mean.size());
      const TauVector tau =
          estimate ? estimate->tau : TauVector::from_components(summary.variance, zeros, zeros);

      const bool diff_ready = !is_difference(config.strategy) || prev_tau.has_value();
      const Strategy effective = diff_ready ? config.strategy : base_strategy(config.strategy);
      row.strategy_fallback = !diff_ready;

      const std::vector<bool> eligible =
          eligible_mask(pool.labeled_mask(), config.problem_type != ProblemType::TypeI);
      Rng strategy_rng(replicate_seed, "random-strategy", uk);

      IndexList selected;
      if (config.batch_mode == BatchMode::Eigen) {
        SymMatrix current = strategy_matrix(config.strategy, summary,
                                            estimate ? &*estimate : nullptr);
        EigenBatchOptions options;
        options.distinct = config.distinct_batch || config.problem_type == ProblemType::TypeI;
        BatchSelection batch;
        if (is_difference(effective)) {
          options.mode = EigenMode::OmegaDifference;
          batch = select_batch_eigen(*prev_matrix - current, config.batch_size, eligible, options);
        } else {
          options.mode = EigenMode::Omega;
          batch = select_batch_eigen(current, config.batch_size, eligible, options);
        }
        row.eigen_fallback = batch.used_fallback();
        selected = batch.indices;
        prev_matrix = std::move(current);
      } else {
        const AcquisitionScores scores =
            score(effective, tau, prev_tau ? &*prev_tau : nullptr, eligible, strategy_rng,
                  config.scoring);
        if (config.batch_mode == BatchMode::Single) {
          selected = {select_single(scores)};
        } else {
          selected = select_batch_topm(scores, config.batch_size).indices;
        }
      }
      prev_tau = tau;

      Rng oracle_rng(replicate_seed, "oracle", uk);
      const NoisyDraw draw = oracle.sample(selected, oracle_rng, k);
      commit_queries(pool, selected, draw);

      model = fit(pool, grid, ensemble_config, k);
      summary = predict(model, grid);

      row.n_labeled = static_cast<int>(pool.observation_count());
      row.mse = mse_vs_truth(summary.mean, truth);
      row.selected = std::move(selected);
    } catch (const std::exception& e) {
      record.failed = true;
      record.error = "round " + std::to_string(k) + ": " + e.what();
      break;
    }
    row.wall_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    record.rows.push_back(std::move(row));
  }
  return record;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const int n = config.n_replicates;
  std::vector<RunRecord> records(static_cast<std::size_t>(n));
  auto run_one = [&](int r) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(r);
    try {
      records[r] = run_replicate(config, seed);
    } catch (const std::exception& e) {
      records[r].seed = seed;
      records[r].failed = true;
      records[r].error = e.what();
    }
  };
  const int workers = std::min(config.jobs, n);
  if (workers <= 1) {
    for (int r = 0; r < n; ++r) run_one(r);
    return records;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int r = next++; r < n; r = next++) run_one(r);
    });
  }
  for (auto& t : pool) t.join();
  return records;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: no values");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return values[lo] + t * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize_runs(const std::vector<RunRecord>& records) {
  std::map<int, std::vector<double>> by_round;
  for (const auto& rec : records) {
    if (rec.failed) continue;
    by_round[0].push_back(rec.initial_mse);
    for (const auto& row : rec.rows) by_round[row.round].push_back(row.mse);
  }
  std::vector<SummaryRow> out;
  for (const auto& [round, values] : by_round) {
    out.push_back({round, static_cast<int>(values.size()), quantile(values, 0.5),
                   quantile(values, 0.25), quantile(values, 0.75)});
  }
  return out;
}

std::string runs_csv(const std::vector<RunRecord>& records, const ExperimentConfig& config) {
  std::ostringstream os;
  os << "seed,problem_type,strategy,estimator,batch_mode,round,n_labeled,mse,selected_indices,"
        "wall_ms\n";
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) {
      os << rec.seed << ',' << static_cast<int>(config.problem_type) << ','
         << to_string(config.strategy) << ',' << to_string(config.estimator) << ','
         << to_string(config.batch_mode) << ',' << row.round << ',' << row.n_labeled << ','
         << format_double(row.mse) << ',';
      for (std::size_t i = 0; i < row.selected.size(); ++i) {
        if (i) os << ';';
        os << row.selected[i];
      }
      char wall[32];
      std::snprintf(wall, sizeof(wall), "%.3f", row.wall_ms);
      os << ',' << wall << '\n';
    }
  }
  return os.str();
}

std::string summary_csv(const std::vector<RunRecord>& records, const ExperimentConfig& config) {
  std::ostringstream os;
  os << "problem_type,strategy,estimator,batch_mode,round,count,median,q25,q75,iqr\n";
  for (const auto& s : summarize_runs(records)) {
    os << static_cast<int>(config.problem_type) << ',' << to_string(config.strategy) << ','
       << to_string(config.estimator) << ',' << to_string(config.batch_mode) << ',' << s.round
       << ',' << s.count << ',' << format_double(s.median) << ',' << format_double(s.q25) << ','
       << format_double(s.q75) << ',' << format_double(s.q75 - s.q25) << '\n';
  }
  return os.str();
}

std::string mse_curve_svg(const std::vector<Curve>& curves) {
  constexpr double height = 440, left = 70, top = 20, bottom = 50, pw = 460;
  std::size_t longest = 0;
  for (const auto& c : curves) longest = std::max(longest, c.label.size());
  // roughly 7 px per character at font size 12
  const double right = std::max(190.0, 50.0 + 7.0 * static_cast<double>(longest));
  const double width = left + pw + right, ph = height - top - bottom;

  double x_max = 1.0, y_lo = std::numeric_limits<double>::infinity(), y_hi = 0.0;
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      x_max = std::max(x_max, c.rounds[i]);
      if (c.values[i] > 0.0) {
        y_lo = std::min(y_lo, c.values[i]);
        y_hi = std::max(y_hi, c.values[i]);
      }
    }
  }
  if (!(y_hi > 0.0)) {
    y_lo = 1e-3;
    y_hi = 1.0;
  }
  const double d_lo = std::floor(std::log10(y_lo));
  const double d_hi = std::max(std::ceil(std::log10(y_hi)), d_lo + 1);
  auto px = [&](double x) { return left + pw * x / x_max; };
  auto py = [&](double y) { return top + ph * (d_hi - std::log10(y)) / (d_hi - d_lo); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = d_lo; d < d_hi; d += 1.0) {
    for (int k = 2; k <= 9; ++k) {
      const double y = py(k * std::pow(10.0, d));
      os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << y << "\" y2=\""
         << y << "\" stroke=\"#f2f2f2\"/>\n";
    }
  }
  for (double d = d_lo; d <= d_hi; d += 1.0) {
    const double y = py(std::pow(10.0, d));
    os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << y << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e"
       << static_cast<int>(d) << "</text>\n";
  }
  const int x_step = std::max(1, static_cast<int>(std::ceil(x_max / 10.0)));
  for (int x = 0; x <= static_cast<int>(x_max); x += x_step) {
    os << "<text x=\"" << px(x) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
       << x << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\">round</text>\n";
  os << "<text transform=\"translate(16," << top + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">median MSE</text>\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = palette[c % std::size(palette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curves[c].values.size(); ++i) {
      if (!(curves[c].values[i] > 0.0)) continue;
      os << px(curves[c].rounds[i]) << ',' << py(curves[c].values[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(c);
    os << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 32 << "\" y1=\"" << ly - 4
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly << "\">" << curves[c].label
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  return out;
}

void read_summary(const std::filesystem::path& file, std::map<std::string, Curve>& curves) {
  std::ifstream in(file);
  std::string line;
  if (!std::getline(in, line)) return;
  const auto header = split(line, ',');
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error(file.string() + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_strategy = column("strategy"), c_estimator = column("estimator"),
                    c_mode = column("batch_mode"), c_round = column("round"),
                    c_median = column("median"), c_type = column("problem_type");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() < header.size()) throw std::runtime_error(file.string() + ": short row");
    const std::string label = "T" + cells[c_type] + " " + cells[c_strategy] + "/" +
                              cells[c_estimator] + "/" + cells[c_mode];
    Curve& curve = curves[label];
    curve.label = label;
    curve.rounds.push_back(std::stod(cells[c_round]));
    curve.values.push_back(std::stod(cells[c_median]));
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::vector<Curve> load_summary_curves(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::map<std::string, Curve> curves;
  std::vector<fs::path> files;
  if (fs::exists(dir / "summary.csv")) files.push_back(dir / "summary.csv");
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "summary.csv")) {
        files.push_back(entry.path() / "summary.csv");
      }
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) read_summary(f, curves);
  std::vector<Curve> out;
  for (auto& [label, curve] : curves) out.push_back(std::move(curve));
  return out;
}

void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto probe = dir / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("output directory not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
}

void emit_outputs(const std::vector<RunRecord>& records, const ExperimentConfig& config,
                  const std::filesystem::path& dir) {
  if (records.empty()) throw std::invalid_argument("emit_outputs: no records");
  ensure_writable(dir);
  write_file(dir / "runs.csv", runs_csv(records, config));
  write_file(dir / "summary.csv", summary_csv(records, config));
  write_file(dir / "config.json", config.to_json().dump(2) + "\n");
  const auto curves = load_summary_curves(dir);
  write_file(dir / "mse_curve.svg", mse_curve_svg(curves));
}

}  // namespace aicau
