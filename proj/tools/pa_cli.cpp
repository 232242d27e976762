// Command-line experiment runner: sample CSBM presets or load graph files,
// train under the selected adaptation modes, and emit per-run logs plus CSV
// and JSON reports.

#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "pa/csbm.hpp"
#include "pa/gradcheck.hpp"
#include "pa/graph.hpp"
#include "pa/rng.hpp"
#include "pa/stats.hpp"
#include "pa/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitInputError = 2;
constexpr int kExitRuntimeError = 3;

struct ExperimentSpec {
  int preset_id = 0;  // 0: use graph files instead
  std::string source_path;
  std::string target_path;
  std::vector<std::string> modes{"erm"};
  int repeat = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_dir = "pa-out";
  std::string dump_weights_path;
  pa::TrainConfig train;
};

int parse_preset(const std::string& text) {
  // Accepts "csbm-<1..8>" or a bare integer.
  std::string digits = text;
  if (digits.rfind("csbm-", 0) == 0) digits = digits.substr(5);
  int id = 0;
  try {
    id = std::stoi(digits);
  } catch (...) {
    id = -1;
  }
  if (id < 1 || id > 8)
    throw std::invalid_argument("invalid preset '" + text +
                                "': expected csbm-1 .. csbm-8");
  return id;
}

// Flat key=value config file; unknown keys are an error.
void apply_config_file(ExperimentSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("malformed config line: " + line);
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "preset") spec.preset_id = parse_preset(value);
    else if (key == "source") spec.source_path = value;
    else if (key == "target") spec.target_path = value;
    else if (key == "modes") {
      spec.modes.clear();
      std::istringstream ms(value);
      std::string mode;
      while (std::getline(ms, mode, ',')) spec.modes.push_back(mode);
    } else if (key == "repeat") spec.repeat = std::stoi(value);
    else if (key == "seed") spec.seed = std::stoull(value);
    else if (key == "jobs") spec.jobs = std::stoi(value);
    else if (key == "out") spec.out_dir = value;
    else if (key == "epochs") spec.train.epochs = std::stoi(value);
    else if (key == "period") spec.train.update_period = std::stoi(value);
    else if (key == "lr") spec.train.lr = std::stod(value);
    else if (key == "lambda-w") spec.train.lambda_w = std::stod(value);
    else if (key == "lambda-beta") spec.train.lambda_beta = std::stod(value);
    else if (key == "delta") spec.train.delta = std::stod(value);
    else if (key == "val-fraction")
      spec.train.target_val_fraction = std::stod(value);
    else if (key == "metric")
      spec.train.metric = value == "binary-f1" ? pa::Metric::kBinaryF1
                                               : pa::Metric::kAccuracy;
    else throw std::invalid_argument("unknown config key: " + key);
  }
}

std::pair<pa::LabeledGraph, pa::LabeledGraph> load_domain_pair(
    const ExperimentSpec& spec, std::uint64_t seed) {
  if (spec.preset_id > 0) {
    auto [src_params, tgt_params] = pa::csbm_preset(spec.preset_id, seed);
    return {pa::sample_csbm(src_params), pa::sample_csbm(tgt_params)};
  }
  pa::LabeledGraph source = pa::load_graph(spec.source_path);
  pa::LabeledGraph target = pa::load_graph(spec.target_path);
  if (source.num_classes() != target.num_classes())
    throw std::invalid_argument("source and target class counts differ");
  return {std::move(source), std::move(target)};
}

json matrix_to_json(const pa::Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const pa::Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void write_run_log(const pa::RunResult& result, const fs::path& path) {
  std::ofstream out(path);
  out << std::setprecision(10);
  for (const auto& rec : result.history) {
    json line;
    line["epoch"] = rec.epoch;
    line["loss"] = rec.loss;
    line["src_acc"] = rec.src_acc;
    line["tgt_val"] = rec.tgt_val;
    line["tgt_test"] = rec.tgt_test;
    out << line.dump() << "\n";
  }
  json summary;
  summary["best_epoch"] = result.best_epoch;
  summary["best_val"] = result.best_val_score;
  summary["test_at_best"] = result.test_score_at_best;
  out << summary.dump() << "\n";
}

void dump_weights(const pa::RunResult& result, const std::string& path) {
  json doc;
  doc["w"] = matrix_to_json(result.w);
  doc["alpha"] = vector_to_json(result.alpha);
  doc["gamma"] = matrix_to_json(result.gamma);
  doc["beta"] = vector_to_json(result.beta);
  doc["epoch_of_solve"] = result.last_estimation_epoch;
  if (result.last_estimation_epoch < 0) doc["note"] = "never updated";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write weights file: " + path);
  out << doc.dump(2) << "\n";
}

json shift_report_json(const pa::DistributionSummary& src,
                       const pa::DistributionSummary& tgt) {
  const pa::CssMetric css = pa::css_metric(src, tgt);
  json doc;
  doc["css_src"] = css.src;
  doc["css_tgt"] = css.tgt;
  doc["css_both"] = css.both;
  doc["ls"] = pa::ls_metric(src, tgt);
  if (!css.skipped_classes.empty()) doc["skipped_classes"] = css.skipped_classes;
  return doc;
}

void print_shift_table(const json& report, std::ostream& os) {
  os << std::left << std::setw(10) << "metric" << "value\n";
  for (const char* key : {"css_src", "css_tgt", "css_both", "ls"}) {
    os << std::left << std::setw(10) << key << std::fixed
       << std::setprecision(4) << report[key].get<double>() << "\n";
  }
}

int command_run(ExperimentSpec spec) {
  if (spec.modes.empty())
    throw std::invalid_argument("at least one mode is required");
  if (spec.repeat < 1) throw std::invalid_argument("repeat must be >= 1");
  for (const auto& mode : spec.modes) pa::mode_from_string(mode);  // validate
  fs::create_directories(spec.out_dir);

  struct Task {
    std::string mode;
    int rep;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& mode : spec.modes) {
    for (int r = 0; r < spec.repeat; ++r)
      tasks.push_back({mode, r, spec.seed + static_cast<std::uint64_t>(r)});
  }

  std::vector<pa::RunResult> results(tasks.size());
  std::vector<std::string> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&]() {
    for (std::size_t idx = next.fetch_add(1); idx < tasks.size();
         idx = next.fetch_add(1)) {
      const Task& task = tasks[idx];
      try {
        auto [source, target] = load_domain_pair(spec, task.seed);
        pa::TrainConfig config = spec.train;
        config.mode = pa::mode_from_string(task.mode);
        config.seed = task.seed;
        results[idx] = pa::run_training(source, std::move(target), config);
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cout << task.mode << " seed=" << task.seed
                  << " test=" << std::fixed << std::setprecision(4)
                  << results[idx].test_score_at_best << "\n";
      } catch (const std::exception& e) {
        failures[idx] = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(spec.jobs,
                                             static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
    if (!failures[idx].empty()) {
      std::cerr << "run failed (" << tasks[idx].mode << ", seed "
                << tasks[idx].seed << "): " << failures[idx] << "\n";
      return kExitRuntimeError;
    }
  }

  // Per-run logs.
  for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
    const fs::path log = fs::path(spec.out_dir) /
                         (tasks[idx].mode + "-seed" +
                          std::to_string(tasks[idx].seed) + ".jsonl");
    write_run_log(results[idx], log);
  }

  // CSV summary: one row per mode, mean and stddev over repeats.
  {
    std::ofstream csv(fs::path(spec.out_dir) / "summary.csv");
    csv << "mode,repeats,mean_test,std_test\n";
    for (const auto& mode : spec.modes) {
      std::vector<double> scores;
      for (std::size_t idx = 0; idx < tasks.size(); ++idx)
        if (tasks[idx].mode == mode)
          scores.push_back(results[idx].test_score_at_best);
      double mean = 0.0;
      for (double s : scores) mean += s;
      mean /= static_cast<double>(scores.size());
      double var = 0.0;
      for (double s : scores) var += (s - mean) * (s - mean);
      const double stddev =
          scores.size() > 1
              ? std::sqrt(var / static_cast<double>(scores.size() - 1))
              : 0.0;
      csv << mode << "," << scores.size() << "," << std::fixed
          << std::setprecision(4) << mean << "," << stddev << "\n";
    }
  }

  // Shift metrics for the (first-seed) domain pair.
  {
    auto [source, target] = load_domain_pair(spec, spec.seed);
    const json report =
        shift_report_json(pa::summarize(source), pa::summarize(target));
    std::ofstream out(fs::path(spec.out_dir) / "shift-report.json");
    out << report.dump(2) << "\n";
  }

  if (!spec.dump_weights_path.empty())
    dump_weights(results.back(), spec.dump_weights_path);
  std::cout << "wrote reports to " << spec.out_dir << "\n";
  return 0;
}

int command_shift_report(ExperimentSpec spec) {
  auto [source, target] = load_domain_pair(spec, spec.seed);
  const json report =
      shift_report_json(pa::summarize(source), pa::summarize(target));
  std::cout << report.dump(2) << "\n";
  print_shift_table(report, std::cout);
  return 0;
}

int command_generate(const ExperimentSpec& spec, const std::string& out_source,
                     const std::string& out_target) {
  if (spec.preset_id <= 0)
    throw std::invalid_argument("generate requires --preset");
  auto [src_params, tgt_params] = pa::csbm_preset(spec.preset_id, spec.seed);
  pa::save_graph(pa::sample_csbm(src_params), out_source);
  pa::save_graph(pa::sample_csbm(tgt_params), out_target);
  std::cout << "wrote " << out_source << " and " << out_target << "\n";
  return 0;
}

int command_grad_check(std::uint64_t seed) {
  // Small random graph; the finite-difference suite is quadratic in the
  // parameter count.
  pa::CsbmParams params;
  params.n = 30;
  params.k = 3;
  params.pi = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  params.B = pa::Matrix::Constant(3, 3, 0.1);
  params.B.diagonal().setConstant(0.3);
  params.means = pa::Matrix::Identity(3, 3);
  params.sigma = 0.3;
  params.seed = seed;
  pa::LabeledGraph graph = pa::sample_csbm(params);

  pa::GnnModel model = pa::GnnModel::init(3, 8, 3, seed + 1);
  std::vector<int> mask(graph.num_nodes());
  for (int u = 0; u < graph.num_nodes(); ++u) mask[u] = u;
  pa::Vector beta(3);
  beta << 1.3, 0.8, 0.9;
  const auto report =
      pa::gradient_check(model, graph, beta, mask, /*use_edge_weights=*/false);
  std::cout << "max relative gradient error: " << std::scientific
            << report.max_relative_error << " (tensor " << report.tensor_index
            << ", entry " << report.entry_index << ")\n";
  if (report.max_relative_error >= 1e-4) {
    std::cerr << "gradient check FAILED\n";
    return kExitRuntimeError;
  }
  std::cout << "gradient check passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pairwise alignment for graph domain adaptation"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  std::string preset_text;
  std::string config_path;
  std::string modes_text;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--preset", preset_text, "CSBM preset (csbm-1 .. csbm-8)");
    cmd->add_option("--source", spec.source_path, "source graph file");
    cmd->add_option("--target", spec.target_path, "target graph file");
    cmd->add_option("--seed", spec.seed, "base RNG seed");
  };

  CLI::App* run = app.add_subcommand("run", "train and report");
  add_common(run);
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("--modes", modes_text, "comma-separated training modes");
  run->add_option("--repeat", spec.repeat, "seeds per mode");
  run->add_option("--epochs", spec.train.epochs, "training epochs");
  run->add_option("--period", spec.train.update_period,
                  "epochs between weight updates");
  run->add_option("--lambda-w", spec.train.lambda_w, "L2 pull for w");
  run->add_option("--lambda-beta", spec.train.lambda_beta, "L2 pull for beta");
  run->add_option("--delta", spec.train.delta, "edge probability smoothing");
  run->add_option("--lr", spec.train.lr, "learning rate");
  run->add_option("--jobs", spec.jobs, "parallel runs");
  run->add_option("--out", spec.out_dir, "output directory");
  run->add_option("--dump-weights", spec.dump_weights_path,
                  "JSON dump of final w/alpha/gamma/beta");

  CLI::App* shift = app.add_subcommand("shift-report", "CSS/LS shift metrics");
  add_common(shift);

  CLI::App* generate =
      app.add_subcommand("generate", "sample a CSBM preset to graph files");
  add_common(generate);
  std::string out_source = "source.graph";
  std::string out_target = "target.graph";
  generate->add_option("--out-source", out_source, "source output path");
  generate->add_option("--out-target", out_target, "target output path");

  CLI::App* gradcheck =
      app.add_subcommand("grad-check", "finite-difference gradient suite");
  gradcheck->add_option("--seed", spec.seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) apply_config_file(spec, config_path);
    if (!preset_text.empty()) spec.preset_id = parse_preset(preset_text);
    if (!modes_text.empty()) {
      spec.modes.clear();
      std::istringstream ms(modes_text);
      std::string mode;
      while (std::getline(ms, mode, ',')) spec.modes.push_back(mode);
    }
    if (spec.preset_id == 0 &&
        (spec.source_path.empty() || spec.target_path.empty()) &&
        !gradcheck->parsed())
      throw std::invalid_argument("need --preset or both --source/--target");

    if (run->parsed()) return command_run(std::move(spec));
    if (shift->parsed()) return command_shift_report(std::move(spec));
    if (generate->parsed())
      return command_generate(spec, out_source, out_target);
    if (gradcheck->parsed()) return command_grad_check(spec.seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return 0;
}
