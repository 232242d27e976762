#include "pa/training.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "pa/rng.hpp"
#include "pa/stats.hpp"

namespace pa {

Mode mode_from_string(const std::string& name) {
  if (name == "erm") return Mode::kErm;
  if (name == "pa-css") return Mode::kPaCss;
  if (name == "pa-ls") return Mode::kPaLs;
  if (name == "pa-both") return Mode::kPaBoth;
  if (name == "strurw") return Mode::kStruRwAblation;
  throw std::invalid_argument(
      "unknown mode '" + name +
      "' (expected erm, pa-css, pa-ls, pa-both, strurw)");
}

std::string mode_to_string(Mode mode) {
  switch (mode) {
    case Mode::kErm: return "erm";
    case Mode::kPaCss: return "pa-css";
    case Mode::kPaLs: return "pa-ls";
    case Mode::kPaBoth: return "pa-both";
    case Mode::kStruRwAblation: return "strurw";
  }
  return "?";
}

std::string TrainConfig::check() const {
  if (epochs < 1) return "epochs must be >= 1";
  if (update_period < 1) return "update period must be >= 1";
  if (lr <= 0.0) return "learning rate must be positive";
  if (lambda_w < 0.0 || lambda_beta < 0.0) return "lambda must be >= 0";
  if (delta < 0.0) return "delta must be >= 0";
  if (target_val_fraction <= 0.0 || target_val_fraction >= 1.0)
    return "validation fraction must be in (0,1)";
  if (hidden_dim < 1) return "hidden dim must be >= 1";
  return "";
}

double evaluate(const SoftPredictions& preds, const LabeledGraph& graph,
                const std::vector<int>& mask, Metric metric) {
  if (mask.empty()) throw std::invalid_argument("empty evaluation mask");
  long tp = 0, fp = 0, fn = 0, correct = 0;
  for (int u : mask) {
    int pred = 0;
    for (int i = 1; i < preds.cols(); ++i)
      if (preds(u, i) > preds(u, pred)) pred = i;  // ties keep lowest index
    const int truth = graph.labels()[u];
    if (pred == truth) ++correct;
    if (metric == Metric::kBinaryF1) {
      if (pred == 1 && truth == 1) ++tp;
      if (pred == 1 && truth != 1) ++fp;
      if (pred != 1 && truth == 1) ++fn;
    }
  }
  if (metric == Metric::kAccuracy)
    return static_cast<double>(correct) / static_cast<double>(mask.size());
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
}

void split_target(LabeledGraph& target, double val_fraction,
                  std::uint64_t seed) {
  if (val_fraction <= 0.0 || val_fraction >= 1.0)
    throw std::invalid_argument("validation fraction must be in (0,1)");
  std::vector<int> order(target.num_nodes());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = target.num_nodes() - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  const int val_count = static_cast<int>(
      static_cast<double>(target.num_nodes()) * val_fraction);
  target.val_mask.assign(order.begin(), order.begin() + val_count);
  target.test_mask.assign(order.begin() + val_count, order.end());
  target.train_mask.clear();
}

RunResult run_training(const LabeledGraph& source, LabeledGraph target,
                       const TrainConfig& config) {
  const std::string err = config.check();
  if (!err.empty()) throw std::invalid_argument("invalid train config: " + err);
  if (source.num_classes() != target.num_classes())
    throw std::invalid_argument("source/target class count mismatch");
  if (source.feature_dim() != target.feature_dim())
    throw std::invalid_argument("source/target feature dim mismatch");

  LabeledGraph src = source;  // local copy: edge weights mutate per epoch
  std::vector<int> train_mask = src.train_mask;
  if (train_mask.empty()) {
    train_mask.resize(src.num_nodes());
    std::iota(train_mask.begin(), train_mask.end(), 0);
  }
  if (target.val_mask.empty() && target.test_mask.empty())
    split_target(target, config.target_val_fraction, config.seed);

  const int k = src.num_classes();
  const bool reweight_edges = config.mode == Mode::kPaCss ||
                              config.mode == Mode::kPaBoth ||
                              config.mode == Mode::kStruRwAblation;
  const bool reweight_loss =
      config.mode == Mode::kPaLs || config.mode == Mode::kPaBoth;
  const bool estimates_needed = config.mode != Mode::kErm;

  const Matrix src_edge_type_dist = summarize(src).edge_type_dist;
  const Vector src_label_dist = summarize(src).label_dist;

  RunResult result;
  result.w = Matrix::Ones(k, k);
  result.alpha = Vector::Ones(k);
  result.gamma = Matrix::Ones(k, k);
  result.beta = Vector::Ones(k);

  GnnModel model =
      GnnModel::init(src.feature_dim(), config.hidden_dim, k, config.seed);
  AdamState opt;
  const Vector unit_beta = Vector::Ones(k);
  result.best_model = model;
  result.best_val_score = -1.0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (reweight_edges) {
      src.set_edge_weights_by_label(
          config.mode == Mode::kStruRwAblation ? result.w : result.gamma);
    }
    const Vector& loss_beta = reweight_loss ? result.beta : unit_beta;
    LossResult loss;
    try {
      loss = loss_and_grad(model, src, loss_beta, train_mask, reweight_edges);
      adam_step(model, loss.grads, opt, config.lr);
    } catch (const std::exception& e) {
      throw std::runtime_error("epoch " + std::to_string(epoch) + ": " +
                               e.what());
    }

    if (estimates_needed && epoch % config.update_period == 0) {
      try {
        // Estimation predictions come from the unweighted encoder on both
        // graphs; the weighted encoder is only the training-loss pathway.
        const SoftPredictions src_preds = forward(model, src, false);
        const SoftPredictions tgt_preds = forward(model, target, false);
        if (config.mode != Mode::kPaLs) {
          auto [sigma, nu] = estimate_sigma_nu(src, src_preds, target, tgt_preds);
          result.w = solve_w(sigma, nu, src_edge_type_dist, config.lambda_w,
                             /*symmetric=*/true);
          result.alpha = compute_alpha(result.w, src_edge_type_dist);
          result.gamma =
              compute_gamma(result.w, src_edge_type_dist, config.delta);
        }
        if (config.mode != Mode::kPaCss &&
            config.mode != Mode::kStruRwAblation) {
          auto [c_hat, mu] =
              estimate_confusion_mu(src.labels(), src_preds, tgt_preds);
          result.beta =
              solve_beta(c_hat, mu, src_label_dist, config.lambda_beta);
        }
        result.last_estimation_epoch = epoch;
      } catch (const std::exception& e) {
        throw std::runtime_error("weight estimation at epoch " +
                                 std::to_string(epoch) + ": " + e.what());
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.loss = loss.loss;
    const SoftPredictions src_eval = forward(model, src, reweight_edges);
    record.src_acc = evaluate(src_eval, src, train_mask, Metric::kAccuracy);
    const SoftPredictions tgt_eval = forward(model, target, false);
    record.tgt_val = evaluate(tgt_eval, target, target.val_mask, config.metric);
    record.tgt_test =
        evaluate(tgt_eval, target, target.test_mask, config.metric);
    if (record.tgt_val > result.best_val_score) {
      result.best_val_score = record.tgt_val;
      result.best_epoch = epoch;
      result.best_model = model;
      result.test_score_at_best = record.tgt_test;
    }
    result.history.push_back(record);
  }

  result.final_model = std::move(model);
  return result;
}

}  // namespace pa
