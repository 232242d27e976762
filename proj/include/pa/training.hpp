#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pa/estimator.hpp"
#include "pa/gnn.hpp"
#include "pa/graph.hpp"

namespace pa {

enum class Mode { kErm, kPaCss, kPaLs, kPaBoth, kStruRwAblation };

Mode mode_from_string(const std::string& name);
std::string mode_to_string(Mode mode);

enum class Metric { kAccuracy, kBinaryF1 };

struct TrainConfig {
  int epochs = 400;
  int update_period = 10;  // epochs between weight re-estimations
  double lr = 0.003;
  double lambda_w = 0.0;
  double lambda_beta = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  Mode mode = Mode::kErm;
  double target_val_fraction = 0.2;
  Metric metric = Metric::kAccuracy;
  int hidden_dim = 20;

  std::string check() const;  // empty if valid
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double src_acc = 0.0;
  double tgt_val = 0.0;
  double tgt_test = 0.0;
};

struct RunResult {
  std::vector<EpochRecord> history;
  GnnModel final_model;
  GnnModel best_model;
  int best_epoch = 0;
  double best_val_score = 0.0;
  double test_score_at_best = 0.0;
  Matrix w;
  Vector alpha;
  Matrix gamma;
  Vector beta;
  int last_estimation_epoch = -1;  // -1: weights never updated
};

// Argmax-class score over the mask; ties broken toward the lowest class.
double evaluate(const SoftPredictions& preds, const LabeledGraph& graph,
                const std::vector<int>& mask, Metric metric);

// Seeded uniform split of all target nodes into validation/test masks.
void split_target(LabeledGraph& target, double val_fraction,
                  std::uint64_t seed);

// The full pairwise-alignment training loop. Source must be fully labeled;
// target labels are used only for validation/test scoring.
RunResult run_training(const LabeledGraph& source, LabeledGraph target,
                       const TrainConfig& config);

}  // namespace pa
