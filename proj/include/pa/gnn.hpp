#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pa/estimator.hpp"
#include "pa/graph.hpp"

namespace pa {

// Three weighted-mean message-passing layers followed by a two-layer
// classifier. Each layer computes
//   h_u <- relu(W_self h_u + W_neigh m_u + bias),
// where m_u is the weighted mean of neighbor representations normalized by
// the sum of edge weights (zero vector for isolated nodes). 64-bit floats
// throughout.
struct GnnModel {
  static constexpr int kNumLayers = 3;

  struct Layer {
    Matrix w_self;   // out x in
    Matrix w_neigh;  // out x in
    Matrix bias;     // out x 1
  };

  std::vector<Layer> layers;
  Matrix cls_w1;
  Matrix cls_b1;  // hidden x 1
  Matrix cls_w2;
  Matrix cls_b2;  // k x 1

  int feature_dim = 0;
  int hidden_dim = 0;
  int num_classes = 0;

  // Uniform fan-in initialization, fully determined by the seed.
  static GnnModel init(int feature_dim, int hidden_dim, int num_classes,
                       std::uint64_t seed);

  // Pointers to all parameter tensors in a fixed order (biases as n x 1).
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;

  void save(const std::string& path) const;
  static GnnModel load(const std::string& path);
};

// Gradients (and optimizer moments) mirror GnnModel::tensors() order.
using GradientList = std::vector<Matrix>;

struct ForwardCache {
  std::vector<Matrix> layer_inputs;   // H per layer, n x in_dim
  std::vector<Matrix> aggregates;     // M per layer
  std::vector<Matrix> pre_acts;       // Z per layer
  Matrix cls_hidden_pre;              // before relu
  Matrix cls_hidden;                  // after relu
  Matrix probs;                       // softmax output
  std::vector<double> weight_norms;   // per-node sum of incoming weights
};

// Full-graph forward pass. Edge weights are consulted only when
// use_edge_weights is set; otherwise all orientations weigh 1.
SoftPredictions forward(const GnnModel& model, const LabeledGraph& graph,
                        bool use_edge_weights, ForwardCache* cache = nullptr);

struct LossResult {
  double loss = 0.0;
  GradientList grads;
  int clamped = 0;  // predictions clamped at 1e-12 before the log
};

// beta-weighted cross-entropy over the mask with exact reverse-mode
// gradients through the cached forward.
LossResult loss_and_grad(const GnnModel& model, const LabeledGraph& graph,
                         const Vector& beta, const std::vector<int>& mask,
                         bool use_edge_weights);

// Adaptive-moment update, decay 0.9/0.999, epsilon 1e-8.
struct AdamState {
  GradientList first_moment;
  GradientList second_moment;
  long step = 0;
};

void adam_step(GnnModel& model, const GradientList& grads, AdamState& state,
               double lr);

}  // namespace pa
