#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace pa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Edge {
  int u;
  int v;
};

// Key for one directed orientation (u, v) of an undirected edge.
inline std::uint64_t directed_key(int u, int v) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

// Undirected attributed graph with per-node labels. Edges are stored once;
// message passing and edge statistics enumerate both orientations.
// Immutable by convention after construction (set_directed_edge_weights is
// the only post-construction mutation and replaces the whole weight map).
class LabeledGraph {
 public:
  LabeledGraph() = default;
  LabeledGraph(int num_nodes, int num_classes, std::vector<Edge> edges,
               Matrix features, std::vector<int> labels);

  int num_nodes() const { return num_nodes_; }
  int num_classes() const { return num_classes_; }
  int feature_dim() const { return static_cast<int>(features_.cols()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }

  // Neighbors of u in ascending node index.
  const std::vector<int>& neighbors(int u) const;

  // Per-directed-orientation nonnegative weights; absent means all 1.
  // Either an explicit map over orientations or a k x k label-pair matrix
  // (weight for orientation (u, v) is weights[label(u)][label(v)]).
  bool has_edge_weights() const {
    return has_label_weights_ || !directed_edge_weights_.empty();
  }
  double edge_weight(int u, int v) const;
  void set_edge_weights_by_label(const Matrix& weights);
  void set_edge_weights(std::unordered_map<std::uint64_t, double> weights);
  void clear_edge_weights() {
    directed_edge_weights_.clear();
    has_label_weights_ = false;
  }

  // Train / validation / test node index sets (possibly empty, disjoint).
  std::vector<int> train_mask;
  std::vector<int> val_mask;
  std::vector<int> test_mask;

  // Per-node flag: label visible to the learner (target test nodes keep
  // their label for evaluation but mask it from training).
  std::vector<bool> label_observed;

  // Returns empty string if all invariants hold, else a description of the
  // first violation found.
  std::string validate() const;

 private:
  int num_nodes_ = 0;
  int num_classes_ = 0;
  std::vector<Edge> edges_;
  Matrix features_;
  std::vector<int> labels_;
  std::vector<std::vector<int>> adjacency_;
  std::unordered_map<std::uint64_t, double> directed_edge_weights_;
  bool has_label_weights_ = false;
  Matrix label_weights_;
};

// Text format: header `nodes=<n> classes=<k> dim=<d>`, then n node lines
// `label f_1 ... f_d`, then one line `u v` per undirected edge.
LabeledGraph load_graph(const std::string& path);
void save_graph(const LabeledGraph& graph, const std::string& path);

}  // namespace pa
