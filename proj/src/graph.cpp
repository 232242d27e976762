#include "pa/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pa {

LabeledGraph::LabeledGraph(int num_nodes, int num_classes,
                           std::vector<Edge> edges, Matrix features,
                           std::vector<int> labels)
    : num_nodes_(num_nodes),
      num_classes_(num_classes),
      edges_(std::move(edges)),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  adjacency_.assign(num_nodes_, {});
  for (const Edge& e : edges_) {
    if (e.u >= 0 && e.u < num_nodes_ && e.v >= 0 && e.v < num_nodes_) {
      adjacency_[e.u].push_back(e.v);
      adjacency_[e.v].push_back(e.u);
    }
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
  label_observed.assign(num_nodes_, true);
}

const std::vector<int>& LabeledGraph::neighbors(int u) const {
  if (u < 0 || u >= num_nodes_)
    throw std::out_of_range("node index out of range: " + std::to_string(u));
  return adjacency_[u];
}

double LabeledGraph::edge_weight(int u, int v) const {
  if (has_label_weights_) return label_weights_(labels_[u], labels_[v]);
  if (directed_edge_weights_.empty()) return 1.0;
  auto it = directed_edge_weights_.find(directed_key(u, v));
  return it == directed_edge_weights_.end() ? 1.0 : it->second;
}

void LabeledGraph::set_edge_weights_by_label(const Matrix& weights) {
  directed_edge_weights_.clear();
  label_weights_ = weights;
  has_label_weights_ = true;
}

void LabeledGraph::set_edge_weights(
    std::unordered_map<std::uint64_t, double> weights) {
  has_label_weights_ = false;
  directed_edge_weights_ = std::move(weights);
}

std::string LabeledGraph::validate() const {
  if (static_cast<int>(labels_.size()) != num_nodes_)
    return "label count does not match node count";
  if (features_.rows() != num_nodes_)
    return "feature row count does not match node count";
  for (int u = 0; u < num_nodes_; ++u) {
    if (labels_[u] < 0 || labels_[u] >= num_classes_)
      return "label out of range at node " + std::to_string(u);
  }
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.u == e.v) return "self-loop at node " + std::to_string(e.u);
    if (e.u < 0 || e.u >= num_nodes_ || e.v < 0 || e.v >= num_nodes_)
      return "edge endpoint out of range";
    auto key = std::minmax(e.u, e.v);
    if (!seen.insert({key.first, key.second}).second)
      return "duplicate undirected edge (" + std::to_string(e.u) + "," +
             std::to_string(e.v) + ")";
  }
  if (has_label_weights_) {
    if (label_weights_.rows() != num_classes_ ||
        label_weights_.cols() != num_classes_)
      return "label weight matrix shape mismatch";
    if ((label_weights_.array() < 0.0).any()) return "negative edge weight";
  }
  if (!directed_edge_weights_.empty()) {
    for (const Edge& e : edges_) {
      for (auto [a, b] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
        auto it = directed_edge_weights_.find(directed_key(a, b));
        if (it == directed_edge_weights_.end())
          return "missing edge weight for orientation (" + std::to_string(a) +
                 "," + std::to_string(b) + ")";
        if (it->second < 0.0) return "negative edge weight";
      }
    }
  }
  std::set<int> mask_union;
  for (const auto* mask : {&train_mask, &val_mask, &test_mask}) {
    for (int u : *mask) {
      if (u < 0 || u >= num_nodes_) return "mask index out of range";
      if (!mask_union.insert(u).second) return "overlapping node masks";
    }
  }
  return "";
}

LabeledGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  std::string header;
  std::getline(in, header);
  int n = -1, k = -1, d = -1;
  {
    std::istringstream hs(header);
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("nodes=", 0) == 0) n = std::stoi(tok.substr(6));
      else if (tok.rfind("classes=", 0) == 0) k = std::stoi(tok.substr(8));
      else if (tok.rfind("dim=", 0) == 0) d = std::stoi(tok.substr(4));
    }
  }
  if (n < 0 || k <= 0 || d < 0)
    throw std::runtime_error("malformed graph header in " + path);
  Matrix features(n, d);
  std::vector<int> labels(n);
  for (int u = 0; u < n; ++u) {
    if (!(in >> labels[u])) throw std::runtime_error("truncated node section");
    for (int j = 0; j < d; ++j) {
      if (!(in >> features(u, j)))
        throw std::runtime_error("truncated feature row");
    }
  }
  std::vector<Edge> edges;
  int u, v;
  while (in >> u >> v) edges.push_back({u, v});
  LabeledGraph graph(n, k, std::move(edges), std::move(features),
                     std::move(labels));
  const std::string err = graph.validate();
  if (!err.empty()) throw std::runtime_error("invalid graph " + path + ": " + err);
  return graph;
}

void save_graph(const LabeledGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  out.precision(17);
  out << "nodes=" << graph.num_nodes() << " classes=" << graph.num_classes()
      << " dim=" << graph.feature_dim() << "\n";
  for (int u = 0; u < graph.num_nodes(); ++u) {
    out << graph.labels()[u];
    for (int j = 0; j < graph.feature_dim(); ++j)
      out << " " << graph.features()(u, j);
    out << "\n";
  }
  for (const Edge& e : graph.edges()) out << e.u << " " << e.v << "\n";
}

}  // namespace pa
