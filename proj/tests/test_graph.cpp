#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "pa/graph.hpp"
#include "pa/rng.hpp"

using pa::Edge;
using pa::LabeledGraph;
using pa::Matrix;

namespace {

LabeledGraph triangle() {
  Matrix x(3, 2);
  x << 1.0, 0.0, 0.0, 1.0, 0.5, 0.5;
  return LabeledGraph(3, 2, {{0, 1}, {1, 2}, {0, 2}}, x, {0, 0, 1});
}

}  // namespace

TEST_CASE("adjacency is sorted and symmetric") {
  Matrix x = Matrix::Zero(4, 1);
  LabeledGraph g(4, 2, {{2, 0}, {3, 0}, {1, 0}}, x, {0, 1, 1, 0});
  CHECK(g.neighbors(0) == std::vector<int>{1, 2, 3});
  CHECK(g.neighbors(1) == std::vector<int>{0});
  CHECK(g.neighbors(2) == std::vector<int>{0});
  CHECK(g.validate().empty());
}

TEST_CASE("degree sum equals twice the edge count") {
  pa::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(40));
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (rng.uniform() < 0.2) edges.push_back({u, v});
    std::vector<int> labels(n, 0);
    LabeledGraph g(n, 1, edges, Matrix::Zero(n, 1), labels);
    std::size_t degree_sum = 0;
    for (int u = 0; u < n; ++u) degree_sum += g.neighbors(u).size();
    CHECK(degree_sum == 2 * edges.size());
  }
}

TEST_CASE("validate rejects self loops") {
  Matrix x = Matrix::Zero(2, 1);
  LabeledGraph g(2, 1, {{1, 1}}, x, {0, 0});
  CHECK(!g.validate().empty());
}

TEST_CASE("validate rejects duplicate edges") {
  Matrix x = Matrix::Zero(3, 1);
  LabeledGraph g(3, 1, {{0, 1}, {1, 0}}, x, {0, 0, 0});
  CHECK(!g.validate().empty());
}

TEST_CASE("validate rejects out-of-range labels and endpoints") {
  Matrix x = Matrix::Zero(2, 1);
  CHECK(!LabeledGraph(2, 1, {}, x, {0, 1}).validate().empty());
  CHECK(!LabeledGraph(2, 2, {{0, 2}}, x, {0, 1}).validate().empty());
}

TEST_CASE("validate rejects overlapping masks") {
  LabeledGraph g = triangle();
  g.train_mask = {0, 1};
  g.val_mask = {1};
  CHECK(!g.validate().empty());
  g.val_mask = {2};
  CHECK(g.validate().empty());
}

TEST_CASE("label-matrix edge weights") {
  LabeledGraph g = triangle();
  CHECK(!g.has_edge_weights());
  CHECK(g.edge_weight(0, 1) == 1.0);
  Matrix w(2, 2);
  w << 2.0, 0.5, 3.0, 1.0;
  g.set_edge_weights_by_label(w);
  CHECK(g.has_edge_weights());
  // labels: 0,0,1 — orientation (0,2) has center label 0, neighbor label 1.
  CHECK(g.edge_weight(0, 2) == 0.5);
  CHECK(g.edge_weight(2, 0) == 3.0);
  CHECK(g.edge_weight(0, 1) == 2.0);
  CHECK(g.validate().empty());
  g.clear_edge_weights();
  CHECK(!g.has_edge_weights());
}

TEST_CASE("negative label weights fail validation") {
  LabeledGraph g = triangle();
  Matrix w(2, 2);
  w << 1.0, -0.5, 1.0, 1.0;
  g.set_edge_weights_by_label(w);
  CHECK(!g.validate().empty());
}

TEST_CASE("per-orientation weights must cover both orientations") {
  LabeledGraph g = triangle();
  std::unordered_map<std::uint64_t, double> weights;
  weights[pa::directed_key(0, 1)] = 2.0;
  g.set_edge_weights(weights);
  CHECK(!g.validate().empty());
  weights[pa::directed_key(1, 0)] = 0.5;
  weights[pa::directed_key(1, 2)] = 1.0;
  weights[pa::directed_key(2, 1)] = 1.0;
  weights[pa::directed_key(0, 2)] = 1.0;
  weights[pa::directed_key(2, 0)] = 1.0;
  g.set_edge_weights(weights);
  CHECK(g.validate().empty());
  CHECK(g.edge_weight(1, 0) == 0.5);
}

TEST_CASE("text round trip preserves the graph") {
  LabeledGraph g = triangle();
  const std::string path =
      (std::filesystem::temp_directory_path() / "pa_graph_roundtrip.txt")
          .string();
  pa::save_graph(g, path);
  LabeledGraph back = pa::load_graph(path);
  std::remove(path.c_str());
  CHECK(back.num_nodes() == g.num_nodes());
  CHECK(back.num_classes() == g.num_classes());
  CHECK(back.labels() == g.labels());
  CHECK(back.edges().size() == g.edges().size());
  CHECK((back.features() - g.features()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("loading a malformed file throws") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "pa_graph_bad.txt").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("nodes=banana classes=2 dim=1\n", f);
    std::fclose(f);
  }
  CHECK_THROWS(pa::load_graph(path));
  std::remove(path.c_str());
}
