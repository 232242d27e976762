#pragma once

#include <vector>

#include "pa/graph.hpp"

namespace pa {

// Empirical label and edge-type distributions of one labeled graph. Edge
// quantities count both orientations of every undirected edge, which makes
// edge_type_dist exactly symmetric.
struct DistributionSummary {
  int k = 0;
  Vector label_dist;           // P(Y)
  bool has_edge_dists = false;
  Matrix edge_type_dist;       // P(Y_u=i, Y_v=j | e_uv in E)
  Vector edge_endpoint_dist;   // P(Y_u=i | e_uv in E), row sums of the above
  Matrix neighbor_cond_dist;   // P(Y_v=j | Y_u=i, v in N_u), rows normalized
  std::vector<bool> endpoint_present;  // endpoint class has positive mass
};

DistributionSummary summarize(const LabeledGraph& graph);

struct CssMetric {
  double src = 0.0;   // TV(i) weighted by source endpoint distribution
  double tgt = 0.0;   // weighted by target endpoint distribution
  double both = 0.0;  // mean of the two
  std::vector<int> skipped_classes;  // zero endpoint mass in both domains
};

CssMetric css_metric(const DistributionSummary& src,
                     const DistributionSummary& tgt);

// Total variation distance between the two label distributions, in [0,1].
double ls_metric(const DistributionSummary& src,
                 const DistributionSummary& tgt);

}  // namespace pa
