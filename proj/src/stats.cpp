#include "pa/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace pa {

DistributionSummary summarize(const LabeledGraph& graph) {
  const int k = graph.num_classes();
  const int n = graph.num_nodes();
  if (n == 0) throw std::invalid_argument("cannot summarize empty graph");
  for (int u = 0; u < n; ++u) {
    if (graph.labels()[u] < 0 || graph.labels()[u] >= k)
      throw std::invalid_argument("unlabeled or out-of-range node " +
                                  std::to_string(u));
  }

  DistributionSummary summary;
  summary.k = k;
  summary.label_dist = Vector::Zero(k);
  for (int u = 0; u < n; ++u) summary.label_dist(graph.labels()[u]) += 1.0;
  summary.label_dist /= static_cast<double>(n);

  summary.edge_type_dist = Matrix::Zero(k, k);
  summary.edge_endpoint_dist = Vector::Zero(k);
  summary.neighbor_cond_dist = Matrix::Zero(k, k);
  summary.endpoint_present.assign(k, false);
  if (graph.edges().empty()) return summary;

  summary.has_edge_dists = true;
  for (const Edge& e : graph.edges()) {
    const int yu = graph.labels()[e.u];
    const int yv = graph.labels()[e.v];
    summary.edge_type_dist(yu, yv) += 1.0;
    summary.edge_type_dist(yv, yu) += 1.0;
  }
  summary.edge_type_dist /= 2.0 * static_cast<double>(graph.edges().size());
  summary.edge_endpoint_dist = summary.edge_type_dist.rowwise().sum();
  for (int i = 0; i < k; ++i) {
    if (summary.edge_endpoint_dist(i) > 0.0) {
      summary.endpoint_present[i] = true;
      summary.neighbor_cond_dist.row(i) =
          summary.edge_type_dist.row(i) / summary.edge_endpoint_dist(i);
    }
    // Rows with zero endpoint mass stay zero and are flagged absent via
    // endpoint_present.
  }
  return summary;
}

CssMetric css_metric(const DistributionSummary& src,
                     const DistributionSummary& tgt) {
  if (!src.has_edge_dists || !tgt.has_edge_dists)
    throw std::invalid_argument("css_metric requires edge distributions");
  if (src.k != tgt.k) throw std::invalid_argument("class count mismatch");
  CssMetric metric;
  for (int i = 0; i < src.k; ++i) {
    if (!src.endpoint_present[i] && !tgt.endpoint_present[i]) {
      metric.skipped_classes.push_back(i);
      continue;
    }
    const double tv =
        0.5 *
        (src.neighbor_cond_dist.row(i) - tgt.neighbor_cond_dist.row(i))
            .cwiseAbs()
            .sum();
    metric.src += src.edge_endpoint_dist(i) * tv;
    metric.tgt += tgt.edge_endpoint_dist(i) * tv;
  }
  metric.both = 0.5 * (metric.src + metric.tgt);
  return metric;
}

double ls_metric(const DistributionSummary& src,
                 const DistributionSummary& tgt) {
  if (src.k != tgt.k) throw std::invalid_argument("class count mismatch");
  return 0.5 * (src.label_dist - tgt.label_dist).cwiseAbs().sum();
}

}  // namespace pa
