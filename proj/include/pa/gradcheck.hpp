#pragma once

#include "pa/gnn.hpp"

namespace pa {

struct GradCheckReport {
  double max_relative_error = 0.0;
  int tensor_index = -1;  // tensor where the max occurred
  int entry_index = -1;
};

// Compares analytic gradients against central finite differences for every
// parameter entry. Relative error uses max(|analytic|, |numeric|, floor) as
// the denominator.
GradCheckReport gradient_check(GnnModel model, const LabeledGraph& graph,
                               const Vector& beta,
                               const std::vector<int>& mask,
                               bool use_edge_weights, double eps = 1e-5,
                               double floor = 1e-6);

}  // namespace pa
