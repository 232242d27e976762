#include "pa/gradcheck.hpp"

#include <cmath>

namespace pa {

GradCheckReport gradient_check(GnnModel model, const LabeledGraph& graph,
                               const Vector& beta,
                               const std::vector<int>& mask,
                               bool use_edge_weights, double eps,
                               double floor) {
  const LossResult analytic =
      loss_and_grad(model, graph, beta, mask, use_edge_weights);
  auto tensors = model.tensors();

  GradCheckReport report;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    Matrix& param = *tensors[t];
    for (Eigen::Index idx = 0; idx < param.size(); ++idx) {
      const double saved = param.data()[idx];
      param.data()[idx] = saved + eps;
      const double plus =
          loss_and_grad(model, graph, beta, mask, use_edge_weights).loss;
      param.data()[idx] = saved - eps;
      const double minus =
          loss_and_grad(model, graph, beta, mask, use_edge_weights).loss;
      param.data()[idx] = saved;

      const double numeric = (plus - minus) / (2.0 * eps);
      const double exact = analytic.grads[t].data()[idx];
      const double denom =
          std::max({std::abs(numeric), std::abs(exact), floor});
      const double rel = std::abs(numeric - exact) / denom;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.tensor_index = static_cast<int>(t);
        report.entry_index = static_cast<int>(idx);
      }
    }
  }
  return report;
}

}  // namespace pa
