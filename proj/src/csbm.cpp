#include "pa/csbm.hpp"

#include <cmath>
#include <stdexcept>

#include "pa/rng.hpp"

namespace pa {

std::string CsbmParams::check() const {
  if (n <= 0) return "empty graph request";
  if (k <= 0) return "class count must be positive";
  if (static_cast<int>(pi.size()) != k) return "pi length mismatch";
  double sum = 0.0;
  for (double p : pi) {
    if (p < 0.0) return "pi has negative entry";
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) return "pi does not sum to 1";
  if (B.rows() != k || B.cols() != k) return "B shape mismatch";
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (B(i, j) < 0.0 || B(i, j) > 1.0) return "B entry outside [0,1]";
      if (B(i, j) != B(j, i)) return "B not symmetric";
    }
  }
  if (means.rows() != k) return "means row count mismatch";
  if (sigma <= 0.0) return "sigma must be positive";
  return "";
}

LabeledGraph sample_csbm(const CsbmParams& params) {
  const std::string err = params.check();
  if (!err.empty()) throw std::invalid_argument("invalid CSBM params: " + err);

  Rng rng(params.seed);
  const int n = params.n;
  const int d = static_cast<int>(params.means.cols());

  std::vector<int> labels(n);
  for (int u = 0; u < n; ++u) labels[u] = rng.discrete(params.pi);

  Matrix features(n, d);
  for (int u = 0; u < n; ++u) {
    for (int j = 0; j < d; ++j)
      features(u, j) = params.means(labels[u], j) + params.sigma * rng.normal();
  }

  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform() < params.B(labels[u], labels[v])) edges.push_back({u, v});
    }
  }
  return LabeledGraph(n, params.k, std::move(edges), std::move(features),
                      std::move(labels));
}

namespace {

CsbmParams make_params(const std::vector<double>& pi, double p, double q,
                       std::uint64_t seed) {
  CsbmParams params;
  params.n = 6000;
  params.k = 3;
  params.pi = pi;
  params.B = Matrix::Constant(3, 3, q);
  params.B.diagonal().setConstant(p);
  params.means = Matrix::Identity(3, 3);
  params.sigma = 0.3;
  params.seed = seed;
  return params;
}

}  // namespace

std::pair<CsbmParams, CsbmParams> csbm_preset(int setting_id,
                                              std::uint64_t seed) {
  if (setting_id < 1 || setting_id > 8)
    throw std::invalid_argument("preset id must be in 1..8, got " +
                                std::to_string(setting_id));
  const std::vector<double> uniform{1.0 / 3, 1.0 / 3, 1.0 / 3};
  CsbmParams source = make_params(uniform, 0.02, 0.005, 2 * seed);
  CsbmParams target;
  const std::uint64_t tseed = 2 * seed + 1;
  switch (setting_id) {
    case 1: target = make_params(uniform, 0.015, 0.0075, tseed); break;
    case 2: target = make_params(uniform, 0.01, 0.01, tseed); break;
    case 3: target = make_params(uniform, 0.01, 0.0025, tseed); break;
    case 4: target = make_params(uniform, 0.005, 0.00125, tseed); break;
    case 5: target = make_params(uniform, 0.0075, 0.00375, tseed); break;
    case 6: target = make_params(uniform, 0.005, 0.005, tseed); break;
    case 7:
      target = make_params({0.5, 0.25, 0.25}, 0.0075, 0.00375, tseed);
      break;
    case 8:
      target = make_params({0.1, 0.3, 0.6}, 0.0075, 0.00375, tseed);
      break;
  }
  return {source, target};
}

}  // namespace pa
