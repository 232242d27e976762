#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pa/graph.hpp"

namespace pa {

// Contextual stochastic block model: labels drawn i.i.d. from pi, each
// unordered node pair {u,v} connected independently with probability
// B[y_u][y_v], features Gaussian around the class mean.
struct CsbmParams {
  int n = 0;
  int k = 0;
  std::vector<double> pi;  // length-k simplex vector
  Matrix B;                // k x k symmetric, entries in [0,1]
  Matrix means;            // k x d class feature means
  double sigma = 0.3;
  std::uint64_t seed = 0;

  // Empty string if valid, else first violated constraint.
  std::string check() const;
};

LabeledGraph sample_csbm(const CsbmParams& params);

// The eight synthetic shift presets: shared source (uniform pi, p=0.02,
// q=0.005, basis-vector means in d=3, sigma=0.3) paired with the listed
// target configuration. setting_id in 1..8.
std::pair<CsbmParams, CsbmParams> csbm_preset(int setting_id,
                                              std::uint64_t seed = 0);

}  // namespace pa
