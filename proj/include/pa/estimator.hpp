#pragma once

#include <utility>

#include "pa/graph.hpp"

namespace pa {

// Row-stochastic num_nodes x k matrix of class probabilities.
using SoftPredictions = Matrix;

// Throws if rows are negative or do not sum to 1 within 1e-6.
void check_soft_predictions(const SoftPredictions& preds, int k);

// Joint prediction/label edge-type statistics. sigma_hat is k^2 x k^2 with
// row index (i,j) and column index (i',j') both flattened row-major as
// i*k + j; nu_hat is the k^2 prediction-pair distribution on target edges.
// Both average over directed orientations, so |E| counts each undirected
// edge twice.
std::pair<Matrix, Vector> estimate_sigma_nu(const LabeledGraph& src,
                                            const SoftPredictions& src_preds,
                                            const LabeledGraph& tgt,
                                            const SoftPredictions& tgt_preds);

// Confusion matrix c_hat(i,i') = mean over source nodes of class i' of
// pred[i], and mu_hat = mean target prediction vector.
std::pair<Matrix, Vector> estimate_confusion_mu(
    const std::vector<int>& src_labels, const SoftPredictions& src_preds,
    const SoftPredictions& tgt_preds);

// minimize ||A x - b||^2 + lambda ||x - 1||^2  s.t.  x >= 0, c.x = 1.
// c must be entrywise positive and sum to 1. Solved by accelerated
// projected gradient; the projection onto {x >= 0, c.x = 1} is computed by
// bisection on the multiplier tau of x_i = max(0, v_i - tau c_i).
Vector solve_simplex_ls(const Matrix& A, const Vector& b, const Vector& c,
                        double lambda);

// Edge-type density ratio w solved from sigma_hat w = nu_hat under the
// simplex constraint weighted by the source edge-type distribution.
// Zero-mass source edge types are fixed at 1 and excluded from the solve;
// a target-observed type with zero source mass is an error. If symmetric
// is set the solve runs in the reduced space of unordered label pairs.
Matrix solve_w(const Matrix& sigma_hat, const Vector& nu_hat,
               const Matrix& src_edge_type_dist, double lambda_w,
               bool symmetric);

// alpha_i = sum_j w(i,j) P_S(i,j|e) / P_S(Y_u=i|e). Classes with zero
// endpoint mass get alpha = 1 (no-information fallback).
Vector compute_alpha(const Matrix& w, const Matrix& src_edge_type_dist);

// Edge weights gamma = diag(alpha')^{-1} w', where w' is the delta-smoothed
// ratio w'(i,j) = (w(i,j) P_S(i,j|e) + delta) / (P_S(i,j|e) + delta) and
// alpha' is recomputed from w'. Rows for classes with zero endpoint mass
// fall back to 1.
Matrix compute_gamma(const Matrix& w, const Matrix& src_edge_type_dist,
                     double delta);

// Label density ratio beta solved from c_hat beta = mu_hat under the
// simplex constraint weighted by the source label distribution.
Vector solve_beta(const Matrix& c_hat, const Vector& mu_hat,
                  const Vector& src_label_dist, double lambda_beta);

// All estimator outputs for one weight update, for inspection/dumping.
struct WeightEstimates {
  Matrix sigma_hat;
  Vector nu_hat;
  Matrix c_hat;
  Vector mu_hat;
  Matrix w;
  Vector alpha;
  Matrix gamma;
  Vector beta;
};

}  // namespace pa
