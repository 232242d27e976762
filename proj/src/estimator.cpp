#include "pa/estimator.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pa {

namespace {

constexpr double kMassEps = 1e-12;   // "zero mass" threshold
constexpr double kObservedEps = 1e-8;  // target evidence threshold

}  // namespace

void check_soft_predictions(const SoftPredictions& preds, int k) {
  if (preds.cols() != k)
    throw std::invalid_argument("prediction column count mismatch");
  for (Eigen::Index u = 0; u < preds.rows(); ++u) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      if (preds(u, i) < 0.0)
        throw std::invalid_argument("negative prediction probability");
      sum += preds(u, i);
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw std::invalid_argument("prediction row does not sum to 1");
  }
}

std::pair<Matrix, Vector> estimate_sigma_nu(const LabeledGraph& src,
                                            const SoftPredictions& src_preds,
                                            const LabeledGraph& tgt,
                                            const SoftPredictions& tgt_preds) {
  const int k = src.num_classes();
  check_soft_predictions(src_preds, k);
  check_soft_predictions(tgt_preds, k);
  if (src.edges().empty() || tgt.edges().empty())
    throw std::invalid_argument("no edges for pairwise estimation");

  Matrix sigma = Matrix::Zero(k * k, k * k);
  for (const Edge& e : src.edges()) {
    for (auto [u, v] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
      const int col = src.labels()[u] * k + src.labels()[v];
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j)
          sigma(i * k + j, col) += src_preds(u, i) * src_preds(v, j);
      }
    }
  }
  sigma /= 2.0 * static_cast<double>(src.edges().size());

  Vector nu = Vector::Zero(k * k);
  for (const Edge& e : tgt.edges()) {
    for (auto [u, v] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j)
          nu(i * k + j) += tgt_preds(u, i) * tgt_preds(v, j);
      }
    }
  }
  nu /= 2.0 * static_cast<double>(tgt.edges().size());
  return {std::move(sigma), std::move(nu)};
}

std::pair<Matrix, Vector> estimate_confusion_mu(
    const std::vector<int>& src_labels, const SoftPredictions& src_preds,
    const SoftPredictions& tgt_preds) {
  const int k = static_cast<int>(src_preds.cols());
  check_soft_predictions(src_preds, k);
  check_soft_predictions(tgt_preds, k);
  if (src_preds.rows() == 0 || tgt_preds.rows() == 0)
    throw std::invalid_argument("empty node set for label estimation");
  if (static_cast<Eigen::Index>(src_labels.size()) != src_preds.rows())
    throw std::invalid_argument("label/prediction count mismatch");

  Matrix c_hat = Matrix::Zero(k, k);
  for (Eigen::Index u = 0; u < src_preds.rows(); ++u)
    c_hat.col(src_labels[u]) += src_preds.row(u).transpose();
  c_hat /= static_cast<double>(src_preds.rows());

  Vector mu = tgt_preds.colwise().mean().transpose();
  return {std::move(c_hat), std::move(mu)};
}

namespace {

// Euclidean projection onto {x >= 0, c.x = 1} by bisection on the
// multiplier tau of x_i = max(0, v_i - tau c_i).
Vector project_weighted_simplex(const Vector& v, const Vector& c) {
  const auto mass = [&](double tau) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      s += c(i) * std::max(0.0, v(i) - tau * c(i));
    return s;
  };
  // mass(tau) is continuous and nonincreasing; bracket the root.
  double hi = (v.array() / c.array()).maxCoeff();  // mass(hi) = 0
  double span = 1.0;
  double lo = hi - span;
  while (mass(lo) < 1.0) {
    span *= 2.0;
    lo = hi - span;
    if (!std::isfinite(lo)) throw std::runtime_error("projection bracket failed");
  }
  for (int step = 0; step < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi));
       ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) >= 1.0)
      lo = mid;
    else
      hi = mid;
  }
  double tau = 0.5 * (lo + hi);
  Vector x(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    x(i) = std::max(0.0, v(i) - tau * c(i));
  // Close the residual constraint gap over the active support.
  const double cx = c.dot(x);
  if (cx > 0.0) {
    double active = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x(i) > 0.0) active += c(i) * c(i);
    if (active > 0.0) {
      const double shift = (1.0 - cx) / active;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) > 0.0) x(i) += shift * c(i);
    }
  }
  return x;
}

}  // namespace

Vector solve_simplex_ls(const Matrix& A, const Vector& b, const Vector& c,
                        double lambda) {
  const Eigen::Index m = c.size();
  if (A.cols() != m || b.size() != A.rows())
    throw std::invalid_argument("solve_simplex_ls shape mismatch");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  for (Eigen::Index i = 0; i < m; ++i) {
    if (c(i) <= 0.0)
      throw std::invalid_argument("constraint weights must be positive");
  }

  const Matrix gram = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const double lipschitz = 2.0 * (std::max(eig.eigenvalues().maxCoeff(), 0.0) +
                                  lambda) + 1e-12;
  const double step = 1.0 / lipschitz;
  const Vector atb = A.transpose() * b;
  const Vector ones = Vector::Ones(m);

  // FISTA with restart on objective increase.
  Vector x = project_weighted_simplex(ones, c);
  Vector y = x;
  double t = 1.0;
  const auto objective = [&](const Vector& z) {
    return (A * z - b).squaredNorm() + lambda * (z - ones).squaredNorm();
  };
  double prev_obj = objective(x);
  for (int iter = 0; iter < 100000; ++iter) {
    const Vector grad = 2.0 * (gram * y - atb) + 2.0 * lambda * (y - ones);
    Vector x_next = project_weighted_simplex(y - step * grad, c);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    const double move = (x_next - x).lpNorm<Eigen::Infinity>();
    x = std::move(x_next);
    t = t_next;
    const double obj = objective(x);
    if (obj > prev_obj) {  // restart momentum
      y = x;
      t = 1.0;
    }
    prev_obj = obj;
    if (move < 1e-14) break;
  }
  return x;
}

Matrix solve_w(const Matrix& sigma_hat, const Vector& nu_hat,
               const Matrix& src_edge_type_dist, double lambda_w,
               bool symmetric) {
  const int k = static_cast<int>(src_edge_type_dist.rows());
  const int m = k * k;
  if (sigma_hat.rows() != m || sigma_hat.cols() != m || nu_hat.size() != m)
    throw std::invalid_argument("solve_w shape mismatch");

  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (src_edge_type_dist(i, j) <= kMassEps &&
          nu_hat(i * k + j) > kObservedEps)
        throw std::runtime_error("unsupported edge type (" +
                                 std::to_string(i) + "," + std::to_string(j) +
                                 "): zero source mass");
    }
  }

  // Reduced variable set: either all types with positive source mass, or
  // unordered pairs of them when the symmetric constraint is on.
  struct Var {
    std::vector<int> flat_ids;  // flattened (i,j) indices tied to this var
  };
  std::vector<Var> vars;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (symmetric && j < i) continue;
      if (src_edge_type_dist(i, j) <= kMassEps &&
          (!symmetric || src_edge_type_dist(j, i) <= kMassEps))
        continue;
      Var var;
      var.flat_ids.push_back(i * k + j);
      if (symmetric && j != i) var.flat_ids.push_back(j * k + i);
      vars.push_back(std::move(var));
    }
  }
  if (vars.empty()) throw std::runtime_error("no source edge types to solve");

  const int nv = static_cast<int>(vars.size());
  Vector c(nv);
  Matrix a_reduced = Matrix::Zero(m, nv);
  for (int t = 0; t < nv; ++t) {
    double mass = 0.0;
    for (int id : vars[t].flat_ids) {
      a_reduced.col(t) += sigma_hat.col(id);
      mass += src_edge_type_dist(id / k, id % k);
    }
    c(t) = mass;
  }
  // Renormalize in case excluded types carry stray mass.
  c /= c.sum();

  // The L2 pull toward 1 is folded into extra least-squares rows so that
  // a variable covering two symmetric entries is penalized twice.
  Matrix a_full(m + nv, nv);
  Vector b_full(m + nv);
  a_full.topRows(m) = a_reduced;
  b_full.head(m) = nu_hat;
  a_full.bottomRows(nv).setZero();
  for (int t = 0; t < nv; ++t) {
    const double weight =
        std::sqrt(lambda_w * static_cast<double>(vars[t].flat_ids.size()));
    a_full(m + t, t) = weight;
    b_full(m + t) = weight;
  }

  const Vector solution = solve_simplex_ls(a_full, b_full, c, 0.0);

  Matrix w = Matrix::Ones(k, k);  // excluded zero-mass types default to 1
  for (int t = 0; t < nv; ++t) {
    for (int id : vars[t].flat_ids) w(id / k, id % k) = solution(t);
  }
  return w;
}

Vector compute_alpha(const Matrix& w, const Matrix& src_edge_type_dist) {
  const int k = static_cast<int>(w.rows());
  Vector alpha = Vector::Ones(k);
  for (int i = 0; i < k; ++i) {
    const double endpoint = src_edge_type_dist.row(i).sum();
    if (endpoint <= kMassEps) continue;  // absent class, fallback 1
    alpha(i) =
        (w.row(i).array() * src_edge_type_dist.row(i).array()).sum() / endpoint;
  }
  return alpha;
}

Matrix compute_gamma(const Matrix& w, const Matrix& src_edge_type_dist,
                     double delta) {
  if (delta < 0.0) throw std::invalid_argument("delta must be nonnegative");
  const int k = static_cast<int>(w.rows());
  Matrix smoothed(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double mass = src_edge_type_dist(i, j);
      smoothed(i, j) = (w(i, j) * mass + delta) / (mass + delta);
      if (mass + delta <= 0.0) smoothed(i, j) = 1.0;
    }
  }
  const Vector alpha = compute_alpha(smoothed, src_edge_type_dist);
  Matrix gamma = Matrix::Ones(k, k);
  for (int i = 0; i < k; ++i) {
    const double endpoint = src_edge_type_dist.row(i).sum();
    if (endpoint <= kMassEps) continue;  // row falls back to 1
    if (alpha(i) <= 0.0)
      throw std::runtime_error("degenerate endpoint class " +
                               std::to_string(i));
    gamma.row(i) = smoothed.row(i) / alpha(i);
  }
  return gamma;
}

Vector solve_beta(const Matrix& c_hat, const Vector& mu_hat,
                  const Vector& src_label_dist, double lambda_beta) {
  const int k = static_cast<int>(src_label_dist.size());
  if (c_hat.rows() != k || c_hat.cols() != k || mu_hat.size() != k)
    throw std::invalid_argument("solve_beta shape mismatch");

  std::vector<int> included;
  for (int i = 0; i < k; ++i) {
    if (src_label_dist(i) > kMassEps) {
      included.push_back(i);
    } else if (mu_hat(i) > kObservedEps) {
      throw std::runtime_error("class " + std::to_string(i) +
                               " observed in target but has zero source mass");
    }
  }
  if (included.empty()) throw std::runtime_error("no source classes to solve");

  const int nv = static_cast<int>(included.size());
  Matrix a(k, nv);
  Vector c(nv);
  for (int t = 0; t < nv; ++t) {
    a.col(t) = c_hat.col(included[t]);
    c(t) = src_label_dist(included[t]);
  }
  c /= c.sum();

  const Vector solution = solve_simplex_ls(a, mu_hat, c, lambda_beta);
  Vector beta = Vector::Ones(k);
  for (int t = 0; t < nv; ++t) beta(included[t]) = solution(t);
  return beta;
}

}  // namespace pa
