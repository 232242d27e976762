#include "pa/gnn.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "pa/rng.hpp"

namespace pa {

namespace {

constexpr double kSelfInitScale = 2.0;
constexpr double kNeighInitScale = 6.0;

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = bound * (2.0 * rng.uniform() - 1.0);
}

}  // namespace

GnnModel GnnModel::init(int feature_dim, int hidden_dim, int num_classes,
                        std::uint64_t seed) {
  GnnModel model;
  model.feature_dim = feature_dim;
  model.hidden_dim = hidden_dim;
  model.num_classes = num_classes;
  Rng rng(seed);
  for (int l = 0; l < kNumLayers; ++l) {
    const int in = (l == 0) ? feature_dim : hidden_dim;
    Layer layer;
    layer.w_self = Matrix(hidden_dim, in);
    layer.w_neigh = Matrix(hidden_dim, in);
    layer.bias = Matrix::Zero(hidden_dim, 1);
    // Asymmetric init: the aggregation branch starts 3x larger than the
    // self branch (and both above the usual 1/sqrt(fan-in)) so training is
    // neighborhood-driven from the first epochs. With a symmetric init the
    // model settles on the (domain-invariant) feature pathway and the
    // structure-shift corrections have nothing to correct.
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    fill_uniform(layer.w_self, bound * kSelfInitScale, rng);
    fill_uniform(layer.w_neigh, bound * kNeighInitScale, rng);
    model.layers.push_back(std::move(layer));
  }
  const double hbound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  model.cls_w1 = Matrix(hidden_dim, hidden_dim);
  model.cls_b1 = Matrix::Zero(hidden_dim, 1);
  model.cls_w2 = Matrix(num_classes, hidden_dim);
  model.cls_b2 = Matrix::Zero(num_classes, 1);
  fill_uniform(model.cls_w1, hbound, rng);
  fill_uniform(model.cls_w2, hbound, rng);
  return model;
}

std::vector<Matrix*> GnnModel::tensors() {
  std::vector<Matrix*> out;
  for (auto& layer : layers) {
    out.push_back(&layer.w_self);
    out.push_back(&layer.w_neigh);
    out.push_back(&layer.bias);
  }
  out.push_back(&cls_w1);
  out.push_back(&cls_b1);
  out.push_back(&cls_w2);
  out.push_back(&cls_b2);
  return out;
}

std::vector<const Matrix*> GnnModel::tensors() const {
  auto mutable_list = const_cast<GnnModel*>(this)->tensors();
  return {mutable_list.begin(), mutable_list.end()};
}

void GnnModel::save(const std::string& path) const {
  nlohmann::json doc;
  doc["format"] = "pa-gnn-checkpoint";
  doc["version"] = 1;
  doc["feature_dim"] = feature_dim;
  doc["hidden_dim"] = hidden_dim;
  doc["num_classes"] = num_classes;
  nlohmann::json params = nlohmann::json::array();
  for (const Matrix* t : tensors()) {
    nlohmann::json entry;
    entry["rows"] = t->rows();
    entry["cols"] = t->cols();
    std::vector<double> data(t->data(), t->data() + t->size());
    entry["data"] = data;
    params.push_back(std::move(entry));
  }
  doc["params"] = std::move(params);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << doc.dump();
}

GnnModel GnnModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.value("format", "") != "pa-gnn-checkpoint")
    throw std::runtime_error("not a model checkpoint: " + path);
  GnnModel model = GnnModel::init(doc["feature_dim"], doc["hidden_dim"],
                                  doc["num_classes"], 0);
  auto tensors = model.tensors();
  const auto& params = doc["params"];
  if (params.size() != tensors.size())
    throw std::runtime_error("checkpoint tensor count mismatch");
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    const auto& entry = params[t];
    if (entry["rows"] != tensors[t]->rows() ||
        entry["cols"] != tensors[t]->cols())
      throw std::runtime_error("checkpoint tensor shape mismatch");
    const auto data = entry["data"].get<std::vector<double>>();
    std::copy(data.begin(), data.end(), tensors[t]->data());
  }
  return model;
}

namespace {

std::vector<double> incoming_weight_sums(const LabeledGraph& graph,
                                         bool use_edge_weights) {
  std::vector<double> norms(graph.num_nodes(), 0.0);
  for (int u = 0; u < graph.num_nodes(); ++u) {
    if (!use_edge_weights) {
      norms[u] = static_cast<double>(graph.neighbors(u).size());
    } else {
      double sum = 0.0;
      for (int v : graph.neighbors(u)) sum += graph.edge_weight(u, v);
      norms[u] = sum;
    }
  }
  return norms;
}

// M(u,:) = sum_v w_uv H(v,:) / norm_u; zero row when norm_u = 0.
Matrix aggregate(const Matrix& h, const LabeledGraph& graph,
                 bool use_edge_weights, const std::vector<double>& norms) {
  Matrix m = Matrix::Zero(h.rows(), h.cols());
  for (int u = 0; u < graph.num_nodes(); ++u) {
    if (norms[u] <= 0.0) continue;
    for (int v : graph.neighbors(u)) {
      const double w = use_edge_weights ? graph.edge_weight(u, v) : 1.0;
      if (w != 0.0) m.row(u) += w * h.row(v);
    }
    m.row(u) /= norms[u];
  }
  return m;
}

// Adjoint of aggregate: out(v,:) += w_uv / norm_u * g(u,:).
Matrix aggregate_adjoint(const Matrix& g, const LabeledGraph& graph,
                         bool use_edge_weights,
                         const std::vector<double>& norms) {
  Matrix out = Matrix::Zero(g.rows(), g.cols());
  for (int u = 0; u < graph.num_nodes(); ++u) {
    if (norms[u] <= 0.0) continue;
    const Eigen::RowVectorXd scaled = g.row(u) / norms[u];
    for (int v : graph.neighbors(u)) {
      const double w = use_edge_weights ? graph.edge_weight(u, v) : 1.0;
      if (w != 0.0) out.row(v) += w * scaled;
    }
  }
  return out;
}

Matrix relu(const Matrix& z) { return z.cwiseMax(0.0); }

}  // namespace

SoftPredictions forward(const GnnModel& model, const LabeledGraph& graph,
                        bool use_edge_weights, ForwardCache* cache) {
  if (graph.feature_dim() != model.feature_dim)
    throw std::invalid_argument("feature dimension mismatch");
  const bool weighted = use_edge_weights && graph.has_edge_weights();
  const auto norms = incoming_weight_sums(graph, weighted);

  ForwardCache local;
  ForwardCache& cc = cache ? *cache : local;
  cc = ForwardCache{};
  cc.weight_norms = norms;

  Matrix h = graph.features();
  for (const auto& layer : model.layers) {
    Matrix m = aggregate(h, graph, weighted, norms);
    Matrix z = h * layer.w_self.transpose() + m * layer.w_neigh.transpose();
    z.rowwise() += layer.bias.col(0).transpose();
    cc.layer_inputs.push_back(std::move(h));
    cc.aggregates.push_back(std::move(m));
    h = relu(z);
    cc.pre_acts.push_back(std::move(z));
  }

  cc.cls_hidden_pre = h * model.cls_w1.transpose();
  cc.cls_hidden_pre.rowwise() += model.cls_b1.col(0).transpose();
  cc.cls_hidden = relu(cc.cls_hidden_pre);
  Matrix logits = cc.cls_hidden * model.cls_w2.transpose();
  logits.rowwise() += model.cls_b2.col(0).transpose();

  // Row-wise softmax, max-shifted.
  Matrix probs(logits.rows(), logits.cols());
  for (Eigen::Index u = 0; u < logits.rows(); ++u) {
    const double mx = logits.row(u).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(u).array() - mx).exp();
    probs.row(u) = e / e.sum();
  }
  cc.layer_inputs.push_back(std::move(h));  // final representation H^(L)
  cc.probs = probs;
  return probs;
}

LossResult loss_and_grad(const GnnModel& model, const LabeledGraph& graph,
                         const Vector& beta, const std::vector<int>& mask,
                         bool use_edge_weights) {
  if (mask.empty()) throw std::invalid_argument("empty training mask");
  ForwardCache cache;
  forward(model, graph, use_edge_weights, &cache);
  const bool weighted = use_edge_weights && graph.has_edge_weights();
  const int n = graph.num_nodes();
  const int k = model.num_classes;

  LossResult result;
  const double scale = 1.0 / static_cast<double>(mask.size());
  Matrix dlogits = Matrix::Zero(n, k);
  for (int u : mask) {
    const int y = graph.labels()[u];
    double p = cache.probs(u, y);
    if (p < 1e-12) {
      p = 1e-12;
      ++result.clamped;
    }
    const double weight = beta(y);
    result.loss += scale * weight * -std::log(p);
    dlogits.row(u) = scale * weight * cache.probs.row(u);
    dlogits(u, y) -= scale * weight;
  }

  // Classifier backward.
  const Matrix& h_final = cache.layer_inputs.back();
  Matrix d_cls_w2 = dlogits.transpose() * cache.cls_hidden;
  Matrix d_cls_b2 = dlogits.colwise().sum().transpose();
  Matrix d_hidden = dlogits * model.cls_w2;
  Matrix d_pre1 =
      (cache.cls_hidden_pre.array() > 0.0).cast<double>() * d_hidden.array();
  Matrix d_cls_w1 = d_pre1.transpose() * h_final;
  Matrix d_cls_b1 = d_pre1.colwise().sum().transpose();
  Matrix dh = d_pre1 * model.cls_w1;

  // Message-passing layers backward.
  std::vector<Matrix> layer_grads(model.layers.size() * 3);
  for (int l = static_cast<int>(model.layers.size()) - 1; l >= 0; --l) {
    const auto& layer = model.layers[l];
    Matrix dz = (cache.pre_acts[l].array() > 0.0).cast<double>() * dh.array();
    layer_grads[3 * l + 0] = dz.transpose() * cache.layer_inputs[l];
    layer_grads[3 * l + 1] = dz.transpose() * cache.aggregates[l];
    layer_grads[3 * l + 2] = dz.colwise().sum().transpose();
    if (l > 0) {
      dh = dz * layer.w_self +
           aggregate_adjoint(dz * layer.w_neigh, graph, weighted,
                             cache.weight_norms);
    }
  }

  result.grads = std::move(layer_grads);
  result.grads.push_back(std::move(d_cls_w1));
  result.grads.push_back(std::move(d_cls_b1));
  result.grads.push_back(std::move(d_cls_w2));
  result.grads.push_back(std::move(d_cls_b2));
  return result;
}

void adam_step(GnnModel& model, const GradientList& grads, AdamState& state,
               double lr) {
  auto tensors = model.tensors();
  if (grads.size() != tensors.size())
    throw std::invalid_argument("gradient list size mismatch");
  if (state.first_moment.empty()) {
    for (const Matrix* t : tensors) {
      state.first_moment.push_back(Matrix::Zero(t->rows(), t->cols()));
      state.second_moment.push_back(Matrix::Zero(t->rows(), t->cols()));
    }
  }
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    auto& m = state.first_moment[t];
    auto& v = state.second_moment[t];
    m = beta1 * m + (1.0 - beta1) * grads[t];
    v = beta2 * v.array().matrix() +
        (1.0 - beta2) * grads[t].array().square().matrix();
    const auto m_hat = m.array() / bc1;
    const auto v_hat = v.array() / bc2;
    tensors[t]->array() -= lr * m_hat / (v_hat.sqrt() + eps);
  }
}

}  // namespace pa
