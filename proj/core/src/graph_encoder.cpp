#include "rexha/graph_encoder.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rexha/error.hpp"

namespace rexha::gcn {

namespace {

void require_rows(const InteractionGraph& graph, const RowMatrix& users, const RowMatrix& items) {
  if (static_cast<std::size_t>(users.rows()) != graph.num_users() ||
      static_cast<std::size_t>(items.rows()) != graph.num_items()) {
    throw Error(ErrorKind::kInvalidArgument, "embedding row counts do not match the graph (" +
                                                 std::to_string(users.rows()) + "/" + std::to_string(graph.num_users()) +
                                                 " users, " + std::to_string(items.rows()) + "/" +
                                                 std::to_string(graph.num_items()) + " items)");
  }
  if (users.cols() != items.cols()) throw Error(ErrorKind::kInvalidArgument, "user and item widths differ");
}

Vector activate(const Vector& z, Activation act) {
  return act == Activation::kRelu ? Vector(z.cwiseMax(0.0)) : z;
}

Vector activation_grad(const Vector& z, const Vector& upstream, Activation act) {
  if (act == Activation::kIdentity) return upstream;
  Vector out = upstream;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (z[k] <= 0.0) out[k] = 0.0;
  }
  return out;
}

bool all_finite(const RowMatrix& m) { return m.allFinite(); }

}  // namespace

NodeMatrices propagate_layer(const InteractionGraph& graph, const RowMatrix& users, const RowMatrix& items) {
  require_rows(graph, users, items);
  const std::size_t nu = graph.num_users();
  const std::size_t ni = graph.num_items();
  std::vector<double> inv_sqrt_u(nu);
  std::vector<double> inv_sqrt_i(ni);
  for (std::uint32_t u = 0; u < nu; ++u) {
    const auto d = graph.user_degree(u);
    if (d == 0) throw Error(ErrorKind::kValidation, "user node " + std::to_string(u) + " has degree 0");
    inv_sqrt_u[u] = 1.0 / std::sqrt(static_cast<double>(d));
  }
  for (std::uint32_t i = 0; i < ni; ++i) {
    const auto d = graph.item_degree(i);
    if (d == 0) throw Error(ErrorKind::kValidation, "item node " + std::to_string(i) + " has degree 0");
    inv_sqrt_i[i] = 1.0 / std::sqrt(static_cast<double>(d));
  }

  NodeMatrices out{RowMatrix::Zero(users.rows(), users.cols()), RowMatrix::Zero(items.rows(), items.cols())};
  for (std::uint32_t u = 0; u < nu; ++u) {
    for (auto i : graph.items_of(u)) out.users.row(u) += (inv_sqrt_u[u] * inv_sqrt_i[i]) * items.row(i);
  }
  for (std::uint32_t i = 0; i < ni; ++i) {
    for (auto u : graph.users_of(i)) out.items.row(i) += (inv_sqrt_i[i] * inv_sqrt_u[u]) * users.row(u);
  }
  return out;
}

RowMatrix aggregate_layers(std::span<const RowMatrix> per_layer, std::size_t layers) {
  if (per_layer.size() != layers + 1) {
    throw Error(ErrorKind::kInvalidArgument, "expected " + std::to_string(layers + 1) + " layer matrices, got " +
                                                 std::to_string(per_layer.size()));
  }
  RowMatrix sum = per_layer.front();
  for (std::size_t l = 1; l < per_layer.size(); ++l) {
    if (per_layer[l].rows() != sum.rows() || per_layer[l].cols() != sum.cols()) {
      throw Error(ErrorKind::kInvalidArgument, "layer " + std::to_string(l) + " shape mismatch");
    }
    sum += per_layer[l];
  }
  return sum / static_cast<double>(layers + 1);
}

void EmbeddingTable::validate(const InteractionGraph& graph) const {
  require_rows(graph, users, items);
  if (!all_finite(users) || !all_finite(items)) throw Error(ErrorKind::kNumeric, "embedding table has NaN/Inf");
}

EmbeddingTable EmbeddingTable::random_normal(const InteractionGraph& graph, std::size_t width,
                                             std::uint32_t layers, double stddev, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  EmbeddingTable t;
  t.layers = layers;
  t.users.resize(static_cast<Eigen::Index>(graph.num_users()), static_cast<Eigen::Index>(width));
  t.items.resize(static_cast<Eigen::Index>(graph.num_items()), static_cast<Eigen::Index>(width));
  for (Eigen::Index k = 0; k < t.users.size(); ++k) t.users.data()[k] = normal(rng);
  for (Eigen::Index k = 0; k < t.items.size(); ++k) t.items.data()[k] = normal(rng);
  return t;
}

NodeMatrices final_embeddings(const InteractionGraph& graph, const RowMatrix& users, const RowMatrix& items,
                              std::uint32_t layers) {
  require_rows(graph, users, items);
  NodeMatrices sum{users, items};
  NodeMatrices cur{users, items};
  for (std::uint32_t l = 0; l < layers; ++l) {
    cur = propagate_layer(graph, cur.users, cur.items);
    sum.users += cur.users;
    sum.items += cur.items;
  }
  const double scale = 1.0 / static_cast<double>(layers + 1);
  sum.users *= scale;
  sum.items *= scale;
  return sum;
}

NodeMatrices final_embeddings(const InteractionGraph& graph, const EmbeddingTable& table) {
  return final_embeddings(graph, table.users, table.items, table.layers);
}

// ---------------------------------------------------------------------------

ProjectionNet::ProjectionNet(std::array<DenseLayer, 3> layers, Activation activation)
    : layers_(std::move(layers)), activation_(activation) {
  for (std::size_t l = 0; l < 3; ++l) {
    if (layers_[l].bias.size() != layers_[l].weight.rows()) {
      throw Error(ErrorKind::kInvalidArgument, "projection layer " + std::to_string(l) + ": bias/weight mismatch");
    }
    if (l > 0 && layers_[l].weight.cols() != layers_[l - 1].weight.rows()) {
      throw Error(ErrorKind::kInvalidArgument, "projection layer " + std::to_string(l) + ": shapes do not compose");
    }
    if (!layers_[l].weight.allFinite() || !layers_[l].bias.allFinite()) {
      throw Error(ErrorKind::kNumeric, "projection layer " + std::to_string(l) + " has NaN/Inf");
    }
  }
}

ProjectionNet ProjectionNet::random_init(std::size_t in_width, std::size_t hidden, std::size_t out_width,
                                         std::uint64_t seed, Activation activation) {
  std::mt19937_64 rng(seed);
  const std::size_t ins[3] = {in_width, hidden, hidden};
  const std::size_t outs[3] = {hidden, hidden, out_width};
  std::array<DenseLayer, 3> layers;
  for (std::size_t l = 0; l < 3; ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(ins[l]));
    std::uniform_real_distribution<double> uni(-bound, bound);
    layers[l].weight.resize(static_cast<Eigen::Index>(outs[l]), static_cast<Eigen::Index>(ins[l]));
    layers[l].bias.resize(static_cast<Eigen::Index>(outs[l]));
    for (Eigen::Index k = 0; k < layers[l].weight.size(); ++k) layers[l].weight.data()[k] = uni(rng);
    for (Eigen::Index k = 0; k < layers[l].bias.size(); ++k) layers[l].bias[k] = uni(rng);
  }
  return ProjectionNet(std::move(layers), activation);
}

Vector ProjectionNet::forward(const Vector& row) const {
  if (static_cast<std::size_t>(row.size()) != input_width()) {
    throw Error(ErrorKind::kInvalidArgument, "projection input width " + std::to_string(row.size()) +
                                                 " != " + std::to_string(input_width()));
  }
  Vector a = row;
  for (std::size_t l = 0; l < 3; ++l) {
    Vector z = layers_[l].weight * a + layers_[l].bias;
    a = l < 2 ? activate(z, activation_) : z;
  }
  return a;
}

Vector ProjectionNet::backward(const Vector& row, const Vector& grad_out, std::array<DenseLayer, 3>& grads) const {
  // Re-run the forward pass keeping pre-activations.
  std::array<Vector, 3> inputs;
  std::array<Vector, 3> pre;
  Vector a = row;
  for (std::size_t l = 0; l < 3; ++l) {
    inputs[l] = a;
    pre[l] = layers_[l].weight * a + layers_[l].bias;
    a = l < 2 ? activate(pre[l], activation_) : pre[l];
  }
  Vector g = grad_out;
  for (std::size_t l = 3; l-- > 0;) {
    if (l < 2) g = activation_grad(pre[l], g, activation_);
    grads[l].weight.noalias() += g * inputs[l].transpose();
    grads[l].bias += g;
    g = layers_[l].weight.transpose() * g;
  }
  return g;
}

std::array<DenseLayer, 3> ProjectionNet::zero_like() const {
  std::array<DenseLayer, 3> z;
  for (std::size_t l = 0; l < 3; ++l) {
    z[l].weight = RowMatrix::Zero(layers_[l].weight.rows(), layers_[l].weight.cols());
    z[l].bias = Vector::Zero(layers_[l].bias.size());
  }
  return z;
}

Vector project(const ProjectionNet& net, const Vector& row) { return net.forward(row); }

// ---------------------------------------------------------------------------

LinearSoftmaxHead::LinearSoftmaxHead(std::size_t input_width, std::size_t vocab_size, std::uint64_t seed,
                                     double scale) {
  if (vocab_size < 2 || input_width == 0) throw Error(ErrorKind::kInvalidArgument, "head needs vocab >= 2 and width >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale / std::sqrt(static_cast<double>(input_width)));
  std::normal_distribution<double> small(0.0, 0.1 * scale);
  const auto v = static_cast<Eigen::Index>(vocab_size);
  weight_.resize(v, static_cast<Eigen::Index>(input_width));
  for (Eigen::Index k = 0; k < weight_.size(); ++k) weight_.data()[k] = normal(rng);
  bias_.resize(v);
  for (Eigen::Index k = 0; k < v; ++k) bias_[k] = small(rng);
  transition_.resize(v, v);
  for (Eigen::Index k = 0; k < transition_.size(); ++k) transition_.data()[k] = small(rng);
}

Vector LinearSoftmaxHead::probabilities(const Vector& embedding, std::span<const std::uint32_t> prefix) const {
  if (embedding.size() != weight_.cols()) throw Error(ErrorKind::kInvalidArgument, "head input width mismatch");
  Vector logits = weight_ * embedding + bias_;
  if (!prefix.empty()) logits += transition_.col(prefix.back());
  const double m = logits.maxCoeff();
  Vector p = (logits.array() - m).exp();
  return p / p.sum();
}

Vector LinearSoftmaxHead::nll_gradient(const Vector& embedding, std::span<const std::uint32_t> prefix,
                                       std::uint32_t target) const {
  Vector p = probabilities(embedding, prefix);
  p[target] -= 1.0;
  return weight_.transpose() * p;
}

// ---------------------------------------------------------------------------

void TrainBatch::validate(const InteractionGraph& graph, std::size_t vocab_size) const {
  if (pairs.empty()) throw Error(ErrorKind::kInvalidArgument, "empty training batch");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.user >= graph.num_users() || p.item >= graph.num_items()) {
      throw Error(ErrorKind::kInvalidArgument, "pair " + std::to_string(i) + ": node ordinal out of range");
    }
    if (p.target.empty()) throw Error(ErrorKind::kInvalidArgument, "pair " + std::to_string(i) + ": empty target");
    for (auto t : p.target) {
      if (t >= vocab_size) {
        throw Error(ErrorKind::kInvalidArgument, "pair " + std::to_string(i) + ": token id " + std::to_string(t) +
                                                     " outside vocabulary of " + std::to_string(vocab_size));
      }
    }
  }
}

double nll_loss(const PredictionRows& predictions, const TrainBatch& batch, const NllOptions& options) {
  const std::size_t n = batch.pairs.size();
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "empty batch");
  if (predictions.size() != n) throw Error(ErrorKind::kInvalidArgument, "prediction count != batch size");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& target = batch.pairs[i].target;
    if (predictions[i].size() != target.size()) {
      throw Error(ErrorKind::kInvalidArgument, "pair " + std::to_string(i) + ": prediction rows != target length");
    }
    double pair_sum = 0.0;
    for (std::size_t c = 0; c < target.size(); ++c) {
      const Vector& row = predictions[i][c];
      if (target[c] >= static_cast<std::size_t>(row.size())) {
        throw Error(ErrorKind::kInvalidArgument, "pair " + std::to_string(i) + ": target outside probability row");
      }
      const double p = row[target[c]];
      if (!(p > 0.0)) {
        throw Error(ErrorKind::kNumeric, "zero probability at target position (" + std::to_string(i) + "," +
                                             std::to_string(c) + ")");
      }
      pair_sum += std::log(p);
    }
    if (options.per_token_normalize) pair_sum /= static_cast<double>(target.size());
    total += pair_sum;
  }
  return -total / static_cast<double>(n);
}

Vector pair_embedding(const ProjectionNet& net, const Vector& user_row, const Vector& item_row) {
  return net.forward(user_row) + net.forward(item_row);
}

PredictionRows predict(const InteractionGraph& graph, const EmbeddingTable& table, const ProjectionNet& net,
                       const TokenLikelihoodHead& head, const TrainBatch& batch) {
  const NodeMatrices fin = final_embeddings(graph, table);
  PredictionRows out;
  out.reserve(batch.pairs.size());
  for (const auto& pair : batch.pairs) {
    const Vector x = pair_embedding(net, fin.users.row(pair.user).transpose(), fin.items.row(pair.item).transpose());
    std::vector<Vector> rows;
    rows.reserve(pair.target.size());
    const std::span<const std::uint32_t> tokens(pair.target);
    for (std::size_t c = 0; c < tokens.size(); ++c) rows.push_back(head.probabilities(x, tokens.first(c)));
    out.push_back(std::move(rows));
  }
  return out;
}

LossAndGradients nll_with_gradients(const InteractionGraph& graph, const EmbeddingTable& table,
                                    const ProjectionNet& net, const TokenLikelihoodHead& head,
                                    const TrainBatch& batch, const NllOptions& options) {
  batch.validate(graph, head.vocab_size());
  const NodeMatrices fin = final_embeddings(graph, table);
  const double n = static_cast<double>(batch.pairs.size());

  LossAndGradients result;
  result.grads.net = net.zero_like();
  RowMatrix grad_users = RowMatrix::Zero(fin.users.rows(), fin.users.cols());
  RowMatrix grad_items = RowMatrix::Zero(fin.items.rows(), fin.items.cols());

  double total = 0.0;
  for (std::size_t i = 0; i < batch.pairs.size(); ++i) {
    const auto& pair = batch.pairs[i];
    const Vector eu = fin.users.row(pair.user).transpose();
    const Vector ei = fin.items.row(pair.item).transpose();
    const Vector x = pair_embedding(net, eu, ei);
    const double weight = options.per_token_normalize ? 1.0 / static_cast<double>(pair.target.size()) : 1.0;

    const std::span<const std::uint32_t> tokens(pair.target);
    Vector grad_x = Vector::Zero(x.size());
    double pair_sum = 0.0;
    for (std::size_t c = 0; c < tokens.size(); ++c) {
      const Vector p = head.probabilities(x, tokens.first(c));
      const double pt = p[tokens[c]];
      if (!(pt > 0.0)) {
        throw Error(ErrorKind::kNumeric, "zero probability at target position (" + std::to_string(i) + "," +
                                             std::to_string(c) + ")");
      }
      pair_sum += std::log(pt);
      grad_x += head.nll_gradient(x, tokens.first(c), tokens[c]);
    }
    total += weight * pair_sum;
    grad_x *= weight / n;

    grad_users.row(pair.user) += net.backward(eu, grad_x, result.grads.net).transpose();
    grad_items.row(pair.item) += net.backward(ei, grad_x, result.grads.net).transpose();
  }
  result.loss = -total / n;

  // The propagation operator is symmetric, so the gradient w.r.t. layer 0 is
  // the same layer-averaged propagation applied to the output gradient.
  NodeMatrices back = final_embeddings(graph, grad_users, grad_items, table.layers);
  result.grads.users = std::move(back.users);
  result.grads.items = std::move(back.items);
  return result;
}

double mean_batch_loss(const InteractionGraph& graph, const EmbeddingTable& table, const ProjectionNet& net,
                       const TokenLikelihoodHead& head, std::span<const TrainBatch> batches,
                       const NllOptions& options) {
  if (batches.empty()) throw Error(ErrorKind::kInvalidArgument, "no training batches");
  double sum = 0.0;
  for (const auto& b : batches) sum += nll_loss(predict(graph, table, net, head, b), b, options);
  return sum / static_cast<double>(batches.size());
}

TrainResult train_adaptor(const InteractionGraph& graph, const TokenLikelihoodHead& head,
                          std::span<const TrainBatch> batches, const TrainConfig& config) {
  EmbeddingTable table = EmbeddingTable::random_normal(graph, config.d_gcn, config.layers, config.init_stddev, config.seed);
  ProjectionNet net = ProjectionNet::random_init(config.d_gcn, config.hidden, head.input_width(),
                                                 config.seed ^ 0x9E3779B97F4A7C15ULL, config.activation);
  return train_adaptor(graph, head, batches, config, std::move(table), std::move(net));
}

TrainResult train_adaptor(const InteractionGraph& graph, const TokenLikelihoodHead& head,
                          std::span<const TrainBatch> batches, const TrainConfig& config, EmbeddingTable table,
                          ProjectionNet net) {
  if (batches.empty()) throw Error(ErrorKind::kInvalidArgument, "no training batches");
  if (net.output_width() != head.input_width()) {
    throw Error(ErrorKind::kInvalidArgument, "projection output width != head input width");
  }
  table.validate(graph);
  for (const auto& b : batches) b.validate(graph, head.vocab_size());

  TrainResult result;
  result.initial_loss = mean_batch_loss(graph, table, net, head, batches, config.nll);
  const double lr = config.learning_rate;
  for (std::size_t step = 0; step < config.steps; ++step) {
    const TrainBatch& batch = batches[step % batches.size()];
    LossAndGradients lg = nll_with_gradients(graph, table, net, head, batch, config.nll);
    if (!std::isfinite(lg.loss)) {
      throw Error(ErrorKind::kNumeric, "non-finite loss at step " + std::to_string(step) +
                                           " (lr=" + std::to_string(lr) + ")");
    }
    result.step_losses.push_back(lg.loss);
    if (lr == 0.0) continue;
    table.users -= lr * lg.grads.users;
    table.items -= lr * lg.grads.items;
    for (std::size_t l = 0; l < 3; ++l) {
      net.layers()[l].weight -= lr * lg.grads.net[l].weight;
      net.layers()[l].bias -= lr * lg.grads.net[l].bias;
    }
  }
  result.final_loss = mean_batch_loss(graph, table, net, head, batches, config.nll);
  if (!std::isfinite(result.final_loss)) throw Error(ErrorKind::kNumeric, "non-finite loss after training");
  result.table = std::move(table);
  result.net = std::move(net);
  return result;
}

}  // namespace rexha::gcn
