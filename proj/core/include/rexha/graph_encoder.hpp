#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rexha/corpus.hpp"

namespace rexha::gcn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using corpus::InteractionGraph;

struct NodeMatrices {
  RowMatrix users;
  RowMatrix items;
};

/// One LightGCN hop with symmetric degree normalization:
///   users'[u] = sum_{i in N(u)} items[i] / (sqrt|N(u)| * sqrt|N(i)|)
///   items'[i] = sum_{u in N(i)} users[u] / (sqrt|N(i)| * sqrt|N(u)|)
/// Throws on row-count mismatch or a zero-degree node.
NodeMatrices propagate_layer(const InteractionGraph& graph, const RowMatrix& users,
                             const RowMatrix& items);

/// Mean of layers 0..L. per_layer must hold exactly L+1 equally shaped matrices.
RowMatrix aggregate_layers(std::span<const RowMatrix> per_layer, std::size_t layers);

struct EmbeddingTable {
  RowMatrix users;  // num_users x d_gcn, layer-0 (trainable) rows
  RowMatrix items;  // num_items x d_gcn
  std::uint32_t layers = 0;

  std::size_t width() const noexcept { return static_cast<std::size_t>(users.cols()); }
  void validate(const InteractionGraph& graph) const;

  static EmbeddingTable random_normal(const InteractionGraph& graph, std::size_t width,
                                      std::uint32_t layers, double stddev, std::uint64_t seed);
};

/// Propagates `layers` hops and averages all layers, for users and items.
NodeMatrices final_embeddings(const InteractionGraph& graph, const EmbeddingTable& table);
NodeMatrices final_embeddings(const InteractionGraph& graph, const RowMatrix& users,
                              const RowMatrix& items, std::uint32_t layers);

enum class Activation { kRelu, kIdentity };

struct DenseLayer {
  RowMatrix weight;  // out x in
  Vector bias;       // out
};

/// Three affine layers, activation between them (not after the last).
class ProjectionNet {
 public:
  ProjectionNet() = default;
  ProjectionNet(std::array<DenseLayer, 3> layers, Activation activation);

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
  static ProjectionNet random_init(std::size_t in_width, std::size_t hidden, std::size_t out_width,
                                   std::uint64_t seed, Activation activation = Activation::kRelu);

  std::size_t input_width() const noexcept { return static_cast<std::size_t>(layers_[0].weight.cols()); }
  std::size_t hidden_width() const noexcept { return static_cast<std::size_t>(layers_[0].weight.rows()); }
  std::size_t output_width() const noexcept { return static_cast<std::size_t>(layers_[2].weight.rows()); }
  Activation activation() const noexcept { return activation_; }

  std::array<DenseLayer, 3>& layers() noexcept { return layers_; }
  const std::array<DenseLayer, 3>& layers() const noexcept { return layers_; }

  Vector forward(const Vector& row) const;

  // Accumulates parameter gradients into `grads` for upstream gradient
  // `grad_out` at input `row`; returns the gradient w.r.t. `row`.
  Vector backward(const Vector& row, const Vector& grad_out, std::array<DenseLayer, 3>& grads) const;

  std::array<DenseLayer, 3> zero_like() const;

 private:
  std::array<DenseLayer, 3> layers_;
  Activation activation_ = Activation::kRelu;
};

Vector project(const ProjectionNet& net, const Vector& row);

/// Frozen token-likelihood model conditioned on a projected embedding.
class TokenLikelihoodHead {
 public:
  virtual ~TokenLikelihoodHead() = default;

  virtual std::size_t vocab_size() const = 0;
  virtual std::size_t input_width() const = 0;

  // Probability row over the vocabulary for the next token after `prefix`.
  virtual Vector probabilities(const Vector& embedding, std::span<const std::uint32_t> prefix) const = 0;

  // d(-log p[target]) / d(embedding).
  virtual Vector nll_gradient(const Vector& embedding, std::span<const std::uint32_t> prefix,
                              std::uint32_t target) const = 0;
};

/// softmax(W x + b + T[:, last prefix token]) with fixed random W, b, T.
class LinearSoftmaxHead final : public TokenLikelihoodHead {
 public:
  LinearSoftmaxHead(std::size_t input_width, std::size_t vocab_size, std::uint64_t seed,
                    double scale = 1.0);

  std::size_t vocab_size() const override { return static_cast<std::size_t>(weight_.rows()); }
  std::size_t input_width() const override { return static_cast<std::size_t>(weight_.cols()); }
  Vector probabilities(const Vector& embedding, std::span<const std::uint32_t> prefix) const override;
  Vector nll_gradient(const Vector& embedding, std::span<const std::uint32_t> prefix,
                      std::uint32_t target) const override;

 private:
  RowMatrix weight_;
  Vector bias_;
  RowMatrix transition_;  // vocab x vocab, column = previous token
};

struct TrainPair {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  std::vector<std::uint32_t> target;  // C_i >= 1 token ids
};

struct TrainBatch {
  std::vector<TrainPair> pairs;

  void validate(const InteractionGraph& graph, std::size_t vocab_size) const;
};

// predictions[i][c] is the probability row for position c of pair i.
using PredictionRows = std::vector<std::vector<Vector>>;

struct NllOptions {
  bool per_token_normalize = false;  // divide each pair's sum by C_i
};

/// -(1/N) sum_i sum_c log predictions[i][c][target_ic].
double nll_loss(const PredictionRows& predictions, const TrainBatch& batch, const NllOptions& options = {});

// Conditioning vector of a pair: project(user row) + project(item row).
Vector pair_embedding(const ProjectionNet& net, const Vector& user_row, const Vector& item_row);

PredictionRows predict(const InteractionGraph& graph, const EmbeddingTable& table, const ProjectionNet& net,
                       const TokenLikelihoodHead& head, const TrainBatch& batch);

struct Gradients {
  RowMatrix users;
  RowMatrix items;
  std::array<DenseLayer, 3> net;
};

struct LossAndGradients {
  double loss = 0.0;
  Gradients grads;
};

LossAndGradients nll_with_gradients(const InteractionGraph& graph, const EmbeddingTable& table,
                                    const ProjectionNet& net, const TokenLikelihoodHead& head,
                                    const TrainBatch& batch, const NllOptions& options = {});

struct TrainConfig {
  std::size_t d_gcn = 64;
  std::size_t hidden = 256;
  std::uint32_t layers = 2;
  double learning_rate = 1e-3;
  std::size_t steps = 100;  // one batch per step, cycling through the batches
  std::uint64_t seed = 0;
  double init_stddev = 0.01;
  Activation activation = Activation::kRelu;
  NllOptions nll;
};

struct TrainResult {
  EmbeddingTable table;
  ProjectionNet net;
  std::vector<double> step_losses;
  double initial_loss = 0.0;  // mean over all batches, before the first step
  double final_loss = 0.0;    // same, after the last step
};

/// Plain SGD on the layer-0 embedding table and the projection; the head is
/// never modified.
TrainResult train_adaptor(const InteractionGraph& graph, const TokenLikelihoodHead& head,
                          std::span<const TrainBatch> batches, const TrainConfig& config);

// Same, starting from given parameters.
TrainResult train_adaptor(const InteractionGraph& graph, const TokenLikelihoodHead& head,
                          std::span<const TrainBatch> batches, const TrainConfig& config,
                          EmbeddingTable table, ProjectionNet net);

double mean_batch_loss(const InteractionGraph& graph, const EmbeddingTable& table, const ProjectionNet& net,
                       const TokenLikelihoodHead& head, std::span<const TrainBatch> batches,
                       const NllOptions& options = {});

// ---------------------------------------------------------------------------
// Checkpoint: "RXGE", u32 version, u32 d_gcn, u32 d_llm, u32 L, u64 user rows,
// u64 item rows, then little-endian f32 row-major user table, item table and
// each projection layer (weight then bias). The hidden width is recovered from
// the payload length.

struct Checkpoint {
  EmbeddingTable table;
  ProjectionNet net;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::filesystem::path& path, const EmbeddingTable& table, const ProjectionNet& net);
Checkpoint read_checkpoint(const std::filesystem::path& path, Activation activation = Activation::kRelu);

}  // namespace rexha::gcn
