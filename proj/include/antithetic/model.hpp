#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace antithetic {

// Small feed-forward embedding network. Hidden layers are affine + ReLU; the
// rectified output of the last hidden layer is the embedding, and a final
// affine head maps embeddings to identity logits.
struct ModelConfig {
  int input_height = 32;
  int input_width = 16;
  std::vector<int> hidden = {256, 128};
  int num_identities = 0;
  std::uint64_t seed = 0;

  int input_dim() const { return input_height * input_width; }
  int embedding_dim() const { return hidden.back(); }
};

struct Model {
  ModelConfig config;
  std::vector<Eigen::MatrixXd> weights;  // hidden layers then head, out x in
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd centers;  // K x embedding_dim, trained jointly
};

struct ForwardResult {
  Eigen::MatrixXd embeddings;  // B x embedding_dim, elementwise >= 0
  Eigen::MatrixXd logits;      // B x K
};

/// Glorot-uniform weights, zero biases, centers U(0.01, 0.1) per coordinate.
/// Bit-identical per seed.
Model init_model(const ModelConfig& cfg);

ForwardResult forward(const Model& model, const Eigen::MatrixXd& inputs);

/// Structured text checkpoint, 17 significant digits per value; the round
/// trip reproduces forward outputs bit for bit.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

namespace detail {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, then post-ReLU layers
  Eigen::MatrixXd logits;
};

ForwardCache forward_cached(const Model& model, const Eigen::MatrixXd& inputs);

}  // namespace detail
}  // namespace antithetic
