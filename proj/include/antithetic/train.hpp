#pragma once

#include <filesystem>
#include <optional>
#include <utility>

#include "antithetic/losses.hpp"
#include "antithetic/manifest.hpp"
#include "antithetic/model.hpp"
#include "antithetic/rng.hpp"

namespace antithetic {

enum class LossMode { Softmax, SoftmaxCenter, SoftmaxCcl, SoftmaxTrihard };

std::string to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 60;
  int batch_size = 60;
  double lr0 = 0.01;
  double weight_decay = 5e-4;
  double momentum = 0.0;
  int decay_start_epoch = 20;
  double decay_base = 0.1;
  LossMode loss_mode = LossMode::Softmax;
  LossWeights weights;
  // The literal 1/N normalization keeps the center-repulsion gradient at the
  // scale the beta default was tuned for; MeanOverPairs shrinks it by the
  // cross-pair count over N (about 59x at batch 60).
  InterNorm inter_norm = InterNorm::SumOverBatch;
  std::optional<std::pair<int, int>> pk;  // (P identities, K images) batches
  bool augment_hflip = true;
  bool augment_random_erase = true;
  std::uint64_t seed = 0;
  std::filesystem::path checkpoint_path;  // written after training when set
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double ce = 0.0;
  double intra = 0.0;
  double inter = 0.0;
  double trihard = 0.0;
  double total = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  Model model;
  TrainHistory history;
};

/// lr0 until decay_start_epoch, then exponential interpolation reaching
/// lr0 * decay_base at the final epoch:
/// lr0 * decay_base^((epoch - start) / (epochs - start)).
double lr_at(int epoch, const TrainConfig& cfg);

/// P distinct identities drawn without replacement, then K images each
/// (without replacement when the identity has enough images, with replacement
/// otherwise). Returns record indices into the manifest.
std::vector<int> pk_sample(const Manifest& manifest, int p_identities, int k_images, Rng& rng);

// Loss values of one step; unused components stay zero.
struct LossBreakdown {
  double ce = 0.0;
  double intra = 0.0;
  double inter = 0.0;
  double trihard = 0.0;
  double total = 0.0;
};

struct ParamGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd centers;
};

struct StepEval {
  LossBreakdown losses;
  ParamGrads grads;
};

/// Forward + analytic backward for one batch under the configured loss mode.
/// The center losses feed gradients into embeddings and centers only; the
/// classification head receives gradients exclusively through the cross
/// entropy term.
StepEval compute_gradients(const Model& model, const Eigen::MatrixXd& inputs,
                           const std::vector<int>& labels, const TrainConfig& cfg);

// Momentum buffers, kept across steps when cfg.momentum > 0.
struct SgdState {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd centers;
};

SgdState make_sgd_state(const Model& model);

/// One SGD update: p <- p - lr * (g + weight_decay * p), with the optional
/// momentum buffer. Centers are re-projected to a norm floor of 1e-8
/// afterwards. Throws on non-finite loss.
LossBreakdown train_step(Model& model, const Eigen::MatrixXd& inputs,
                         const std::vector<int>& labels, const TrainConfig& cfg, double lr,
                         SgdState& state);

/// Full training loop over the merged pool of the original manifest and, when
/// given, the antithetical one. Images are grayscaled, resized to the model
/// input, augmented (horizontal flip p=0.5 and random erasing, per config),
/// and scaled to [0, 1]. Deterministic per (seed, config, manifests).
TrainResult train(const ModelConfig& model_cfg, const TrainConfig& cfg,
                  const Manifest& original, const Manifest* antithetical = nullptr);

/// CSV with columns epoch,lr,ce,intra,inter,trihard,total,seconds.
void save_history_csv(const TrainHistory& history, const std::filesystem::path& path);

/// Dense labels for a manifest: identities sorted ascending, mapped to
/// 0..K-1. Used consistently by training and evaluation.
std::vector<int> dense_labels(const std::vector<int>& identities);

// Flattened parameter vector (weights, biases, centers in declaration order),
// the substrate for whole-network gradient checking.
Eigen::VectorXd flatten_parameters(const Model& model);
void unflatten_parameters(const Eigen::VectorXd& params, Model& model);
Eigen::VectorXd flatten_grads(const ParamGrads& grads);

}  // namespace antithetic
