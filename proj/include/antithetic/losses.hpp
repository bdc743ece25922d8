#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace antithetic {

// Batch of embedding vectors (rows) with identity labels indexing a CenterBank.
struct EmbeddingBatch {
  Eigen::MatrixXd features;  // N x d
  std::vector<int> labels;   // N entries in [0, K)
};

// One trainable center per training identity. Rows must keep a norm above the
// 1e-12 cosine guard; the trainer re-projects them to a 1e-8 floor.
struct CenterBank {
  Eigen::MatrixXd centers;  // K x d
};

struct LossWeights {
  double alpha = 0.1;
  double beta = 0.1;
  double margin = 0.3;
};

struct Triplet {
  int anchor = 0;
  int positive = 0;
  int negative = 0;
  bool operator==(const Triplet&) const = default;
};

// Loss value plus analytic gradients. Empty grids stand for identically zero
// gradients; total_loss treats them as such.
struct LossOutput {
  double value = 0.0;
  Eigen::MatrixXd grad_features;           // N x d (or empty)
  Eigen::MatrixXd grad_centers;            // K x d (or empty)
  std::vector<Triplet> selected_triplets;  // populated by trihard only
};

// Normalization of the center-repulsion loss. MeanOverPairs averages over
// cross-identity ordered pairs; SumOverBatch divides the same sum by N
// instead, which only rescales values and gradients by a constant per batch.
enum class InterNorm { MeanOverPairs, SumOverBatch };

inline constexpr double kNormEps = 1e-12;

/// a.b / (max(|a|,eps) * max(|b|,eps)), clamped to [-1, 1].
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Mean of 1 - cos(f_i, C_{y_i}) over the batch, with gradients for every
/// feature and every referenced center.
LossOutput intra_loss(const EmbeddingBatch& batch, const CenterBank& bank);

/// Mean of |cos(C_{y_i}, C_{y_j})| over ordered cross-identity pairs. Zero
/// (with zero gradients) when the batch holds a single identity. The
/// subgradient of |.| at exactly zero is taken as zero.
LossOutput inter_loss(const std::vector<int>& labels, const CenterBank& bank,
                      InterNorm norm = InterNorm::MeanOverPairs);

/// alpha * intra + beta * inter. Returns empty gradient grids when both
/// weights are zero.
LossOutput ccl(const EmbeddingBatch& batch, const CenterBank& bank, const LossWeights& w,
               InterNorm norm = InterNorm::MeanOverPairs);

/// Mean cross entropy of softmax(logits) against the truth labels, computed
/// with max subtraction. grad_features is the N x K logit gradient.
LossOutput softmax_ce(const Eigen::MatrixXd& logits, const std::vector<int>& truth);

/// Batch-hard triplet loss on cosine distance (1 - cos). Every anchor with at
/// least one positive and one negative selects its farthest positive and
/// nearest negative (ties to the lowest index); the hinge
/// max(0, margin + d_ap - d_an) is averaged over those anchors.
/// selected_triplets records every selection, hinge-active or not.
LossOutput trihard(const EmbeddingBatch& batch, const LossWeights& w);

/// Sums values and gradient grids elementwise. Empty grids act as zeros;
/// present grids must agree in shape.
LossOutput total_loss(const LossOutput& a, const LossOutput& b);

/// Loss callback for gradient checking: returns the value at `params` and, if
/// `grad` is non-null, writes the analytic gradient into it.
using LossFn = std::function<double(const Eigen::VectorXd& params, Eigen::VectorXd* grad)>;

/// Central-difference check of the analytic gradient on up to `max_coords`
/// evenly spaced coordinates. Returns the maximum relative error
/// |g_analytic - g_numeric| / max(1, |g_numeric|). Throws on non-finite loss
/// values.
double finite_diff_check(const LossFn& fn, const Eigen::VectorXd& params,
                         int max_coords = 200, double step = 1e-5);

}  // namespace antithetic
