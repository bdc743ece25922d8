#include "antithetic/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace antithetic {

namespace {

void check_labels(const std::vector<int>& labels, Eigen::Index n_rows, Eigen::Index k) {
  if (static_cast<Eigen::Index>(labels.size()) != n_rows)
    throw std::invalid_argument("label count does not match batch size");
  for (int y : labels)
    if (y < 0 || y >= k) throw std::out_of_range("identity label out of range");
}

// d cos(a,b) / da = b/(na*nb) - cos * a/na^2, with the norm guard treated as
// constant. `cos_raw` must be the unclamped value.
Eigen::VectorXd cosine_grad_wrt_first(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                      double na, double nb, double cos_raw) {
  return b / (na * nb) - (cos_raw / (na * na)) * a;
}

}  // namespace

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = std::max(a.norm(), kNormEps);
  const double nb = std::max(b.norm(), kNormEps);
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

LossOutput intra_loss(const EmbeddingBatch& batch, const CenterBank& bank) {
  const Eigen::Index n = batch.features.rows();
  if (n < 1) throw std::invalid_argument("intra_loss needs a non-empty batch");
  check_labels(batch.labels, n, bank.centers.rows());

  LossOutput out;
  out.grad_features = Eigen::MatrixXd::Zero(n, batch.features.cols());
  out.grad_centers = Eigen::MatrixXd::Zero(bank.centers.rows(), bank.centers.cols());

  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd f = batch.features.row(i);
    const Eigen::VectorXd c = bank.centers.row(batch.labels[i]);
    const double nf = std::max(f.norm(), kNormEps);
    const double nc = std::max(c.norm(), kNormEps);
    const double cos_raw = f.dot(c) / (nf * nc);
    out.value += (1.0 - std::clamp(cos_raw, -1.0, 1.0)) * inv_n;
    out.grad_features.row(i) = -inv_n * cosine_grad_wrt_first(f, c, nf, nc, cos_raw);
    out.grad_centers.row(batch.labels[i]) -=
        inv_n * cosine_grad_wrt_first(c, f, nc, nf, cos_raw);
  }
  return out;
}

LossOutput inter_loss(const std::vector<int>& labels, const CenterBank& bank, InterNorm norm) {
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  if (n < 1) throw std::invalid_argument("inter_loss needs at least one label");
  check_labels(labels, n, bank.centers.rows());

  LossOutput out;
  out.grad_centers = Eigen::MatrixXd::Zero(bank.centers.rows(), bank.centers.cols());

  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (labels[i] != labels[j]) ++pairs;
  if (pairs == 0) return out;  // single identity in the batch

  const double denom =
      norm == InterNorm::MeanOverPairs ? static_cast<double>(pairs) : static_cast<double>(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (labels[i] == labels[j]) continue;
      const Eigen::VectorXd ci = bank.centers.row(labels[i]);
      const Eigen::VectorXd cj = bank.centers.row(labels[j]);
      const double ni = std::max(ci.norm(), kNormEps);
      const double nj = std::max(cj.norm(), kNormEps);
      const double cos_raw = ci.dot(cj) / (ni * nj);
      out.value += std::min(std::abs(cos_raw), 1.0) / denom;
      const double sign = cos_raw > 0.0 ? 1.0 : (cos_raw < 0.0 ? -1.0 : 0.0);
      out.grad_centers.row(labels[i]) +=
          (sign / denom) * cosine_grad_wrt_first(ci, cj, ni, nj, cos_raw);
      out.grad_centers.row(labels[j]) +=
          (sign / denom) * cosine_grad_wrt_first(cj, ci, nj, ni, cos_raw);
    }
  }
  return out;
}

LossOutput ccl(const EmbeddingBatch& batch, const CenterBank& bank, const LossWeights& w,
               InterNorm norm) {
  if (w.alpha < 0.0 || w.beta < 0.0)
    throw std::invalid_argument("loss weights must be non-negative");
  LossOutput out;
  if (w.alpha == 0.0 && w.beta == 0.0) return out;

  out.grad_features = Eigen::MatrixXd::Zero(batch.features.rows(), batch.features.cols());
  out.grad_centers = Eigen::MatrixXd::Zero(bank.centers.rows(), bank.centers.cols());
  if (w.alpha != 0.0) {
    const LossOutput intra = intra_loss(batch, bank);
    out.value += w.alpha * intra.value;
    out.grad_features += w.alpha * intra.grad_features;
    out.grad_centers += w.alpha * intra.grad_centers;
  }
  if (w.beta != 0.0) {
    const LossOutput inter = inter_loss(batch.labels, bank, norm);
    out.value += w.beta * inter.value;
    out.grad_centers += w.beta * inter.grad_centers;
  }
  return out;
}

LossOutput softmax_ce(const Eigen::MatrixXd& logits, const std::vector<int>& truth) {
  const Eigen::Index n = logits.rows();
  const Eigen::Index k = logits.cols();
  if (n < 1) throw std::invalid_argument("softmax_ce needs a non-empty batch");
  if (k < 2) throw std::invalid_argument("softmax_ce needs at least two classes");
  check_labels(truth, n, k);

  LossOutput out;
  out.grad_features = Eigen::MatrixXd::Zero(n, k);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::ArrayXd shifted = logits.row(i).array() - m;
    const Eigen::ArrayXd e = shifted.exp();
    const double z = e.sum();
    out.value += -(shifted(truth[i]) - std::log(z)) * inv_n;
    out.grad_features.row(i) = (e / z).matrix().transpose() * inv_n;
    out.grad_features(i, truth[i]) -= inv_n;
  }
  return out;
}

LossOutput trihard(const EmbeddingBatch& batch, const LossWeights& w) {
  const Eigen::Index n = batch.features.rows();
  if (n < 2) throw std::invalid_argument("trihard needs at least two samples");
  if (static_cast<Eigen::Index>(batch.labels.size()) != n)
    throw std::invalid_argument("label count does not match batch size");
  if (w.margin < 0.0) throw std::invalid_argument("margin must be non-negative");

  // Pairwise raw cosines and the norms, reused by the gradient accumulation.
  Eigen::VectorXd norms(n);
  for (Eigen::Index i = 0; i < n; ++i)
    norms(i) = std::max(batch.features.row(i).norm(), kNormEps);
  Eigen::MatrixXd cos_raw(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cos_raw(i, j) = batch.features.row(i).dot(batch.features.row(j)) / (norms(i) * norms(j));
  auto dist = [&](Eigen::Index i, Eigen::Index j) {
    return 1.0 - std::clamp(cos_raw(i, j), -1.0, 1.0);
  };

  LossOutput out;
  out.grad_features = Eigen::MatrixXd::Zero(n, batch.features.cols());

  std::size_t anchors = 0;
  struct Active {
    int a, p, neg;
  };
  std::vector<Active> active;
  for (Eigen::Index a = 0; a < n; ++a) {
    int hardest_pos = -1, hardest_neg = -1;
    double d_ap = -1.0, d_an = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == a) continue;
      const double d = dist(a, j);
      if (batch.labels[j] == batch.labels[a]) {
        if (d > d_ap) {
          d_ap = d;
          hardest_pos = static_cast<int>(j);
        }
      } else if (hardest_neg < 0 || d < d_an) {
        d_an = d;
        hardest_neg = static_cast<int>(j);
      }
    }
    if (hardest_pos < 0 || hardest_neg < 0) continue;
    ++anchors;
    out.selected_triplets.push_back(
        {static_cast<int>(a), hardest_pos, hardest_neg});
    const double hinge = w.margin + d_ap - d_an;
    if (hinge > 0.0) {
      out.value += hinge;
      active.push_back({static_cast<int>(a), hardest_pos, hardest_neg});
    }
  }
  if (anchors == 0)
    throw std::invalid_argument("trihard needs an anchor with both a positive and a negative");

  const double inv = 1.0 / static_cast<double>(anchors);
  out.value *= inv;
  for (const Active& t : active) {
    // hinge = margin + (1 - cos(a,p)) - (1 - cos(a,n)): push cos(a,p) up,
    // cos(a,n) down.
    const Eigen::VectorXd fa = batch.features.row(t.a);
    const Eigen::VectorXd fp = batch.features.row(t.p);
    const Eigen::VectorXd fn = batch.features.row(t.neg);
    out.grad_features.row(t.a) -=
        inv * cosine_grad_wrt_first(fa, fp, norms(t.a), norms(t.p), cos_raw(t.a, t.p));
    out.grad_features.row(t.p) -=
        inv * cosine_grad_wrt_first(fp, fa, norms(t.p), norms(t.a), cos_raw(t.p, t.a));
    out.grad_features.row(t.a) +=
        inv * cosine_grad_wrt_first(fa, fn, norms(t.a), norms(t.neg), cos_raw(t.a, t.neg));
    out.grad_features.row(t.neg) +=
        inv * cosine_grad_wrt_first(fn, fa, norms(t.neg), norms(t.a), cos_raw(t.neg, t.a));
  }
  return out;
}

LossOutput total_loss(const LossOutput& a, const LossOutput& b) {
  auto merge = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    if (x.size() == 0) return y;
    if (y.size() == 0) return x;
    if (x.rows() != y.rows() || x.cols() != y.cols())
      throw std::invalid_argument("total_loss: gradient shapes do not match");
    return Eigen::MatrixXd(x + y);
  };
  LossOutput out;
  out.value = a.value + b.value;
  out.grad_features = merge(a.grad_features, b.grad_features);
  out.grad_centers = merge(a.grad_centers, b.grad_centers);
  out.selected_triplets = a.selected_triplets;
  out.selected_triplets.insert(out.selected_triplets.end(), b.selected_triplets.begin(),
                               b.selected_triplets.end());
  return out;
}

double finite_diff_check(const LossFn& fn, const Eigen::VectorXd& params, int max_coords,
                         double step) {
  Eigen::VectorXd analytic;
  const double f0 = fn(params, &analytic);
  if (!std::isfinite(f0)) throw std::runtime_error("finite_diff_check: non-finite loss");
  if (analytic.size() != params.size())
    throw std::runtime_error("finite_diff_check: gradient size mismatch");

  const Eigen::Index dim = params.size();
  const Eigen::Index n = std::min<Eigen::Index>(dim, std::max(1, max_coords));
  Eigen::VectorXd p = params;
  double worst = 0.0;
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Index k = s * dim / n;  // evenly spaced, distinct for n <= dim
    const double saved = p(k);
    p(k) = saved + step;
    const double fp = fn(p, nullptr);
    p(k) = saved - step;
    const double fm = fn(p, nullptr);
    p(k) = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("finite_diff_check: non-finite loss at perturbed point");
    const double numeric = (fp - fm) / (2.0 * step);
    worst = std::max(worst, std::abs(analytic(k) - numeric) / std::max(1.0, std::abs(numeric)));
  }
  return worst;
}

}  // namespace antithetic
