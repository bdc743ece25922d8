#include "antithetic/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "antithetic/image.hpp"
#include "antithetic/pnm.hpp"

namespace antithetic {

std::string to_string(LossMode mode) {
  switch (mode) {
    case LossMode::Softmax: return "softmax";
    case LossMode::SoftmaxCenter: return "softmax+center";
    case LossMode::SoftmaxCcl: return "softmax+ccl";
    case LossMode::SoftmaxTrihard: return "softmax+trihard";
  }
  return "softmax";
}

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "softmax") return LossMode::Softmax;
  if (s == "softmax+center") return LossMode::SoftmaxCenter;
  if (s == "softmax+ccl") return LossMode::SoftmaxCcl;
  if (s == "softmax+trihard") return LossMode::SoftmaxTrihard;
  throw std::invalid_argument("unknown loss mode '" + s + "'");
}

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) throw std::out_of_range("epoch outside schedule");
  if (epoch < cfg.decay_start_epoch || cfg.epochs <= cfg.decay_start_epoch) return cfg.lr0;
  const double t = static_cast<double>(epoch - cfg.decay_start_epoch) /
                   static_cast<double>(cfg.epochs - cfg.decay_start_epoch);
  return cfg.lr0 * std::pow(cfg.decay_base, t);
}

std::vector<int> dense_labels(const std::vector<int>& identities) {
  std::map<int, int> index;
  for (int id : identities) index.emplace(id, 0);
  int next = 0;
  for (auto& [id, dense] : index) dense = next++;
  std::vector<int> out;
  out.reserve(identities.size());
  for (int id : identities) out.push_back(index.at(id));
  return out;
}

namespace {

std::vector<int> pk_sample_indices(const std::vector<int>& identities, int p_identities,
                                   int k_images, Rng& rng) {
  std::map<int, std::vector<int>> by_id;
  for (std::size_t i = 0; i < identities.size(); ++i)
    by_id[identities[i]].push_back(static_cast<int>(i));
  if (static_cast<int>(by_id.size()) < p_identities)
    throw std::invalid_argument("fewer identities than requested P");

  std::vector<int> ids;
  ids.reserve(by_id.size());
  for (const auto& [id, _] : by_id) ids.push_back(id);
  // Partial Fisher-Yates: the first P slots become the chosen identities.
  for (int s = 0; s < p_identities; ++s) {
    const int j = s + static_cast<int>(rng.uniform_int(0, static_cast<int>(ids.size()) - 1 - s));
    std::swap(ids[s], ids[j]);
  }

  std::vector<int> batch;
  batch.reserve(static_cast<std::size_t>(p_identities) * k_images);
  for (int s = 0; s < p_identities; ++s) {
    std::vector<int>& pool = by_id[ids[s]];
    if (static_cast<int>(pool.size()) >= k_images) {
      for (int t = 0; t < k_images; ++t) {
        const int j = t + static_cast<int>(rng.uniform_int(0, static_cast<int>(pool.size()) - 1 - t));
        std::swap(pool[t], pool[j]);
        batch.push_back(pool[t]);
      }
    } else {
      for (int t = 0; t < k_images; ++t)
        batch.push_back(pool[rng.uniform_int(0, static_cast<int>(pool.size()) - 1)]);
    }
  }
  return batch;
}

}  // namespace

std::vector<int> pk_sample(const Manifest& manifest, int p_identities, int k_images, Rng& rng) {
  std::vector<int> identities;
  identities.reserve(manifest.records.size());
  for (const SampleRecord& r : manifest.records) identities.push_back(r.identity);
  return pk_sample_indices(identities, p_identities, k_images, rng);
}

StepEval compute_gradients(const Model& model, const Eigen::MatrixXd& inputs,
                           const std::vector<int>& labels, const TrainConfig& cfg) {
  const detail::ForwardCache cache = detail::forward_cached(model, inputs);
  const Eigen::MatrixXd& embeddings = cache.acts.back();
  const std::size_t head = model.weights.size() - 1;

  StepEval ev;
  ev.grads.weights.resize(model.weights.size());
  ev.grads.biases.resize(model.biases.size());
  ev.grads.centers = Eigen::MatrixXd::Zero(model.centers.rows(), model.centers.cols());

  // Identity classification. The head sees gradients from this term only.
  const LossOutput ce = softmax_ce(cache.logits, labels);
  ev.losses.ce = ce.value;
  ev.grads.weights[head] = ce.grad_features.transpose() * embeddings;
  ev.grads.biases[head] = ce.grad_features.colwise().sum().transpose();

  LossOutput on_embeddings;
  on_embeddings.value = ce.value;
  on_embeddings.grad_features = ce.grad_features * model.weights[head];

  const EmbeddingBatch batch{embeddings, labels};
  const CenterBank bank{model.centers};
  LossOutput extra;
  if (cfg.loss_mode == LossMode::SoftmaxCenter || cfg.loss_mode == LossMode::SoftmaxCcl) {
    const LossOutput intra = intra_loss(batch, bank);
    ev.losses.intra = intra.value;
    extra.value += cfg.weights.alpha * intra.value;
    extra.grad_features = cfg.weights.alpha * intra.grad_features;
    extra.grad_centers = cfg.weights.alpha * intra.grad_centers;
    if (cfg.loss_mode == LossMode::SoftmaxCcl) {
      const LossOutput inter = inter_loss(labels, bank, cfg.inter_norm);
      ev.losses.inter = inter.value;
      extra.value += cfg.weights.beta * inter.value;
      extra.grad_centers += cfg.weights.beta * inter.grad_centers;
    }
  } else if (cfg.loss_mode == LossMode::SoftmaxTrihard) {
    extra = trihard(batch, cfg.weights);
    ev.losses.trihard = extra.value;
  }

  const LossOutput total = total_loss(on_embeddings, extra);
  ev.losses.total = total.value;
  if (total.grad_centers.size() != 0) ev.grads.centers = total.grad_centers;

  // Back through the hidden stack. acts[l+1] is the post-ReLU output of
  // hidden layer l; its positive entries mark where gradients pass.
  Eigen::MatrixXd d_act = total.grad_features;
  for (int l = static_cast<int>(head) - 1; l >= 0; --l) {
    const Eigen::MatrixXd dz =
        ((cache.acts[l + 1].array() > 0.0).cast<double>() * d_act.array()).matrix();
    ev.grads.weights[l] = dz.transpose() * cache.acts[l];
    ev.grads.biases[l] = dz.colwise().sum().transpose();
    if (l > 0) d_act = dz * model.weights[l];
  }
  return ev;
}

SgdState make_sgd_state(const Model& model) {
  SgdState state;
  for (const auto& w : model.weights) state.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : model.biases) state.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  state.centers = Eigen::MatrixXd::Zero(model.centers.rows(), model.centers.cols());
  return state;
}

namespace {

constexpr double kCenterNormFloor = 1e-8;

template <typename P>
void sgd_update(P& param, const P& grad, P& velocity, const TrainConfig& cfg, double lr) {
  const P step = grad + cfg.weight_decay * param;
  if (cfg.momentum > 0.0) {
    velocity = cfg.momentum * velocity + step;
    param -= lr * velocity;
  } else {
    param -= lr * step;
  }
}

}  // namespace

LossBreakdown train_step(Model& model, const Eigen::MatrixXd& inputs,
                         const std::vector<int>& labels, const TrainConfig& cfg, double lr,
                         SgdState& state) {
  StepEval ev = compute_gradients(model, inputs, labels, cfg);
  if (!std::isfinite(ev.losses.total))
    throw std::runtime_error("non-finite training loss; aborting");

  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    sgd_update(model.weights[l], ev.grads.weights[l], state.weights[l], cfg, lr);
    sgd_update(model.biases[l], ev.grads.biases[l], state.biases[l], cfg, lr);
  }
  sgd_update(model.centers, ev.grads.centers, state.centers, cfg, lr);

  for (Eigen::Index r = 0; r < model.centers.rows(); ++r) {
    const double norm = model.centers.row(r).norm();
    if (norm < kCenterNormFloor) {
      if (norm == 0.0)
        model.centers(r, 0) = kCenterNormFloor;
      else
        model.centers.row(r) *= kCenterNormFloor / norm;
    }
  }
  return ev.losses;
}

TrainResult train(const ModelConfig& model_cfg, const TrainConfig& cfg, const Manifest& original,
                  const Manifest* antithetical) {
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.batch_size < 2) throw std::invalid_argument("batch size must be >= 2");
  if (original.records.empty()) throw std::invalid_argument("empty training pool");
  if (cfg.loss_mode == LossMode::SoftmaxTrihard && !cfg.pk)
    throw std::invalid_argument("trihard mode requires pk sampling");

  std::set<int> known_ids;
  for (const SampleRecord& r : original.records) known_ids.insert(r.identity);
  if (antithetical)
    for (const SampleRecord& r : antithetical->records)
      if (!known_ids.contains(r.identity))
        throw std::invalid_argument("identity-space mismatch between manifests");

  std::vector<Image> pool;
  std::vector<int> identities;
  auto ingest = [&](const Manifest& m) {
    for (const SampleRecord& r : m.records) {
      Image img = to_grayscale(load_image(resolve_path(m, r)));
      pool.push_back(resize(img, model_cfg.input_height, model_cfg.input_width,
                            ResampleFilter::Bilinear));
      identities.push_back(r.identity);
    }
  };
  ingest(original);
  if (antithetical) ingest(*antithetical);
  const std::vector<int> labels = dense_labels(identities);

  ModelConfig mc = model_cfg;
  if (mc.num_identities == 0)
    mc.num_identities = static_cast<int>(known_ids.size());
  else if (mc.num_identities != static_cast<int>(known_ids.size()))
    throw std::invalid_argument("configured identity count does not match the manifests");

  Model model = init_model(mc);
  SgdState state = make_sgd_state(model);
  Rng rng(cfg.seed);

  const int n = static_cast<int>(pool.size());
  const int d_in = mc.input_dim();
  TrainHistory history;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = lr_at(epoch, cfg);

    std::vector<std::vector<int>> batches;
    if (cfg.pk) {
      const auto [p_ids, k_imgs] = *cfg.pk;
      const int steps = std::max(1, n / std::max(1, p_ids * k_imgs));
      for (int s = 0; s < steps; ++s)
        batches.push_back(pk_sample_indices(identities, p_ids, k_imgs, rng));
    } else {
      std::vector<int> order(n);
      for (int i = 0; i < n; ++i) order[i] = i;
      for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(0, i)]);
      for (int start = 0; start < n; start += cfg.batch_size) {
        const int end = std::min(n, start + cfg.batch_size);
        batches.emplace_back(order.begin() + start, order.begin() + end);
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    for (const std::vector<int>& batch : batches) {
      Eigen::MatrixXd inputs(batch.size(), d_in);
      std::vector<int> batch_labels;
      batch_labels.reserve(batch.size());
      for (std::size_t b = 0; b < batch.size(); ++b) {
        Image img = pool[batch[b]];
        if (cfg.augment_hflip && rng.bernoulli(0.5)) img = hflip(img);
        if (cfg.augment_random_erase) img = random_erase(img, rng);
        for (int i = 0; i < d_in; ++i) inputs(b, i) = img.pixels[i] / 255.0;
        batch_labels.push_back(labels[batch[b]]);
      }
      const LossBreakdown losses = train_step(model, inputs, batch_labels, cfg, lr, state);
      rec.ce += losses.ce;
      rec.intra += losses.intra;
      rec.inter += losses.inter;
      rec.trihard += losses.trihard;
      rec.total += losses.total;
    }
    const double inv_steps = 1.0 / static_cast<double>(batches.size());
    rec.ce *= inv_steps;
    rec.intra *= inv_steps;
    rec.inter *= inv_steps;
    rec.trihard *= inv_steps;
    rec.total *= inv_steps;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.epochs.push_back(rec);
  }

  if (!cfg.checkpoint_path.empty()) save_model(model, cfg.checkpoint_path);
  return {std::move(model), std::move(history)};
}

namespace {

Eigen::Index parameter_count(const Model& model) {
  Eigen::Index n = model.centers.size();
  for (const auto& w : model.weights) n += w.size();
  for (const auto& b : model.biases) n += b.size();
  return n;
}

}  // namespace

Eigen::VectorXd flatten_parameters(const Model& model) {
  Eigen::VectorXd out(parameter_count(model));
  Eigen::Index pos = 0;
  auto put = [&](const auto& m) {
    out.segment(pos, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    pos += m.size();
  };
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    put(model.weights[l]);
    put(model.biases[l]);
  }
  put(model.centers);
  return out;
}

void unflatten_parameters(const Eigen::VectorXd& params, Model& model) {
  if (params.size() != parameter_count(model))
    throw std::invalid_argument("parameter vector size does not match the model");
  Eigen::Index pos = 0;
  auto take = [&](auto& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = params.segment(pos, m.size());
    pos += m.size();
  };
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    take(model.weights[l]);
    take(model.biases[l]);
  }
  take(model.centers);
}

Eigen::VectorXd flatten_grads(const ParamGrads& grads) {
  Eigen::Index n = grads.centers.size();
  for (const auto& w : grads.weights) n += w.size();
  for (const auto& b : grads.biases) n += b.size();
  Eigen::VectorXd out(n);
  Eigen::Index pos = 0;
  auto put = [&](const auto& m) {
    out.segment(pos, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    pos += m.size();
  };
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    put(grads.weights[l]);
    put(grads.biases[l]);
  }
  put(grads.centers);
  return out;
}

void save_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error(path.string() + ": cannot open for writing");
  std::fprintf(f, "epoch,lr,ce,intra,inter,trihard,total,seconds\n");
  for (const EpochRecord& r : history.epochs)
    std::fprintf(f, "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.3f\n", r.epoch, r.lr, r.ce,
                 r.intra, r.inter, r.trihard, r.total, r.seconds);
  const bool ok = std::fflush(f) == 0;
  std::fclose(f);
  if (!ok) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace antithetic
