#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "antithetic/antithetical.hpp"
#include "antithetic/eval.hpp"
#include "antithetic/losses.hpp"
#include "antithetic/manifest.hpp"
#include "antithetic/model.hpp"
#include "antithetic/pnm.hpp"
#include "antithetic/sharpness.hpp"
#include "antithetic/synth.hpp"
#include "antithetic/train.hpp"

namespace {

using namespace antithetic;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out.flush()) throw std::runtime_error(path.string() + ": write failed");
}

// Manifests resolve image paths against their own directory, so writing one
// elsewhere requires rebasing the record paths first.
void save_manifest_at(const Manifest& manifest, const std::filesystem::path& path) {
  const auto parent = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  save_manifest(rebase_manifest(manifest, parent), path);
}

AugmentConfig parse_enhancer(const std::string& spec, std::uint64_t seed) {
  AugmentConfig cfg;
  cfg.seed = seed;
  if (spec == "classical") {
    cfg.enhancer = EnhancerKind::Classical;
  } else if (spec.rfind("external:", 0) == 0) {
    cfg.enhancer = EnhancerKind::External;
    cfg.external_program = spec.substr(9);
    if (cfg.external_program.empty())
      throw CLI::ValidationError("--enhancer", "external enhancer needs a program path");
  } else {
    throw CLI::ValidationError("--enhancer", "expected 'classical' or 'external:<path>'");
  }
  return cfg;
}

struct EmbeddedSet {
  Eigen::MatrixXd features;
  std::vector<int> ids;
  std::vector<int> cams;
  std::vector<PartitionLabel> bins;  // empty unless every record is labeled
};

EmbeddedSet embed_manifest(const Model& model, const Manifest& manifest) {
  if (manifest.records.empty()) throw std::runtime_error("manifest has no records");
  EmbeddedSet set;
  const int d_in = model.config.input_dim();
  Eigen::MatrixXd inputs(manifest.records.size(), d_in);
  bool all_binned = true;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const SampleRecord& r = manifest.records[i];
    const Image img = resize(to_grayscale(load_image(resolve_path(manifest, r))),
                             model.config.input_height, model.config.input_width,
                             ResampleFilter::Bilinear);
    for (int p = 0; p < d_in; ++p) inputs(i, p) = img.pixels[p] / 255.0;
    set.ids.push_back(r.identity);
    set.cams.push_back(r.camera);
    if (r.partition)
      set.bins.push_back(*r.partition);
    else
      all_binned = false;
  }
  if (!all_binned) set.bins.clear();
  set.features = forward(model, inputs).embeddings;
  return set;
}

int run_gradcheck(std::uint64_t seed) {
  Rng rng(seed);
  const int n = 12, d = 7, k = 5;
  Eigen::MatrixXd features(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) features(i, j) = rng.uniform(-1.0, 1.0);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i % 4;  // 4 identities, repeats
  Eigen::MatrixXd centers(k, d);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) centers(i, j) = rng.uniform(0.1, 1.0);
  const LossWeights weights;

  auto features_fn = [&](auto&& loss_of) {
    return LossFn([&, loss_of](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
      Eigen::MatrixXd f = Eigen::Map<const Eigen::MatrixXd>(p.data(), n, d);
      const LossOutput out = loss_of(f);
      if (grad) *grad = Eigen::Map<const Eigen::VectorXd>(out.grad_features.data(),
                                                          out.grad_features.size());
      return out.value;
    });
  };
  auto centers_fn = [&](auto&& loss_of) {
    return LossFn([&, loss_of](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
      Eigen::MatrixXd c = Eigen::Map<const Eigen::MatrixXd>(p.data(), k, d);
      const LossOutput out = loss_of(c);
      if (grad) *grad = Eigen::Map<const Eigen::VectorXd>(out.grad_centers.data(),
                                                          out.grad_centers.size());
      return out.value;
    });
  };
  const Eigen::VectorXd feat_vec = Eigen::Map<const Eigen::VectorXd>(features.data(),
                                                                     features.size());
  const Eigen::VectorXd center_vec = Eigen::Map<const Eigen::VectorXd>(centers.data(),
                                                                       centers.size());

  bool ok = true;
  auto report = [&](const char* name, double err) {
    std::cout << name << " max_rel_err " << err << (err < 1e-5 ? " ok" : " FAIL") << "\n";
    ok = ok && err < 1e-5;
  };

  report("intra_loss(features)", finite_diff_check(features_fn([&](const Eigen::MatrixXd& f) {
    return intra_loss({f, labels}, {centers});
  }), feat_vec));
  report("intra_loss(centers)", finite_diff_check(centers_fn([&](const Eigen::MatrixXd& c) {
    return intra_loss({features, labels}, {c});
  }), center_vec));
  report("inter_loss(centers)", finite_diff_check(centers_fn([&](const Eigen::MatrixXd& c) {
    return inter_loss(labels, {c});
  }), center_vec));
  report("ccl(features)", finite_diff_check(features_fn([&](const Eigen::MatrixXd& f) {
    return ccl({f, labels}, {centers}, weights);
  }), feat_vec));
  report("ccl(centers)", finite_diff_check(centers_fn([&](const Eigen::MatrixXd& c) {
    return ccl({features, labels}, {c}, weights);
  }), center_vec));
  report("softmax_ce(logits)", finite_diff_check(features_fn([&](const Eigen::MatrixXd& f) {
    std::vector<int> truth(n);
    for (int i = 0; i < n; ++i) truth[i] = i % d;
    return softmax_ce(f, truth);
  }), feat_vec));
  report("trihard(features)", finite_diff_check(features_fn([&](const Eigen::MatrixXd& f) {
    return trihard({f, labels}, weights);
  }), feat_vec));

  // Full objective through a tiny network, every parameter checked.
  ModelConfig mc;
  mc.input_height = 2;
  mc.input_width = 2;
  mc.hidden = {3};
  mc.num_identities = 3;
  mc.seed = seed + 1;
  const Model base = init_model(mc);
  TrainConfig tc;
  tc.loss_mode = LossMode::SoftmaxCcl;
  Eigen::MatrixXd x(4, 4);
  for (int i = 0; i < x.size(); ++i) x(i / 4, i % 4) = rng.uniform(0.05, 1.0);
  const std::vector<int> y{0, 1, 2, 0};
  LossFn net_fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    Model m = base;
    unflatten_parameters(p, m);
    const StepEval ev = compute_gradients(m, x, y, tc);
    if (grad) *grad = flatten_grads(ev.grads);
    return ev.losses.total;
  };
  report("network_objective", finite_diff_check(net_fn, flatten_parameters(base), 200));

  if (!ok) throw std::runtime_error("gradient check failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharpness-balanced identity training pipeline"};
  app.require_subcommand(1);

  int threads = 1;
  if (const char* env = std::getenv("ANTITHETIC_THREADS")) threads = std::atoi(env);
  app.add_option("--threads", threads, "Worker threads for batch scoring")
      ->capture_default_str();

  // score
  std::string score_manifest_path, score_out;
  auto* score_cmd = app.add_subcommand("score", "Attach sharpness scores to a manifest");
  score_cmd->add_option("--manifest", score_manifest_path, "Input manifest")->required();
  score_cmd->add_option("--out", score_out, "Output manifest")->required();

  // split
  std::string split_scores, split_out;
  auto* split_cmd =
      app.add_subcommand("split", "Partition a scored manifest at the mean sharpness");
  split_cmd->add_option("--scores", split_scores, "Scored manifest")->required();
  split_cmd->add_option("--out", split_out, "Output manifest")->required();

  // augment
  std::string aug_manifest, aug_out_dir, aug_enhancer = "classical";
  std::uint64_t aug_seed = 0;
  auto* aug_cmd =
      app.add_subcommand("augment", "Generate the resolution-flipped companion set");
  aug_cmd->add_option("--manifest", aug_manifest, "Partitioned manifest")->required();
  aug_cmd->add_option("--out-dir", aug_out_dir, "Output directory")->required();
  aug_cmd->add_option("--seed", aug_seed, "Random seed")->required();
  aug_cmd->add_option("--enhancer", aug_enhancer, "classical | external:<path>")
      ->capture_default_str();

  // synth
  SynthConfig synth_cfg;
  std::string synth_out_dir;
  auto* synth_cmd = app.add_subcommand("synth", "Generate the procedural identity corpus");
  synth_cmd->add_option("--identities", synth_cfg.identities, "Identity count")->required();
  synth_cmd->add_option("--per-id", synth_cfg.images_per_identity, "Images per identity")
      ->required();
  synth_cmd->add_option("--height", synth_cfg.height, "Image height")->capture_default_str();
  synth_cmd->add_option("--width", synth_cfg.width, "Image width")->capture_default_str();
  synth_cmd->add_option("--blur-fraction", synth_cfg.blur_fraction, "Blurred share per identity")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_cfg.seed, "Random seed")->required();
  synth_cmd->add_option("--out-dir", synth_out_dir, "Output directory")->required();

  // train
  std::string train_manifest, train_anti, train_loss = "softmax", train_out, train_history;
  TrainConfig train_cfg;
  ModelConfig model_cfg;
  std::uint64_t train_seed = 0;
  std::vector<int> train_pk;
  auto* train_cmd = app.add_subcommand("train", "Train the embedding network");
  train_cmd->add_option("--manifest", train_manifest, "Training manifest")->required();
  train_cmd->add_option("--antithetical", train_anti, "Companion manifest merged into the pool");
  train_cmd
      ->add_option("--loss", train_loss,
                   "softmax | softmax+center | softmax+ccl | softmax+trihard")
      ->capture_default_str();
  train_cmd->add_option("--alpha", train_cfg.weights.alpha, "Center attraction weight")
      ->capture_default_str();
  train_cmd->add_option("--beta", train_cfg.weights.beta, "Center repulsion weight")
      ->capture_default_str();
  train_cmd->add_option("--margin", train_cfg.weights.margin, "Trihard hinge margin")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_cfg.epochs, "Training epochs")->capture_default_str();
  train_cmd->add_option("--batch-size", train_cfg.batch_size, "Batch size")
      ->capture_default_str();
  train_cmd->add_option("--lr", train_cfg.lr0, "Initial learning rate")->capture_default_str();
  train_cmd->add_option("--weight-decay", train_cfg.weight_decay, "L2 weight decay")
      ->capture_default_str();
  train_cmd->add_option("--momentum", train_cfg.momentum, "SGD momentum")
      ->capture_default_str();
  train_cmd->add_option("--decay-start", train_cfg.decay_start_epoch, "First decayed epoch")
      ->capture_default_str();
  train_cmd->add_option("--decay-base", train_cfg.decay_base, "Decay base")
      ->capture_default_str();
  train_cmd->add_option("--input-height", model_cfg.input_height, "Network input height")
      ->capture_default_str();
  train_cmd->add_option("--input-width", model_cfg.input_width, "Network input width")
      ->capture_default_str();
  train_cmd->add_option("--hidden", model_cfg.hidden, "Hidden layer widths")
      ->capture_default_str();
  train_cmd->add_option("--pk", train_pk, "P K batch sampling (two integers)")
      ->expected(2);
  train_cmd->add_option("--seed", train_seed, "Random seed")->required();
  train_cmd->add_option("--out", train_out, "Checkpoint path")->required();
  train_cmd->add_option("--history", train_history, "History CSV path");
  bool no_hflip = false, no_erase = false;
  train_cmd->add_flag("--no-hflip", no_hflip, "Disable horizontal flipping");
  train_cmd->add_flag("--no-erase", no_erase, "Disable random erasing");

  // eval
  std::string eval_model, eval_query, eval_gallery, eval_report;
  auto* eval_cmd = app.add_subcommand("eval", "Rank a query set against a gallery");
  eval_cmd->add_option("--model", eval_model, "Checkpoint")->required();
  eval_cmd->add_option("--query", eval_query, "Query manifest")->required();
  eval_cmd->add_option("--gallery", eval_gallery, "Gallery manifest")->required();
  eval_cmd->add_option("--report", eval_report, "Output JSON report")->required();

  // analyze-triplets
  std::string an_model, an_manifest, an_out;
  double an_margin = 0.3;
  auto* an_cmd = app.add_subcommand("analyze-triplets",
                                    "Batch-hard selection histogram by resolution bin");
  an_cmd->add_option("--model", an_model, "Checkpoint")->required();
  an_cmd->add_option("--manifest", an_manifest, "Partitioned manifest")->required();
  an_cmd->add_option("--out", an_out, "Output CSV")->required();
  an_cmd->add_option("--margin", an_margin, "Trihard hinge margin")->capture_default_str();

  // gradcheck
  std::uint64_t grad_seed = 7;
  auto* grad_cmd = app.add_subcommand("gradcheck",
                                      "Verify analytic gradients with central differences");
  grad_cmd->add_option("--seed", grad_seed, "Seed for the checked points")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*score_cmd) {
      const Manifest scored = score_manifest(load_manifest(score_manifest_path), threads);
      save_manifest_at(scored, score_out);
    } else if (*split_cmd) {
      const Manifest scored = load_manifest(split_scores);
      std::vector<double> values;
      for (const SampleRecord& r : scored.records)
        if (r.sharpness) values.push_back(*r.sharpness);
      if (values.size() != scored.records.size())
        throw std::runtime_error("split needs a fully scored manifest");
      const double threshold = split_threshold(values);
      save_manifest_at(partition(scored, threshold), split_out);
      std::cout << "threshold " << threshold << "\n";
    } else if (*aug_cmd) {
      const AugmentConfig cfg = parse_enhancer(aug_enhancer, aug_seed);
      const Manifest anti =
          generate_antithetical(load_manifest(aug_manifest), cfg, aug_out_dir);
      save_manifest(anti, std::filesystem::path(aug_out_dir) / "manifest.jsonl");
    } else if (*synth_cmd) {
      const Manifest corpus = synth_corpus(synth_cfg, synth_out_dir);
      save_manifest(corpus, std::filesystem::path(synth_out_dir) / "manifest.jsonl");
    } else if (*train_cmd) {
      train_cfg.loss_mode = loss_mode_from_string(train_loss);
      train_cfg.augment_hflip = !no_hflip;
      train_cfg.augment_random_erase = !no_erase;
      if (!train_pk.empty()) train_cfg.pk = std::make_pair(train_pk[0], train_pk[1]);
      train_cfg.seed = splitmix64(train_seed);
      train_cfg.checkpoint_path = train_out;
      model_cfg.seed = train_seed;
      const Manifest original = load_manifest(train_manifest);
      std::optional<Manifest> anti;
      if (!train_anti.empty()) anti = load_manifest(train_anti);
      const TrainResult result =
          train(model_cfg, train_cfg, original, anti ? &*anti : nullptr);
      const std::filesystem::path history_path =
          train_history.empty() ? std::filesystem::path(train_out + ".history.csv")
                                : std::filesystem::path(train_history);
      save_history_csv(result.history, history_path);
    } else if (*eval_cmd) {
      const Model model = load_model(eval_model);
      const EmbeddedSet query = embed_manifest(model, load_manifest(eval_query));
      const EmbeddedSet gallery = embed_manifest(model, load_manifest(eval_gallery));
      const DistanceMatrix dm = distance_matrix(query.features, gallery.features);

      EvalReport report;
      report.ranking = cmc_map(dm, query.ids, gallery.ids, query.cams, gallery.cams);
      try {
        Eigen::MatrixXd all(query.features.rows() + gallery.features.rows(),
                            query.features.cols());
        all << query.features, gallery.features;
        std::vector<int> ids = query.ids;
        ids.insert(ids.end(), gallery.ids.begin(), gallery.ids.end());
        report.stats = distance_stats(all, dense_labels(ids), {model.centers});
      } catch (const std::exception& e) {
        std::cerr << "note: distance stats unavailable: " << e.what() << "\n";
      }
      if (!query.bins.empty())
        report.probes = probe_breakdown(dm, query.ids, gallery.ids, query.cams, gallery.cams,
                                        query.bins);
      write_text(eval_report, to_json_string(report));
    } else if (*an_cmd) {
      const Model model = load_model(an_model);
      const Manifest manifest = load_manifest(an_manifest);
      const EmbeddedSet set = embed_manifest(model, manifest);
      if (set.bins.empty())
        throw std::runtime_error("analyze-triplets needs a fully partitioned manifest");
      LossWeights w;
      w.margin = an_margin;
      const LossOutput out = trihard({set.features, dense_labels(set.ids)}, w);
      write_text(an_out, to_csv(triplet_histogram(out.selected_triplets, set.bins)));
    } else if (*grad_cmd) {
      return run_gradcheck(grad_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
