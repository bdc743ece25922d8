#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "antithetic/antithetical.hpp"
#include "antithetic/eval.hpp"
#include "antithetic/losses.hpp"
#include "antithetic/manifest.hpp"
#include "antithetic/model.hpp"
#include "antithetic/pnm.hpp"
#include "antithetic/sharpness.hpp"
#include "antithetic/synth.hpp"
#include "antithetic/train.hpp"

namespace py = pybind11;
using namespace antithetic;

namespace {

py::array_t<std::uint8_t> image_to_array(const Image& img) {
  if (img.channels == 1) {
    py::array_t<std::uint8_t> out({img.height, img.width});
    std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
    return out;
  }
  py::array_t<std::uint8_t> out({img.height, img.width, img.channels});
  std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
  return out;
}

Image image_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2 && arr.ndim() != 3)
    throw std::invalid_argument("expected a (h, w) or (h, w, c) uint8 array");
  const int h = static_cast<int>(arr.shape(0));
  const int w = static_cast<int>(arr.shape(1));
  const int c = arr.ndim() == 2 ? 1 : static_cast<int>(arr.shape(2));
  std::vector<std::uint8_t> pixels(arr.data(), arr.data() + arr.size());
  return Image(h, w, c, std::move(pixels));
}

py::array_t<double> grid_to_array(const MagnitudeGrid& grid) {
  py::array_t<double> out({grid.height, grid.width});
  std::copy(grid.values.begin(), grid.values.end(), out.mutable_data());
  return out;
}

MagnitudeGrid grid_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-D float64 array");
  MagnitudeGrid grid{static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
                     std::vector<double>(arr.data(), arr.data() + arr.size())};
  return grid;
}

py::dict ranking_to_dict(const RankingResult& r) {
  py::dict d;
  d["cmc"] = r.cmc;
  d["map"] = r.map;
  d["skipped_queries"] = r.skipped_queries;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sharpness-balanced identity training pipeline (C++ core)";

  py::enum_<ResampleFilter>(m, "ResampleFilter")
      .value("NEAREST", ResampleFilter::Nearest)
      .value("BILINEAR", ResampleFilter::Bilinear)
      .value("BICUBIC", ResampleFilter::Bicubic);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", &Rng::uniform, py::arg("lo") = 0.0, py::arg("hi") = 1.0)
      .def("uniform_int", &Rng::uniform_int, py::arg("lo"), py::arg("hi"))
      .def("fork", &Rng::fork, py::arg("n"));

  py::class_<Image>(m, "Image")
      .def(py::init<int, int, int, std::uint8_t>(), py::arg("height"), py::arg("width"),
           py::arg("channels") = 1, py::arg("fill") = 0)
      .def_static("from_array", &image_from_array, py::arg("array"))
      .def("to_array", &image_to_array)
      .def_readonly("height", &Image::height)
      .def_readonly("width", &Image::width)
      .def_readonly("channels", &Image::channels)
      .def("__eq__", [](const Image& a, const Image& b) { return a == b; });

  m.def("load_image", &load_image, py::arg("path"));
  m.def("save_image", &save_image, py::arg("image"), py::arg("path"));
  m.def("to_grayscale", &to_grayscale, py::arg("image"));
  m.def("resize", &resize, py::arg("image"), py::arg("height"), py::arg("width"),
        py::arg("filter") = ResampleFilter::Bilinear);
  m.def("gaussian_blur", &gaussian_blur, py::arg("image"), py::arg("sigma"));
  m.def("hflip", &hflip, py::arg("image"));
  m.def(
      "random_erase",
      [](const Image& img, std::uint64_t seed) {
        Rng rng(seed);
        return random_erase(img, rng);
      },
      py::arg("image"), py::arg("seed"));

  m.def(
      "dft2d_magnitude",
      [](const Image& img) { return grid_to_array(dft2d_magnitude(img)); }, py::arg("image"));
  m.def(
      "center_shift",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
        return grid_to_array(center_shift(grid_from_array(arr)));
      },
      py::arg("magnitudes"));

  m.def(
      "sharpness", [](const Image& img) { return sharpness(img).value; }, py::arg("image"));
  m.def(
      "sharpness_from_magnitudes",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
        return sharpness_from_magnitudes(grid_from_array(arr)).value;
      },
      py::arg("magnitudes"));
  m.def(
      "split_threshold",
      [](const std::vector<double>& scores) {
        return split_threshold(std::span<const double>(scores));
      },
      py::arg("scores"));

  py::enum_<PartitionLabel>(m, "PartitionLabel")
      .value("HR", PartitionLabel::HR)
      .value("LR", PartitionLabel::LR);
  py::enum_<Origin>(m, "Origin")
      .value("ORIGINAL", Origin::Original)
      .value("ANTITHETICAL", Origin::Antithetical);

  py::class_<SampleRecord>(m, "SampleRecord")
      .def(py::init<>())
      .def_readwrite("path", &SampleRecord::path)
      .def_readwrite("identity", &SampleRecord::identity)
      .def_readwrite("camera", &SampleRecord::camera)
      .def_readwrite("partition", &SampleRecord::partition)
      .def_readwrite("sharpness", &SampleRecord::sharpness)
      .def_readwrite("origin", &SampleRecord::origin)
      .def_readwrite("counterpart", &SampleRecord::counterpart);

  py::class_<Manifest>(m, "Manifest")
      .def(py::init<>())
      .def_readwrite("root", &Manifest::root)
      .def_readwrite("records", &Manifest::records);

  m.def("load_manifest", &load_manifest, py::arg("path"));
  m.def("save_manifest", &save_manifest, py::arg("manifest"), py::arg("path"));
  m.def("score_manifest", &score_manifest, py::arg("manifest"), py::arg("threads") = 1);
  m.def("partition", &partition, py::arg("manifest"), py::arg("threshold"));

  py::enum_<EnhancerKind>(m, "EnhancerKind")
      .value("CLASSICAL", EnhancerKind::Classical)
      .value("EXTERNAL", EnhancerKind::External);

  py::class_<AugmentConfig>(m, "AugmentConfig")
      .def(py::init<>())
      .def_readwrite("factor_low", &AugmentConfig::factor_low)
      .def_readwrite("factor_high", &AugmentConfig::factor_high)
      .def_readwrite("enhancer", &AugmentConfig::enhancer)
      .def_readwrite("external_program", &AugmentConfig::external_program)
      .def_readwrite("seed", &AugmentConfig::seed);

  m.def(
      "downsample_counterpart",
      [](const Image& img, std::uint64_t seed, const AugmentConfig& cfg) {
        Rng rng(seed);
        return downsample_counterpart(img, rng, cfg);
      },
      py::arg("image"), py::arg("seed"), py::arg("config") = AugmentConfig{});
  m.def("enhance_classical", &enhance_classical, py::arg("image"));
  m.def("enhance_external", &enhance_external, py::arg("image_path"), py::arg("program"));
  m.def("generate_antithetical", &generate_antithetical, py::arg("manifest"), py::arg("config"),
        py::arg("out_dir"));

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("identities", &SynthConfig::identities)
      .def_readwrite("images_per_identity", &SynthConfig::images_per_identity)
      .def_readwrite("height", &SynthConfig::height)
      .def_readwrite("width", &SynthConfig::width)
      .def_readwrite("blur_fraction", &SynthConfig::blur_fraction)
      .def_readwrite("seed", &SynthConfig::seed);
  m.def("synth_corpus", &synth_corpus, py::arg("config"), py::arg("out_dir"));

  py::class_<LossWeights>(m, "LossWeights")
      .def(py::init<>())
      .def_readwrite("alpha", &LossWeights::alpha)
      .def_readwrite("beta", &LossWeights::beta)
      .def_readwrite("margin", &LossWeights::margin);

  py::class_<Triplet>(m, "Triplet")
      .def_readonly("anchor", &Triplet::anchor)
      .def_readonly("positive", &Triplet::positive)
      .def_readonly("negative", &Triplet::negative);

  py::class_<LossOutput>(m, "LossOutput")
      .def_readonly("value", &LossOutput::value)
      .def_readonly("grad_features", &LossOutput::grad_features)
      .def_readonly("grad_centers", &LossOutput::grad_centers)
      .def_readonly("selected_triplets", &LossOutput::selected_triplets);

  m.def("cosine", &cosine, py::arg("a"), py::arg("b"));
  m.def(
      "intra_loss",
      [](const Eigen::MatrixXd& features, const std::vector<int>& labels,
         const Eigen::MatrixXd& centers) {
        return intra_loss({features, labels}, {centers});
      },
      py::arg("features"), py::arg("labels"), py::arg("centers"));
  m.def(
      "inter_loss",
      [](const std::vector<int>& labels, const Eigen::MatrixXd& centers) {
        return inter_loss(labels, {centers});
      },
      py::arg("labels"), py::arg("centers"));
  m.def(
      "ccl",
      [](const Eigen::MatrixXd& features, const std::vector<int>& labels,
         const Eigen::MatrixXd& centers, const LossWeights& w) {
        return ccl({features, labels}, {centers}, w);
      },
      py::arg("features"), py::arg("labels"), py::arg("centers"),
      py::arg("weights") = LossWeights{});
  m.def("softmax_ce", &softmax_ce, py::arg("logits"), py::arg("truth"));
  m.def(
      "trihard",
      [](const Eigen::MatrixXd& features, const std::vector<int>& labels,
         const LossWeights& w) { return trihard({features, labels}, w); },
      py::arg("features"), py::arg("labels"), py::arg("weights") = LossWeights{});
  m.def("total_loss", &total_loss, py::arg("a"), py::arg("b"));

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("input_height", &ModelConfig::input_height)
      .def_readwrite("input_width", &ModelConfig::input_width)
      .def_readwrite("hidden", &ModelConfig::hidden)
      .def_readwrite("num_identities", &ModelConfig::num_identities)
      .def_readwrite("seed", &ModelConfig::seed);

  py::class_<Model>(m, "Model")
      .def_readonly("config", &Model::config)
      .def_readonly("centers", &Model::centers);

  m.def("init_model", &init_model, py::arg("config"));
  m.def(
      "forward",
      [](const Model& model, const Eigen::MatrixXd& inputs) {
        const ForwardResult out = forward(model, inputs);
        return py::make_tuple(out.embeddings, out.logits);
      },
      py::arg("model"), py::arg("inputs"));
  m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
  m.def("load_model", &load_model, py::arg("path"));

  py::enum_<LossMode>(m, "LossMode")
      .value("SOFTMAX", LossMode::Softmax)
      .value("SOFTMAX_CENTER", LossMode::SoftmaxCenter)
      .value("SOFTMAX_CCL", LossMode::SoftmaxCcl)
      .value("SOFTMAX_TRIHARD", LossMode::SoftmaxTrihard);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("lr0", &TrainConfig::lr0)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("momentum", &TrainConfig::momentum)
      .def_readwrite("decay_start_epoch", &TrainConfig::decay_start_epoch)
      .def_readwrite("decay_base", &TrainConfig::decay_base)
      .def_readwrite("loss_mode", &TrainConfig::loss_mode)
      .def_readwrite("weights", &TrainConfig::weights)
      .def_readwrite("pk", &TrainConfig::pk)
      .def_readwrite("augment_hflip", &TrainConfig::augment_hflip)
      .def_readwrite("augment_random_erase", &TrainConfig::augment_random_erase)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("checkpoint_path", &TrainConfig::checkpoint_path);

  m.def("lr_at", &lr_at, py::arg("epoch"), py::arg("config"));
  m.def(
      "train",
      [](const ModelConfig& mc, const TrainConfig& tc, const Manifest& original,
         const std::optional<Manifest>& antithetical) {
        const TrainResult result = train(mc, tc, original, antithetical ? &*antithetical : nullptr);
        py::list history;
        for (const EpochRecord& r : result.history.epochs) {
          py::dict d;
          d["epoch"] = r.epoch;
          d["lr"] = r.lr;
          d["ce"] = r.ce;
          d["intra"] = r.intra;
          d["inter"] = r.inter;
          d["trihard"] = r.trihard;
          d["total"] = r.total;
          d["seconds"] = r.seconds;
          history.append(d);
        }
        return py::make_tuple(result.model, history);
      },
      py::arg("model_config"), py::arg("train_config"), py::arg("original"),
      py::arg("antithetical") = std::nullopt);

  m.def("distance_matrix", &distance_matrix, py::arg("queries"), py::arg("gallery"));
  m.def(
      "cmc_map",
      [](const DistanceMatrix& dm, const std::vector<int>& q_ids, const std::vector<int>& g_ids,
         const std::vector<int>& q_cams, const std::vector<int>& g_cams) {
        return ranking_to_dict(cmc_map(dm, q_ids, g_ids, q_cams, g_cams));
      },
      py::arg("distances"), py::arg("query_ids"), py::arg("gallery_ids"), py::arg("query_cams"),
      py::arg("gallery_cams"));
  m.def(
      "distance_stats",
      [](const Eigen::MatrixXd& features, const std::vector<int>& labels,
         const Eigen::MatrixXd& centers) {
        const DistanceStats stats = distance_stats(features, labels, {centers});
        return py::make_tuple(stats.intra, stats.inter, stats.centers);
      },
      py::arg("features"), py::arg("labels"), py::arg("centers"));
  m.def("dense_labels", &dense_labels, py::arg("identities"));
}
