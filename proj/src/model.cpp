#include "antithetic/model.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "antithetic/rng.hpp"

namespace antithetic {

namespace {

void check_config(const ModelConfig& cfg) {
  if (cfg.input_height < 1 || cfg.input_width < 1)
    throw std::invalid_argument("input dimensions must be positive");
  if (cfg.hidden.empty()) throw std::invalid_argument("need at least one hidden layer");
  for (int hsz : cfg.hidden)
    if (hsz < 1) throw std::invalid_argument("layer widths must be positive");
  if (cfg.num_identities < 2)
    throw std::invalid_argument("need at least two identities");
}

std::vector<std::pair<int, int>> layer_shapes(const ModelConfig& cfg) {
  std::vector<std::pair<int, int>> shapes;
  int in = cfg.input_dim();
  for (int hsz : cfg.hidden) {
    shapes.emplace_back(hsz, in);
    in = hsz;
  }
  shapes.emplace_back(cfg.num_identities, in);  // classification head
  return shapes;
}

}  // namespace

Model init_model(const ModelConfig& cfg) {
  check_config(cfg);
  Model model;
  model.config = cfg;
  Rng rng(cfg.seed);
  for (const auto& [rows, cols] : layer_shapes(cfg)) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) w(r, c) = rng.uniform(-limit, limit);
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(rows));
  }
  model.centers.resize(cfg.num_identities, cfg.embedding_dim());
  for (int r = 0; r < model.centers.rows(); ++r)
    for (int c = 0; c < model.centers.cols(); ++c) model.centers(r, c) = rng.uniform(0.01, 0.1);
  return model;
}

namespace detail {

ForwardCache forward_cached(const Model& model, const Eigen::MatrixXd& inputs) {
  if (inputs.cols() != model.config.input_dim())
    throw std::invalid_argument("input width does not match model configuration");
  ForwardCache cache;
  cache.acts.reserve(model.config.hidden.size() + 1);
  cache.acts.push_back(inputs);
  for (std::size_t l = 0; l + 1 < model.weights.size(); ++l) {
    Eigen::MatrixXd z =
        (cache.acts.back() * model.weights[l].transpose()).rowwise() +
        model.biases[l].transpose();
    cache.acts.push_back(z.cwiseMax(0.0));
  }
  cache.logits = (cache.acts.back() * model.weights.back().transpose()).rowwise() +
                 model.biases.back().transpose();
  return cache;
}

}  // namespace detail

ForwardResult forward(const Model& model, const Eigen::MatrixXd& inputs) {
  detail::ForwardCache cache = detail::forward_cached(model, inputs);
  return {std::move(cache.acts.back()), std::move(cache.logits)};
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error(path.string() + ": cannot open for writing");
  const ModelConfig& cfg = model.config;
  std::fprintf(f, "antithetic-model 1\n");
  std::fprintf(f, "input %d %d\n", cfg.input_height, cfg.input_width);
  std::fprintf(f, "hidden %zu", cfg.hidden.size());
  for (int hsz : cfg.hidden) std::fprintf(f, " %d", hsz);
  std::fprintf(f, "\nidentities %d\n", cfg.num_identities);
  std::fprintf(f, "seed %" PRIu64 "\n", cfg.seed);
  auto write_matrix = [&](const char* tag, const Eigen::MatrixXd& m) {
    std::fprintf(f, "%s %td %td\n", tag, m.rows(), m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        std::fprintf(f, c == 0 ? "%.17g" : " %.17g", m(r, c));
      std::fprintf(f, "\n");
    }
  };
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    write_matrix("weight", model.weights[l]);
    write_matrix("bias", Eigen::MatrixXd(model.biases[l].transpose()));
  }
  write_matrix("centers", model.centers);
  const bool ok = std::fflush(f) == 0;
  std::fclose(f);
  if (!ok) throw std::runtime_error(path.string() + ": write failed");
}

Model load_model(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (!f) throw std::runtime_error(path.string() + ": cannot open checkpoint");
  auto fail = [&](const std::string& what) -> void {
    std::fclose(f);
    throw std::runtime_error(path.string() + ": " + what);
  };

  char magic[32];
  int version = 0;
  if (std::fscanf(f, "%31s %d", magic, &version) != 2 ||
      std::string(magic) != "antithetic-model" || version != 1)
    fail("not a version-1 checkpoint");

  ModelConfig cfg;
  std::size_t n_hidden = 0;
  if (std::fscanf(f, " input %d %d", &cfg.input_height, &cfg.input_width) != 2)
    fail("malformed input line");
  if (std::fscanf(f, " hidden %zu", &n_hidden) != 1 || n_hidden == 0 || n_hidden > 64)
    fail("malformed hidden line");
  cfg.hidden.resize(n_hidden);
  for (std::size_t i = 0; i < n_hidden; ++i)
    if (std::fscanf(f, "%d", &cfg.hidden[i]) != 1) fail("malformed hidden widths");
  if (std::fscanf(f, " identities %d", &cfg.num_identities) != 1)
    fail("malformed identities line");
  if (std::fscanf(f, " seed %" SCNu64, &cfg.seed) != 1) fail("malformed seed line");

  Model model;
  model.config = cfg;
  const auto shapes = layer_shapes(cfg);
  auto read_matrix = [&](const char* tag, Eigen::Index rows, Eigen::Index cols) {
    char name[32];
    long r = 0, c = 0;
    if (std::fscanf(f, "%31s %ld %ld", name, &r, &c) != 3 || std::string(name) != tag)
      fail(std::string("expected ") + tag + " block");
    if (r != rows || c != cols)
      fail(std::string(tag) + " shape does not match the declared configuration");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        if (std::fscanf(f, "%lg", &m(i, j)) != 1) fail("truncated checkpoint");
    return m;
  };
  for (const auto& [rows, cols] : shapes) {
    model.weights.push_back(read_matrix("weight", rows, cols));
    model.biases.push_back(read_matrix("bias", 1, rows).row(0).transpose());
  }
  model.centers = read_matrix("centers", cfg.num_identities, cfg.embedding_dim());
  std::fclose(f);
  return model;
}

}  // namespace antithetic
