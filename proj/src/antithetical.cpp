#include "antithetic/antithetical.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "antithetic/pnm.hpp"

namespace antithetic {

namespace {

void check_config(const AugmentConfig& cfg) {
  if (!(cfg.factor_low > 0.0 && cfg.factor_low <= cfg.factor_high && cfg.factor_high < 1.0))
    throw std::invalid_argument("augment factors must satisfy 0 < low <= high < 1");
}

int round_dim(double v) {
  const int r = static_cast<int>(std::floor(v + 0.5));
  return std::max(r, 1);
}

std::string flatten_path(const std::string& rel) {
  std::string flat = rel;
  for (char& c : flat)
    if (c == '/' || c == '\\') c = '_';
  return flat;
}

}  // namespace

double draw_downsample_factor(Rng& rng, const AugmentConfig& cfg) {
  check_config(cfg);
  return rng.uniform(cfg.factor_low, cfg.factor_high);
}

Image downsample_counterpart(const Image& img, Rng& rng, const AugmentConfig& cfg) {
  if (img.height < 2 || img.width < 2)
    throw std::invalid_argument("downsample_counterpart needs an image of at least 2x2");
  const double u = draw_downsample_factor(rng, cfg);
  const Image small = resize(img, round_dim(img.height * u), round_dim(img.width * u),
                             ResampleFilter::Bilinear);
  return resize(small, img.height, img.width, ResampleFilter::Bilinear);
}

Image enhance_classical(const Image& img) {
  const Image blurred = gaussian_blur(img, 1.0);
  Image out(img.height, img.width, img.channels);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = img.pixels[i] + 1.5 * (static_cast<double>(img.pixels[i]) - blurred.pixels[i]);
    out.pixels[i] = detail::quantize_u8(v);
  }
  return out;
}

Image enhance_external(const std::filesystem::path& img_path,
                       const std::filesystem::path& program) {
  if (!std::filesystem::exists(program))
    throw std::runtime_error("enhancer program not found: " + program.string());
  const Image input = load_image(img_path);

  static std::atomic<std::uint64_t> counter{0};
  const auto out_path = std::filesystem::temp_directory_path() /
                        ("antithetic_enhance_" + std::to_string(counter.fetch_add(1)) + "_" +
                         img_path.filename().string());
  const std::string cmd =
      "\"" + program.string() + "\" \"" + img_path.string() + "\" \"" + out_path.string() + "\"";
  const int status = std::system(cmd.c_str());
  if (status != 0) {
    std::filesystem::remove(out_path);
    throw std::runtime_error("enhancer program failed (status " + std::to_string(status) +
                             "): " + cmd);
  }
  Image enhanced = load_image(out_path);
  std::filesystem::remove(out_path);
  if (enhanced.height != input.height || enhanced.width != input.width)
    throw std::runtime_error("enhancer wrote " + std::to_string(enhanced.width) + "x" +
                             std::to_string(enhanced.height) + ", expected " +
                             std::to_string(input.width) + "x" + std::to_string(input.height));
  return enhanced;
}

Manifest generate_antithetical(const Manifest& manifest, const AugmentConfig& cfg,
                               const std::filesystem::path& out_dir) {
  check_config(cfg);
  std::filesystem::create_directories(out_dir);

  Manifest out;
  out.root = out_dir;
  out.records.reserve(manifest.records.size());
  const Rng base(cfg.seed);

  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const SampleRecord& src = manifest.records[i];
    if (!src.partition)
      throw std::runtime_error("record '" + src.path + "' has no partition label");

    const auto src_path = resolve_path(manifest, src);
    Image twin;
    PartitionLabel twin_bin;
    if (*src.partition == PartitionLabel::HR) {
      Rng rng = base.fork(i);
      twin = downsample_counterpart(load_image(src_path), rng, cfg);
      twin_bin = PartitionLabel::LR;
    } else {
      twin = cfg.enhancer == EnhancerKind::External
                 ? enhance_external(src_path, cfg.external_program)
                 : enhance_classical(load_image(src_path));
      twin_bin = PartitionLabel::HR;
    }

    SampleRecord rec;
    rec.path = "anti_" + flatten_path(src.path);
    rec.identity = src.identity;
    rec.camera = src.camera;
    rec.partition = twin_bin;
    rec.origin = Origin::Antithetical;
    rec.counterpart = src.path;
    save_image(twin, out.root / rec.path);
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace antithetic
