#pragma once

#include <filesystem>

#include "antithetic/image.hpp"
#include "antithetic/manifest.hpp"
#include "antithetic/rng.hpp"

namespace antithetic {

enum class EnhancerKind { Classical, External };

struct AugmentConfig {
  double factor_low = 0.5;
  double factor_high = 0.8;
  EnhancerKind enhancer = EnhancerKind::Classical;
  std::filesystem::path external_program;  // used when enhancer == External
  std::uint64_t seed = 0;
};

/// The downsampling factor u ~ U(factor_low, factor_high).
double draw_downsample_factor(Rng& rng, const AugmentConfig& cfg);

/// Downsample to (round(h*u), round(w*u)) with the bilinear filter, then back
/// to the original size. Output dimensions always match the input.
Image downsample_counterpart(const Image& img, Rng& rng, const AugmentConfig& cfg);

/// Unsharp masking: clamp(I + 1.5 * (I - gaussian_blur(I, 1.0))). Constant
/// images pass through unchanged.
Image enhance_classical(const Image& img);

/// Runs `program <input-path> <output-path>` and loads the produced image.
/// The program must exit 0 and write an image of identical dimensions.
Image enhance_external(const std::filesystem::path& img_path,
                       const std::filesystem::path& program);

/// Emits a resolution-flipped twin for every record: HR records get a random
/// downsample, LR records an enhanced version. Identity and camera labels are
/// copied; each output record points back at its counterpart. Every input
/// record must carry a partition label. Deterministic per (manifest, seed):
/// each record uses the child stream rng(seed).fork(index).
Manifest generate_antithetical(const Manifest& manifest, const AugmentConfig& cfg,
                               const std::filesystem::path& out_dir);

}  // namespace antithetic
