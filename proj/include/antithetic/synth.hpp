#pragma once

#include <filesystem>

#include "antithetic/manifest.hpp"

namespace antithetic {

// Desk-scale procedural identity corpus. Each identity owns a fixed pattern
// of rectangles and stripes over a textured background; each shot jitters
// translation, brightness, and pixel noise. A blur_fraction subset of every
// identity's shots is Gaussian-blurred (sigma ~ U(1.0, 2.5)) so the corpus
// carries a two-resolution structure. Cameras 0/1 alternate by shot index.
struct SynthConfig {
  int identities = 0;
  int images_per_identity = 0;
  int height = 64;
  int width = 32;
  double blur_fraction = 0.5;
  std::uint64_t seed = 0;
};

/// Writes one PGM per shot into out_dir and returns the manifest. Fully
/// deterministic per seed, byte for byte. Filenames record the ground truth:
/// id<k>_<j>_c<camera>_<crisp|blur>.pgm.
Manifest synth_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace antithetic
