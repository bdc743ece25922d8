#include "antithetic/sharpness.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

#include "antithetic/pnm.hpp"

namespace antithetic {

SharpnessScore sharpness_from_magnitudes(const MagnitudeGrid& grid) {
  const double tau = *std::max_element(grid.values.begin(), grid.values.end());
  if (!(tau > 0.0))
    throw std::runtime_error("sharpness is undefined for an all-black image");
  const double threshold = tau / 1000.0;
  std::size_t count = 0;
  for (double v : grid.values)
    if (v >= threshold) ++count;
  return {static_cast<double>(count) / grid.values.size()};
}

SharpnessScore sharpness(const Image& img) {
  const Image gray = img.channels == 3 ? to_grayscale(img) : img;
  return sharpness_from_magnitudes(dft2d_magnitude(gray));
}

Manifest score_manifest(const Manifest& manifest, int threads) {
  Manifest out = manifest;
  const std::size_t n = out.records.size();
  if (n == 0) return out;

  std::vector<std::string> errors(n);
  auto worker = [&](std::size_t start, std::size_t stride) {
    for (std::size_t i = start; i < n; i += stride) {
      const auto file = resolve_path(manifest, manifest.records[i]);
      try {
        out.records[i].sharpness = sharpness(load_image(file)).value;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  const int nthreads = std::clamp(threads, 1, static_cast<int>(n));
  if (nthreads <= 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t, nthreads);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!errors[i].empty())
      throw std::runtime_error("cannot score '" + manifest.records[i].path + "': " + errors[i]);
  return out;
}

double split_threshold(std::span<const double> scores) {
  if (scores.empty()) throw std::runtime_error("split_threshold needs at least one score");
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

Manifest partition(const Manifest& manifest, double threshold) {
  Manifest out = manifest;
  for (SampleRecord& r : out.records) {
    if (!r.sharpness)
      throw std::runtime_error("record '" + r.path + "' has no sharpness score");
    r.partition = *r.sharpness > threshold ? PartitionLabel::HR : PartitionLabel::LR;
  }
  return out;
}

}  // namespace antithetic
