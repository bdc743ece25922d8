#pragma once

#include <cstdint>
#include <vector>

#include "antithetic/rng.hpp"

namespace antithetic {

enum class ResampleFilter { Nearest, Bilinear, Bicubic };

// 8-bit image, row-major, channels interleaved. channels is 1 (gray) or 3 (RGB).
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int height, int width, int channels, std::uint8_t fill = 0);
  Image(int height, int width, int channels, std::vector<std::uint8_t> data);

  std::size_t index(int y, int x, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t at(int y, int x, int c = 0) const { return pixels[index(y, x, c)]; }
  std::uint8_t& at(int y, int x, int c = 0) { return pixels[index(y, x, c)]; }

  bool operator==(const Image&) const = default;
};

/// 3-channel input is collapsed with luma weights 0.299/0.587/0.114, rounded
/// half up; 1-channel input is returned unchanged.
Image to_grayscale(const Image& img);

/// Resample to (out_height, out_width). Source coordinates use half-pixel
/// centers, x_in = (i + 0.5) * in/out - 0.5, with edge clamping. Resizing to
/// the same dimensions with the bilinear filter is the identity.
Image resize(const Image& img, int out_height, int out_width, ResampleFilter filter);

/// Separable Gaussian with kernel radius ceil(3*sigma), taps normalized to
/// sum 1, replicate padding. Constant images are fixed points.
Image gaussian_blur(const Image& img, double sigma);

/// Reverses column order per row and channel; an involution.
Image hflip(const Image& img);

/// With probability 1/2 fills a rectangle of area ratio U(0.02, 0.4) and
/// aspect ratio U(0.3, 3.3) with i.i.d. uniform intensities; otherwise the
/// image is returned unchanged. Dimensions are always preserved.
Image random_erase(const Image& img, Rng& rng);

namespace detail {

/// Clamp to [0, 255] and round half up.
std::uint8_t quantize_u8(double v);

/// Normalized 1-D Gaussian taps for radius ceil(3*sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable convolution of a single-channel double field, replicate padding.
std::vector<double> convolve_separable(const std::vector<double>& field, int h, int w,
                                       const std::vector<double>& kernel);

}  // namespace detail
}  // namespace antithetic
