#include "antithetic/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace antithetic {

namespace {

void check_dims(int h, int w, int c) {
  if (h < 1 || w < 1) throw std::invalid_argument("image dimensions must be positive");
  if (c != 1 && c != 3) throw std::invalid_argument("image must have 1 or 3 channels");
}

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

// Keys cubic convolution kernel, a = -0.5 (Catmull-Rom).
double cubic_weight(double t) {
  const double a = -0.5;
  const double at = std::abs(t);
  if (at <= 1.0) return ((a + 2.0) * at - (a + 3.0)) * at * at + 1.0;
  if (at < 2.0) return ((a * at - 5.0 * a) * at + 8.0 * a) * at - 4.0 * a;
  return 0.0;
}

double sample_channel(const Image& img, double yin, double xin, int c, ResampleFilter filter) {
  switch (filter) {
    case ResampleFilter::Nearest: {
      const int y = clamp_index(static_cast<int>(std::floor(yin + 0.5)), img.height);
      const int x = clamp_index(static_cast<int>(std::floor(xin + 0.5)), img.width);
      return img.at(y, x, c);
    }
    case ResampleFilter::Bilinear: {
      const int y0 = static_cast<int>(std::floor(yin));
      const int x0 = static_cast<int>(std::floor(xin));
      const double fy = yin - y0;
      const double fx = xin - x0;
      const int ya = clamp_index(y0, img.height);
      const int yb = clamp_index(y0 + 1, img.height);
      const int xa = clamp_index(x0, img.width);
      const int xb = clamp_index(x0 + 1, img.width);
      return (1.0 - fy) * ((1.0 - fx) * img.at(ya, xa, c) + fx * img.at(ya, xb, c)) +
             fy * ((1.0 - fx) * img.at(yb, xa, c) + fx * img.at(yb, xb, c));
    }
    case ResampleFilter::Bicubic: {
      const int y0 = static_cast<int>(std::floor(yin));
      const int x0 = static_cast<int>(std::floor(xin));
      double acc = 0.0;
      for (int dy = -1; dy <= 2; ++dy) {
        const double wy = cubic_weight(yin - (y0 + dy));
        if (wy == 0.0) continue;
        const int ys = clamp_index(y0 + dy, img.height);
        for (int dx = -1; dx <= 2; ++dx) {
          const double wx = cubic_weight(xin - (x0 + dx));
          if (wx == 0.0) continue;
          acc += wy * wx * img.at(ys, clamp_index(x0 + dx, img.width), c);
        }
      }
      return acc;
    }
  }
  return 0.0;
}

}  // namespace

Image::Image(int height, int width, int channels, std::uint8_t fill)
    : height(height), width(width), channels(channels) {
  check_dims(height, width, channels);
  pixels.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Image::Image(int height, int width, int channels, std::vector<std::uint8_t> data)
    : height(height), width(width), channels(channels), pixels(std::move(data)) {
  check_dims(height, width, channels);
  if (pixels.size() != static_cast<std::size_t>(height) * width * channels)
    throw std::invalid_argument("pixel buffer size does not match dimensions");
}

std::uint8_t detail::quantize_u8(double v) {
  const double r = std::floor(v + 0.5);
  if (r <= 0.0) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

Image to_grayscale(const Image& img) {
  if (img.channels == 1) return img;
  Image out(img.height, img.width, 1);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::size_t i = img.index(y, x, 0);
      const double luma = 0.299 * img.pixels[i] + 0.587 * img.pixels[i + 1] +
                          0.114 * img.pixels[i + 2];
      out.at(y, x) = detail::quantize_u8(luma);
    }
  }
  return out;
}

Image resize(const Image& img, int out_height, int out_width, ResampleFilter filter) {
  if (out_height < 1 || out_width < 1)
    throw std::invalid_argument("resize target must be positive");
  Image out(out_height, out_width, img.channels);
  const double sy = static_cast<double>(img.height) / out_height;
  const double sx = static_cast<double>(img.width) / out_width;
  for (int y = 0; y < out_height; ++y) {
    const double yin = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < out_width; ++x) {
      const double xin = (x + 0.5) * sx - 0.5;
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = detail::quantize_u8(sample_channel(img, yin, xin, c, filter));
    }
  }
  return out;
}

std::vector<double> detail::gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-static_cast<double>(i) * i / (2.0 * sigma * sigma));
    sum += taps[i + radius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

std::vector<double> detail::convolve_separable(const std::vector<double>& field, int h, int w,
                                               const std::vector<double>& kernel) {
  const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
  std::vector<double> tmp(field.size());
  std::vector<double> out(field.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * field[static_cast<std::size_t>(y) * w + clamp_index(x + k, w)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * tmp[static_cast<std::size_t>(clamp_index(y + k, h)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

Image gaussian_blur(const Image& img, double sigma) {
  const auto kernel = detail::gaussian_kernel(sigma);
  Image out(img.height, img.width, img.channels);
  const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
  std::vector<double> field(plane);
  for (int c = 0; c < img.channels; ++c) {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        field[static_cast<std::size_t>(y) * img.width + x] = img.at(y, x, c);
    const auto blurred = detail::convolve_separable(field, img.height, img.width, kernel);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(y, x, c) = detail::quantize_u8(blurred[static_cast<std::size_t>(y) * img.width + x]);
  }
  return out;
}

Image hflip(const Image& img) {
  Image out(img.height, img.width, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
  return out;
}

Image random_erase(const Image& img, Rng& rng) {
  if (!rng.bernoulli(0.5)) return img;
  Image out = img;
  // Retry until the sampled rectangle fits; on pathologically small images
  // give up and return the input unchanged.
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double area = rng.uniform(0.02, 0.4) * img.height * img.width;
    const double aspect = rng.uniform(0.3, 3.3);
    const int eh = static_cast<int>(std::llround(std::sqrt(area * aspect)));
    const int ew = static_cast<int>(std::llround(std::sqrt(area / aspect)));
    if (eh < 1 || ew < 1 || eh > img.height || ew > img.width) continue;
    const int y0 = static_cast<int>(rng.uniform_int(0, img.height - eh));
    const int x0 = static_cast<int>(rng.uniform_int(0, img.width - ew));
    for (int y = y0; y < y0 + eh; ++y)
      for (int x = x0; x < x0 + ew; ++x)
        for (int c = 0; c < img.channels; ++c)
          out.at(y, x, c) = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    return out;
  }
  return out;
}

}  // namespace antithetic
