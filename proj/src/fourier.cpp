#include "antithetic/fourier.hpp"

#include <numbers>
#include <stdexcept>

namespace antithetic {

namespace detail {

namespace {

std::vector<std::complex<double>> twiddles(int n) {
  std::vector<std::complex<double>> tw(n);
  for (int k = 0; k < n; ++k)
    tw[k] = std::polar(1.0, -2.0 * std::numbers::pi * k / n);
  return tw;
}

}  // namespace

std::vector<std::complex<double>> dft2d(const std::vector<double>& field, int h, int w) {
  if (h < 1 || w < 1 || field.size() != static_cast<std::size_t>(h) * w)
    throw std::invalid_argument("dft2d: field size does not match dimensions");
  const auto twh = twiddles(h);
  const auto tww = twiddles(w);

  // Transform rows, then columns. Twiddle indices are exact (k mod n), so the
  // result matches the direct double-sum definition to rounding error.
  std::vector<std::complex<double>> rows(field.size());
  for (int x = 0; x < h; ++x) {
    for (int v = 0; v < w; ++v) {
      std::complex<double> acc = 0.0;
      for (int y = 0; y < w; ++y)
        acc += field[static_cast<std::size_t>(x) * w + y] *
               tww[static_cast<std::size_t>(v) * y % w];
      rows[static_cast<std::size_t>(x) * w + v] = acc;
    }
  }
  std::vector<std::complex<double>> out(field.size());
  for (int v = 0; v < w; ++v) {
    for (int u = 0; u < h; ++u) {
      std::complex<double> acc = 0.0;
      for (int x = 0; x < h; ++x)
        acc += rows[static_cast<std::size_t>(x) * w + v] *
               twh[static_cast<std::size_t>(u) * x % h];
      out[static_cast<std::size_t>(u) * w + v] = acc;
    }
  }
  return out;
}

}  // namespace detail

MagnitudeGrid dft2d_magnitude(const Image& img) {
  if (img.channels != 1)
    throw std::invalid_argument("dft2d_magnitude expects a single-channel image");
  std::vector<double> field(img.pixels.begin(), img.pixels.end());
  const auto spectrum = detail::dft2d(field, img.height, img.width);
  MagnitudeGrid grid{img.height, img.width, std::vector<double>(spectrum.size())};
  for (std::size_t i = 0; i < spectrum.size(); ++i) grid.values[i] = std::abs(spectrum[i]);
  return grid;
}

MagnitudeGrid center_shift(const MagnitudeGrid& grid) {
  MagnitudeGrid out{grid.height, grid.width, std::vector<double>(grid.values.size())};
  const int sh = grid.height / 2;
  const int sw = grid.width / 2;
  for (int u = 0; u < grid.height; ++u) {
    const int uu = (u + sh) % grid.height;
    for (int v = 0; v < grid.width; ++v) {
      const int vv = (v + sw) % grid.width;
      out.values[static_cast<std::size_t>(uu) * grid.width + vv] = grid.at(u, v);
    }
  }
  return out;
}

}  // namespace antithetic
