#pragma once

#include <complex>
#include <vector>

#include "antithetic/image.hpp"

namespace antithetic {

// DFT magnitudes |F(u,v)|, row-major, u indexes rows (height axis).
struct MagnitudeGrid {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int u, int v) const { return values[static_cast<std::size_t>(u) * width + v]; }
};

/// F(u,v) = sum_{x,y} I(x,y) exp(-2*pi*i*(u*x/h + v*y/w)), evaluated row-column
/// with precomputed twiddle factors. The input must be single channel.
MagnitudeGrid dft2d_magnitude(const Image& img);

/// Moves entry (u,v) to ((u + h/2) mod h, (v + w/2) mod w); a pure permutation
/// of the values, their multiset is unchanged.
MagnitudeGrid center_shift(const MagnitudeGrid& grid);

namespace detail {

/// Complex spectrum of a real double field, same transform convention.
std::vector<std::complex<double>> dft2d(const std::vector<double>& field, int h, int w);

}  // namespace detail
}  // namespace antithetic
