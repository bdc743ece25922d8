#pragma once

#include <filesystem>

#include "antithetic/image.hpp"

namespace antithetic {

/// Reads a binary PGM (P5) or PPM (P6) file with maxval 255. `#` comments in
/// the header are skipped; exactly one whitespace byte separates the maxval
/// from the payload.
Image load_image(const std::filesystem::path& path);

/// Writes P5 for 1-channel images, P6 for 3-channel. load_image(save_image(x))
/// recovers x byte for byte.
void save_image(const Image& img, const std::filesystem::path& path);

}  // namespace antithetic
