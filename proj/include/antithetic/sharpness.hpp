#pragma once

#include <span>

#include "antithetic/fourier.hpp"
#include "antithetic/image.hpp"
#include "antithetic/manifest.hpp"

namespace antithetic {

// Fraction of frequency components at or above one thousandth of the peak
// magnitude. Always in (0, 1]: the peak entry counts itself.
struct SharpnessScore {
  double value = 0.0;
};

/// Sharpness of an image. 3-channel input is converted to grayscale first.
/// Throws for all-black images, whose peak magnitude is zero.
SharpnessScore sharpness(const Image& img);

/// Same score computed from an existing magnitude grid. Counting before or
/// after center_shift gives the same result since the shift only permutes
/// entries.
SharpnessScore sharpness_from_magnitudes(const MagnitudeGrid& grid);

/// Fills in the sharpness of every record, preserving order. `threads` > 1
/// fans out across images; the output is identical regardless of thread
/// count. Unreadable images raise an error naming the offending path.
Manifest score_manifest(const Manifest& manifest, int threads = 1);

/// Arithmetic mean. Errors on an empty sequence.
double split_threshold(std::span<const double> scores);

/// Labels records HR when score > threshold, LR otherwise (ties go to LR).
/// Every record must already carry a sharpness value.
Manifest partition(const Manifest& manifest, double threshold);

}  // namespace antithetic
