#include <doctest.h>

#include <cmath>

#include "antithetic/pnm.hpp"
#include "antithetic/rng.hpp"
#include "antithetic/sharpness.hpp"
#include "testutil.hpp"

using namespace antithetic;

namespace {

Image random_image(Rng& rng, int h, int w) {
  Image img(h, w, 1);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return img;
}

// Checkerboard with per-pixel jitter. A noiseless board has only two
// populated spectrum bins (DC and Nyquist), which makes the count metric
// degenerate; the jitter gives it a generic, fully populated spectrum like
// any real texture.
Image textured_checkerboard(int h, int w, std::uint64_t seed = 0) {
  Rng rng(seed);
  Image img(h, w, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int base = ((y + x) % 2) ? 210 : 45;
      img.at(y, x) = static_cast<std::uint8_t>(base + rng.uniform_int(-20, 20));
    }
  return img;
}

}  // namespace

TEST_CASE("sharpness") {
  SUBCASE("constant image scores 1/(h*w), only DC survives") {
    CHECK(sharpness(Image(8, 8, 1, 200)).value == doctest::Approx(1.0 / 64).epsilon(1e-15));
    CHECK(sharpness(Image(4, 16, 1, 3)).value == doctest::Approx(1.0 / 64).epsilon(1e-15));
  }
  SUBCASE("2x2 example: magnitudes 10,2,4,0 with threshold 0.01 give 3/4") {
    const Image img(2, 2, 1, std::vector<std::uint8_t>{1, 2, 3, 4});
    CHECK(sharpness(img).value == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("black image is rejected") {
    CHECK_THROWS_AS(sharpness(Image(4, 4, 1, 0)), std::runtime_error);
  }
  SUBCASE("intensity scaling leaves the score unchanged (float pipeline)") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
      MagnitudeGrid grid{6, 6, std::vector<double>(36)};
      for (auto& v : grid.values) v = rng.uniform(0.0, 500.0);
      grid.values[0] += 500.0;  // ensure a nonzero peak
      MagnitudeGrid scaled = grid;
      const double c = rng.uniform(0.1, 9.0);
      for (auto& v : scaled.values) v *= c;
      CHECK(sharpness_from_magnitudes(grid).value ==
            sharpness_from_magnitudes(scaled).value);
    }
  }
  SUBCASE("counting over F or the centered spectrum is identical") {
    Rng rng(22);
    for (int trial = 0; trial < 100; ++trial) {
      const Image img = random_image(rng, 2 + static_cast<int>(rng.uniform_int(0, 10)),
                                     2 + static_cast<int>(rng.uniform_int(0, 10)));
      const MagnitudeGrid grid = dft2d_magnitude(img);
      CHECK(sharpness_from_magnitudes(grid).value ==
            sharpness_from_magnitudes(center_shift(grid)).value);
    }
  }
  SUBCASE("monotone under increasing blur") {
    Rng rng(27);
    for (std::uint64_t trial = 0; trial < 8; ++trial) {
      const Image img = textured_checkerboard(24, 16, trial);
      const double s0 = sharpness(img).value;
      const double s1 = sharpness(gaussian_blur(img, 0.8)).value;
      const double s2 = sharpness(gaussian_blur(img, 1.6)).value;
      CHECK(s1 <= s0);
      CHECK(s2 <= s1);
      CHECK(s2 < s0);
    }
    for (int trial = 0; trial < 8; ++trial) {
      const Image img = random_image(rng, 16, 16);
      const double s1 = sharpness(gaussian_blur(img, 0.7)).value;
      const double s2 = sharpness(gaussian_blur(img, 1.4)).value;
      CHECK(s2 <= s1);
    }
  }
  SUBCASE("3-channel input goes through the grayscale path") {
    Image img(4, 4, 3);
    Rng rng(23);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    CHECK(sharpness(img).value == sharpness(to_grayscale(img)).value);
  }
}

TEST_CASE("score_manifest") {
  testutil::TempDir dir("score");
  SUBCASE("empty manifest stays empty") {
    Manifest m;
    m.root = dir.path();
    CHECK(score_manifest(m).records.empty());
  }
  SUBCASE("scores every record in order, any thread count") {
    Manifest m;
    m.root = dir.path();
    Rng rng(24);
    for (int i = 0; i < 12; ++i) {
      SampleRecord r;
      r.path = "img" + std::to_string(i) + ".pgm";
      r.identity = i;
      save_image(i < 2 ? Image(8, 8, 1, 50) : random_image(rng, 8, 8), dir / r.path);
      m.records.push_back(r);
    }
    const Manifest serial = score_manifest(m, 1);
    CHECK(serial.records.size() == 12);
    CHECK(*serial.records[0].sharpness == doctest::Approx(1.0 / 64).epsilon(1e-15));
    CHECK(*serial.records[1].sharpness == doctest::Approx(1.0 / 64).epsilon(1e-15));
    const Manifest threaded = score_manifest(m, 4);
    for (std::size_t i = 0; i < 12; ++i)
      CHECK(*serial.records[i].sharpness == *threaded.records[i].sharpness);
  }
  SUBCASE("unreadable image names the offending path") {
    Manifest m;
    m.root = dir.path();
    SampleRecord r;
    r.path = "gone.pgm";
    m.records.push_back(r);
    CHECK_THROWS_WITH_AS(score_manifest(m), doctest::Contains("gone.pgm"), std::runtime_error);
  }
  SUBCASE("blurred images score lower on average") {
    Manifest crisp, blurred;
    crisp.root = blurred.root = dir.path();
    Rng rng(25);
    for (int i = 0; i < 6; ++i) {
      const Image img = random_image(rng, 16, 16);
      SampleRecord a, b;
      a.path = "crisp" + std::to_string(i) + ".pgm";
      b.path = "blur" + std::to_string(i) + ".pgm";
      save_image(img, dir / a.path);
      save_image(gaussian_blur(img, 1.5), dir / b.path);
      crisp.records.push_back(a);
      blurred.records.push_back(b);
    }
    auto mean = [](const Manifest& m) {
      double sum = 0.0;
      for (const auto& r : m.records) sum += *r.sharpness;
      return sum / m.records.size();
    };
    CHECK(mean(score_manifest(blurred)) < mean(score_manifest(crisp)));
  }
}

TEST_CASE("split_threshold") {
  CHECK(split_threshold(std::vector<double>{0.2, 0.4}) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(split_threshold(std::vector<double>{0.7}) == 0.7);
  CHECK_THROWS_AS(split_threshold(std::vector<double>{}), std::runtime_error);
  SUBCASE("mean of uniform draws concentrates") {
    Rng rng(26);
    std::vector<double> scores(1000);
    for (auto& s : scores) s = rng.uniform();
    const double t = split_threshold(scores);
    CHECK(t > 0.45);
    CHECK(t < 0.55);
  }
}

TEST_CASE("partition") {
  Manifest m;
  SampleRecord a, b;
  a.path = "a.pgm";
  a.sharpness = 0.1;
  b.path = "b.pgm";
  b.sharpness = 0.5;
  m.records = {a, b};
  SUBCASE("compares against the threshold, ties to LR") {
    const Manifest out = partition(m, 0.3);
    CHECK(*out.records[0].partition == PartitionLabel::LR);
    CHECK(*out.records[1].partition == PartitionLabel::HR);
    const Manifest tied = partition(m, 0.5);
    CHECK(*tied.records[1].partition == PartitionLabel::LR);
  }
  SUBCASE("partition is exhaustive and idempotent") {
    const Manifest once = partition(m, 0.3);
    int hr = 0, lr = 0;
    for (const auto& r : once.records) (*r.partition == PartitionLabel::HR ? hr : lr)++;
    CHECK(hr + lr == 2);
    const Manifest twice = partition(once, 0.3);
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(*twice.records[i].partition == *once.records[i].partition);
  }
  SUBCASE("unscored record is rejected") {
    m.records[1].sharpness.reset();
    CHECK_THROWS_WITH_AS(partition(m, 0.3), doctest::Contains("b.pgm"), std::runtime_error);
  }
}
