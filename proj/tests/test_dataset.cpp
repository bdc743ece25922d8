#include <doctest.h>

#include <fstream>
#include <set>

#include "antithetic/antithetical.hpp"
#include "antithetic/pnm.hpp"
#include "antithetic/sharpness.hpp"
#include "antithetic/synth.hpp"
#include "testutil.hpp"

using namespace antithetic;

namespace {

// Jittered checkerboard: strong high-frequency content over a generic,
// fully populated spectrum (a noiseless board has only two nonzero bins).
Image checkerboard(int h, int w, std::uint64_t seed = 1) {
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

TEST_CASE("downsample_counterpart") {
  const AugmentConfig cfg;
  SUBCASE("preserves dimensions and is deterministic per seed") {
    const Image img = checkerboard(20, 12);
    Rng a(42), b(42);
    const Image x = downsample_counterpart(img, a, cfg);
    const Image y = downsample_counterpart(img, b, cfg);
    CHECK(x.height == 20);
    CHECK(x.width == 12);
    CHECK(x == y);
  }
  SUBCASE("strictly reduces the sharpness of a checkerboard") {
    const Image img = checkerboard(64, 32);
    Rng rng(43);
    const Image soft = downsample_counterpart(img, rng, cfg);
    CHECK(sharpness(soft).value < sharpness(img).value);
  }
  SUBCASE("factor draws follow U(low, high)") {
    Rng rng(44);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double u = draw_downsample_factor(rng, cfg);
      CHECK(u >= 0.5);
      CHECK(u <= 0.8);
      sum += u;
    }
    const double mean = sum / 10000;
    CHECK(mean > 0.64);
    CHECK(mean < 0.66);
  }
  SUBCASE("tiny images are rejected") {
    Rng rng(45);
    CHECK_THROWS_AS(downsample_counterpart(Image(1, 5, 1, 9), rng, cfg),
                    std::invalid_argument);
  }
  SUBCASE("bad factor range is rejected") {
    AugmentConfig bad;
    bad.factor_low = 0.9;
    bad.factor_high = 0.4;
    Rng rng(46);
    CHECK_THROWS_AS(downsample_counterpart(checkerboard(8, 8), rng, bad),
                    std::invalid_argument);
  }
}

TEST_CASE("enhance_classical") {
  SUBCASE("constant image is unchanged") {
    const Image img(10, 10, 1, 130);
    CHECK(enhance_classical(img) == img);
  }
  SUBCASE("raises the sharpness of a blurred checkerboard") {
    const Image blurred = gaussian_blur(checkerboard(48, 24), 1.5);
    const Image enhanced = enhance_classical(blurred);
    CHECK(sharpness(enhanced).value > sharpness(blurred).value);
    CHECK(enhanced.height == blurred.height);
    CHECK(enhanced.width == blurred.width);
  }
}

TEST_CASE("enhance_external") {
  testutil::TempDir dir("ext");
  const auto input = dir / "in.pgm";
  save_image(checkerboard(8, 6), input);

  auto write_script = [&](const std::string& name, const std::string& body) {
    const auto p = dir / name;
    std::ofstream out(p);
    out << "#!/bin/sh\n" << body;
    out.close();
    std::filesystem::permissions(p, std::filesystem::perms::owner_all);
    return p;
  };

  SUBCASE("identity program round-trips the image") {
    const auto prog = write_script("copy.sh", "cp \"$1\" \"$2\"\n");
    CHECK(enhance_external(input, prog) == load_image(input));
  }
  SUBCASE("wrong dimensions are rejected") {
    // writes a 1x1 image regardless of input
    const auto prog = write_script("bad.sh", "printf 'P5\\n1 1\\n255\\nA' > \"$2\"\n");
    CHECK_THROWS_WITH_AS(enhance_external(input, prog), doctest::Contains("expected"),
                         std::runtime_error);
  }
  SUBCASE("failing program is reported") {
    const auto prog = write_script("fail.sh", "exit 3\n");
    CHECK_THROWS_WITH_AS(enhance_external(input, prog), doctest::Contains("failed"),
                         std::runtime_error);
  }
  SUBCASE("missing program is reported") {
    CHECK_THROWS_AS(enhance_external(input, dir / "nope.sh"), std::runtime_error);
  }
}

TEST_CASE("generate_antithetical") {
  testutil::TempDir dir("anti");
  const auto src_dir = dir / "orig";
  std::filesystem::create_directories(src_dir);

  Manifest m;
  m.root = src_dir;
  for (int i = 0; i < 6; ++i) {
    SampleRecord r;
    r.path = "img" + std::to_string(i) + ".pgm";
    r.identity = i / 2;
    r.camera = i % 2;
    const Image img = checkerboard(32, 16);
    save_image(i % 2 ? gaussian_blur(img, 1.8) : img, src_dir / r.path);
    m.records.push_back(r);
  }
  const Manifest scored = score_manifest(m);
  std::vector<double> values;
  for (const auto& r : scored.records) values.push_back(*r.sharpness);
  const Manifest labeled = partition(scored, split_threshold(values));

  AugmentConfig cfg;
  cfg.seed = 77;
  const auto out_dir = dir / "anti_out";
  const Manifest anti = generate_antithetical(labeled, cfg, out_dir);

  SUBCASE("one twin per record, bins flipped, labels copied") {
    REQUIRE(anti.records.size() == labeled.records.size());
    int hr_in = 0, lr_out = 0;
    for (std::size_t i = 0; i < anti.records.size(); ++i) {
      const auto& src = labeled.records[i];
      const auto& twin = anti.records[i];
      CHECK(twin.identity == src.identity);
      CHECK(twin.camera == src.camera);
      CHECK(twin.origin == Origin::Antithetical);
      CHECK(*twin.counterpart == src.path);
      CHECK(*twin.partition != *src.partition);
      if (*src.partition == PartitionLabel::HR) ++hr_in;
      if (*twin.partition == PartitionLabel::LR) ++lr_out;
    }
    CHECK(hr_in == lr_out);
  }
  SUBCASE("counterpart references resolve to original records") {
    std::set<std::string> originals;
    for (const auto& r : labeled.records) originals.insert(r.path);
    for (const auto& r : anti.records) CHECK(originals.count(*r.counterpart) == 1);
  }
  SUBCASE("deterministic per (manifest, seed)") {
    const auto again_dir = dir / "anti_again";
    const Manifest again = generate_antithetical(labeled, cfg, again_dir);
    for (std::size_t i = 0; i < anti.records.size(); ++i) {
      CHECK(anti.records[i].path == again.records[i].path);
      CHECK(load_image(resolve_path(anti, anti.records[i])) ==
            load_image(resolve_path(again, again.records[i])));
    }
  }
  SUBCASE("empty manifest produces an empty set") {
    Manifest empty;
    empty.root = src_dir;
    CHECK(generate_antithetical(empty, cfg, dir / "empty_out").records.empty());
  }
  SUBCASE("unpartitioned record is rejected") {
    Manifest bad = labeled;
    bad.records[0].partition.reset();
    CHECK_THROWS_AS(generate_antithetical(bad, cfg, dir / "bad_out"), std::runtime_error);
  }
}

TEST_CASE("synth_corpus") {
  testutil::TempDir dir("synth");
  SynthConfig cfg;
  cfg.identities = 5;
  cfg.images_per_identity = 6;
  cfg.height = 32;
  cfg.width = 16;
  cfg.blur_fraction = 0.5;
  cfg.seed = 123;

  const Manifest corpus = synth_corpus(cfg, dir / "c1");
  SUBCASE("counts and identity coverage") {
    CHECK(corpus.records.size() == 30);
    std::set<int> ids;
    for (const auto& r : corpus.records) ids.insert(r.identity);
    CHECK(ids.size() == 5);
    std::set<int> cams;
    for (const auto& r : corpus.records) cams.insert(r.camera);
    CHECK(cams == std::set<int>{0, 1});
  }
  SUBCASE("same seed rebuilds byte-identical images") {
    const Manifest again = synth_corpus(cfg, dir / "c2");
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
      CHECK(corpus.records[i].path == again.records[i].path);
      CHECK(load_image(resolve_path(corpus, corpus.records[i])) ==
            load_image(resolve_path(again, again.records[i])));
    }
  }
  SUBCASE("different seeds differ") {
    SynthConfig other = cfg;
    other.seed = 124;
    const Manifest different = synth_corpus(other, dir / "c3");
    bool any_diff = false;
    for (std::size_t i = 0; i < corpus.records.size() && !any_diff; ++i)
      any_diff = !(load_image(resolve_path(corpus, corpus.records[i])) ==
                   load_image(resolve_path(different, different.records[i])));
    CHECK(any_diff);
  }
  SUBCASE("mean-threshold partition recovers the blur split") {
    SynthConfig big = cfg;
    big.identities = 10;
    big.images_per_identity = 10;
    const Manifest scored = score_manifest(synth_corpus(big, dir / "c4"));
    std::vector<double> values;
    for (const auto& r : scored.records) values.push_back(*r.sharpness);
    const Manifest labeled = partition(scored, split_threshold(values));
    int agree = 0;
    for (const auto& r : labeled.records) {
      const bool truly_blurred = r.path.find("_blur") != std::string::npos;
      const bool binned_lr = *r.partition == PartitionLabel::LR;
      if (truly_blurred == binned_lr) ++agree;
    }
    CHECK(agree >= static_cast<int>(0.9 * labeled.records.size()));
  }
  SUBCASE("invalid configs are rejected") {
    SynthConfig bad = cfg;
    bad.identities = 0;
    CHECK_THROWS_AS(synth_corpus(bad, dir / "bad"), std::invalid_argument);
    bad = cfg;
    bad.blur_fraction = 1.5;
    CHECK_THROWS_AS(synth_corpus(bad, dir / "bad2"), std::invalid_argument);
  }
}
