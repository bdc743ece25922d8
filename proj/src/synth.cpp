#include "antithetic/synth.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "antithetic/image.hpp"
#include "antithetic/pnm.hpp"
#include "antithetic/rng.hpp"

namespace antithetic {

namespace {

struct Stripe {
  bool vertical = false;
  int period = 4;
  int phase = 0;
  double amplitude = 0.0;
};

struct Rect {
  int cy = 0, cx = 0, half_h = 0, half_w = 0;
  double delta = 0.0;
};

// Per-identity appearance, sampled once per identity.
struct Appearance {
  double base = 100.0;
  double gradient = 0.0;
  std::vector<Stripe> stripes;
  std::vector<Rect> rects;
};

Appearance sample_appearance(Rng& rng, int h, int w) {
  Appearance a;
  a.base = rng.uniform(70.0, 140.0);
  a.gradient = rng.uniform(-40.0, 40.0);
  const int n_stripes = static_cast<int>(rng.uniform_int(1, 2));
  for (int s = 0; s < n_stripes; ++s) {
    Stripe st;
    st.vertical = rng.bernoulli(0.5);
    st.period = static_cast<int>(rng.uniform_int(3, 7));
    st.phase = static_cast<int>(rng.uniform_int(0, st.period - 1));
    st.amplitude = rng.uniform(15.0, 45.0);
    a.stripes.push_back(st);
  }
  const int n_rects = static_cast<int>(rng.uniform_int(2, 4));
  for (int r = 0; r < n_rects; ++r) {
    Rect rc;
    rc.cy = static_cast<int>(rng.uniform_int(0, h - 1));
    rc.cx = static_cast<int>(rng.uniform_int(0, w - 1));
    rc.half_h = static_cast<int>(rng.uniform_int(std::max(1, h / 16), std::max(2, h / 6)));
    rc.half_w = static_cast<int>(rng.uniform_int(std::max(1, w / 8), std::max(2, w / 3)));
    rc.delta = rng.uniform(40.0, 90.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    a.rects.push_back(rc);
  }
  return a;
}

int floor_div(int a, int b) {
  const int q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

double pattern_value(const Appearance& a, int py, int px, int h) {
  double v = a.base + a.gradient * (static_cast<double>(py) / h - 0.5);
  for (const Stripe& st : a.stripes) {
    const int coord = st.vertical ? px : py;
    v += (floor_div(coord + st.phase, st.period) & 1) ? st.amplitude : -st.amplitude;
  }
  for (const Rect& rc : a.rects) {
    if (std::abs(py - rc.cy) <= rc.half_h && std::abs(px - rc.cx) <= rc.half_w) v += rc.delta;
  }
  return v;
}

std::string shot_name(int identity, int shot, int camera, bool blurred) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "id%03d_%02d_c%d_%s.pgm", identity, shot, camera,
                blurred ? "blur" : "crisp");
  return buf;
}

}  // namespace

Manifest synth_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.identities < 1 || cfg.images_per_identity < 1)
    throw std::invalid_argument("synth_corpus needs at least one identity and one image");
  if (cfg.height < 4 || cfg.width < 4)
    throw std::invalid_argument("synth_corpus needs images of at least 4x4");
  if (!(cfg.blur_fraction >= 0.0 && cfg.blur_fraction <= 1.0))
    throw std::invalid_argument("blur_fraction must lie in [0, 1]");

  std::filesystem::create_directories(out_dir);
  const Rng base(cfg.seed);
  Manifest manifest;
  manifest.root = out_dir;
  manifest.records.reserve(static_cast<std::size_t>(cfg.identities) * cfg.images_per_identity);

  for (int k = 0; k < cfg.identities; ++k) {
    Rng id_rng = base.fork(0x10000000ULL + static_cast<std::uint64_t>(k));
    const Appearance look = sample_appearance(id_rng, cfg.height, cfg.width);

    // Balanced blur assignment within each identity, order shuffled per id.
    const int quota =
        static_cast<int>(std::llround(cfg.blur_fraction * cfg.images_per_identity));
    std::vector<char> blurred(cfg.images_per_identity, 0);
    for (int j = 0; j < quota; ++j) blurred[j] = 1;
    for (int j = cfg.images_per_identity - 1; j > 0; --j)
      std::swap(blurred[j], blurred[id_rng.uniform_int(0, j)]);

    for (int j = 0; j < cfg.images_per_identity; ++j) {
      const std::uint64_t global = static_cast<std::uint64_t>(k) * cfg.images_per_identity + j;
      Rng shot_rng = base.fork(0x20000000ULL + global);

      const int dy = static_cast<int>(shot_rng.uniform_int(-2, 2));
      const int dx = static_cast<int>(shot_rng.uniform_int(-2, 2));
      const double brightness = shot_rng.uniform(-15.0, 15.0);

      Image img(cfg.height, cfg.width, 1);
      for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
          const double noise = shot_rng.uniform(-25.0, 25.0);
          img.at(y, x) = detail::quantize_u8(
              pattern_value(look, y + dy, x + dx, cfg.height) + brightness + noise);
        }
      }
      if (blurred[j]) img = gaussian_blur(img, shot_rng.uniform(1.0, 2.5));

      SampleRecord rec;
      rec.path = shot_name(k, j, j % 2, blurred[j]);
      rec.identity = k;
      rec.camera = j % 2;
      rec.origin = Origin::Original;
      save_image(img, manifest.root / rec.path);
      manifest.records.push_back(std::move(rec));
    }
  }
  return manifest;
}

}  // namespace antithetic
