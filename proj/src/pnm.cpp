#include "antithetic/pnm.hpp"

#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace antithetic {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

bool is_pnm_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string next_token(const std::string& data, std::size_t& pos) {
  while (pos < data.size()) {
    if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (is_pnm_space(data[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < data.size() && !is_pnm_space(data[pos])) ++pos;
  return data.substr(start, pos - start);
}

int parse_header_int(const std::filesystem::path& path, const std::string& data,
                     std::size_t& pos, const char* name) {
  const std::string tok = next_token(data, pos);
  if (tok.empty()) fail(path, std::string("truncated header, missing ") + name);
  int value = 0;
  const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || end != tok.data() + tok.size())
    fail(path, std::string("malformed ") + name + " '" + tok + "'");
  return value;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  const std::string magic = next_token(data, pos);
  int channels = 0;
  if (magic == "P5")
    channels = 1;
  else if (magic == "P6")
    channels = 3;
  else
    fail(path, "not a binary PGM/PPM file (magic '" + magic + "')");

  const int width = parse_header_int(path, data, pos, "width");
  const int height = parse_header_int(path, data, pos, "height");
  const int maxval = parse_header_int(path, data, pos, "maxval");
  if (width < 1 || height < 1) fail(path, "non-positive dimensions in header");
  if (maxval != 255)
    fail(path, "unsupported maxval " + std::to_string(maxval) + " (only 255 is supported)");
  if (pos >= data.size() || !is_pnm_space(data[pos]))
    fail(path, "missing whitespace between header and payload");
  ++pos;

  const std::size_t need = static_cast<std::size_t>(height) * width * channels;
  if (data.size() - pos < need) fail(path, "truncated payload");
  if (data.size() - pos > need) fail(path, "trailing bytes after payload");

  Image img(height, width, channels);
  std::memcpy(img.pixels.data(), data.data() + pos, need);
  return img;
}

void save_image(const Image& img, const std::filesystem::path& path) {
  if (img.height < 1 || img.width < 1 || (img.channels != 1 && img.channels != 3))
    throw std::invalid_argument("save_image: invalid image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  out.flush();
  if (!out) fail(path, "write failed");
}

}  // namespace antithetic
