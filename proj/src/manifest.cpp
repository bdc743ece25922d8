#include "antithetic/manifest.hpp"

#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace antithetic {

using nlohmann::json;

std::string to_string(PartitionLabel label) {
  return label == PartitionLabel::HR ? "HR" : "LR";
}

PartitionLabel partition_from_string(const std::string& s) {
  if (s == "HR") return PartitionLabel::HR;
  if (s == "LR") return PartitionLabel::LR;
  throw std::runtime_error("unknown partition label '" + s + "'");
}

namespace {

SampleRecord record_from_json(const json& j) {
  SampleRecord r;
  r.path = j.at("path").get<std::string>();
  r.identity = j.at("identity").get<int>();
  r.camera = j.at("camera").get<int>();
  if (r.identity < 0 || r.camera < 0)
    throw std::runtime_error("identity and camera must be non-negative");
  if (j.contains("partition")) r.partition = partition_from_string(j.at("partition").get<std::string>());
  if (j.contains("sharpness")) r.sharpness = j.at("sharpness").get<double>();
  if (j.contains("origin")) {
    const std::string o = j.at("origin").get<std::string>();
    if (o == "original")
      r.origin = Origin::Original;
    else if (o == "antithetical")
      r.origin = Origin::Antithetical;
    else
      throw std::runtime_error("unknown origin '" + o + "'");
  }
  if (j.contains("counterpart")) r.counterpart = j.at("counterpart").get<std::string>();
  return r;
}

json record_to_json(const SampleRecord& r) {
  json j;
  j["path"] = r.path;
  j["identity"] = r.identity;
  j["camera"] = r.camera;
  if (r.partition) j["partition"] = to_string(*r.partition);
  if (r.sharpness) j["sharpness"] = *r.sharpness;
  j["origin"] = r.origin == Origin::Antithetical ? "antithetical" : "original";
  if (r.counterpart) j["counterpart"] = *r.counterpart;
  return j;
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open manifest");
  Manifest manifest;
  manifest.root = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    try {
      manifest.records.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed manifest line: " + e.what());
    }
    if (!seen.insert(manifest.records.back().path).second)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": duplicate path '" + manifest.records.back().path + "'");
  }
  return manifest;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  for (const SampleRecord& r : manifest.records) out << record_to_json(r).dump() << "\n";
  out.flush();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::filesystem::path resolve_path(const Manifest& manifest, const SampleRecord& record) {
  return manifest.root / record.path;
}

Manifest rebase_manifest(const Manifest& manifest, const std::filesystem::path& new_root) {
  const auto absolute = [](const std::filesystem::path& p) {
    return (p.is_absolute() ? p : std::filesystem::current_path() / p).lexically_normal();
  };
  const std::filesystem::path base = absolute(new_root);
  Manifest out = manifest;
  out.root = new_root;
  for (SampleRecord& r : out.records) {
    const std::filesystem::path target = absolute(manifest.root / r.path);
    const std::filesystem::path rel = target.lexically_relative(base);
    r.path = (rel.empty() ? target : rel).generic_string();
  }
  return out;
}

}  // namespace antithetic
