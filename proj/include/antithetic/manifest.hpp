#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace antithetic {

enum class PartitionLabel { HR, LR };
enum class Origin { Original, Antithetical };

std::string to_string(PartitionLabel label);
PartitionLabel partition_from_string(const std::string& s);

// One labeled image. `path` is relative to the owning manifest's root.
// Antithetical records reference the original they were derived from.
struct SampleRecord {
  std::string path;
  int identity = 0;
  int camera = 0;
  std::optional<PartitionLabel> partition;
  std::optional<double> sharpness;
  Origin origin = Origin::Original;
  std::optional<std::string> counterpart;
};

struct Manifest {
  std::filesystem::path root;
  std::vector<SampleRecord> records;
};

/// JSON-lines, one record per line. The root becomes the file's directory.
/// Duplicate paths and malformed lines are rejected (with the line number).
Manifest load_manifest(const std::filesystem::path& path);

/// Lossless counterpart of load_manifest, optional fields included only when
/// set. Doubles round-trip exactly.
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Absolute location of a record's image file.
std::filesystem::path resolve_path(const Manifest& manifest, const SampleRecord& record);

/// Rewrites record paths relative to new_root (purely lexical), so the
/// manifest can be saved into a different directory while still resolving to
/// the same image files. Counterpart references are record keys, not file
/// locations, and stay untouched.
Manifest rebase_manifest(const Manifest& manifest, const std::filesystem::path& new_root);

}  // namespace antithetic
