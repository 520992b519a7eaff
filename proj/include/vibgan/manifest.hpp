// Run manifest: per-stage record of config hash, seed, wall clock, and
// output files with content hashes. Supports resume (skip stages whose
// outputs are present and hash-clean) and determinism attestation.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace vibgan {

std::string hash_file_hex(const std::filesystem::path& path);
std::string hash_string_hex(const std::string& s);

struct ManifestOutput {
  std::string path;  // relative to the run directory
  std::string hash;
};

struct ManifestStage {
  std::string name;
  std::string config_hash;
  uint64_t seed = 0;
  double wall_clock_s = 0.0;
  std::vector<ManifestOutput> outputs;
};

struct RunManifest {
  int schema_version = 1;
  std::string tool_version;
  std::string config_hash;
  std::vector<ManifestStage> stages;

  static RunManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const ManifestStage* find(const std::string& name) const;
  void upsert(ManifestStage stage);

  // True when the stage ran under the same config hash and every listed
  // output still exists with a matching content hash.
  bool stage_is_current(const std::string& name,
                        const std::string& expected_config_hash,
                        const std::filesystem::path& run_dir) const;
};

}  // namespace vibgan
