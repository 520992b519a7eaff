// Pipeline configuration: a single JSON file with an explicit schema
// version aggregating the GAN config, classifier config, data source
// (surrogate spec or raw signal paths), cases, scenarios, and output
// options.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vibgan/classifier.hpp"
#include "vibgan/gan.hpp"
#include "vibgan/signal.hpp"

namespace vibgan {

struct CaseSpec {
  std::string name;
  int64_t epochs = 1;
};

struct PipelineCounts {
  int64_t train_per_class = 60;
  int64_t test_per_class = 15;
  int64_t generate_n = 256;
};

struct EvalOptions {
  int bins = 40;
  int64_t fid_pairs = 64;   // sampled-pair mode for the FID PDF
  bool all_pairs_fid = false;
  int64_t fid_dim = 8;      // window length of the multivariate form
};

struct PipelineConfig {
  int schema_version = 1;
  uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  int64_t seg_len = 1024;
  bool strict_determinism = true;

  // Data source: exactly one of surrogate or (undamaged_path, damaged_path).
  std::optional<SurrogateSpec> surrogate;
  std::filesystem::path undamaged_path;
  std::filesystem::path damaged_path;

  GanConfig gan;                // per-case epochs override gan.epochs
  ClassifierConfig classifier;
  std::vector<CaseSpec> cases;
  std::vector<int> scenarios = {1, 2};
  PipelineCounts counts;
  EvalOptions eval;

  static PipelineConfig load(const std::filesystem::path& path);
  std::string canonical_json() const;  // stable serialization for hashing
  void validate(bool check_paths = true) const;
};

}  // namespace vibgan
