// Stage orchestration: ingest -> train-gan -> generate -> eval ->
// train-dcnn -> test-dcnn -> summary, with a manifest for resume and
// determinism attestation. Stages derive their seeds from the global
// seed by name, so any stage can be re-run in isolation from upstream
// artifacts and reproduce its outputs exactly.
#pragma once

#include "vibgan/config.hpp"
#include "vibgan/manifest.hpp"

namespace vibgan {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kOutDirEnvVar = "VIBGAN_OUT";

struct PipelineContext {
  PipelineConfig cfg;
  std::filesystem::path run_dir;
  RunManifest manifest;
  std::string config_hash;
  bool force = false;

  // Resolves the run directory (env override applied by the caller),
  // loads the manifest when present, and validates the config.
  static PipelineContext open(PipelineConfig cfg, bool force);
};

namespace stages {

const CaseSpec& find_case(const PipelineConfig& cfg, const std::string& name);

// Each stage returns true when it ran and false when the manifest
// showed current outputs and it was skipped.
bool ingest(PipelineContext& ctx);
bool train_gan(PipelineContext& ctx, const CaseSpec& case_spec);
bool generate(PipelineContext& ctx, const CaseSpec& case_spec);
bool eval(PipelineContext& ctx, const CaseSpec& case_spec);
bool train_dcnn(PipelineContext& ctx, const CaseSpec& case_spec, int scenario);
bool test_dcnn(PipelineContext& ctx, const CaseSpec& case_spec, int scenario);

// Aggregates per-scenario metrics into summary.csv + summary.svg.
void summary(PipelineContext& ctx);

// Regenerates every SVG from the CSV artifacts already on disk.
void plots(PipelineContext& ctx);

// All stages for every configured case and scenario.
void pipeline(PipelineContext& ctx);

}  // namespace stages

}  // namespace vibgan
