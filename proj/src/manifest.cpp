#include "vibgan/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "vibgan/rng.hpp"
#include "vibgan/tensor.hpp"

namespace vibgan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string to_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string hash_file_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot hash missing file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return to_hex(fnv1a64(bytes));
}

std::string hash_string_hex(const std::string& s) { return to_hex(fnv1a64(s)); }

RunManifest RunManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IngestionError("cannot parse manifest " + path.string() + ": " +
                         e.what());
  }
  RunManifest m;
  m.schema_version = j.value("schema_version", 1);
  m.tool_version = j.value("tool_version", "");
  m.config_hash = j.value("config_hash", "");
  for (const auto& s : j.value("stages", json::array())) {
    ManifestStage stage;
    stage.name = s.at("name").get<std::string>();
    stage.config_hash = s.value("config_hash", "");
    stage.seed = s.value("seed", uint64_t{0});
    stage.wall_clock_s = s.value("wall_clock_s", 0.0);
    for (const auto& o : s.value("outputs", json::array())) {
      stage.outputs.push_back(
          {o.at("path").get<std::string>(), o.at("hash").get<std::string>()});
    }
    m.stages.push_back(std::move(stage));
  }
  return m;
}

void RunManifest::save(const fs::path& path) const {
  json j;
  j["schema_version"] = schema_version;
  j["tool_version"] = tool_version;
  j["config_hash"] = config_hash;
  j["stages"] = json::array();
  for (const auto& stage : stages) {
    json s;
    s["name"] = stage.name;
    s["config_hash"] = stage.config_hash;
    s["seed"] = stage.seed;
    s["wall_clock_s"] = stage.wall_clock_s;
    s["outputs"] = json::array();
    for (const auto& o : stage.outputs) {
      s["outputs"].push_back({{"path", o.path}, {"hash", o.hash}});
    }
    j["stages"].push_back(std::move(s));
  }
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << "\n";
}

const ManifestStage* RunManifest::find(const std::string& name) const {
  for (const auto& stage : stages) {
    if (stage.name == name) return &stage;
  }
  return nullptr;
}

void RunManifest::upsert(ManifestStage stage) {
  for (auto& existing : stages) {
    if (existing.name == stage.name) {
      existing = std::move(stage);
      return;
    }
  }
  stages.push_back(std::move(stage));
}

bool RunManifest::stage_is_current(const std::string& name,
                                   const std::string& expected_config_hash,
                                   const fs::path& run_dir) const {
  const ManifestStage* stage = find(name);
  if (!stage || stage->config_hash != expected_config_hash) return false;
  for (const auto& output : stage->outputs) {
    fs::path p = run_dir / output.path;
    if (!fs::exists(p)) return false;
    if (hash_file_hex(p) != output.hash) return false;
  }
  return true;
}

}  // namespace vibgan
