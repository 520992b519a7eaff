#include "vibgan/config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace vibgan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Pull a field if present; leave the default otherwise. Unknown keys in
// the file are rejected up front so typos fail loudly.
template <class T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

SurrogateSpec parse_surrogate(const json& j) {
  check_keys(j,
             {"modes", "noise_std", "damage_shift", "duration_s",
              "sample_rate_hz", "excitations_per_second"},
             "data.surrogate");
  SurrogateSpec spec;
  if (!j.contains("modes")) {
    throw ConfigError("data.surrogate.modes is required");
  }
  for (const auto& m : j.at("modes")) {
    check_keys(m, {"frequency_hz", "damping_ratio", "amplitude"},
               "surrogate mode");
    SurrogateMode mode;
    mode.frequency_hz = m.at("frequency_hz").get<double>();
    maybe(m, "damping_ratio", mode.damping_ratio);
    maybe(m, "amplitude", mode.amplitude);
    spec.modes.push_back(mode);
  }
  if (j.contains("damage_shift")) {
    for (const auto& s : j.at("damage_shift")) {
      check_keys(s, {"frequency_scale", "amplitude_scale"}, "damage_shift");
      ModeShift shift;
      maybe(s, "frequency_scale", shift.frequency_scale);
      maybe(s, "amplitude_scale", shift.amplitude_scale);
      spec.damage_shift.push_back(shift);
    }
  }
  maybe(j, "noise_std", spec.noise_std);
  maybe(j, "duration_s", spec.duration_s);
  maybe(j, "sample_rate_hz", spec.sample_rate_hz);
  maybe(j, "excitations_per_second", spec.excitations_per_second);
  return spec;
}

void parse_gan(const json& j, GanConfig& cfg) {
  check_keys(j,
             {"z_channels", "channel_widths", "lr_generator", "lr_critic",
              "critic_iters", "lambda_gp", "minibatch", "epochs",
              "critic_dropout_p", "noise_sigma0", "adamw_beta1", "adamw_beta2",
              "adamw_epsilon", "adamw_weight_decay", "eval_interval"},
             "gan");
  maybe(j, "z_channels", cfg.z_channels);
  if (j.contains("channel_widths")) {
    auto widths = j.at("channel_widths").get<std::vector<int64_t>>();
    if (widths.size() != 5) {
      throw ConfigError("gan.channel_widths must have exactly 5 entries");
    }
    std::copy(widths.begin(), widths.end(), cfg.channel_widths.begin());
  }
  maybe(j, "lr_generator", cfg.lr_generator);
  maybe(j, "lr_critic", cfg.lr_critic);
  maybe(j, "critic_iters", cfg.critic_iters);
  maybe(j, "lambda_gp", cfg.lambda_gp);
  maybe(j, "minibatch", cfg.minibatch);
  maybe(j, "epochs", cfg.epochs);
  maybe(j, "critic_dropout_p", cfg.critic_dropout_p);
  maybe(j, "noise_sigma0", cfg.noise_sigma0);
  maybe(j, "adamw_beta1", cfg.adamw_beta1);
  maybe(j, "adamw_beta2", cfg.adamw_beta2);
  maybe(j, "adamw_epsilon", cfg.adamw_epsilon);
  maybe(j, "adamw_weight_decay", cfg.adamw_weight_decay);
  maybe(j, "eval_interval", cfg.eval_interval);
}

void parse_classifier(const json& j, ClassifierConfig& cfg) {
  check_keys(j,
             {"channel_widths", "lr", "minibatch", "epochs", "threshold",
              "adamw_beta1", "adamw_beta2", "adamw_epsilon",
              "adamw_weight_decay"},
             "classifier");
  if (j.contains("channel_widths")) {
    auto widths = j.at("channel_widths").get<std::vector<int64_t>>();
    if (widths.size() != 5) {
      throw ConfigError("classifier.channel_widths must have exactly 5 entries");
    }
    std::copy(widths.begin(), widths.end(), cfg.channel_widths.begin());
  }
  maybe(j, "lr", cfg.lr);
  maybe(j, "minibatch", cfg.minibatch);
  maybe(j, "epochs", cfg.epochs);
  maybe(j, "threshold", cfg.threshold);
  maybe(j, "adamw_beta1", cfg.adamw_beta1);
  maybe(j, "adamw_beta2", cfg.adamw_beta2);
  maybe(j, "adamw_epsilon", cfg.adamw_epsilon);
  maybe(j, "adamw_weight_decay", cfg.adamw_weight_decay);
}

json surrogate_to_json(const SurrogateSpec& spec) {
  json j;
  j["modes"] = json::array();
  for (const auto& m : spec.modes) {
    j["modes"].push_back({{"frequency_hz", m.frequency_hz},
                          {"damping_ratio", m.damping_ratio},
                          {"amplitude", m.amplitude}});
  }
  j["damage_shift"] = json::array();
  for (const auto& s : spec.damage_shift) {
    j["damage_shift"].push_back({{"frequency_scale", s.frequency_scale},
                                 {"amplitude_scale", s.amplitude_scale}});
  }
  j["noise_std"] = spec.noise_std;
  j["duration_s"] = spec.duration_s;
  j["sample_rate_hz"] = spec.sample_rate_hz;
  j["excitations_per_second"] = spec.excitations_per_second;
  return j;
}

}  // namespace

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  }

  check_keys(j,
             {"schema_version", "seed", "out_dir", "seg_len",
              "strict_determinism", "data", "gan", "classifier", "cases",
              "scenarios", "counts", "eval"},
             "config root");

  PipelineConfig cfg;
  maybe(j, "schema_version", cfg.schema_version);
  if (cfg.schema_version != 1) {
    throw ConfigError("unsupported config schema_version " +
                      std::to_string(cfg.schema_version));
  }
  maybe(j, "seed", cfg.seed);
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  maybe(j, "seg_len", cfg.seg_len);
  maybe(j, "strict_determinism", cfg.strict_determinism);

  if (j.contains("data")) {
    const json& data = j.at("data");
    check_keys(data, {"surrogate", "undamaged_path", "damaged_path"},
               "data");
    if (data.contains("surrogate")) {
      cfg.surrogate = parse_surrogate(data.at("surrogate"));
    }
    if (data.contains("undamaged_path")) {
      cfg.undamaged_path = data.at("undamaged_path").get<std::string>();
    }
    if (data.contains("damaged_path")) {
      cfg.damaged_path = data.at("damaged_path").get<std::string>();
    }
  }

  if (j.contains("gan")) parse_gan(j.at("gan"), cfg.gan);
  if (j.contains("classifier")) parse_classifier(j.at("classifier"), cfg.classifier);

  if (j.contains("cases")) {
    for (const auto& c : j.at("cases")) {
      check_keys(c, {"name", "epochs"}, "case");
      CaseSpec spec;
      spec.name = c.at("name").get<std::string>();
      spec.epochs = c.at("epochs").get<int64_t>();
      cfg.cases.push_back(spec);
    }
  }
  if (j.contains("scenarios")) {
    cfg.scenarios = j.at("scenarios").get<std::vector<int>>();
  }
  if (j.contains("counts")) {
    const json& c = j.at("counts");
    check_keys(c, {"train_per_class", "test_per_class", "generate_n"},
               "counts");
    maybe(c, "train_per_class", cfg.counts.train_per_class);
    maybe(c, "test_per_class", cfg.counts.test_per_class);
    maybe(c, "generate_n", cfg.counts.generate_n);
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    check_keys(e, {"bins", "fid_pairs", "all_pairs_fid", "fid_dim"}, "eval");
    maybe(e, "bins", cfg.eval.bins);
    maybe(e, "fid_pairs", cfg.eval.fid_pairs);
    maybe(e, "all_pairs_fid", cfg.eval.all_pairs_fid);
    maybe(e, "fid_dim", cfg.eval.fid_dim);
  }

  // The GAN and classifier operate on the pipeline's segment length,
  // and per-stage seeds derive from the global seed.
  cfg.gan.seg_len = cfg.seg_len;
  cfg.classifier.seg_len = cfg.seg_len;
  return cfg;
}

std::string PipelineConfig::canonical_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["seed"] = seed;
  j["seg_len"] = seg_len;
  j["strict_determinism"] = strict_determinism;
  if (surrogate) j["data"]["surrogate"] = surrogate_to_json(*surrogate);
  if (!undamaged_path.empty()) {
    j["data"]["undamaged_path"] = undamaged_path.string();
  }
  if (!damaged_path.empty()) j["data"]["damaged_path"] = damaged_path.string();

  json g;
  g["z_channels"] = gan.z_channels;
  g["channel_widths"] = gan.channel_widths;
  g["lr_generator"] = gan.lr_generator;
  g["lr_critic"] = gan.lr_critic;
  g["critic_iters"] = gan.critic_iters;
  g["lambda_gp"] = gan.lambda_gp;
  g["minibatch"] = gan.minibatch;
  g["epochs"] = gan.epochs;
  g["critic_dropout_p"] = gan.critic_dropout_p;
  g["noise_sigma0"] = gan.noise_sigma0;
  g["adamw"] = {gan.adamw_beta1, gan.adamw_beta2, gan.adamw_epsilon,
                gan.adamw_weight_decay};
  g["eval_interval"] = gan.eval_interval;
  j["gan"] = g;

  json c;
  c["channel_widths"] = classifier.channel_widths;
  c["lr"] = classifier.lr;
  c["minibatch"] = classifier.minibatch;
  c["epochs"] = classifier.epochs;
  c["threshold"] = classifier.threshold;
  c["adamw"] = {classifier.adamw_beta1, classifier.adamw_beta2,
                classifier.adamw_epsilon, classifier.adamw_weight_decay};
  j["classifier"] = c;

  j["cases"] = json::array();
  for (const auto& spec : cases) {
    j["cases"].push_back({{"name", spec.name}, {"epochs", spec.epochs}});
  }
  j["scenarios"] = scenarios;
  j["counts"] = {{"train_per_class", counts.train_per_class},
                 {"test_per_class", counts.test_per_class},
                 {"generate_n", counts.generate_n}};
  j["eval"] = {{"bins", eval.bins},
               {"fid_pairs", eval.fid_pairs},
               {"all_pairs_fid", eval.all_pairs_fid},
               {"fid_dim", eval.fid_dim}};
  return j.dump();
}

void PipelineConfig::validate(bool check_paths) const {
  GanConfig gan_check = gan;
  gan_check.seg_len = seg_len;
  gan_check.validate();
  ClassifierConfig cls_check = classifier;
  cls_check.seg_len = seg_len;
  cls_check.validate();

  if (cases.empty()) throw ConfigError("config needs at least one case");
  std::set<std::string> names;
  for (const auto& spec : cases) {
    if (spec.name.empty()) throw ConfigError("case name must be non-empty");
    if (spec.name.find('/') != std::string::npos ||
        spec.name.find("..") != std::string::npos) {
      throw ConfigError("case name '" + spec.name + "' must be a plain name");
    }
    if (!names.insert(spec.name).second) {
      throw ConfigError("duplicate case name '" + spec.name + "'");
    }
    if (spec.epochs < 1) throw ConfigError("case epochs must be >= 1");
  }
  if (scenarios.empty()) throw ConfigError("config needs at least one scenario");
  for (int s : scenarios) {
    if (s != 1 && s != 2) throw ConfigError("scenarios must be 1 or 2");
  }
  if (counts.train_per_class < 1 || counts.test_per_class < 1 ||
      counts.generate_n < 1) {
    throw ConfigError("counts must be positive");
  }
  if (eval.bins < 1 || eval.fid_pairs < 1 || eval.fid_dim < 1) {
    throw ConfigError("eval options must be positive");
  }

  bool has_surrogate = surrogate.has_value();
  bool has_paths = !undamaged_path.empty() || !damaged_path.empty();
  if (has_surrogate == has_paths) {
    throw ConfigError("config must provide exactly one data source: "
                      "data.surrogate or data.{undamaged_path,damaged_path}");
  }
  if (has_surrogate) {
    surrogate->validate();
    double samples = surrogate->duration_s * surrogate->sample_rate_hz;
    if (samples < static_cast<double>(seg_len)) {
      throw ConfigError("surrogate duration yields fewer samples than seg_len");
    }
  } else {
    if (undamaged_path.empty() || damaged_path.empty()) {
      throw ConfigError("both undamaged_path and damaged_path are required");
    }
    if (check_paths) {
      for (const auto& p : {undamaged_path, damaged_path}) {
        if (!fs::exists(p)) {
          throw ConfigError("referenced path does not exist: " + p.string());
        }
      }
    }
  }
}

}  // namespace vibgan
