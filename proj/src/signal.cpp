#include "vibgan/signal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace vibgan {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Condition c) {
  return c == Condition::undamaged ? "undamaged" : "damaged";
}

std::string to_string(Source s) { return s == Source::real ? "real" : "fake"; }

Condition condition_from_int(int v) {
  if (v == 0) return Condition::undamaged;
  if (v == 1) return Condition::damaged;
  throw ParameterError("condition must be 0 or 1, got " + std::to_string(v));
}

Source source_from_string(const std::string& s) {
  if (s == "real") return Source::real;
  if (s == "fake") return Source::fake;
  throw ParameterError("source must be 'real' or 'fake', got '" + s + "'");
}

SignalFormat format_from_path(const fs::path& path) {
  auto ext = path.extension().string();
  if (ext == ".f64") return SignalFormat::f64le;
  if (ext == ".csv") return SignalFormat::csv;
  throw IngestionError("cannot infer signal format from extension '" + ext +
                       "' (expected .f64 or .csv)");
}

// ---------------------------------------------------------------------------
// Little-endian f64 I/O (explicit byte order, independent of host)
// ---------------------------------------------------------------------------

namespace {

void write_f64le(std::ostream& os, double v) {
  uint64_t bits = std::bit_cast<uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64le(const unsigned char* b) {
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

RawSignal load_signal(const fs::path& path, SignalFormat format,
                      const SignalMeta& meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open signal file " + path.string());

  std::vector<double> samples;
  if (format == SignalFormat::f64le) {
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.empty()) {
      throw IngestionError("empty signal file " + path.string());
    }
    if (bytes.size() % 8 != 0) {
      throw IngestionError("f64 file " + path.string() + " has size " +
                           std::to_string(bytes.size()) +
                           " not divisible by 8");
    }
    samples.reserve(bytes.size() / 8);
    for (size_t off = 0; off < bytes.size(); off += 8) {
      double v = read_f64le(bytes.data() + off);
      if (!std::isfinite(v)) {
        throw IngestionError("non-finite sample at byte offset " +
                             std::to_string(off) + " in " + path.string());
      }
      samples.push_back(v);
    }
  } else {
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      // trim whitespace; skip blank lines
      size_t a = line.find_first_not_of(" \t\r");
      if (a == std::string::npos) continue;
      size_t b = line.find_last_not_of(" \t\r");
      std::string tok = line.substr(a, b - a + 1);
      try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        if (!std::isfinite(v)) {
          throw IngestionError("non-finite sample at line " +
                               std::to_string(line_no) + " in " +
                               path.string());
        }
        samples.push_back(v);
      } catch (const IngestionError&) {
        throw;
      } catch (const std::exception&) {
        throw IngestionError("cannot parse '" + tok + "' at line " +
                             std::to_string(line_no) + " in " + path.string());
      }
    }
    if (samples.empty()) {
      throw IngestionError("empty signal file " + path.string());
    }
  }

  RawSignal raw;
  raw.samples = std::move(samples);
  raw.sample_rate_hz = meta.sample_rate_hz;
  raw.condition = meta.condition;
  raw.joint_id = meta.joint_id;
  raw.source = meta.source;
  if (raw.sample_rate_hz <= 0.0) {
    throw IngestionError("sample_rate_hz must be positive for " +
                         path.string());
  }
  return raw;
}

void save_signal_f64(const fs::path& path, const std::vector<double>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestionError("cannot write " + path.string());
  for (double v : samples) write_f64le(out, v);
}

SignalMeta read_meta_sidecar(const fs::path& signal_path) {
  fs::path meta_path = signal_path;
  meta_path += ".meta";
  std::ifstream in(meta_path);
  if (!in) {
    throw IngestionError("missing metadata sidecar " + meta_path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IngestionError("cannot parse " + meta_path.string() + ": " +
                         e.what());
  }
  SignalMeta meta;
  meta.sample_rate_hz = j.at("sample_rate_hz").get<double>();
  meta.condition = condition_from_int(j.at("condition").get<int>());
  meta.joint_id = j.at("joint_id").get<int>();
  meta.source = source_from_string(j.at("source").get<std::string>());
  return meta;
}

void write_meta_sidecar(const fs::path& signal_path, const SignalMeta& meta) {
  fs::path meta_path = signal_path;
  meta_path += ".meta";
  json j;
  j["sample_rate_hz"] = meta.sample_rate_hz;
  j["condition"] = static_cast<int>(meta.condition);
  j["joint_id"] = meta.joint_id;
  j["source"] = to_string(meta.source);
  std::ofstream out(meta_path, std::ios::trunc);
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Segmentation and normalization
// ---------------------------------------------------------------------------

std::vector<Segment> segment_signal(const RawSignal& raw, int64_t seg_len,
                                    bool shuffle, Rng& rng) {
  if (seg_len < 1) throw ParameterError("seg_len must be >= 1");
  int64_t n = static_cast<int64_t>(raw.samples.size());
  if (seg_len > n) {
    throw GeometryError("seg_len " + std::to_string(seg_len) +
                        " exceeds signal length " + std::to_string(n));
  }
  int64_t count = n / seg_len;
  std::vector<Segment> segments;
  segments.reserve(static_cast<size_t>(count));
  for (int64_t i = 0; i < count; ++i) {
    Segment s;
    s.values.assign(raw.samples.begin() + i * seg_len,
                    raw.samples.begin() + (i + 1) * seg_len);
    s.condition = raw.condition;
    s.joint_id = raw.joint_id;
    s.source = raw.source;
    s.segment_index = i;
    segments.push_back(std::move(s));
  }
  if (shuffle) rng.shuffle(segments);
  return segments;
}

std::pair<Segment, MinMaxScale> normalize_minmax(const Segment& segment,
                                                 double lo, double hi) {
  if (segment.values.size() < 2) {
    throw ParameterError("normalize_minmax needs at least 2 samples");
  }
  auto [mn_it, mx_it] =
      std::minmax_element(segment.values.begin(), segment.values.end());
  double mn = *mn_it, mx = *mx_it;
  if (mn == mx) {
    throw ParameterError("normalize_minmax: constant segment has no range");
  }
  MinMaxScale map;
  map.scale = (hi - lo) / (mx - mn);
  map.offset = lo - map.scale * mn;
  Segment out = segment;
  for (double& v : out.values) v = map.apply(v);
  return {std::move(out), map};
}

// ---------------------------------------------------------------------------
// Surrogate synthesis
// ---------------------------------------------------------------------------

void SurrogateSpec::validate() const {
  if (modes.empty()) throw ParameterError("surrogate spec needs >= 1 mode");
  if (duration_s <= 0.0) throw ParameterError("duration_s must be positive");
  if (sample_rate_hz <= 0.0) {
    throw ParameterError("sample_rate_hz must be positive");
  }
  if (noise_std < 0.0) throw ParameterError("noise_std must be >= 0");
  if (excitations_per_second <= 0.0) {
    throw ParameterError("excitations_per_second must be positive");
  }
  double nyquist = sample_rate_hz / 2.0;
  for (const auto& m : modes) {
    if (m.frequency_hz <= 0.0 || m.frequency_hz >= nyquist) {
      throw ParameterError("mode frequency " + std::to_string(m.frequency_hz) +
                           " must lie in (0, Nyquist=" +
                           std::to_string(nyquist) + ")");
    }
    if (m.damping_ratio < 0.0 || m.damping_ratio >= 1.0) {
      throw ParameterError("damping_ratio must lie in [0,1)");
    }
  }
  if (!damage_shift.empty() && damage_shift.size() != 1 &&
      damage_shift.size() != modes.size()) {
    throw ParameterError("damage_shift must have 1 entry or one per mode");
  }
  if (!damage_shift.empty()) {
    for (size_t i = 0; i < modes.size(); ++i) {
      const ModeShift& shift =
          damage_shift.size() == 1 ? damage_shift[0] : damage_shift[i];
      double f = modes[i].frequency_hz * shift.frequency_scale;
      if (f <= 0.0 || f >= nyquist) {
        throw ParameterError("shifted mode frequency " + std::to_string(f) +
                             " leaves (0, Nyquist)");
      }
    }
  }
}

RawSignal synthesize_surrogate(const SurrogateSpec& spec, Condition condition,
                               Rng& rng, int joint_id) {
  spec.validate();
  constexpr double kTwoPi = 6.283185307179586476925286766559;

  int64_t n = static_cast<int64_t>(spec.duration_s * spec.sample_rate_hz);
  if (n < 1) throw ParameterError("surrogate duration yields no samples");
  std::vector<double> samples(static_cast<size_t>(n), 0.0);

  // Excitation instants: one at t=0, then exponential inter-arrivals.
  std::vector<double> hits{0.0};
  double t = 0.0;
  while (true) {
    double u = 1.0 - rng.uniform();
    t += -std::log(u) / spec.excitations_per_second;
    if (t >= spec.duration_s) break;
    hits.push_back(t);
  }

  for (size_t mi = 0; mi < spec.modes.size(); ++mi) {
    SurrogateMode mode = spec.modes[mi];
    if (condition == Condition::damaged && !spec.damage_shift.empty()) {
      const ModeShift& shift = spec.damage_shift.size() == 1
                                   ? spec.damage_shift[0]
                                   : spec.damage_shift[mi];
      mode.frequency_hz *= shift.frequency_scale;
      mode.amplitude *= shift.amplitude_scale;
    }
    double omega = kTwoPi * mode.frequency_hz;
    double omega_d = omega * std::sqrt(1.0 - mode.damping_ratio * mode.damping_ratio);
    for (double hit : hits) {
      double phase = rng.uniform(0.0, kTwoPi);
      int64_t start = static_cast<int64_t>(std::ceil(hit * spec.sample_rate_hz));
      for (int64_t i = start; i < n; ++i) {
        double tau = static_cast<double>(i) / spec.sample_rate_hz - hit;
        samples[static_cast<size_t>(i)] +=
            mode.amplitude * std::exp(-mode.damping_ratio * omega * tau) *
            std::sin(omega_d * tau + phase);
      }
    }
  }

  if (spec.noise_std > 0.0) {
    for (double& v : samples) v += rng.normal(0.0, spec.noise_std);
  }

  RawSignal raw;
  raw.samples = std::move(samples);
  raw.sample_rate_hz = spec.sample_rate_hz;
  raw.condition = condition;
  raw.joint_id = joint_id;
  raw.source = Source::real;
  return raw;
}

// ---------------------------------------------------------------------------
// Scenario assembly
// ---------------------------------------------------------------------------

namespace {

std::vector<Segment> draw_without_replacement(const std::vector<Segment>& pool,
                                              int64_t count, Rng& rng,
                                              const char* pool_name) {
  if (static_cast<int64_t>(pool.size()) < count) {
    throw AllocationError(std::string("pool '") + pool_name + "' has " +
                          std::to_string(pool.size()) + " segments, needs " +
                          std::to_string(count));
  }
  std::vector<int64_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<Segment> out;
  out.reserve(static_cast<size_t>(count));
  for (int64_t i = 0; i < count; ++i) {
    out.push_back(pool[static_cast<size_t>(order[static_cast<size_t>(i)])]);
  }
  return out;
}

}  // namespace

ScenarioSplit build_scenario(const std::vector<Segment>& undamaged,
                             const std::vector<Segment>& damaged_real,
                             const std::vector<Segment>& damaged_fake,
                             int scenario_id, Rng& rng,
                             const ScenarioCounts& counts) {
  if (scenario_id != 1 && scenario_id != 2) {
    throw ParameterError("scenario_id must be 1 or 2");
  }
  const int64_t n_train = counts.train_per_class;
  const int64_t n_test = counts.test_per_class;

  ScenarioSplit split;
  split.scenario_id = scenario_id;

  // Undamaged class: train and test both come from the real pool.
  auto und = draw_without_replacement(undamaged, n_train + n_test, rng,
                                      "undamaged");
  for (int64_t i = 0; i < n_train; ++i) {
    split.train.emplace_back(und[static_cast<size_t>(i)], 0);
  }
  for (int64_t i = n_train; i < n_train + n_test; ++i) {
    split.test.emplace_back(und[static_cast<size_t>(i)], 0);
  }

  if (scenario_id == 1) {
    auto dam = draw_without_replacement(damaged_real, n_train + n_test, rng,
                                        "damaged_real");
    for (int64_t i = 0; i < n_train; ++i) {
      split.train.emplace_back(dam[static_cast<size_t>(i)], 1);
    }
    for (int64_t i = n_train; i < n_train + n_test; ++i) {
      split.test.emplace_back(dam[static_cast<size_t>(i)], 1);
    }
  } else {
    auto dam_train =
        draw_without_replacement(damaged_real, n_train, rng, "damaged_real");
    auto dam_test =
        draw_without_replacement(damaged_fake, n_test, rng, "damaged_fake");
    for (auto& s : dam_test) {
      if (s.source != Source::fake) {
        throw ContractError("scenario 2 damaged test pool must be generated data");
      }
    }
    for (int64_t i = 0; i < n_train; ++i) {
      split.train.emplace_back(dam_train[static_cast<size_t>(i)], 1);
    }
    for (int64_t i = 0; i < n_test; ++i) {
      split.test.emplace_back(dam_test[static_cast<size_t>(i)], 1);
    }
  }
  return split;
}

// ---------------------------------------------------------------------------
// Pool persistence
// ---------------------------------------------------------------------------

void save_segment_pool(const fs::path& dir,
                       const std::vector<Segment>& segments) {
  fs::create_directories(dir);
  json manifest = json::array();
  for (size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    char name[32];
    std::snprintf(name, sizeof(name), "seg_%06zu.f64", i);
    save_signal_f64(dir / name, s.values);
    json entry;
    entry["file"] = name;
    entry["condition"] = static_cast<int>(s.condition);
    entry["joint_id"] = s.joint_id;
    entry["source"] = to_string(s.source);
    entry["segment_index"] = s.segment_index;
    manifest.push_back(entry);
  }
  std::ofstream out(dir / "pool.json", std::ios::trunc);
  out << manifest.dump(2) << "\n";
}

std::vector<Segment> load_segment_pool(const fs::path& dir) {
  std::ifstream in(dir / "pool.json");
  if (!in) {
    throw IngestionError("missing pool manifest " + (dir / "pool.json").string());
  }
  json manifest;
  try {
    in >> manifest;
  } catch (const std::exception& e) {
    throw IngestionError("cannot parse pool manifest in " + dir.string() +
                         ": " + e.what());
  }
  std::vector<Segment> segments;
  segments.reserve(manifest.size());
  for (const auto& entry : manifest) {
    SignalMeta meta;
    meta.condition = condition_from_int(entry.at("condition").get<int>());
    meta.joint_id = entry.at("joint_id").get<int>();
    meta.source = source_from_string(entry.at("source").get<std::string>());
    RawSignal raw = load_signal(dir / entry.at("file").get<std::string>(),
                                SignalFormat::f64le, meta);
    Segment s;
    s.values = std::move(raw.samples);
    s.condition = meta.condition;
    s.joint_id = meta.joint_id;
    s.source = meta.source;
    s.segment_index = entry.at("segment_index").get<int64_t>();
    segments.push_back(std::move(s));
  }
  return segments;
}

}  // namespace vibgan
