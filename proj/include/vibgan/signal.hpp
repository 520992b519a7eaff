// Vibration signal ingestion, segmentation, normalization, surrogate
// synthesis, and train/test scenario assembly.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vibgan/rng.hpp"
#include "vibgan/tensor.hpp"

namespace vibgan {

enum class Condition : int { undamaged = 0, damaged = 1 };
enum class Source { real, fake };

std::string to_string(Condition c);
std::string to_string(Source s);
Condition condition_from_int(int v);
Source source_from_string(const std::string& s);

struct SignalMeta {
  double sample_rate_hz = 1024.0;
  Condition condition = Condition::undamaged;
  int joint_id = 1;
  Source source = Source::real;
};

struct RawSignal {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
  Condition condition = Condition::undamaged;
  int joint_id = 0;
  Source source = Source::real;
};

struct Segment {
  std::vector<double> values;
  Condition condition = Condition::undamaged;
  int joint_id = 0;
  Source source = Source::real;
  int64_t segment_index = 0;

  int64_t length() const { return static_cast<int64_t>(values.size()); }
};

enum class SignalFormat { f64le, csv };

SignalFormat format_from_path(const std::filesystem::path& path);

// f64le: headerless little-endian 64-bit floats. csv: one value per line.
RawSignal load_signal(const std::filesystem::path& path, SignalFormat format,
                      const SignalMeta& meta);
void save_signal_f64(const std::filesystem::path& path,
                     const std::vector<double>& samples);

SignalMeta read_meta_sidecar(const std::filesystem::path& signal_path);
void write_meta_sidecar(const std::filesystem::path& signal_path,
                        const SignalMeta& meta);

// Non-overlapping contiguous windows; the trailing remainder is dropped.
std::vector<Segment> segment_signal(const RawSignal& raw, int64_t seg_len,
                                    bool shuffle, Rng& rng);

struct MinMaxScale {
  double scale = 1.0;
  double offset = 0.0;
  double apply(double x) const { return scale * x + offset; }
  double invert(double y) const { return (y - offset) / scale; }
};

// Affine map sending min -> lo and max -> hi; the returned scale makes
// the map invertible.
std::pair<Segment, MinMaxScale> normalize_minmax(const Segment& segment,
                                                 double lo = -1.0,
                                                 double hi = 1.0);

struct SurrogateMode {
  double frequency_hz = 0.0;
  double damping_ratio = 0.0;
  double amplitude = 0.0;
};

struct ModeShift {
  double frequency_scale = 1.0;
  double amplitude_scale = 1.0;
};

// Desk-scale stand-in for a laboratory record: damped sinusoids
// re-excited at random instants plus Gaussian noise. The damaged
// condition applies the per-mode shift to the modal parameters.
struct SurrogateSpec {
  std::vector<SurrogateMode> modes;
  double noise_std = 0.0;
  std::vector<ModeShift> damage_shift;  // one entry, or one per mode
  double duration_s = 1.0;
  double sample_rate_hz = 1024.0;
  double excitations_per_second = 1.0;

  void validate() const;
};

RawSignal synthesize_surrogate(const SurrogateSpec& spec, Condition condition,
                               Rng& rng, int joint_id = 1);

struct ScenarioSplit {
  std::vector<std::pair<Segment, int>> train;
  std::vector<std::pair<Segment, int>> test;
  int scenario_id = 1;
};

struct ScenarioCounts {
  int64_t train_per_class = 60;
  int64_t test_per_class = 15;
};

// Scenario 1 tests on real data for both classes; scenario 2 tests the
// damaged class on generated segments only. Sampling is without
// replacement; train and test never share a segment.
ScenarioSplit build_scenario(const std::vector<Segment>& undamaged,
                             const std::vector<Segment>& damaged_real,
                             const std::vector<Segment>& damaged_fake,
                             int scenario_id, Rng& rng,
                             const ScenarioCounts& counts = {});

// Pool persistence: one .f64 file per segment plus a JSON manifest of
// (filename, labels, segment_index).
void save_segment_pool(const std::filesystem::path& dir,
                       const std::vector<Segment>& segments);
std::vector<Segment> load_segment_pool(const std::filesystem::path& dir);

}  // namespace vibgan
