#include "vibgan/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "vibgan/checkpoint.hpp"
#include "vibgan/csv.hpp"
#include "vibgan/metrics.hpp"
#include "vibgan/svg_plot.hpp"

namespace vibgan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Collects a stage's outputs, hashes them, and commits the manifest.
class StageRecorder {
 public:
  StageRecorder(PipelineContext& ctx, std::string name, uint64_t seed)
      : ctx_(ctx), start_(now_seconds()) {
    stage_.name = std::move(name);
    stage_.config_hash = ctx.config_hash;
    stage_.seed = seed;
  }

  void add(const fs::path& relative) {
    stage_.outputs.push_back(
        {relative.generic_string(), hash_file_hex(ctx_.run_dir / relative)});
  }

  void add_dir(const fs::path& relative_dir) {
    std::vector<fs::path> files;
    for (const auto& entry :
         fs::recursive_directory_iterator(ctx_.run_dir / relative_dir)) {
      if (entry.is_regular_file()) {
        files.push_back(fs::relative(entry.path(), ctx_.run_dir));
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) add(f);
  }

  void commit() {
    stage_.wall_clock_s =
        ctx_.cfg.strict_determinism ? 0.0 : now_seconds() - start_;
    ctx_.manifest.upsert(std::move(stage_));
    ctx_.manifest.save(ctx_.run_dir / "run_manifest.json");
  }

 private:
  PipelineContext& ctx_;
  ManifestStage stage_;
  double start_;
};

uint64_t stage_seed(const PipelineContext& ctx, const std::string& name) {
  return derive_seed(ctx.cfg.seed, name);
}

bool skip_stage(PipelineContext& ctx, const std::string& name) {
  return !ctx.force &&
         ctx.manifest.stage_is_current(name, ctx.config_hash, ctx.run_dir);
}

fs::path case_dir(const CaseSpec& c) { return fs::path("cases") / c.name; }

fs::path scenario_dir(const CaseSpec& c, int scenario) {
  return case_dir(c) / ("scenario" + std::to_string(scenario));
}

std::vector<Segment> load_pool_checked(const PipelineContext& ctx,
                                       const fs::path& relative,
                                       const std::string& needed_by) {
  fs::path dir = ctx.run_dir / relative;
  if (!fs::exists(dir / "pool.json")) {
    throw IngestionError("stage '" + needed_by + "' needs missing artifact " +
                         (dir / "pool.json").string() +
                         "; run the upstream stage first");
  }
  return load_segment_pool(dir);
}

void write_gan_history_csv(const fs::path& path, const GanTrainHistory& history,
                           bool strict) {
  CsvWriter w(path, {"epoch", "critic_loss", "generator_loss", "fid_median",
                     "sigma_noise", "wall_clock_s"});
  for (const auto& r : history.epochs) {
    w.row(std::vector<double>{static_cast<double>(r.epoch), r.critic_loss,
                              r.generator_loss, r.fid_median, r.sigma_noise,
                              strict ? 0.0 : r.wall_clock_s});
  }
}

void write_dcnn_history_csv(const fs::path& path,
                            const ClassifierTrainHistory& history,
                            bool strict) {
  CsvWriter w(path, {"epoch", "loss", "wall_clock_s"});
  for (const auto& r : history.epochs) {
    w.row(std::vector<double>{static_cast<double>(r.epoch), r.loss,
                              strict ? 0.0 : r.wall_clock_s});
  }
}

// Minimal CSV reader for the plots stage: numeric fields, empty -> NaN.
std::vector<std::vector<double>> read_numeric_csv(const fs::path& path,
                                                  size_t expected_cols) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      row.push_back(field.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : std::stod(field));
    }
    while (row.size() < expected_cols) {
      row.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void plot_gan_history(const fs::path& csv_path, const fs::path& loss_svg,
                      const fs::path& fid_svg) {
  auto rows = read_numeric_csv(csv_path, 6);
  PlotSeries critic{"critic loss", {}, {}};
  PlotSeries generator{"generator loss", {}, {}};
  PlotSeries fid{"fid median", {}, {}};
  for (const auto& r : rows) {
    critic.x.push_back(r[0]);
    critic.y.push_back(r[1]);
    generator.x.push_back(r[0]);
    generator.y.push_back(r[2]);
    fid.x.push_back(r[0]);
    fid.y.push_back(r[3]);
  }
  write_line_chart_svg(loss_svg, "Training losses", "epoch", "loss",
                       {critic, generator});
  bool any_fid = std::any_of(fid.y.begin(), fid.y.end(),
                             [](double v) { return std::isfinite(v); });
  if (any_fid) {
    write_line_chart_svg(fid_svg, "FID trace", "epoch", "median per-pair FID",
                         {fid});
  }
}

void plot_dcnn_history(const fs::path& csv_path, const fs::path& svg_path) {
  auto rows = read_numeric_csv(csv_path, 3);
  PlotSeries loss{"bce loss", {}, {}};
  for (const auto& r : rows) {
    loss.x.push_back(r[0]);
    loss.y.push_back(r[1]);
  }
  write_line_chart_svg(svg_path, "Classifier training loss", "epoch", "loss",
                       {loss});
}

void plot_predictions(const fs::path& csv_path, const fs::path& svg_path) {
  auto rows = read_numeric_csv(csv_path, 4);
  std::vector<BarGroup> groups;
  for (const auto& r : rows) {
    BarGroup g;
    g.label = std::to_string(static_cast<int64_t>(r[0]));
    g.values = {r[1], r[2]};
    groups.push_back(std::move(g));
  }
  write_bar_chart_svg(svg_path, "Prediction scores vs ground truth",
                      {"score", "truth"}, groups);
}

void write_pdf_csv(const fs::path& path, const HistogramPdf& pdf) {
  CsvWriter w(path, {"lo", "hi", "count", "mass", "density"});
  for (const auto& b : pdf.bins) {
    w.row(std::vector<double>{b.lo, b.hi, static_cast<double>(b.count), b.mass,
                              b.density});
  }
}

HistogramPdf read_pdf_csv(const fs::path& path) {
  auto rows = read_numeric_csv(path, 5);
  HistogramPdf pdf;
  for (const auto& r : rows) {
    pdf.bins.push_back({r[0], r[1], static_cast<int64_t>(r[2]), r[3], r[4]});
  }
  return pdf;
}

struct ScenarioMetricsRow {
  std::string case_name;
  int scenario;
  double ca;
  double mae;
};

std::vector<ScenarioMetricsRow> collect_metrics(const PipelineContext& ctx) {
  std::vector<ScenarioMetricsRow> rows;
  for (const auto& c : ctx.cfg.cases) {
    for (int s : ctx.cfg.scenarios) {
      fs::path metrics_path = ctx.run_dir / scenario_dir(c, s) / "metrics.json";
      if (!fs::exists(metrics_path)) continue;
      std::ifstream in(metrics_path);
      json j;
      in >> j;
      rows.push_back({c.name, s, j.at("classification_accuracy").get<double>(),
                      j.at("mean_absolute_error").get<double>()});
    }
  }
  return rows;
}

}  // namespace

PipelineContext PipelineContext::open(PipelineConfig cfg, bool force) {
  cfg.validate();
  PipelineContext ctx;
  ctx.cfg = std::move(cfg);
  ctx.run_dir = ctx.cfg.out_dir;
  ctx.force = force;
  ctx.config_hash = hash_string_hex(ctx.cfg.canonical_json());
  fs::create_directories(ctx.run_dir);
  fs::path manifest_path = ctx.run_dir / "run_manifest.json";
  if (fs::exists(manifest_path)) {
    ctx.manifest = RunManifest::load(manifest_path);
  }
  ctx.manifest.tool_version = kToolVersion;
  ctx.manifest.config_hash = ctx.config_hash;
  return ctx;
}

namespace stages {

const CaseSpec& find_case(const PipelineConfig& cfg, const std::string& name) {
  for (const auto& c : cfg.cases) {
    if (c.name == name) return c;
  }
  throw ConfigError("unknown case '" + name + "'");
}

bool ingest(PipelineContext& ctx) {
  const std::string name = "ingest";
  if (skip_stage(ctx, name)) return false;
  StageRecorder rec(ctx, name, stage_seed(ctx, name));

  RawSignal undamaged, damaged;
  if (ctx.cfg.surrogate) {
    Rng und_rng(stage_seed(ctx, "ingest/undamaged"));
    Rng dam_rng(stage_seed(ctx, "ingest/damaged"));
    undamaged =
        synthesize_surrogate(*ctx.cfg.surrogate, Condition::undamaged, und_rng);
    damaged =
        synthesize_surrogate(*ctx.cfg.surrogate, Condition::damaged, dam_rng);

    fs::create_directories(ctx.run_dir / "raw");
    for (const auto& [raw, file] :
         {std::pair<const RawSignal&, const char*>{undamaged, "undamaged.f64"},
          std::pair<const RawSignal&, const char*>{damaged, "damaged.f64"}}) {
      fs::path p = ctx.run_dir / "raw" / file;
      save_signal_f64(p, raw.samples);
      SignalMeta meta{raw.sample_rate_hz, raw.condition, raw.joint_id,
                      raw.source};
      write_meta_sidecar(p, meta);
      rec.add(fs::path("raw") / file);
      rec.add(fs::path("raw") / (std::string(file) + ".meta"));
    }
  } else {
    auto load_with_sidecar = [](const fs::path& p, Condition fallback) {
      SignalMeta meta;
      fs::path sidecar = p;
      sidecar += ".meta";
      if (fs::exists(sidecar)) {
        meta = read_meta_sidecar(p);
      } else {
        meta.condition = fallback;
      }
      return load_signal(p, format_from_path(p), meta);
    };
    undamaged = load_with_sidecar(ctx.cfg.undamaged_path, Condition::undamaged);
    damaged = load_with_sidecar(ctx.cfg.damaged_path, Condition::damaged);
    if (undamaged.condition != Condition::undamaged ||
        damaged.condition != Condition::damaged) {
      throw IngestionError("signal metadata contradicts its role in the "
                           "config (condition labels are swapped?)");
    }
  }

  Rng seg_und(stage_seed(ctx, "ingest/segment-undamaged"));
  Rng seg_dam(stage_seed(ctx, "ingest/segment-damaged"));
  auto und_pool = segment_signal(undamaged, ctx.cfg.seg_len, true, seg_und);
  auto dam_pool = segment_signal(damaged, ctx.cfg.seg_len, true, seg_dam);
  save_segment_pool(ctx.run_dir / "pools" / "undamaged", und_pool);
  save_segment_pool(ctx.run_dir / "pools" / "damaged", dam_pool);
  rec.add_dir(fs::path("pools") / "undamaged");
  rec.add_dir(fs::path("pools") / "damaged");
  rec.commit();
  return true;
}

bool train_gan(PipelineContext& ctx, const CaseSpec& case_spec) {
  const std::string name = "train-gan/" + case_spec.name;
  if (skip_stage(ctx, name)) return false;
  uint64_t seed = stage_seed(ctx, name);
  StageRecorder rec(ctx, name, seed);

  auto damaged = load_pool_checked(ctx, fs::path("pools") / "damaged", name);

  GanConfig gan_cfg = ctx.cfg.gan;
  gan_cfg.seg_len = ctx.cfg.seg_len;
  gan_cfg.epochs = case_spec.epochs;
  gan_cfg.seed = seed;

  GanEvalHook hook;
  if (gan_cfg.eval_interval > 0) {
    hook = make_fid_eval_hook(damaged, ctx.cfg.eval.fid_pairs,
                              stage_seed(ctx, name + "/fid"));
  }

  auto result = vibgan::train_gan(gan_cfg, damaged, hook);

  fs::path dir = case_dir(case_spec);
  fs::create_directories(ctx.run_dir / dir);
  save_gan_checkpoint(ctx.run_dir / dir / "gan_checkpoint.bin",
                      result.checkpoint);
  write_gan_history_csv(ctx.run_dir / dir / "gan_history.csv", result.history,
                        ctx.cfg.strict_determinism);
  if (result.diverged) {
    // checkpoint and history stay on disk for post-mortem; the stage is
    // not committed so a resume will retry it
    throw DivergenceError("train-gan/" + case_spec.name + ": " +
                          result.divergence_info);
  }
  plot_gan_history(ctx.run_dir / dir / "gan_history.csv",
                   ctx.run_dir / dir / "gan_loss.svg",
                   ctx.run_dir / dir / "gan_fid.svg");

  rec.add(dir / "gan_checkpoint.bin");
  rec.add(dir / "gan_history.csv");
  rec.add(dir / "gan_loss.svg");
  if (fs::exists(ctx.run_dir / dir / "gan_fid.svg")) {
    rec.add(dir / "gan_fid.svg");
  }
  rec.commit();
  return true;
}

bool generate(PipelineContext& ctx, const CaseSpec& case_spec) {
  const std::string name = "generate/" + case_spec.name;
  if (skip_stage(ctx, name)) return false;
  uint64_t seed = stage_seed(ctx, name);
  StageRecorder rec(ctx, name, seed);

  fs::path ckpt = ctx.run_dir / case_dir(case_spec) / "gan_checkpoint.bin";
  if (!fs::exists(ckpt)) {
    throw IngestionError("stage '" + name + "' needs missing artifact " +
                         ckpt.string() + "; run train-gan first");
  }
  auto checkpoint = load_gan_checkpoint(ckpt);
  Rng rng(seed);
  auto fakes = vibgan::generate(checkpoint, ctx.cfg.counts.generate_n, rng);
  save_segment_pool(ctx.run_dir / case_dir(case_spec) / "fakes", fakes);
  rec.add_dir(case_dir(case_spec) / "fakes");
  rec.commit();
  return true;
}

bool eval(PipelineContext& ctx, const CaseSpec& case_spec) {
  const std::string name = "eval/" + case_spec.name;
  if (skip_stage(ctx, name)) return false;
  uint64_t seed = stage_seed(ctx, name);
  StageRecorder rec(ctx, name, seed);

  auto real_pool = load_pool_checked(ctx, fs::path("pools") / "damaged", name);
  auto fakes =
      load_pool_checked(ctx, case_dir(case_spec) / "fakes", name);

  fs::path dir = case_dir(case_spec) / "eval";
  fs::create_directories(ctx.run_dir / dir);
  json report;

  // ---- FID scores (per-pair scalar form) ----
  Rng rng(seed);
  std::vector<double> fid_scores;
  {
    CsvWriter w(ctx.run_dir / dir / "fid_scores.csv",
                {"gen_index", "real_index", "value"});
    if (ctx.cfg.eval.all_pairs_fid) {
      for (size_t g = 0; g < fakes.size(); ++g) {
        for (size_t r = 0; r < real_pool.size(); ++r) {
          double v = fid_pair(fakes[g], real_pool[r]);
          fid_scores.push_back(v);
          w.row(std::vector<double>{static_cast<double>(g),
                                    static_cast<double>(r), v});
        }
      }
    } else {
      for (size_t g = 0; g < fakes.size(); ++g) {
        int64_t r = rng.uniform_int(0, static_cast<int64_t>(real_pool.size()) - 1);
        double v = fid_pair(fakes[g], real_pool[static_cast<size_t>(r)]);
        fid_scores.push_back(v);
        w.row(std::vector<double>{static_cast<double>(g),
                                  static_cast<double>(r), v});
      }
    }
  }
  auto fid_pdf = histogram_pdf(fid_scores, ctx.cfg.eval.bins);
  auto fid_summary = summarize(fid_scores, fid_pdf);
  write_pdf_csv(ctx.run_dir / dir / "fid_pdf.csv", fid_pdf);
  auto fid_kde = gaussian_kde(fid_scores);
  write_histogram_svg(ctx.run_dir / dir / "fid_pdf.svg",
                      "PDF of per-pair FID scores", "FID", fid_pdf, &fid_kde);
  report["fid"] = {{"mean", fid_summary.mean},
                   {"variance", fid_summary.variance},
                   {"pdf_mode", fid_summary.pdf_mode},
                   {"pairs", fid_scores.size()}};

  // ---- multivariate FID ----
  double fid_mv = fid_multivariate(real_pool, fakes, ctx.cfg.eval.fid_dim);
  report["fid_multivariate"] = {{"dim", ctx.cfg.eval.fid_dim},
                                {"value", fid_mv}};

  // ---- creativity / diversity ----
  auto creativity =
      creativity_report(fakes, real_pool, 0.8, ctx.cfg.eval.bins);
  {
    CsvWriter w(ctx.run_dir / dir / "creativity_scores.csv",
                {"gen_index", "real_index", "value"});
    size_t idx = 0;
    for (size_t g = 0; g < fakes.size(); ++g) {
      for (size_t r = 0; r < real_pool.size(); ++r) {
        w.row(std::vector<double>{static_cast<double>(g),
                                  static_cast<double>(r),
                                  creativity.scores[idx++]});
      }
    }
  }
  write_pdf_csv(ctx.run_dir / dir / "creativity_pdf.csv", creativity.pdf);
  auto cre_kde = gaussian_kde(creativity.scores);
  write_histogram_svg(ctx.run_dir / dir / "creativity_pdf.svg",
                      "Creativity: SSIM generated vs real", "SSIM",
                      creativity.pdf, &cre_kde);

  auto diversity = diversity_report(fakes, 0.8, ctx.cfg.eval.bins);
  {
    CsvWriter w(ctx.run_dir / dir / "diversity_scores.csv",
                {"i", "j", "value"});
    size_t idx = 0;
    for (size_t i = 0; i < fakes.size(); ++i) {
      for (size_t k = i + 1; k < fakes.size(); ++k) {
        w.row(std::vector<double>{static_cast<double>(i),
                                  static_cast<double>(k),
                                  diversity.scores[idx++]});
      }
    }
  }
  write_pdf_csv(ctx.run_dir / dir / "diversity_pdf.csv", diversity.pdf);
  auto div_kde = gaussian_kde(diversity.scores);
  write_histogram_svg(ctx.run_dir / dir / "diversity_pdf.svg",
                      "Diversity: SSIM within generated set", "SSIM",
                      diversity.pdf, &div_kde);

  report["creativity"] = {{"threshold", creativity.threshold},
                          {"duplicates", creativity.duplicates.size()},
                          {"mean", creativity.summary.mean},
                          {"pdf_mode", creativity.summary.pdf_mode},
                          {"verdict", creativity.duplicates.empty()
                                          ? "creative"
                                          : "contains duplicates"}};
  report["diversity"] = {{"threshold", diversity.threshold},
                         {"duplicates", diversity.duplicates.size()},
                         {"mean", diversity.summary.mean},
                         {"pdf_mode", diversity.summary.pdf_mode},
                         {"verdict", diversity.duplicates.empty()
                                         ? "diverse"
                                         : "contains duplicates"}};

  // ---- box stats of the lowest- and highest-FID pairs ----
  {
    size_t lo_idx = 0, hi_idx = 0;
    for (size_t i = 1; i < fid_scores.size(); ++i) {
      if (fid_scores[i] < fid_scores[lo_idx]) lo_idx = i;
      if (fid_scores[i] > fid_scores[hi_idx]) hi_idx = i;
    }
    auto pair_of = [&](size_t flat) -> std::pair<size_t, size_t> {
      if (ctx.cfg.eval.all_pairs_fid) {
        return {flat / real_pool.size(), flat % real_pool.size()};
      }
      // sampled mode: one row per generated segment; recover partner
      auto rows = read_numeric_csv(ctx.run_dir / dir / "fid_scores.csv", 3);
      return {static_cast<size_t>(rows[flat][0]),
              static_cast<size_t>(rows[flat][1])};
    };
    auto [lo_g, lo_r] = pair_of(lo_idx);
    auto [hi_g, hi_r] = pair_of(hi_idx);

    std::vector<std::pair<std::string, BoxStats>> boxes = {
        {"real (low FID)", box_stats(real_pool[lo_r].values)},
        {"generated (low FID)", box_stats(fakes[lo_g].values)},
        {"real (high FID)", box_stats(real_pool[hi_r].values)},
        {"generated (high FID)", box_stats(fakes[hi_g].values)},
    };
    CsvWriter w(ctx.run_dir / dir / "box_stats.csv",
                {"label", "min", "q1", "median", "q3", "max", "whisker_low",
                 "whisker_high", "n_outliers"});
    for (const auto& [label, s] : boxes) {
      w.row(std::vector<std::string>{
          label, csv_number(s.min), csv_number(s.q1), csv_number(s.median),
          csv_number(s.q3), csv_number(s.max), csv_number(s.whisker_low),
          csv_number(s.whisker_high), std::to_string(s.outliers.size())});
    }
    write_box_plot_svg(ctx.run_dir / dir / "box_plot.svg",
                       "Lowest / highest FID pairs", boxes);
    report["box_pairs"] = {{"low_fid", fid_scores[lo_idx]},
                           {"high_fid", fid_scores[hi_idx]}};
  }

  {
    std::ofstream out(ctx.run_dir / dir / "report.json", std::ios::trunc);
    out << report.dump(2) << "\n";
  }

  rec.add_dir(dir);
  rec.commit();
  return true;
}

namespace {

std::vector<std::pair<Segment, int>> normalize_labeled(
    const std::vector<std::pair<Segment, int>>& items) {
  std::vector<std::pair<Segment, int>> out;
  out.reserve(items.size());
  for (const auto& [seg, label] : items) {
    out.emplace_back(normalize_minmax(seg).first, label);
  }
  return out;
}

std::vector<Segment> labeled_to_pool(
    const std::vector<std::pair<Segment, int>>& items) {
  std::vector<Segment> pool;
  pool.reserve(items.size());
  int64_t index = 0;
  for (const auto& [seg, label] : items) {
    Segment s = seg;
    s.segment_index = index++;  // stable order within the persisted split
    pool.push_back(std::move(s));
  }
  return pool;
}

std::vector<std::pair<Segment, int>> pool_to_labeled(
    const std::vector<Segment>& pool) {
  std::vector<std::pair<Segment, int>> items;
  items.reserve(pool.size());
  for (const auto& s : pool) {
    items.emplace_back(s, static_cast<int>(s.condition));
  }
  return items;
}

}  // namespace

bool train_dcnn(PipelineContext& ctx, const CaseSpec& case_spec, int scenario) {
  const std::string name =
      "train-dcnn/" + case_spec.name + "/s" + std::to_string(scenario);
  if (skip_stage(ctx, name)) return false;
  uint64_t seed = stage_seed(ctx, name);
  StageRecorder rec(ctx, name, seed);

  auto undamaged =
      load_pool_checked(ctx, fs::path("pools") / "undamaged", name);
  auto damaged_real =
      load_pool_checked(ctx, fs::path("pools") / "damaged", name);
  std::vector<Segment> damaged_fake;
  if (scenario == 2) {
    damaged_fake = load_pool_checked(ctx, case_dir(case_spec) / "fakes", name);
  }

  ScenarioCounts counts{ctx.cfg.counts.train_per_class,
                        ctx.cfg.counts.test_per_class};
  Rng split_rng(stage_seed(ctx, name + "/split"));
  auto split = build_scenario(undamaged, damaged_real, damaged_fake, scenario,
                              split_rng, counts);
  // The classifier consumes min-max-normalized segments (the GAN trains
  // on raw ones).
  split.train = normalize_labeled(split.train);
  split.test = normalize_labeled(split.test);

  fs::path dir = scenario_dir(case_spec, scenario);
  fs::create_directories(ctx.run_dir / dir);
  save_segment_pool(ctx.run_dir / dir / "split_train",
                    labeled_to_pool(split.train));
  save_segment_pool(ctx.run_dir / dir / "split_test",
                    labeled_to_pool(split.test));

  ClassifierConfig cls_cfg = ctx.cfg.classifier;
  cls_cfg.seg_len = ctx.cfg.seg_len;
  cls_cfg.seed = seed;

  auto result = train_classifier(cls_cfg, split);
  save_classifier_checkpoint(ctx.run_dir / dir / "dcnn_checkpoint.bin",
                             result.checkpoint);
  write_dcnn_history_csv(ctx.run_dir / dir / "dcnn_history.csv", result.history,
                         ctx.cfg.strict_determinism);
  if (result.diverged) {
    throw DivergenceError(name + ": " + result.divergence_info);
  }
  plot_dcnn_history(ctx.run_dir / dir / "dcnn_history.csv",
                    ctx.run_dir / dir / "dcnn_loss.svg");

  rec.add(dir / "dcnn_checkpoint.bin");
  rec.add(dir / "dcnn_history.csv");
  rec.add(dir / "dcnn_loss.svg");
  rec.add_dir(dir / "split_train");
  rec.add_dir(dir / "split_test");
  rec.commit();
  return true;
}

bool test_dcnn(PipelineContext& ctx, const CaseSpec& case_spec, int scenario) {
  const std::string name =
      "test-dcnn/" + case_spec.name + "/s" + std::to_string(scenario);
  if (skip_stage(ctx, name)) return false;
  StageRecorder rec(ctx, name, stage_seed(ctx, name));

  fs::path dir = scenario_dir(case_spec, scenario);
  fs::path ckpt_path = ctx.run_dir / dir / "dcnn_checkpoint.bin";
  if (!fs::exists(ckpt_path)) {
    throw IngestionError("stage '" + name + "' needs missing artifact " +
                         ckpt_path.string() + "; run train-dcnn first");
  }
  auto checkpoint = load_classifier_checkpoint(ckpt_path);
  auto test_pool = load_pool_checked(ctx, dir / "split_test", name);
  auto metrics = test_classifier(checkpoint, pool_to_labeled(test_pool));

  {
    CsvWriter w(ctx.run_dir / dir / "predictions.csv",
                {"id", "score", "truth", "label"});
    for (const auto& r : metrics.records) {
      w.row(std::vector<double>{static_cast<double>(r.id), r.score,
                                static_cast<double>(r.truth),
                                static_cast<double>(r.label)});
    }
  }
  {
    json j;
    j["classification_accuracy"] = metrics.classification_accuracy;
    j["mean_absolute_error"] = metrics.mean_absolute_error;
    j["threshold"] = checkpoint.cfg.threshold;
    j["records"] = metrics.records.size();
    std::ofstream out(ctx.run_dir / dir / "metrics.json", std::ios::trunc);
    out << j.dump(2) << "\n";
  }
  plot_predictions(ctx.run_dir / dir / "predictions.csv",
                   ctx.run_dir / dir / "prediction_bars.svg");

  rec.add(dir / "predictions.csv");
  rec.add(dir / "metrics.json");
  rec.add(dir / "prediction_bars.svg");
  rec.commit();
  return true;
}

void summary(PipelineContext& ctx) {
  auto rows = collect_metrics(ctx);
  if (rows.empty()) {
    throw IngestionError("summary: no scenario metrics found; run the "
                         "test-dcnn stages first");
  }
  {
    CsvWriter w(ctx.run_dir / "summary.csv",
                {"case", "scenario", "classification_accuracy",
                 "mean_absolute_error"});
    for (const auto& r : rows) {
      w.row(std::vector<std::string>{r.case_name, std::to_string(r.scenario),
                                     csv_number(r.ca), csv_number(r.mae)});
    }
  }
  std::vector<BarGroup> groups;
  for (const auto& r : rows) {
    groups.push_back(
        {r.case_name + "/s" + std::to_string(r.scenario), {r.ca, r.mae}});
  }
  write_bar_chart_svg(ctx.run_dir / "summary.svg",
                      "Classification accuracy and MAE", {"CA", "MAE"}, groups);

  StageRecorder rec(ctx, "summary", stage_seed(ctx, "summary"));
  rec.add("summary.csv");
  rec.add("summary.svg");
  rec.commit();
}

void plots(PipelineContext& ctx) {
  for (const auto& c : ctx.cfg.cases) {
    fs::path dir = ctx.run_dir / case_dir(c);
    if (fs::exists(dir / "gan_history.csv")) {
      plot_gan_history(dir / "gan_history.csv", dir / "gan_loss.svg",
                       dir / "gan_fid.svg");
    }
    fs::path eval_dir = dir / "eval";
    for (const char* kind : {"fid", "creativity", "diversity"}) {
      fs::path csv = eval_dir / (std::string(kind) + "_pdf.csv");
      if (fs::exists(csv)) {
        auto pdf = read_pdf_csv(csv);
        write_histogram_svg(eval_dir / (std::string(kind) + "_pdf.svg"),
                            std::string(kind) + " PDF",
                            std::string(kind) == "fid" ? "FID" : "SSIM", pdf);
      }
    }
    for (int s : ctx.cfg.scenarios) {
      fs::path sdir = ctx.run_dir / scenario_dir(c, s);
      if (fs::exists(sdir / "dcnn_history.csv")) {
        plot_dcnn_history(sdir / "dcnn_history.csv", sdir / "dcnn_loss.svg");
      }
      if (fs::exists(sdir / "predictions.csv")) {
        plot_predictions(sdir / "predictions.csv",
                         sdir / "prediction_bars.svg");
      }
    }
  }
  if (fs::exists(ctx.run_dir / "summary.csv")) {
    auto rows = collect_metrics(ctx);
    if (!rows.empty()) {
      std::vector<BarGroup> groups;
      for (const auto& r : rows) {
        groups.push_back(
            {r.case_name + "/s" + std::to_string(r.scenario), {r.ca, r.mae}});
      }
      write_bar_chart_svg(ctx.run_dir / "summary.svg",
                          "Classification accuracy and MAE", {"CA", "MAE"},
                          groups);
    }
  }
}

void pipeline(PipelineContext& ctx) {
  ingest(ctx);
  for (const auto& c : ctx.cfg.cases) {
    train_gan(ctx, c);
    generate(ctx, c);
    eval(ctx, c);
    for (int s : ctx.cfg.scenarios) {
      train_dcnn(ctx, c, s);
      test_dcnn(ctx, c, s);
    }
  }
  summary(ctx);
}

}  // namespace stages

}  // namespace vibgan
