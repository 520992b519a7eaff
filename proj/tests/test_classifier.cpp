#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "test_util.hpp"
#include "vibgan/checkpoint.hpp"
#include "vibgan/classifier.hpp"

using namespace vibgan;
namespace tu = testutil;

namespace {

ClassifierConfig tiny_config() {
  ClassifierConfig cfg;
  cfg.seg_len = 32;
  cfg.channel_widths = {8, 6, 4, 2, 1};
  cfg.minibatch = 8;
  cfg.epochs = 40;
  cfg.lr = 2e-3;
  cfg.seed = 3;
  return cfg;
}

// Two separable classes: slow sine (undamaged) vs fast sine (damaged),
// min-max normalized per segment like the production path.
Segment separable_segment(int label, int64_t len, Rng& rng, int64_t index) {
  Segment s;
  s.values.resize(static_cast<size_t>(len));
  double freq = label == 0 ? 0.4 : 1.9;
  double phase = rng.uniform(0.0, 6.28);
  for (int64_t k = 0; k < len; ++k) {
    s.values[static_cast<size_t>(k)] =
        std::sin(freq * static_cast<double>(k) + phase) +
        rng.normal(0.0, 0.05);
  }
  s.condition = label == 0 ? Condition::undamaged : Condition::damaged;
  s.source = Source::real;
  s.segment_index = index;
  auto [normalized, scale] = normalize_minmax(s);
  return normalized;
}

ScenarioSplit separable_split(const ClassifierConfig& cfg, int64_t train_per_class,
                              int64_t test_per_class, uint64_t seed) {
  Rng rng(seed);
  ScenarioSplit split;
  split.scenario_id = 1;
  int64_t index = 0;
  for (int label : {0, 1}) {
    for (int64_t i = 0; i < train_per_class; ++i) {
      split.train.emplace_back(separable_segment(label, cfg.seg_len, rng, index++),
                               label);
    }
    for (int64_t i = 0; i < test_per_class; ++i) {
      split.test.emplace_back(separable_segment(label, cfg.seg_len, rng, index++),
                              label);
    }
  }
  return split;
}

}  // namespace

TEST_CASE("bce_loss point values") {
  Tensor half = Tensor::full({4}, 0.5);
  Tensor truths = Tensor::from({4}, {0.0, 1.0, 0.0, 1.0});
  CHECK(bce_loss(half, truths).item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  CHECK(bce_loss(Tensor::from({1}, {0.9}), Tensor::from({1}, {1.0})).item() ==
        doctest::Approx(-std::log(0.9)).epsilon(1e-12));

  Tensor perfect = Tensor::from({2}, {1.0, 0.0});
  Tensor t2 = Tensor::from({2}, {1.0, 0.0});
  CHECK(bce_loss(perfect, t2).item() < 1e-10);

  CHECK_THROWS_AS(bce_loss(Tensor::from({1}, {1.5}), Tensor::from({1}, {1.0})),
                  ContractError);
  CHECK_THROWS_AS(bce_loss(Tensor::from({1}, {0.5}), Tensor::from({1}, {0.4})),
                  ContractError);
}

TEST_CASE("bce_loss gradient matches finite differences") {
  Rng rng(500);
  for (int i = 0; i < 20; ++i) {
    Tensor scores = Tensor::zeros({6});
    Tensor truths = Tensor::zeros({6});
    for (int64_t k = 0; k < 6; ++k) {
      scores.mutable_data()[k] = rng.uniform(0.05, 0.95);
      truths.mutable_data()[k] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    }
    tu::check_gradients(
        [truths](const std::vector<Tensor>& in) {
          return bce_loss(in[0], truths);
        },
        {scores}, rng);
  }
}

TEST_CASE("threshold semantics: 0.48 is undamaged at threshold 0.49") {
  CHECK(assign_label(0.48, 0.49) == 0);
  CHECK(assign_label(0.49, 0.49) == 0);  // strict inequality
  CHECK(assign_label(0.491, 0.49) == 1);
}

TEST_CASE("evaluate: CA and MAE worked examples") {
  std::vector<PredictionRecord> perfect;
  for (int i = 0; i < 15; ++i) {
    perfect.push_back({i, i % 2 == 0 ? 0.1 : 0.9, i % 2 == 0 ? 0 : 1, 0});
  }
  auto m = evaluate(perfect, 0.49);
  CHECK(m.classification_accuracy == doctest::Approx(1.0));

  std::vector<PredictionRecord> two = {{0, 0.1, 0, 0}, {1, 0.9, 1, 0}};
  auto m2 = evaluate(two, 0.49);
  CHECK(m2.mean_absolute_error == doctest::Approx(0.1).epsilon(1e-12));

  // 29 of 30 correct, matching the reported 97% figure
  std::vector<PredictionRecord> records;
  for (int i = 0; i < 30; ++i) {
    int truth = i < 15 ? 0 : 1;
    double score = truth == 0 ? 0.05 : 0.95;
    if (i == 7) score = 0.95;  // one wrong undamaged
    records.push_back({i, score, truth, 0});
  }
  auto m3 = evaluate(records, 0.49);
  CHECK(m3.classification_accuracy == doctest::Approx(29.0 / 30.0));
  CHECK(m3.classification_accuracy == doctest::Approx(0.967).epsilon(1e-3));
}

TEST_CASE("evaluate is permutation invariant and threshold monotone") {
  Rng rng(600);
  std::vector<PredictionRecord> records;
  for (int i = 0; i < 40; ++i) {
    records.push_back({i, rng.uniform(), rng.uniform() < 0.5 ? 0 : 1, 0});
  }
  auto a = evaluate(records, 0.49);
  std::reverse(records.begin(), records.end());
  auto b = evaluate(records, 0.49);
  CHECK(a.classification_accuracy == b.classification_accuracy);
  CHECK(a.mean_absolute_error == doctest::Approx(b.mean_absolute_error));

  int64_t prev_positive = 41;
  for (double threshold : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    auto m = evaluate(records, threshold);
    int64_t positives = 0;
    for (const auto& r : m.records) positives += r.label;
    CHECK(positives <= prev_positive);
    prev_positive = positives;
  }
}

TEST_CASE("classifier reuses the critic layer shapes exactly") {
  ClassifierConfig cfg = tiny_config();
  Rng rng(1);
  auto net = build_critic(cfg.critic_view(), CriticHead::sigmoid, false, rng);
  GanConfig gan_cfg;
  gan_cfg.seg_len = cfg.seg_len;
  gan_cfg.channel_widths = cfg.channel_widths;
  auto critic = build_critic(gan_cfg, CriticHead::score, true, rng);
  REQUIRE(net.layers.size() == critic.layers.size());
  for (size_t i = 0; i < net.layers.size(); ++i) {
    CHECK(net.layers[i].kernel.shape() == critic.layers[i].kernel.shape());
    CHECK(net.layers[i].bias.shape() == critic.layers[i].bias.shape());
    CHECK(net.layers[i].stride == critic.layers[i].stride);
    CHECK(net.layers[i].padding == critic.layers[i].padding);
  }
  CHECK(net.head == CriticHead::sigmoid);
  CHECK_FALSE(net.use_dropout);
}

TEST_CASE("vanishing lr keeps parameters fixed and loss constant") {
  ClassifierConfig cfg = tiny_config();
  cfg.lr = 1e-300;
  cfg.adamw_weight_decay = 0.0;
  cfg.epochs = 4;
  auto split = separable_split(cfg, 8, 2, 10);

  Rng ref_rng(cfg.seed);
  auto ref = build_critic(cfg.critic_view(), CriticHead::sigmoid, false, ref_rng);

  auto result = train_classifier(cfg, split);
  REQUIRE(!result.diverged);
  // unchanged up to lr-order terms (the AdamW update magnitude is ~lr)
  auto pa = result.checkpoint.net.parameters();
  auto pb = ref.parameters();
  for (size_t i = 0; i < pa.size(); ++i) {
    for (int64_t k = 0; k < pa[i]->numel(); ++k) {
      CHECK(std::abs(pa[i]->flat()[static_cast<size_t>(k)] -
                     pb[i]->flat()[static_cast<size_t>(k)]) < 1e-290);
    }
  }
  for (const auto& rec : result.history.epochs) {
    CHECK(rec.loss == doctest::Approx(result.history.epochs[0].loss));
  }
}

TEST_CASE("training separates the two-frequency problem and is deterministic") {
  ClassifierConfig cfg = tiny_config();
  auto split = separable_split(cfg, 16, 4, 11);
  auto a = train_classifier(cfg, split);
  auto b = train_classifier(cfg, split);
  REQUIRE(!a.diverged);

  REQUIRE(a.history.epochs.size() == static_cast<size_t>(cfg.epochs));
  for (size_t i = 0; i < a.history.epochs.size(); ++i) {
    CHECK(a.history.epochs[i].loss == b.history.epochs[i].loss);
  }
  CHECK(a.history.epochs.back().loss < a.history.epochs.front().loss);
  CHECK(a.history.epochs.back().loss < 0.2);

  auto metrics = test_classifier(a.checkpoint, split.test);
  CHECK(metrics.classification_accuracy >= 0.75);
}

TEST_CASE("predict is deterministic, bounded, and strict about normalization") {
  ClassifierConfig cfg = tiny_config();
  cfg.epochs = 2;
  auto split = separable_split(cfg, 8, 2, 12);
  auto result = train_classifier(cfg, split);

  const Segment& seg = split.test[0].first;
  double s1 = predict(result.checkpoint, seg);
  double s2 = predict(result.checkpoint, seg);
  CHECK(s1 == s2);
  CHECK(s1 > 0.0);
  CHECK(s1 < 1.0);

  Segment bad = seg;
  bad.values[0] = 3.5;
  CHECK_THROWS_AS(predict(result.checkpoint, bad), ContractError);
  CHECK_NOTHROW(predict(result.checkpoint, bad, /*strict=*/false));

  Segment wrong_len = seg;
  wrong_len.values.pop_back();
  CHECK_THROWS_AS(predict(result.checkpoint, wrong_len), DimensionError);
}

TEST_CASE("classifier checkpoint round trip preserves predictions bit-exactly") {
  ClassifierConfig cfg = tiny_config();
  cfg.epochs = 3;
  auto split = separable_split(cfg, 8, 2, 13);
  auto result = train_classifier(cfg, split);

  auto dir = std::filesystem::temp_directory_path() / "vibgan_classifier_test";
  std::filesystem::create_directories(dir);
  auto path = dir / "dcnn.ckpt";
  save_classifier_checkpoint(path, result.checkpoint);
  auto loaded = load_classifier_checkpoint(path);

  CHECK(loaded.cfg.threshold == cfg.threshold);
  for (const auto& [seg, label] : split.test) {
    CHECK(predict(loaded, seg) == predict(result.checkpoint, seg));
  }
  CHECK_THROWS_AS(load_gan_checkpoint(path), ContractError);
}
