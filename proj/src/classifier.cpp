#include "vibgan/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace vibgan {

namespace {

constexpr double kBceClamp = 1e-12;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

void ClassifierConfig::validate() const {
  critic_view().validate();
  if (lr <= 0.0) throw ConfigError("classifier lr must be positive");
  if (minibatch < 1) throw ConfigError("classifier minibatch must be >= 1");
  if (epochs < 1) throw ConfigError("classifier epochs must be >= 1");
  if (threshold <= 0.0 || threshold >= 1.0) {
    throw ConfigError("classification threshold must lie in (0,1)");
  }
}

GanConfig ClassifierConfig::critic_view() const {
  GanConfig view;
  view.seg_len = seg_len;
  view.channel_widths = channel_widths;
  view.critic_dropout_p = 0.0;  // no dropout in the classifier
  view.minibatch = std::max<int64_t>(minibatch, 2);
  view.seed = seed;
  return view;
}

Tensor bce_loss(const Tensor& scores, const Tensor& truths) {
  if (scores.shape() != truths.shape()) {
    throw DimensionError("bce_loss: scores " + shape_str(scores.shape()) +
                         " vs truths " + shape_str(truths.shape()));
  }
  for (int64_t i = 0; i < truths.numel(); ++i) {
    double t = truths.flat()[static_cast<size_t>(i)];
    if (t != 0.0 && t != 1.0) {
      throw ContractError("bce_loss: truths must be 0 or 1");
    }
  }
  for (int64_t i = 0; i < scores.numel(); ++i) {
    double s = scores.flat()[static_cast<size_t>(i)];
    if (s <= -kBceClamp || s >= 1.0 + kBceClamp) {
      throw ContractError("bce_loss: score " + std::to_string(s) +
                          " lies outside the clamping window");
    }
  }
  Tensor s = ops::clamp(scores, kBceClamp, 1.0 - kBceClamp);
  Tensor pos = ops::mul(truths, ops::log(s));
  Tensor neg_t = ops::add_scalar(ops::neg(truths), 1.0);
  Tensor neg = ops::mul(neg_t, ops::log(ops::add_scalar(ops::neg(s), 1.0)));
  return ops::neg(ops::mean(ops::add(pos, neg)));
}

TrainClassifierResult train_classifier(const ClassifierConfig& cfg,
                                       const ScenarioSplit& split) {
  cfg.validate();
  const int64_t n = static_cast<int64_t>(split.train.size());
  if (n == 0) throw AllocationError("train_classifier: empty training set");
  if (n < cfg.minibatch) {
    throw AllocationError("train_classifier: " + std::to_string(n) +
                          " training segments but minibatch is " +
                          std::to_string(cfg.minibatch));
  }
  for (const auto& [seg, label] : split.train) {
    if (seg.length() != cfg.seg_len) {
      throw DimensionError("train_classifier: segment length " +
                           std::to_string(seg.length()) + " != seg_len " +
                           std::to_string(cfg.seg_len));
    }
  }

  Rng rng(cfg.seed);
  TrainClassifierResult result;
  result.checkpoint.cfg = cfg;
  result.checkpoint.net =
      build_critic(cfg.critic_view(), CriticHead::sigmoid, false, rng);
  CriticParams& net = result.checkpoint.net;
  result.checkpoint.opt = AdamW(AdamWHyper{cfg.lr, cfg.adamw_beta1,
                                           cfg.adamw_beta2, cfg.adamw_epsilon,
                                           cfg.adamw_weight_decay});
  AdamW& opt = result.checkpoint.opt;
  auto params = net.parameters();

  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const int64_t batches = n / cfg.minibatch;
  const double start_time = now_seconds();

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (int64_t mb = 0; mb < batches; ++mb) {
      Tensor batch = Tensor::zeros({cfg.minibatch, 1, cfg.seg_len});
      Tensor truths = Tensor::zeros({cfg.minibatch});
      double* pb = batch.mutable_data();
      double* pt = truths.mutable_data();
      for (int64_t i = 0; i < cfg.minibatch; ++i) {
        const auto& [seg, label] = split.train[static_cast<size_t>(
            order[static_cast<size_t>(mb * cfg.minibatch + i)])];
        std::copy(seg.values.begin(), seg.values.end(), pb + i * cfg.seg_len);
        pt[i] = static_cast<double>(label);
      }

      Tape tape;
      TapeScope scope(tape);
      Tensor scores = critic_forward(net, batch, Mode::train, rng);
      Tensor loss = bce_loss(scores, truths);
      double loss_value = loss.item();
      if (!std::isfinite(loss_value)) {
        result.diverged = true;
        result.divergence_info = "non-finite loss at epoch " +
                                 std::to_string(epoch) + ", minibatch " +
                                 std::to_string(mb);
        break;
      }
      auto grads = tape.backward(loss);
      std::vector<Tensor> grad_list;
      grad_list.reserve(params.size());
      for (Tensor* p : params) grad_list.push_back(grads.get_or_zeros(*p));
      opt.step(params, grad_list);
      loss_sum += loss_value;
    }

    ClassifierEpochRecord record;
    record.epoch = epoch;
    record.loss = loss_sum / static_cast<double>(std::max<int64_t>(1, batches));
    record.wall_clock_s = now_seconds() - start_time;
    result.history.epochs.push_back(record);
    if (result.diverged) break;
  }

  result.checkpoint.rng_state = rng.state();
  return result;
}

double predict(const ClassifierCheckpoint& checkpoint, const Segment& segment,
               bool strict) {
  if (checkpoint.net.head != CriticHead::sigmoid) {
    throw ContractError("predict: checkpoint is not a classifier");
  }
  if (segment.length() != checkpoint.cfg.seg_len) {
    throw DimensionError("predict: segment length " +
                         std::to_string(segment.length()) + " != seg_len " +
                         std::to_string(checkpoint.cfg.seg_len));
  }
  if (strict) {
    constexpr double kTol = 1e-9;
    for (double v : segment.values) {
      if (v < -1.0 - kTol || v > 1.0 + kTol) {
        throw ContractError(
            "predict: input not normalized to [-1,+1] (found " +
            std::to_string(v) + "); normalize_minmax the segment first");
      }
    }
  }
  NoGradGuard guard;
  Tensor x = Tensor::from({1, 1, checkpoint.cfg.seg_len}, segment.values);
  Rng unused(0);  // eval mode draws nothing
  Tensor score = critic_forward(checkpoint.net, x, Mode::eval, unused);
  return score.item();
}

int assign_label(double score, double threshold) {
  return score > threshold ? 1 : 0;
}

ClassifierMetrics evaluate(const std::vector<PredictionRecord>& records,
                           double threshold) {
  if (records.empty()) throw ParameterError("evaluate: empty record list");
  ClassifierMetrics metrics;
  metrics.records = records;
  double correct = 0.0, abs_err = 0.0;
  for (auto& r : metrics.records) {
    r.label = assign_label(r.score, threshold);
    if (r.label == r.truth) correct += 1.0;
    abs_err += std::abs(r.score - static_cast<double>(r.truth));
  }
  double total = static_cast<double>(records.size());
  metrics.classification_accuracy = correct / total;
  metrics.mean_absolute_error = abs_err / total;
  return metrics;
}

ClassifierMetrics test_classifier(
    const ClassifierCheckpoint& checkpoint,
    const std::vector<std::pair<Segment, int>>& test_set) {
  std::vector<PredictionRecord> records;
  records.reserve(test_set.size());
  int64_t id = 0;
  for (const auto& [seg, label] : test_set) {
    PredictionRecord r;
    r.id = id++;
    r.score = predict(checkpoint, seg);
    r.truth = label;
    records.push_back(r);
  }
  return evaluate(records, checkpoint.cfg.threshold);
}

}  // namespace vibgan
