// Damage classifier: the critic architecture with a sigmoid head and no
// dropout, trained with binary cross-entropy + AdamW, evaluated with
// classification accuracy at a fixed threshold and mean absolute error.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vibgan/gan.hpp"
#include "vibgan/signal.hpp"

namespace vibgan {

struct ClassifierConfig {
  int64_t seg_len = 1024;
  std::array<int64_t, 5> channel_widths = {256, 128, 64, 32, 1};
  double lr = 8e-4;
  int64_t minibatch = 30;
  int64_t epochs = 300;
  double threshold = 0.49;
  uint64_t seed = 0;

  double adamw_beta1 = 0.9;
  double adamw_beta2 = 0.999;
  double adamw_epsilon = 1e-8;
  double adamw_weight_decay = 0.01;

  void validate() const;
  // Architecture view used to reuse the critic builder.
  GanConfig critic_view() const;
};

// -mean(t log s + (1-t) log(1-s)), scores clamped 1e-12 away from the
// boundaries; differentiable.
Tensor bce_loss(const Tensor& scores, const Tensor& truths);

struct ClassifierEpochRecord {
  int64_t epoch = 0;
  double loss = 0.0;
  double wall_clock_s = 0.0;
};

struct ClassifierTrainHistory {
  std::vector<ClassifierEpochRecord> epochs;
};

struct ClassifierCheckpoint {
  ClassifierConfig cfg;
  CriticParams net;
  AdamW opt;
  Rng::State rng_state{};
};

struct TrainClassifierResult {
  ClassifierCheckpoint checkpoint;
  ClassifierTrainHistory history;
  bool diverged = false;
  std::string divergence_info;
};

// Expects min-max normalized segments in the split.
TrainClassifierResult train_classifier(const ClassifierConfig& cfg,
                                       const ScenarioSplit& split);

// Deterministic eval-mode forward pass; score in (0,1). With strict on,
// inputs outside [-1-tol, 1+tol] raise a contract error.
double predict(const ClassifierCheckpoint& checkpoint, const Segment& segment,
               bool strict = true);

int assign_label(double score, double threshold);  // score > threshold -> 1

struct PredictionRecord {
  int64_t id = 0;
  double score = 0.0;
  int truth = 0;
  int label = 0;
};

struct ClassifierMetrics {
  double classification_accuracy = 0.0;
  double mean_absolute_error = 0.0;
  std::vector<PredictionRecord> records;
};

// Recomputes labels from scores at the given threshold, then CA and MAE.
ClassifierMetrics evaluate(const std::vector<PredictionRecord>& records,
                           double threshold);

// Convenience: run the classifier over a test set and evaluate.
ClassifierMetrics test_classifier(const ClassifierCheckpoint& checkpoint,
                                  const std::vector<std::pair<Segment, int>>& test_set);

}  // namespace vibgan
