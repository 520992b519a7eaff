// Generator/critic pair, Wasserstein loss with gradient penalty, and the
// training loop with its fine-tuning devices: decaying input noise on
// real data, critic dropout, imbalanced learning rates, and multiple
// critic iterations per generator step.
#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "vibgan/ops.hpp"
#include "vibgan/optim.hpp"
#include "vibgan/signal.hpp"

namespace vibgan {

struct GanConfig {
  int64_t z_channels = 100;
  int64_t z_length = 1;
  // Generator output channels per layer; the critic mirrors them. The
  // last entry is the signal channel count and must be 1.
  std::array<int64_t, 5> channel_widths = {256, 128, 64, 32, 1};
  int64_t seg_len = 1024;

  double lr_generator = 5e-6;
  double lr_critic = 2e-5;
  int64_t critic_iters = 12;
  double lambda_gp = 20.0;
  int64_t minibatch = 64;
  int64_t epochs = 235;
  double critic_dropout_p = 0.7;
  // Linear-to-zero schedule start; negative means auto (0.1 x the
  // standard deviation of the training data).
  double noise_sigma0 = -1.0;
  uint64_t seed = 0;

  double adamw_beta1 = 0.0;
  double adamw_beta2 = 0.9;
  double adamw_epsilon = 1e-8;
  double adamw_weight_decay = 0.01;

  int64_t eval_interval = 1;  // epochs between eval-hook calls; 0 disables

  int64_t first_kernel() const { return seg_len / 16; }
  void validate() const;
};

struct ConvLayer {
  Tensor kernel;
  Tensor bias;
  int64_t stride = 2;
  int64_t padding = 0;
};

struct GeneratorParams {
  GanConfig cfg;
  std::vector<ConvLayer> layers;               // 5 transpose convolutions
  std::vector<Tensor> bn_gamma, bn_beta;       // layers 1-4
  std::vector<ops::BatchNormState> bn_state;   // layers 1-4

  std::vector<Tensor*> parameters();
  std::vector<int64_t> length_sequence() const;  // 1 -> ... -> seg_len
};

enum class CriticHead { score, sigmoid };

struct CriticParams {
  GanConfig cfg;
  CriticHead head = CriticHead::score;
  bool use_dropout = true;
  std::vector<ConvLayer> layers;           // 5 convolutions
  std::vector<Tensor> in_gamma, in_beta;   // instance norms on layers 2-4

  std::vector<Tensor*> parameters();
  std::vector<int64_t> length_sequence() const;  // seg_len -> ... -> 1
};

GeneratorParams build_generator(const GanConfig& cfg, Rng& rng);
CriticParams build_critic(const GanConfig& cfg, CriticHead head,
                          bool use_dropout, Rng& rng);

// z [B, z_channels, z_length] -> [B, 1, seg_len]; train mode updates
// batch-norm running statistics.
Tensor generator_forward(GeneratorParams& gen, const Tensor& z, Mode mode);

// x [B, 1, seg_len] -> per-example scores [B].
Tensor critic_forward(const CriticParams& critic, const Tensor& x, Mode mode,
                      Rng& rng);

// Mean over examples of (||grad_x critic(xhat)||_2 - 1)^2 on random
// interpolates xhat between real and fake. Must run under an active
// tape; the result is differentiable w.r.t. the critic parameters.
Tensor gradient_penalty(const std::function<Tensor(const Tensor&)>& critic_fn,
                        const Tensor& real, const Tensor& fake, Rng& rng);

struct WganLossTerms {
  Tensor critic_loss;
  Tensor generator_loss;
};

// critic_loss = mean_fake - mean_real + lambda * gp;
// generator_loss = -mean_fake.
WganLossTerms wgan_losses(const Tensor& critic_real_mean,
                          const Tensor& critic_fake_mean, const Tensor& gp,
                          double lambda_gp);

// sigma0 * max(0, 1 - epoch/epochs); applied to real critic inputs only.
double input_noise_sigma(int64_t epoch, const GanConfig& cfg);

struct GanEpochRecord {
  int64_t epoch = 0;
  double critic_loss = 0.0;
  double generator_loss = 0.0;  // NaN when no generator step fell in the epoch
  double fid_median = 0.0;      // NaN when not evaluated
  double sigma_noise = 0.0;
  double wall_clock_s = 0.0;
};

struct GanTrainHistory {
  std::vector<GanEpochRecord> epochs;
};

// Receives an immutable generator snapshot; returns the metric value to
// record (typically the median per-pair FID against real data).
using GanEvalHook =
    std::function<double(const GeneratorParams& gen, int64_t epoch)>;

struct GanCheckpoint {
  GanConfig cfg;
  Condition trained_condition = Condition::damaged;
  int trained_joint_id = 1;
  GeneratorParams generator;
  CriticParams critic;
  AdamW opt_generator;
  AdamW opt_critic;
  Rng::State rng_state{};
};

struct TrainGanResult {
  GanCheckpoint checkpoint;
  GanTrainHistory history;
  bool diverged = false;
  std::string divergence_info;
};

TrainGanResult train_gan(const GanConfig& cfg,
                         const std::vector<Segment>& real_segments,
                         const GanEvalHook& eval_hook = nullptr);

// n segments from z ~ N(0, I), generator in eval mode (running stats).
std::vector<Segment> generate(const GanCheckpoint& checkpoint, int64_t n,
                              Rng& rng);
std::vector<Segment> generate_from(const GeneratorParams& gen, int64_t n,
                                   Rng& rng, Condition condition,
                                   int joint_id);

// Canned eval hook: median per-pair FID between generated segments and
// uniformly sampled real partners, deterministic per (seed, epoch).
GanEvalHook make_fid_eval_hook(std::vector<Segment> real_segments,
                               int64_t pairs, uint64_t seed);

}  // namespace vibgan
