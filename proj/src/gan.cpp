#include "vibgan/gan.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "vibgan/metrics.hpp"

namespace vibgan {

namespace {

constexpr double kNormEps = 1e-12;  // keeps the gradient-norm sqrt finite

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Tensor segments_to_tensor(const std::vector<Segment>& segments,
                          const std::vector<int64_t>& indices, int64_t from,
                          int64_t count, int64_t seg_len) {
  Tensor out = Tensor::zeros({count, 1, seg_len});
  double* po = out.mutable_data();
  for (int64_t i = 0; i < count; ++i) {
    const Segment& s =
        segments[static_cast<size_t>(indices[static_cast<size_t>(from + i)])];
    std::copy(s.values.begin(), s.values.end(), po + i * seg_len);
  }
  return out;
}

}  // namespace

void GanConfig::validate() const {
  if (seg_len < 32 || seg_len % 16 != 0) {
    // multiple of 16: the five-layer length algebra lands exactly on
    // seg_len; >= 32: the critic's last instance norm needs >= 2 samples.
    throw ConfigError("seg_len must be a multiple of 16 and at least 32; got " +
                      std::to_string(seg_len));
  }
  if (z_length != 1) {
    throw ConfigError("z_length must be 1 (the first transpose conv expands "
                      "a length-1 tensor to seg_len/16)");
  }
  if (z_channels < 1) throw ConfigError("z_channels must be >= 1");
  if (channel_widths.back() != 1) {
    throw ConfigError("the last channel width is the signal channel count "
                      "and must be 1");
  }
  for (int64_t w : channel_widths) {
    if (w < 1) throw ConfigError("channel widths must be positive");
  }
  if (lr_generator <= 0.0 || lr_critic <= 0.0) {
    throw ConfigError("learning rates must be positive");
  }
  if (critic_iters < 1) throw ConfigError("critic_iters must be >= 1");
  if (lambda_gp < 0.0) throw ConfigError("lambda_gp must be >= 0");
  if (minibatch < 2) throw ConfigError("minibatch must be >= 2");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (critic_dropout_p < 0.0 || critic_dropout_p >= 1.0) {
    throw ConfigError("critic_dropout_p must lie in [0,1)");
  }
  if (eval_interval < 0) throw ConfigError("eval_interval must be >= 0");
}

// ---------------------------------------------------------------------------
// Architecture
// ---------------------------------------------------------------------------

namespace {

Tensor init_kernel(Shape shape, Rng& rng) {
  return Tensor::randn(std::move(shape), rng, 0.0, 0.02).set_requires_grad();
}

Tensor init_gamma(int64_t channels, Rng& rng) {
  return Tensor::randn({channels}, rng, 1.0, 0.02).set_requires_grad();
}

Tensor init_zeros(Shape shape) {
  return Tensor::zeros(std::move(shape)).set_requires_grad();
}

}  // namespace

GeneratorParams build_generator(const GanConfig& cfg, Rng& rng) {
  cfg.validate();
  GeneratorParams gen;
  gen.cfg = cfg;
  const auto& w = cfg.channel_widths;
  const int64_t k0 = cfg.first_kernel();

  // transpose kernels are [Cin, Cout, K]
  gen.layers.push_back({init_kernel({cfg.z_channels, w[0], k0}, rng),
                        init_zeros({w[0]}), 2, 0});
  for (int i = 1; i < 5; ++i) {
    gen.layers.push_back({init_kernel({w[i - 1], w[i], 4}, rng),
                          init_zeros({w[i]}), 2, 1});
  }
  for (int i = 0; i < 4; ++i) {
    gen.bn_gamma.push_back(init_gamma(w[i], rng));
    gen.bn_beta.push_back(init_zeros({w[i]}));
    gen.bn_state.push_back(ops::BatchNormState::for_channels(w[i]));
  }
  return gen;
}

CriticParams build_critic(const GanConfig& cfg, CriticHead head,
                          bool use_dropout, Rng& rng) {
  cfg.validate();
  CriticParams critic;
  critic.cfg = cfg;
  critic.head = head;
  critic.use_dropout = use_dropout;
  const auto& w = cfg.channel_widths;
  const int64_t k0 = cfg.first_kernel();

  // conv kernels are [Cout, Cin, K]; widths mirror the generator
  critic.layers.push_back({init_kernel({w[3], 1, 4}, rng),
                           init_zeros({w[3]}), 2, 1});
  critic.layers.push_back({init_kernel({w[2], w[3], 4}, rng),
                           init_zeros({w[2]}), 2, 1});
  critic.layers.push_back({init_kernel({w[1], w[2], 4}, rng),
                           init_zeros({w[1]}), 2, 1});
  critic.layers.push_back({init_kernel({w[0], w[1], 4}, rng),
                           init_zeros({w[0]}), 2, 1});
  critic.layers.push_back({init_kernel({1, w[0], k0}, rng),
                           init_zeros({1}), 2, 0});
  for (int64_t c : {w[2], w[1], w[0]}) {
    critic.in_gamma.push_back(init_gamma(c, rng));
    critic.in_beta.push_back(init_zeros({c}));
  }
  return critic;
}

std::vector<Tensor*> GeneratorParams::parameters() {
  std::vector<Tensor*> out;
  for (auto& layer : layers) {
    out.push_back(&layer.kernel);
    out.push_back(&layer.bias);
  }
  for (auto& g : bn_gamma) out.push_back(&g);
  for (auto& b : bn_beta) out.push_back(&b);
  return out;
}

std::vector<Tensor*> CriticParams::parameters() {
  std::vector<Tensor*> out;
  for (auto& layer : layers) {
    out.push_back(&layer.kernel);
    out.push_back(&layer.bias);
  }
  for (auto& g : in_gamma) out.push_back(&g);
  for (auto& b : in_beta) out.push_back(&b);
  return out;
}

std::vector<int64_t> GeneratorParams::length_sequence() const {
  std::vector<int64_t> lengths{cfg.z_length};
  int64_t len = cfg.z_length;
  for (const auto& layer : layers) {
    len = ops::conv_transpose1d_out_len(len, layer.kernel.dim(2), layer.stride,
                                        layer.padding);
    lengths.push_back(len);
  }
  return lengths;
}

std::vector<int64_t> CriticParams::length_sequence() const {
  std::vector<int64_t> lengths{cfg.seg_len};
  int64_t len = cfg.seg_len;
  for (const auto& layer : layers) {
    len = ops::conv1d_out_len(len, layer.kernel.dim(2), layer.stride,
                              layer.padding);
    lengths.push_back(len);
  }
  return lengths;
}

Tensor generator_forward(GeneratorParams& gen, const Tensor& z, Mode mode) {
  if (z.rank() != 3 || z.dim(1) != gen.cfg.z_channels ||
      z.dim(2) != gen.cfg.z_length) {
    throw DimensionError("generator input must be [B," +
                         std::to_string(gen.cfg.z_channels) + "," +
                         std::to_string(gen.cfg.z_length) + "], got " +
                         shape_str(z.shape()));
  }
  Tensor h = z;
  for (size_t i = 0; i < 4; ++i) {
    const ConvLayer& layer = gen.layers[i];
    h = ops::conv_transpose1d(h, layer.kernel, layer.bias, layer.stride,
                              layer.padding);
    h = ops::batch_norm1d(h, gen.bn_gamma[i], gen.bn_beta[i], gen.bn_state[i],
                          mode);
    h = ops::relu(h);
  }
  const ConvLayer& last = gen.layers[4];
  h = ops::conv_transpose1d(h, last.kernel, last.bias, last.stride,
                            last.padding);
  return ops::tanh(h);
}

Tensor critic_forward(const CriticParams& critic, const Tensor& x, Mode mode,
                      Rng& rng) {
  if (x.rank() != 3 || x.dim(1) != 1 || x.dim(2) != critic.cfg.seg_len) {
    throw DimensionError("critic input must be [B,1," +
                         std::to_string(critic.cfg.seg_len) + "], got " +
                         shape_str(x.shape()));
  }
  constexpr double kLeakyAlpha = 0.2;

  Tensor h = ops::conv1d(x, critic.layers[0].kernel, critic.layers[0].bias,
                         critic.layers[0].stride, critic.layers[0].padding);
  h = ops::leaky_relu(h, kLeakyAlpha);
  if (critic.use_dropout) {
    h = ops::dropout(h, critic.cfg.critic_dropout_p, mode, rng);
  }
  for (size_t i = 1; i <= 3; ++i) {
    const ConvLayer& layer = critic.layers[i];
    h = ops::conv1d(h, layer.kernel, layer.bias, layer.stride, layer.padding);
    h = ops::instance_norm1d(h, critic.in_gamma[i - 1], critic.in_beta[i - 1]);
    h = ops::leaky_relu(h, kLeakyAlpha);
  }
  const ConvLayer& last = critic.layers[4];
  h = ops::conv1d(h, last.kernel, last.bias, last.stride, last.padding);
  Tensor scores = ops::reshape(h, {h.dim(0)});
  if (critic.head == CriticHead::sigmoid) scores = ops::sigmoid(scores);
  return scores;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

Tensor gradient_penalty(const std::function<Tensor(const Tensor&)>& critic_fn,
                        const Tensor& real, const Tensor& fake, Rng& rng) {
  Tape* tape = active_tape();
  if (!tape || !grad_enabled()) {
    throw ContractError("gradient_penalty requires an active tape");
  }
  if (real.shape() != fake.shape()) {
    throw DimensionError("gradient_penalty: real " + shape_str(real.shape()) +
                         " vs fake " + shape_str(fake.shape()));
  }
  const int64_t batch = real.dim(0);

  Tensor xhat;
  {
    NoGradGuard guard;
    Tensor eps = Tensor::zeros({batch, 1, 1});
    for (int64_t b = 0; b < batch; ++b) eps.mutable_data()[b] = rng.uniform();
    xhat = ops::add(ops::mul(eps, real),
                    ops::mul(ops::add_scalar(ops::neg(eps), 1.0), fake));
  }
  xhat.set_requires_grad();

  Tensor scores = critic_fn(xhat);
  Tensor total = ops::sum(scores);

  Tensor grad_x;
  if (total.node_on(*tape) >= 0) {
    auto grads = tape->backward(total, /*create_graph=*/true);
    grad_x = grads.get_or_zeros(xhat);
  } else {
    grad_x = Tensor::zeros(xhat.shape());  // constant critic
  }

  Tensor per_example = ops::sum(ops::mul(grad_x, grad_x), {1, 2}, false);
  Tensor norm = ops::sqrt(ops::add_scalar(per_example, kNormEps));
  Tensor deviation = ops::add_scalar(norm, -1.0);
  return ops::mean(ops::mul(deviation, deviation));
}

WganLossTerms wgan_losses(const Tensor& critic_real_mean,
                          const Tensor& critic_fake_mean, const Tensor& gp,
                          double lambda_gp) {
  WganLossTerms terms;
  terms.critic_loss = ops::add(ops::sub(critic_fake_mean, critic_real_mean),
                               ops::scale(gp, lambda_gp));
  terms.generator_loss = ops::neg(critic_fake_mean);
  return terms;
}

double input_noise_sigma(int64_t epoch, const GanConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw ParameterError("epoch out of range for noise schedule");
  }
  double sigma0 = cfg.noise_sigma0;
  if (sigma0 < 0.0) {
    throw ContractError("input_noise_sigma needs a resolved (non-negative) "
                        "noise_sigma0");
  }
  double frac = 1.0 - static_cast<double>(epoch) / static_cast<double>(cfg.epochs);
  return sigma0 * std::max(0.0, frac);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

TrainGanResult train_gan(const GanConfig& cfg,
                         const std::vector<Segment>& real_segments,
                         const GanEvalHook& eval_hook) {
  cfg.validate();
  const int64_t n = static_cast<int64_t>(real_segments.size());
  if (n < cfg.minibatch) {
    throw AllocationError("train_gan: " + std::to_string(n) +
                          " segments but minibatch is " +
                          std::to_string(cfg.minibatch));
  }
  for (const Segment& s : real_segments) {
    if (s.length() != cfg.seg_len) {
      throw DimensionError("train_gan: segment length " +
                           std::to_string(s.length()) + " != seg_len " +
                           std::to_string(cfg.seg_len));
    }
  }

  GanConfig resolved = cfg;
  if (resolved.noise_sigma0 < 0.0) {
    double mean = 0.0;
    int64_t count = 0;
    for (const auto& s : real_segments) {
      for (double v : s.values) mean += v;
      count += s.length();
    }
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (const auto& s : real_segments) {
      for (double v : s.values) var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(count);
    resolved.noise_sigma0 = 0.1 * std::sqrt(var);
  }

  Rng rng(resolved.seed);
  TrainGanResult result;
  result.checkpoint.cfg = resolved;
  result.checkpoint.trained_condition = real_segments.front().condition;
  result.checkpoint.trained_joint_id = real_segments.front().joint_id;
  GeneratorParams& gen = result.checkpoint.generator;
  CriticParams& critic = result.checkpoint.critic;
  gen = build_generator(resolved, rng);
  critic = build_critic(resolved, CriticHead::score, true, rng);

  AdamWHyper hyper_g{resolved.lr_generator, resolved.adamw_beta1,
                     resolved.adamw_beta2, resolved.adamw_epsilon,
                     resolved.adamw_weight_decay};
  AdamWHyper hyper_c{resolved.lr_critic, resolved.adamw_beta1,
                     resolved.adamw_beta2, resolved.adamw_epsilon,
                     resolved.adamw_weight_decay};
  result.checkpoint.opt_generator = AdamW(hyper_g);
  result.checkpoint.opt_critic = AdamW(hyper_c);
  AdamW& opt_g = result.checkpoint.opt_generator;
  AdamW& opt_c = result.checkpoint.opt_critic;

  auto gen_params = gen.parameters();
  auto critic_params = critic.parameters();

  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const int64_t batches_per_epoch = n / resolved.minibatch;
  const double start_time = now_seconds();
  int64_t critic_updates = 0;
  double last_fid = std::numeric_limits<double>::quiet_NaN();

  for (int64_t epoch = 0; epoch < resolved.epochs; ++epoch) {
    const double sigma = input_noise_sigma(epoch, resolved);
    rng.shuffle(order);

    double critic_loss_sum = 0.0;
    double gen_loss_sum = 0.0;
    int64_t gen_steps = 0;

    for (int64_t mb = 0; mb < batches_per_epoch; ++mb) {
      Tensor real = segments_to_tensor(real_segments, order,
                                       mb * resolved.minibatch,
                                       resolved.minibatch, resolved.seg_len);

      // ---- critic update ----
      Tensor fake;
      {
        NoGradGuard guard;
        Tensor z = Tensor::randn({resolved.minibatch, resolved.z_channels,
                                  resolved.z_length},
                                 rng);
        fake = generator_forward(gen, z, Mode::train);
      }
      Tensor real_in = real;
      if (sigma > 0.0) {
        Tensor noise = Tensor::randn(real.shape(), rng, 0.0, sigma);
        real_in = ops::add(real, noise);
      }

      double critic_loss_value;
      {
        Tape tape;
        TapeScope scope(tape);
        Tensor s_real = critic_forward(critic, real_in, Mode::train, rng);
        Tensor s_fake = critic_forward(critic, fake, Mode::train, rng);
        Tensor gp = gradient_penalty(
            [&](const Tensor& x) {
              return critic_forward(critic, x, Mode::train, rng);
            },
            real_in, fake, rng);
        WganLossTerms losses = wgan_losses(ops::mean(s_real), ops::mean(s_fake),
                                           gp, resolved.lambda_gp);
        critic_loss_value = losses.critic_loss.item();
        if (!std::isfinite(critic_loss_value)) {
          result.diverged = true;
          result.divergence_info =
              "non-finite critic loss at epoch " + std::to_string(epoch) +
              ", minibatch " + std::to_string(mb);
        } else {
          auto grads = tape.backward(losses.critic_loss);
          std::vector<Tensor> grad_list;
          grad_list.reserve(critic_params.size());
          for (Tensor* p : critic_params) {
            grad_list.push_back(grads.get_or_zeros(*p));
          }
          opt_c.step(critic_params, grad_list);
        }
      }
      if (result.diverged) break;
      critic_loss_sum += critic_loss_value;
      ++critic_updates;

      // ---- generator update after every critic_iters critic steps ----
      if (critic_updates % resolved.critic_iters == 0) {
        Tape tape;
        TapeScope scope(tape);
        Tensor z = Tensor::randn({resolved.minibatch, resolved.z_channels,
                                  resolved.z_length},
                                 rng);
        Tensor fake_tracked = generator_forward(gen, z, Mode::train);
        // fresh critic pass, no input noise on generated data
        Tensor s_fake = critic_forward(critic, fake_tracked, Mode::train, rng);
        Tensor gen_loss = ops::neg(ops::mean(s_fake));
        double gen_loss_value = gen_loss.item();
        if (!std::isfinite(gen_loss_value)) {
          result.diverged = true;
          result.divergence_info =
              "non-finite generator loss at epoch " + std::to_string(epoch) +
              ", minibatch " + std::to_string(mb);
          break;
        }
        auto grads = tape.backward(gen_loss);
        std::vector<Tensor> grad_list;
        grad_list.reserve(gen_params.size());
        for (Tensor* p : gen_params) grad_list.push_back(grads.get_or_zeros(*p));
        opt_g.step(gen_params, grad_list);
        gen_loss_sum += gen_loss_value;
        ++gen_steps;
      }
    }

    GanEpochRecord record;
    record.epoch = epoch;
    record.critic_loss =
        critic_loss_sum / static_cast<double>(std::max<int64_t>(
                              1, result.diverged ? 1 : batches_per_epoch));
    record.generator_loss =
        gen_steps > 0 ? gen_loss_sum / static_cast<double>(gen_steps)
                      : std::numeric_limits<double>::quiet_NaN();
    record.sigma_noise = sigma;
    if (!result.diverged && eval_hook && resolved.eval_interval > 0 &&
        ((epoch + 1) % resolved.eval_interval == 0 ||
         epoch + 1 == resolved.epochs)) {
      last_fid = eval_hook(gen, epoch);
    }
    record.fid_median = last_fid;
    record.wall_clock_s = now_seconds() - start_time;
    result.history.epochs.push_back(record);
    if (result.diverged) break;
  }

  result.checkpoint.rng_state = rng.state();
  return result;
}

std::vector<Segment> generate_from(const GeneratorParams& gen, int64_t n,
                                   Rng& rng, Condition condition,
                                   int joint_id) {
  if (n < 1) throw ParameterError("generate: n must be >= 1");
  GeneratorParams local = gen;  // eval pass leaves running stats untouched
  NoGradGuard guard;
  Tensor z = Tensor::randn({n, local.cfg.z_channels, local.cfg.z_length}, rng);
  Tensor out = generator_forward(local, z, Mode::eval);
  std::vector<Segment> segments;
  segments.reserve(static_cast<size_t>(n));
  const double* po = out.data();
  for (int64_t i = 0; i < n; ++i) {
    Segment s;
    s.values.assign(po + i * local.cfg.seg_len, po + (i + 1) * local.cfg.seg_len);
    s.condition = condition;
    s.joint_id = joint_id;
    s.source = Source::fake;
    s.segment_index = i;
    segments.push_back(std::move(s));
  }
  return segments;
}

std::vector<Segment> generate(const GanCheckpoint& checkpoint, int64_t n,
                              Rng& rng) {
  return generate_from(checkpoint.generator, n, rng,
                       checkpoint.trained_condition,
                       checkpoint.trained_joint_id);
}

GanEvalHook make_fid_eval_hook(std::vector<Segment> real_segments,
                               int64_t pairs, uint64_t seed) {
  if (real_segments.empty()) {
    throw ParameterError("make_fid_eval_hook: empty real pool");
  }
  return [real_segments = std::move(real_segments), pairs,
          seed](const GeneratorParams& gen, int64_t epoch) {
    Rng rng(derive_seed(seed, "fid-eval-" + std::to_string(epoch)));
    auto fakes = generate_from(gen, pairs, rng, Condition::damaged, 0);
    std::vector<double> scores;
    scores.reserve(static_cast<size_t>(pairs));
    for (const auto& f : fakes) {
      const Segment& partner = real_segments[static_cast<size_t>(rng.uniform_int(
          0, static_cast<int64_t>(real_segments.size()) - 1))];
      scores.push_back(fid_pair(f, partner));
    }
    std::sort(scores.begin(), scores.end());
    size_t m = scores.size();
    return m % 2 == 1 ? scores[m / 2]
                      : 0.5 * (scores[m / 2 - 1] + scores[m / 2]);
  };
}

}  // namespace vibgan
