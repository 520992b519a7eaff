// Acceptance suite: runs every release criterion end to end and prints
// one pass/fail line per criterion. Exit code is the number of failures.
//
//   acceptance [--only N] [--cli /path/to/vibgan]

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "vibgan/checkpoint.hpp"
#include "vibgan/classifier.hpp"
#include "vibgan/gan.hpp"
#include "vibgan/metrics.hpp"
#include "vibgan/ops.hpp"
#include "vibgan/pipeline.hpp"
#include "vibgan/signal.hpp"

using namespace vibgan;
namespace fs = std::filesystem;

#ifndef VIBGAN_CLI_PATH
#define VIBGAN_CLI_PATH ""
#endif

namespace {

std::string g_cli_path = VIBGAN_CLI_PATH;

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct Failure {
  std::string detail;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure{detail};
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("vibgan_accept_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// Shared surrogate fixture: 160 Hz mode whose damaged variant drops to
// 72 Hz and gains amplitude; grossly separable by a 1-D conv net.
// ---------------------------------------------------------------------------

SurrogateSpec acceptance_surrogate() {
  SurrogateSpec spec;
  spec.modes = {{160.0, 0.01, 0.4}, {352.0, 0.02, 0.15}};
  spec.noise_std = 0.02;
  // Non-overlapping shifted lines (72 Hz, 123 Hz) and a dense excitation
  // schedule so every segment carries class-informative response.
  spec.damage_shift = {{0.45, 1.3}, {0.35, 1.2}};
  spec.duration_s = 16.0;  // 16384 samples -> 256 segments of 64
  spec.sample_rate_hz = 1024.0;
  spec.excitations_per_second = 16.0;
  return spec;
}

std::vector<Segment> surrogate_pool(Condition condition, uint64_t seed,
                                    Source source = Source::real) {
  Rng rng(seed);
  auto raw = synthesize_surrogate(acceptance_surrogate(), condition, rng);
  auto segments = segment_signal(raw, 64, true, rng);
  for (auto& s : segments) s.source = source;
  return segments;
}

// ---------------------------------------------------------------------------
// Criterion 1: finite-difference gradient suite + double backward
// ---------------------------------------------------------------------------

double max_gradient_error(
    const std::function<Tensor(const std::vector<Tensor>&)>& f,
    std::vector<Tensor> inputs, Rng& rng) {
  Tensor probe;
  {
    NoGradGuard guard;
    probe = Tensor::randn(f(inputs).shape(), rng);
  }
  auto loss_of = [&]() {
    NoGradGuard guard;
    Tensor y = f(inputs);
    double acc = 0.0;
    for (int64_t i = 0; i < y.numel(); ++i) acc += y.flat()[i] * probe.flat()[i];
    return acc;
  };

  Tape tape;
  GradientMap grads;
  {
    TapeScope scope(tape);
    for (Tensor& t : inputs) t.set_requires_grad();
    grads = tape.backward(ops::sum(ops::mul(f(inputs), probe)));
  }

  double worst = 0.0;
  for (Tensor& input : inputs) {
    Tensor analytic = grads.get_or_zeros(input);
    for (int64_t k = 0; k < input.numel(); ++k) {
      double orig = input.mutable_data()[k];
      double h = 1e-5 * std::max(1.0, std::abs(orig));
      input.mutable_data()[k] = orig + h;
      double up = loss_of();
      input.mutable_data()[k] = orig - h;
      double down = loss_of();
      input.mutable_data()[k] = orig;
      double fd = (up - down) / (2.0 * h);
      worst = std::max(worst,
                       rel_err(analytic.flat()[static_cast<size_t>(k)], fd));
    }
  }
  return worst;
}

void nudge(Tensor& t, double margin) {
  for (int64_t i = 0; i < t.numel(); ++i) {
    double& v = t.mutable_data()[i];
    if (std::abs(v) < margin) v = v < 0 ? -margin : margin;
  }
}

std::string criterion_gradient_suite() {
  Rng rng(90210);
  double worst = 0.0;
  auto track = [&](double err) { worst = std::max(worst, err); };

  for (int i = 0; i < 20; ++i) {
    // convolutions
    {
      int64_t B = rng.uniform_int(1, 2), Ci = rng.uniform_int(1, 3);
      int64_t Co = rng.uniform_int(1, 3), K = rng.uniform_int(2, 4);
      int64_t s = rng.uniform_int(1, 2), p = rng.uniform_int(0, 1);
      int64_t L = rng.uniform_int(K + 2, 12);
      Tensor x = Tensor::randn({B, Ci, L}, rng);
      Tensor w = Tensor::randn({Co, Ci, K}, rng);
      Tensor b = Tensor::randn({Co}, rng);
      track(max_gradient_error(
          [s, p](const std::vector<Tensor>& in) {
            return ops::conv1d(in[0], in[1], in[2], s, p);
          },
          {x, w, b}, rng));
      Tensor wt = Tensor::randn({Ci, Co, K}, rng);
      track(max_gradient_error(
          [s, p](const std::vector<Tensor>& in) {
            return ops::conv_transpose1d(in[0], in[1], in[2], s, p);
          },
          {x, wt, b}, rng));
    }
    // normalization
    {
      Tensor x = Tensor::randn({3, 2, 6}, rng);
      Tensor gamma = Tensor::randn({2}, rng, 1.0, 0.1);
      Tensor beta = Tensor::randn({2}, rng, 0.0, 0.1);
      track(max_gradient_error(
          [](const std::vector<Tensor>& in) {
            auto state = ops::BatchNormState::for_channels(2);
            return ops::batch_norm1d(in[0], in[1], in[2], state, Mode::train);
          },
          {x, gamma, beta}, rng));
      track(max_gradient_error(
          [](const std::vector<Tensor>& in) {
            return ops::instance_norm1d(in[0], in[1], in[2]);
          },
          {x, gamma, beta}, rng));
    }
    // activations, dropout, reductions, arithmetic
    {
      Tensor x = Tensor::randn({4, 7}, rng);
      nudge(x, 0.01);
      track(max_gradient_error(
          [](const std::vector<Tensor>& in) { return ops::relu(in[0]); }, {x},
          rng));
      track(max_gradient_error(
          [](const std::vector<Tensor>& in) {
            return ops::leaky_relu(in[0], 0.2);
          },
          {x}, rng));
      track(max_gradient_error(
          [](const std::vector<Tensor>& in) { return ops::tanh(in[0]); }, {x},
          rng));
      track(max_gradient_error(
          [](const std::vector<Tensor>& in) { return ops::sigmoid(in[0]); },
          {x}, rng));
      track(max_gradient_error(
          [](const std::vector<Tensor>& in) {
            Rng mask_rng(4242);
            return ops::dropout(in[0], 0.4, Mode::train, mask_rng);
          },
          {x}, rng));
      track(max_gradient_error(
          [](const std::vector<Tensor>& in) {
            return ops::mean(in[0], {1}, false);
          },
          {x}, rng));
      track(max_gradient_error(
          [](const std::vector<Tensor>& in) { return ops::sq_l2_norm(in[0]); },
          {x}, rng));
      Tensor y = Tensor::randn({4, 7}, rng);
      nudge(y, 0.2);
      track(max_gradient_error(
          [](const std::vector<Tensor>& in) {
            return ops::div(ops::mul(ops::add(in[0], in[1]),
                                     ops::sub(in[0], in[1])),
                            ops::add_scalar(ops::mul(in[1], in[1]), 1.0));
          },
          {x, y}, rng));
      Tensor pos = Tensor::randn({3, 3}, rng);
      for (int64_t k = 0; k < pos.numel(); ++k) {
        pos.mutable_data()[k] = std::abs(pos.flat()[k]) + 0.5;
      }
      track(max_gradient_error(
          [](const std::vector<Tensor>& in) {
            return ops::log(ops::sqrt(in[0]));
          },
          {pos}, rng));
    }
  }
  require(worst < 1e-4, "first-order max rel err " + num(worst) + " >= 1e-4");

  // double backward of the gradient penalty w.r.t. critic parameters
  double worst2 = 0.0;
  {
    const int64_t B = 2, L = 8;
    Tensor real = Tensor::randn({B, 1, L}, rng);
    Tensor fake = Tensor::randn({B, 1, L}, rng);
    Tensor w1 = Tensor::randn({3, 1, 4}, rng, 0.0, 0.5);
    Tensor b1 = Tensor::randn({3}, rng, 0.0, 0.1);
    Tensor w2 = Tensor::randn({1, 3, 3}, rng, 0.0, 0.5);
    Tensor b2 = Tensor::randn({1}, rng, 0.0, 0.1);
    std::vector<Tensor> theta = {w1, b1, w2, b2};

    auto critic_fn = [&](const Tensor& x) {
      Tensor h = ops::tanh(ops::conv1d(x, theta[0], theta[1], 2, 1));
      Tensor s = ops::conv1d(h, theta[2], theta[3], 1, 0);
      return ops::reshape(ops::mean(s, {1, 2}, false), {x.dim(0)});
    };
    auto penalty_value = [&]() {
      Tape tape;
      TapeScope scope(tape);
      Rng gp_rng(77);
      return gradient_penalty(critic_fn, real, fake, gp_rng).item();
    };

    GradientMap grads;
    {
      Tape tape;
      TapeScope scope(tape);
      for (Tensor& t : theta) t.set_requires_grad();
      Rng gp_rng(77);
      grads = tape.backward(gradient_penalty(critic_fn, real, fake, gp_rng));
    }
    for (auto& t : theta) {
      Tensor analytic = grads.get_or_zeros(t);
      for (int64_t k = 0; k < t.numel(); ++k) {
        double orig = t.mutable_data()[k];
        double h = 1e-5 * std::max(1.0, std::abs(orig));
        t.mutable_data()[k] = orig + h;
        double up = penalty_value();
        t.mutable_data()[k] = orig - h;
        double down = penalty_value();
        t.mutable_data()[k] = orig;
        double fd = (up - down) / (2.0 * h);
        worst2 = std::max(worst2,
                          rel_err(analytic.flat()[static_cast<size_t>(k)], fd));
      }
    }
  }
  require(worst2 < 1e-3,
          "double-backward max rel err " + num(worst2) + " >= 1e-3");
  return "first-order max err " + num(worst) + ", double-backward max err " +
         num(worst2);
}

// ---------------------------------------------------------------------------
// Criterion 2: architecture length algebra
// ---------------------------------------------------------------------------

std::string criterion_architecture() {
  Rng rng(1);
  GanConfig paper;
  paper.seg_len = 1024;
  auto gen = build_generator(paper, rng);
  auto critic = build_critic(paper, CriticHead::score, true, rng);
  require(gen.length_sequence() ==
              std::vector<int64_t>{1, 64, 128, 256, 512, 1024},
          "generator sequence mismatch at seg_len 1024");
  require(critic.length_sequence() ==
              std::vector<int64_t>{1024, 512, 256, 128, 64, 1},
          "critic sequence mismatch at seg_len 1024");

  for (int64_t seg_len : {64LL, 256LL, 1024LL}) {
    GanConfig cfg;
    cfg.seg_len = seg_len;
    cfg.channel_widths = {16, 8, 4, 2, 1};
    require(cfg.first_kernel() == seg_len / 16,
            "first kernel rule broken at seg_len " + std::to_string(seg_len));
    auto g = build_generator(cfg, rng);
    auto c = build_critic(cfg, CriticHead::score, true, rng);
    auto gl = g.length_sequence();
    auto cl = c.length_sequence();
    require(gl.front() == 1 && gl.back() == seg_len,
            "generator endpoints wrong at seg_len " + std::to_string(seg_len));
    require(cl.front() == seg_len && cl.back() == 1,
            "critic endpoints wrong at seg_len " + std::to_string(seg_len));
    for (size_t i = 0; i < gl.size(); ++i) {
      require(gl[i] == cl[gl.size() - 1 - i],
              "generator/critic sequences are not reverses at seg_len " +
                  std::to_string(seg_len));
    }
  }
  return "K0=seg_len/16 verified for seg_len in {64,256,1024}";
}

// ---------------------------------------------------------------------------
// Criterion 3: conv adjoint identity
// ---------------------------------------------------------------------------

std::string criterion_adjointness() {
  Rng rng(33);
  double worst = 0.0;
  int draws = 0;
  while (draws < 50) {
    int64_t B = rng.uniform_int(1, 3), Ci = rng.uniform_int(1, 4);
    int64_t Co = rng.uniform_int(1, 4), K = rng.uniform_int(1, 6);
    int64_t s = rng.uniform_int(1, 3), p = rng.uniform_int(0, 2);
    int64_t Lo = rng.uniform_int(1, 9);
    int64_t L = (Lo - 1) * s + K - 2 * p;
    if (L < 1 || L + 2 * p < K) continue;
    ++draws;
    Tensor x = Tensor::randn({B, Ci, L}, rng);
    Tensor w = Tensor::randn({Co, Ci, K}, rng);
    Tensor y = Tensor::randn({B, Co, Lo}, rng);
    Tensor cx = ops::conv1d(x, w, Tensor(), s, p);
    Tensor ty = ops::conv_transpose1d(y, w, Tensor(), s, p);
    double lhs = 0.0, rhs = 0.0;
    for (int64_t i = 0; i < cx.numel(); ++i) lhs += cx.flat()[i] * y.flat()[i];
    for (int64_t i = 0; i < x.numel(); ++i) rhs += x.flat()[i] * ty.flat()[i];
    worst = std::max(worst, rel_err(lhs, rhs));
  }
  require(worst < 1e-10,
          "adjoint identity rel err " + num(worst) + " >= 1e-10");
  return "50 draws, max rel err " + num(worst);
}

// ---------------------------------------------------------------------------
// Criterion 4: metric oracles
// ---------------------------------------------------------------------------

std::string criterion_metric_oracles() {
  Rng rng(44);

  // fid_pair algebraic identity to 1e-12
  for (int i = 0; i < 300; ++i) {
    int64_t n = rng.uniform_int(2, 300);
    std::vector<double> x(static_cast<size_t>(n)), g(static_cast<size_t>(n));
    for (auto& v : x) v = rng.normal(rng.uniform(-2, 2), rng.uniform(0.1, 3));
    for (auto& v : g) v = rng.normal(rng.uniform(-2, 2), rng.uniform(0.1, 3));
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double mg = std::accumulate(g.begin(), g.end(), 0.0) / n;
    double cx = 0, cg = 0;
    for (double v : x) cx += (v - mx) * (v - mx);
    for (double v : g) cg += (v - mg) * (v - mg);
    cx /= static_cast<double>(n - 1);
    cg /= static_cast<double>(n - 1);
    double identity =
        (mx - mg) * (mx - mg) + std::pow(std::sqrt(cx) - std::sqrt(cg), 2.0);
    double value = fid_pair(x, g);
    require(std::abs(value - identity) <= 1e-12 * std::max(1.0, identity),
            "fid_pair deviates from its algebraic identity by " +
                num(std::abs(value - identity)));
  }

  // fid_multivariate vs diagonal-Gaussian closed form (2 relative SE)
  {
    const int64_t dim = 3;
    std::vector<double> mu_x = {0.0, 1.0, -0.5}, mu_g = {1.0, 0.0, 0.5};
    std::vector<double> var_x = {4.0, 1.0, 2.25}, var_g = {1.0, 2.25, 1.0};
    double closed = 0.0;
    for (int64_t k = 0; k < dim; ++k) {
      closed += std::pow(mu_x[k] - mu_g[k], 2.0) +
                std::pow(std::sqrt(var_x[k]) - std::sqrt(var_g[k]), 2.0);
    }
    auto draw = [&](const std::vector<double>& mu,
                    const std::vector<double>& var, uint64_t seed) {
      Rng r(seed);
      std::vector<Segment> set;
      for (int s = 0; s < 32; ++s) {
        Segment seg;
        seg.values.resize(64 * dim);
        for (size_t i = 0; i < seg.values.size(); ++i) {
          size_t k = i % dim;
          seg.values[i] = r.normal(mu[k], std::sqrt(var[k]));
        }
        set.push_back(std::move(seg));
      }
      return set;
    };
    std::vector<double> estimates;
    for (int r = 0; r < 8; ++r) {
      estimates.push_back(fid_multivariate(draw(mu_x, var_x, 500 + r),
                                           draw(mu_g, var_g, 900 + r), dim));
    }
    double mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) /
                  estimates.size();
    double var = 0.0;
    for (double e : estimates) var += (e - mean) * (e - mean);
    var /= static_cast<double>(estimates.size() - 1);
    double se = std::sqrt(var / estimates.size());
    require(std::abs(mean - closed) <= 2.0 * se + 1e-3 * closed,
            "multivariate FID " + num(mean) + " vs closed form " +
                num(closed) + " exceeds 2 SE (" + num(se) + ")");
  }

  // ssim identity and bounds over 1e4 random pairs
  double worst_bound = 0.0;
  for (int i = 0; i < 10000; ++i) {
    int64_t n = rng.uniform_int(2, 64);
    std::vector<double> x(static_cast<size_t>(n)), g(static_cast<size_t>(n));
    for (auto& v : x) v = rng.normal(rng.uniform(-1, 1), rng.uniform(0.1, 2));
    for (auto& v : g) v = rng.normal(rng.uniform(-1, 1), rng.uniform(0.1, 2));
    double self = ssim(x, x);
    require(std::abs(self - 1.0) < 1e-12,
            "ssim(x,x) = " + num(self) + " != 1");
    double cross = ssim(x, g);
    worst_bound = std::max(worst_bound, std::abs(cross));
    require(std::abs(cross) <= 1.0 + 1e-12,
            "|ssim| = " + num(std::abs(cross)) + " > 1");
  }

  // exact copy is always flagged duplicate at threshold 0.8
  {
    auto real_pool = surrogate_pool(Condition::damaged, 4001);
    real_pool.resize(24);
    std::vector<Segment> gen(real_pool.begin(), real_pool.begin() + 8);
    for (auto& s : gen) s.source = Source::fake;
    auto report = creativity_report(gen, real_pool, 0.8);
    size_t exact_hits = 0;
    for (const auto& d : report.duplicates) {
      if (d.first == d.second) ++exact_hits;
    }
    require(exact_hits == gen.size(),
            "only " + std::to_string(exact_hits) + " of " +
                std::to_string(gen.size()) + " exact copies flagged");
  }
  return "identity to 1e-12, diagonal oracle within 2 SE, |ssim|<=1 on 1e4 pairs";
}

// ---------------------------------------------------------------------------
// Criterion 5: toy GAN convergence
// ---------------------------------------------------------------------------

std::string criterion_toy_gan() {
  double start = now_s();
  auto real_pool = surrogate_pool(Condition::damaged, 5001);
  require(real_pool.size() == 256, "expected 256 surrogate segments");

  GanConfig cfg;
  cfg.seg_len = 64;
  cfg.z_channels = 16;
  cfg.channel_widths = {32, 16, 8, 4, 1};
  cfg.critic_iters = 5;
  cfg.epochs = 400;  // >= 200; the FID trace is still descending at 200
  cfg.minibatch = 64;
  cfg.lambda_gp = 10.0;
  cfg.lr_generator = 1e-3;
  cfg.lr_critic = 2e-3;
  cfg.critic_dropout_p = 0.7;
  cfg.noise_sigma0 = -1.0;  // auto: 0.1 x data std
  cfg.eval_interval = 1;
  cfg.seed = 2024;

  auto hook = make_fid_eval_hook(real_pool, 128, 909);
  auto result = train_gan(cfg, real_pool, hook);
  require(!result.diverged, "training diverged: " + result.divergence_info);

  double fid_epoch1 = result.history.epochs.front().fid_median;
  double fid_final = result.history.epochs.back().fid_median;
  require(std::isfinite(fid_epoch1) && std::isfinite(fid_final),
          "missing FID trace values");
  require(fid_final <= fid_epoch1 / 3.0,
          "final median FID " + num(fid_final) + " > 1/3 of epoch-1 " +
              num(fid_epoch1));

  Rng gen_rng(606);
  auto fakes = generate(result.checkpoint, 128, gen_rng);
  auto creativity = creativity_report(fakes, real_pool, 0.8);
  require(creativity.duplicates.empty(),
          std::to_string(creativity.duplicates.size()) +
              " creativity duplicates flagged");

  double elapsed = now_s() - start;
  require(elapsed < 900.0, "runtime " + num(elapsed) + " s exceeds 15 min");
  return "FID epoch-1 " + num(fid_epoch1) + " -> final " + num(fid_final) +
         " (" + num(fid_epoch1 / std::max(fid_final, 1e-300)) +
         "x), 0 duplicates, " + num(elapsed) + " s";
}

// ---------------------------------------------------------------------------
// Criterion 6: scenario harness with a clearly separable damage shift
// ---------------------------------------------------------------------------

std::string criterion_scenarios() {
  double start = now_s();
  auto undamaged = surrogate_pool(Condition::undamaged, 6001);
  auto damaged_real = surrogate_pool(Condition::damaged, 6002);
  // independent surrogate draw standing in for generated damaged data
  auto damaged_fake = surrogate_pool(Condition::damaged, 6003, Source::fake);

  ClassifierConfig cls;
  cls.seg_len = 64;
  cls.channel_widths = {32, 16, 8, 4, 1};
  cls.lr = 8e-4;
  cls.minibatch = 30;
  cls.epochs = 300;
  cls.threshold = 0.49;
  cls.seed = 77;

  std::ostringstream detail;
  for (int scenario : {1, 2}) {
    Rng split_rng(7000 + static_cast<uint64_t>(scenario));
    auto split = build_scenario(undamaged, damaged_real, damaged_fake, scenario,
                                split_rng);
    for (auto& [seg, label] : split.train) seg = normalize_minmax(seg).first;
    for (auto& [seg, label] : split.test) seg = normalize_minmax(seg).first;

    auto result = train_classifier(cls, split);
    require(!result.diverged, "classifier diverged: " + result.divergence_info);
    auto metrics = test_classifier(result.checkpoint, split.test);

    double ca_floor = scenario == 1 ? 0.93 : 0.90;
    require(metrics.records.size() == 30,
            "expected 30 test records in scenario " + std::to_string(scenario));
    require(metrics.classification_accuracy >= ca_floor,
            "scenario " + std::to_string(scenario) + " CA " +
                num(metrics.classification_accuracy) + " < " + num(ca_floor));
    require(metrics.mean_absolute_error <= 0.15,
            "scenario " + std::to_string(scenario) + " MAE " +
                num(metrics.mean_absolute_error) + " > 0.15");
    detail << "s" << scenario << " CA=" << num(metrics.classification_accuracy)
           << " MAE=" << num(metrics.mean_absolute_error) << "  ";
  }
  double elapsed = now_s() - start;
  require(elapsed < 300.0,
          "classifier runtime " + num(elapsed) + " s exceeds 5 min");
  detail << "(" << num(elapsed) << " s)";
  return detail.str();
}

// ---------------------------------------------------------------------------
// Criterion 7: threshold semantics
// ---------------------------------------------------------------------------

std::string criterion_threshold() {
  require(assign_label(0.48, 0.49) == 0, "score 0.48 must classify as 0");
  require(assign_label(0.50, 0.49) == 1, "score 0.50 must classify as 1");
  auto metrics = evaluate({{0, 0.48, 0, 0}}, 0.49);
  require(metrics.records[0].label == 0,
          "evaluate() assigned label 1 to score 0.48 at threshold 0.49");
  require(metrics.classification_accuracy == 1.0, "CA should be 1");
  return "0.48 -> undamaged at threshold 0.49";
}

// ---------------------------------------------------------------------------
// Criteria 8 and 9 run the CLI binary
// ---------------------------------------------------------------------------

std::string smoke_config_json(const fs::path& out_dir, int epochs_a,
                              int epochs_b, int dcnn_epochs) {
  std::ostringstream os;
  os << R"({
  "schema_version": 1,
  "seed": 31415,
  "out_dir": ")" << out_dir.generic_string() << R"(",
  "seg_len": 64,
  "strict_determinism": true,
  "data": {
    "surrogate": {
      "modes": [
        {"frequency_hz": 160.0, "damping_ratio": 0.01, "amplitude": 0.4},
        {"frequency_hz": 352.0, "damping_ratio": 0.02, "amplitude": 0.15}
      ],
      "noise_std": 0.02,
      "damage_shift": [
        {"frequency_scale": 0.45, "amplitude_scale": 1.3},
        {"frequency_scale": 0.35, "amplitude_scale": 1.2}
      ],
      "duration_s": 16.0,
      "sample_rate_hz": 1024.0,
      "excitations_per_second": 16.0
    }
  },
  "gan": {
    "z_channels": 16,
    "channel_widths": [32, 16, 8, 4, 1],
    "lr_generator": 1e-3,
    "lr_critic": 2e-3,
    "critic_iters": 5,
    "lambda_gp": 10.0,
    "minibatch": 64,
    "critic_dropout_p": 0.7,
    "eval_interval": 1
  },
  "classifier": {
    "channel_widths": [32, 16, 8, 4, 1],
    "lr": 8e-4,
    "minibatch": 30,
    "epochs": )" << dcnn_epochs << R"(,
    "threshold": 0.49
  },
  "cases": [
    {"name": "E)" << epochs_a << R"(", "epochs": )" << epochs_a << R"(},
    {"name": "E)" << epochs_b << R"(", "epochs": )" << epochs_b << R"(}
  ],
  "scenarios": [1, 2],
  "counts": {"train_per_class": 60, "test_per_class": 15, "generate_n": 256},
  "eval": {"bins": 40, "fid_pairs": 64, "fid_dim": 8}
})";
  return os.str();
}

int run_cli(const std::string& args) {
  require(!g_cli_path.empty(), "CLI path not configured");
  std::string command = g_cli_path + " " + args + " >/dev/null 2>&1";
  int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string criterion_determinism() {
  auto dir = fresh_dir("det");
  auto cfg_a = dir / "a.json";
  auto cfg_b = dir / "b.json";
  {
    std::ofstream(cfg_a) << smoke_config_json(dir / "out_a", 3, 5, 10);
    std::ofstream(cfg_b) << smoke_config_json(dir / "out_b", 3, 5, 10);
  }
  require(run_cli("pipeline --config " + cfg_a.string()) == 0,
          "first pipeline run failed");
  require(run_cli("pipeline --config " + cfg_b.string()) == 0,
          "second pipeline run failed");

  size_t compared = 0;
  for (const auto& entry :
       fs::recursive_directory_iterator(dir / "out_a")) {
    if (!entry.is_regular_file()) continue;
    auto rel = fs::relative(entry.path(), dir / "out_a");
    require(slurp(entry.path()) == slurp(dir / "out_b" / rel),
            "output differs between runs: " + rel.generic_string());
    ++compared;
  }
  require(compared > 30, "too few outputs compared");

  // checkpoint save -> load -> save round-trips bit-exactly
  auto ckpt_path = dir / "out_a" / "cases" / "E3" / "gan_checkpoint.bin";
  auto loaded = load_gan_checkpoint(ckpt_path);
  auto resaved = dir / "resaved.bin";
  save_gan_checkpoint(resaved, loaded);
  require(slurp(ckpt_path) == slurp(resaved),
          "checkpoint round trip is not bit-exact");

  return std::to_string(compared) + " files byte-identical; checkpoint "
         "round-trip bit-exact";
}

std::string criterion_smoke() {
  double start = now_s();
  auto dir = fresh_dir("smoke");
  auto cfg_path = dir / "config.json";
  std::ofstream(cfg_path) << smoke_config_json(dir / "out", 30, 60, 150);
  require(run_cli("pipeline --config " + cfg_path.string()) == 0,
          "pipeline exited nonzero");

  std::vector<std::string> expected = {
      "pools/undamaged/pool.json",
      "pools/damaged/pool.json",
      "summary.csv",
      "summary.svg",
      "run_manifest.json",
  };
  for (const std::string& case_name : {std::string("E30"), std::string("E60")}) {
    for (const char* f :
         {"gan_checkpoint.bin", "gan_history.csv", "gan_loss.svg",
          "gan_fid.svg", "fakes/pool.json", "eval/fid_scores.csv",
          "eval/fid_pdf.csv", "eval/fid_pdf.svg", "eval/creativity_pdf.csv",
          "eval/creativity_pdf.svg", "eval/diversity_pdf.csv",
          "eval/diversity_pdf.svg", "eval/box_stats.csv", "eval/box_plot.svg",
          "eval/report.json"}) {
      expected.push_back("cases/" + case_name + "/" + f);
    }
    for (int s : {1, 2}) {
      for (const char* f :
           {"dcnn_checkpoint.bin", "dcnn_history.csv", "dcnn_loss.svg",
            "predictions.csv", "metrics.json", "prediction_bars.svg"}) {
        expected.push_back("cases/" + case_name + "/scenario" +
                           std::to_string(s) + "/" + f);
      }
    }
  }
  for (const auto& rel : expected) {
    require(fs::exists(dir / "out" / rel), "missing artifact " + rel);
    require(fs::file_size(dir / "out" / rel) > 0, "empty artifact " + rel);
  }

  // summary carries 4 metric rows (2 cases x 2 scenarios)
  std::ifstream in(dir / "out" / "summary.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  require(rows == 4, "summary has " + std::to_string(rows) + " rows, not 4");

  double elapsed = now_s() - start;
  require(elapsed < 1200.0, "runtime " + num(elapsed) + " s exceeds 20 min");
  return std::to_string(expected.size()) + " artifacts present, 4 summary rows, " +
         num(elapsed) + " s";
}

struct Criterion {
  int id;
  std::string name;
  std::function<std::string()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    if (arg == "--cli" && i + 1 < argc) g_cli_path = argv[++i];
  }

  std::vector<Criterion> criteria = {
      {1, "gradient suite (finite differences + double backward)",
       criterion_gradient_suite},
      {2, "architecture length algebra", criterion_architecture},
      {3, "conv/transpose-conv adjoint identity", criterion_adjointness},
      {4, "metric oracles (FID identity, diagonal Gaussians, SSIM bounds)",
       criterion_metric_oracles},
      {5, "toy GAN convergence (FID 3x reduction, zero duplicates)",
       criterion_toy_gan},
      {6, "scenario harness CA/MAE floors", criterion_scenarios},
      {7, "threshold semantics at 0.49", criterion_threshold},
      {8, "pipeline determinism and checkpoint round trip",
       criterion_determinism},
      {9, "end-to-end smoke (all stages, all artifacts)", criterion_smoke},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (only != 0 && criterion.id != only) continue;
    double start = now_s();
    try {
      std::string detail = criterion.run();
      std::printf("[PASS] criterion %d: %s (%.1f s) — %s\n", criterion.id,
                  criterion.name.c_str(), now_s() - start, detail.c_str());
    } catch (const Failure& f) {
      ++failures;
      std::printf("[FAIL] criterion %d: %s (%.1f s) — %s\n", criterion.id,
                  criterion.name.c_str(), now_s() - start, f.detail.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] criterion %d: %s (%.1f s) — exception: %s\n",
                  criterion.id, criterion.name.c_str(), now_s() - start,
                  e.what());
    }
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criteria FAILED\n", failures);
  }
  return failures;
}
