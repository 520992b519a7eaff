#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "test_util.hpp"
#include "vibgan/ops.hpp"
#include "vibgan/optim.hpp"
#include "vibgan/rng.hpp"
#include "vibgan/tensor.hpp"

using namespace vibgan;
namespace tu = testutil;

TEST_CASE("conv1d output length follows the floor rule") {
  CHECK(ops::conv1d_out_len(1024, 4, 2, 1) == 512);
  CHECK(ops::conv1d_out_len(64, 64, 2, 0) == 1);
  CHECK_THROWS_AS(ops::conv1d_out_len(3, 8, 2, 0), GeometryError);
  CHECK_THROWS_AS(ops::conv1d_out_len(16, 4, 0, 1), ParameterError);
}

TEST_CASE("conv_transpose1d output length") {
  CHECK(ops::conv_transpose1d_out_len(1, 64, 2, 0) == 64);
  CHECK(ops::conv_transpose1d_out_len(512, 4, 2, 1) == 1024);
}

TEST_CASE("conv1d on zero input returns per-channel bias") {
  Rng rng(7);
  Tensor x = Tensor::zeros({2, 3, 16});
  Tensor w = Tensor::randn({4, 3, 5}, rng);
  Tensor b = Tensor::from({4}, {0.5, -1.0, 2.0, 0.0});
  Tensor y = ops::conv1d(x, w, b, 1, 2);
  REQUIRE(y.shape() == Shape{2, 4, 16});
  for (int64_t bi = 0; bi < 2; ++bi) {
    for (int64_t c = 0; c < 4; ++c) {
      for (int64_t l = 0; l < 16; ++l) {
        CHECK(y.at({bi, c, l}) == doctest::Approx(b.flat()[c]).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("conv1d shape mismatch raises") {
  Rng rng(3);
  Tensor x = Tensor::randn({1, 2, 16}, rng);
  Tensor w = Tensor::randn({4, 3, 5}, rng);
  CHECK_THROWS_AS(ops::conv1d(x, w, Tensor(), 1, 0), DimensionError);
}

TEST_CASE("conv/transpose-conv adjoint identity over random draws") {
  Rng rng(12345);
  for (int draw = 0; draw < 50; ++draw) {
    int64_t B = rng.uniform_int(1, 3);
    int64_t Ci = rng.uniform_int(1, 4);
    int64_t Co = rng.uniform_int(1, 4);
    int64_t K = rng.uniform_int(1, 6);
    int64_t s = rng.uniform_int(1, 3);
    int64_t p = rng.uniform_int(0, 2);
    // pick L so the transpose lands back exactly on L
    int64_t Lo = rng.uniform_int(1, 9);
    int64_t L = (Lo - 1) * s + K - 2 * p;
    if (L < 1 || L + 2 * p < K) continue;

    Tensor x = Tensor::randn({B, Ci, L}, rng);
    Tensor w = Tensor::randn({Co, Ci, K}, rng);
    Tensor y = Tensor::randn({B, Co, Lo}, rng);

    Tensor cx = ops::conv1d(x, w, Tensor(), s, p);
    REQUIRE(cx.shape() == y.shape());
    Tensor ty = ops::conv_transpose1d(y, w, Tensor(), s, p);
    REQUIRE(ty.shape() == x.shape());

    double lhs = 0.0, rhs = 0.0;
    for (int64_t i = 0; i < cx.numel(); ++i) lhs += cx.flat()[i] * y.flat()[i];
    for (int64_t i = 0; i < x.numel(); ++i) rhs += x.flat()[i] * ty.flat()[i];
    CHECK(tu::rel_err(lhs, rhs) < 1e-10);
  }
}

TEST_CASE("batch_norm1d normalizes per channel in train mode") {
  Rng rng(99);
  Tensor x = Tensor::randn({4, 3, 32}, rng, 2.0, 3.0);
  Tensor gamma = Tensor::ones({3});
  Tensor beta = Tensor::zeros({3});
  auto state = ops::BatchNormState::for_channels(3);
  Tensor y = ops::batch_norm1d(x, gamma, beta, state, Mode::train);

  for (int64_t c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    for (int64_t b = 0; b < 4; ++b)
      for (int64_t l = 0; l < 32; ++l) mean += y.at({b, c, l});
    mean /= 4 * 32;
    for (int64_t b = 0; b < 4; ++b)
      for (int64_t l = 0; l < 32; ++l) {
        double d = y.at({b, c, l}) - mean;
        var += d * d;
      }
    var /= 4 * 32;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps shrinks it slightly
  }
}

TEST_CASE("batch_norm1d with gamma=0 returns beta") {
  Rng rng(5);
  Tensor x = Tensor::randn({2, 2, 8}, rng);
  Tensor gamma = Tensor::zeros({2});
  Tensor beta = Tensor::from({2}, {1.5, -2.5});
  auto state = ops::BatchNormState::for_channels(2);
  Tensor y = ops::batch_norm1d(x, gamma, beta, state, Mode::train);
  for (int64_t b = 0; b < 2; ++b)
    for (int64_t l = 0; l < 8; ++l) {
      CHECK(y.at({b, 0, l}) == doctest::Approx(1.5));
      CHECK(y.at({b, 1, l}) == doctest::Approx(-2.5));
    }
}

TEST_CASE("batch_norm1d constant input maps to ~zero") {
  Tensor x = Tensor::full({2, 1, 16}, 7.25);
  Tensor gamma = Tensor::ones({1});
  Tensor beta = Tensor::zeros({1});
  auto state = ops::BatchNormState::for_channels(1);
  Tensor y = ops::batch_norm1d(x, gamma, beta, state, Mode::train);
  for (int64_t i = 0; i < y.numel(); ++i) CHECK(std::abs(y.flat()[i]) < 1e-9);
}

TEST_CASE("instance_norm1d rows have zero mean and shift invariance") {
  Rng rng(17);
  Tensor gamma = Tensor::ones({1});
  Tensor beta = Tensor::zeros({1});

  std::vector<double> row(32);
  for (auto& v : row) v = rng.normal();
  std::vector<double> both = row;
  for (double v : row) both.push_back(v + 42.0);  // second row is a shifted copy
  Tensor x = Tensor::from({2, 1, 32}, both);

  Tensor y = ops::instance_norm1d(x, gamma, beta);
  double m0 = 0.0, m1 = 0.0;
  for (int64_t l = 0; l < 32; ++l) {
    m0 += y.at({0, 0, l});
    m1 += y.at({1, 0, l});
  }
  CHECK(std::abs(m0 / 32) < 1e-12);
  CHECK(std::abs(m1 / 32) < 1e-12);
  for (int64_t l = 0; l < 32; ++l) {
    CHECK(y.at({0, 0, l}) == doctest::Approx(y.at({1, 0, l})).epsilon(1e-10));
  }
}

TEST_CASE("instance_norm1d affine gives requested row mean") {
  Rng rng(18);
  Tensor x = Tensor::randn({1, 1, 64}, rng);
  Tensor gamma = Tensor::from({1}, {2.0});
  Tensor beta = Tensor::from({1}, {3.0});
  Tensor y = ops::instance_norm1d(x, gamma, beta);
  double m = 0.0;
  for (int64_t l = 0; l < 64; ++l) m += y.at({0, 0, l});
  CHECK(m / 64 == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("activation point values and ranges") {
  Tensor x = Tensor::from({4}, {-2.0, 0.0, 3.0, -0.5});
  Tensor r = ops::relu(x);
  CHECK(r.flat()[0] == 0.0);
  CHECK(r.flat()[2] == 3.0);
  CHECK(ops::sigmoid(Tensor::scalar(0.0)).item() == doctest::Approx(0.5));
  CHECK(ops::leaky_relu(Tensor::scalar(-2.0), 0.2).item() ==
        doctest::Approx(-0.4));

  Rng rng(31);
  Tensor z = Tensor::randn({1000}, rng, 0.0, 5.0);
  Tensor sg = ops::sigmoid(z);
  Tensor th = ops::tanh(z);
  Tensor rl = ops::relu(z);
  for (int64_t i = 0; i < z.numel(); ++i) {
    CHECK(sg.flat()[i] > 0.0);
    CHECK(sg.flat()[i] < 1.0);
    CHECK(th.flat()[i] > -1.0);
    CHECK(th.flat()[i] < 1.0);
    CHECK(rl.flat()[i] >= 0.0);
  }
}

TEST_CASE("dropout degenerate and eval modes are the identity") {
  Rng rng(1);
  Tensor x = Tensor::randn({100}, rng);
  Rng r1(2), r2(3);
  Tensor y0 = ops::dropout(x, 0.0, Mode::train, r1);
  Tensor ye = ops::dropout(x, 0.7, Mode::eval, r2);
  for (int64_t i = 0; i < x.numel(); ++i) {
    CHECK(y0.flat()[i] == x.flat()[i]);
    CHECK(ye.flat()[i] == x.flat()[i]);
  }
  CHECK_THROWS_AS(ops::dropout(x, 1.0, Mode::train, r1), ParameterError);
}

TEST_CASE("dropout preserves the mean on large inputs") {
  Tensor x = Tensor::ones({100000});
  Rng rng(404);
  Tensor y = ops::dropout(x, 0.7, Mode::train, rng);
  double m = 0.0;
  for (int64_t i = 0; i < y.numel(); ++i) m += y.flat()[i];
  m /= static_cast<double>(y.numel());
  CHECK(m > 0.98);
  CHECK(m < 1.02);
}

TEST_CASE("reductions") {
  CHECK(ops::mean(Tensor::from({3}, {1, 2, 3})).item() == doctest::Approx(2.0));
  CHECK(ops::sq_l2_norm(Tensor::from({2}, {3, 4})).item() ==
        doctest::Approx(25.0));
  Tensor ones = Tensor::ones({2, 3});
  Tensor s = ops::sum(ones, {0});
  REQUIRE(s.shape() == Shape{3});
  for (int64_t i = 0; i < 3; ++i) CHECK(s.flat()[i] == doctest::Approx(2.0));
  Tensor s2 = ops::sum(ones, {1});
  REQUIRE(s2.shape() == Shape{2});
  for (int64_t i = 0; i < 2; ++i) CHECK(s2.flat()[i] == doctest::Approx(3.0));
  CHECK_THROWS_AS(ops::sum(ones, {2}), ParameterError);
}

TEST_CASE("backward of x^2 at x=3") {
  Tape tape;
  TapeScope scope(tape);
  Tensor x = Tensor::scalar(3.0).set_requires_grad();
  Tensor y = ops::mul(x, x);
  auto grads = tape.backward(y);
  CHECK(grads.at(x).item() == doctest::Approx(6.0));
}

TEST_CASE("double backward of squared gradient of x^3 at x=2") {
  Tape tape;
  TapeScope scope(tape);
  Tensor x = Tensor::scalar(2.0).set_requires_grad();
  Tensor g = ops::mul(ops::mul(x, x), x);
  auto first = tape.backward(g, /*create_graph=*/true);
  Tensor gx = first.at(x);
  CHECK(gx.item() == doctest::Approx(12.0));  // 3x^2

  Tensor f = ops::sq_l2_norm(gx);
  CHECK(f.item() == doctest::Approx(144.0));
  auto second = tape.backward(f);
  CHECK(second.at(x).item() == doctest::Approx(288.0));  // 2*(3x^2)*(6x)
}

TEST_CASE("backward contract errors") {
  Tape tape;
  TapeScope scope(tape);
  Rng rng(9);
  Tensor x = Tensor::randn({4}, rng);
  x.set_requires_grad();
  Tensor y = ops::mul(x, x);
  CHECK_THROWS_AS(tape.backward(y), ContractError);  // non-scalar

  Tensor detached = Tensor::scalar(1.0);
  CHECK_THROWS_AS(tape.backward(detached), ContractError);  // no tape node
}

// --------------------------------------------------------------------------
// Finite-difference oracle over every op
// --------------------------------------------------------------------------

TEST_CASE("gradient check: elementwise arithmetic") {
  Rng rng(2024);
  for (int i = 0; i < 20; ++i) {
    Tensor a = Tensor::randn({3, 5}, rng);
    Tensor b = Tensor::randn({3, 5}, rng);
    tu::nudge_from_zero(b, 0.2);  // keep div well-conditioned
    tu::check_gradients(
        [](const std::vector<Tensor>& in) {
          return ops::div(ops::mul(ops::add(in[0], in[1]), in[0]),
                          ops::add_scalar(ops::mul(in[1], in[1]), 1.0));
        },
        {a, b}, rng);
    tu::check_gradients(
        [](const std::vector<Tensor>& in) {
          return ops::sub(ops::scale(in[0], 2.5), ops::neg(in[1]));
        },
        {a, b}, rng);
  }
}

TEST_CASE("gradient check: broadcasting and reductions") {
  Rng rng(2025);
  for (int i = 0; i < 20; ++i) {
    Tensor x = Tensor::randn({2, 3, 4}, rng);
    Tensor c = Tensor::randn({1, 3, 1}, rng);
    tu::check_gradients(
        [](const std::vector<Tensor>& in) {
          return ops::mean(ops::mul(in[0], in[1]), {0, 2}, false);
        },
        {x, c}, rng);
    tu::check_gradients(
        [](const std::vector<Tensor>& in) {
          return ops::sq_l2_norm(ops::sub(in[0], in[1]));
        },
        {x, c}, rng);
    tu::check_gradients(
        [](const std::vector<Tensor>& in) {
          return ops::broadcast_to(in[0], {2, 3, 4});
        },
        {c}, rng);
  }
}

TEST_CASE("gradient check: nonlinearities") {
  Rng rng(2026);
  for (int i = 0; i < 20; ++i) {
    Tensor x = Tensor::randn({4, 7}, rng);
    tu::nudge_from_zero(x, 0.01);
    tu::check_gradients(
        [](const std::vector<Tensor>& in) { return ops::tanh(in[0]); }, {x},
        rng);
    tu::check_gradients(
        [](const std::vector<Tensor>& in) { return ops::sigmoid(in[0]); },
        {x}, rng);
    tu::check_gradients(
        [](const std::vector<Tensor>& in) { return ops::relu(in[0]); }, {x},
        rng);
    tu::check_gradients(
        [](const std::vector<Tensor>& in) {
          return ops::leaky_relu(in[0], 0.2);
        },
        {x}, rng);

    Tensor pos = Tensor::randn({3, 3}, rng);
    for (int64_t k = 0; k < pos.numel(); ++k) {
      pos.mutable_data()[k] = std::abs(pos.flat()[k]) + 0.5;
    }
    tu::check_gradients(
        [](const std::vector<Tensor>& in) { return ops::sqrt(in[0]); }, {pos},
        rng);
    tu::check_gradients(
        [](const std::vector<Tensor>& in) { return ops::log(in[0]); }, {pos},
        rng);
  }
}

TEST_CASE("gradient check: conv1d and conv_transpose1d") {
  Rng rng(2027);
  for (int i = 0; i < 20; ++i) {
    int64_t B = rng.uniform_int(1, 2);
    int64_t Ci = rng.uniform_int(1, 3);
    int64_t Co = rng.uniform_int(1, 3);
    int64_t K = rng.uniform_int(2, 4);
    int64_t s = rng.uniform_int(1, 2);
    int64_t p = rng.uniform_int(0, 1);
    int64_t L = rng.uniform_int(K + 2, 12);

    Tensor x = Tensor::randn({B, Ci, L}, rng);
    Tensor w = Tensor::randn({Co, Ci, K}, rng);
    Tensor b = Tensor::randn({Co}, rng);
    tu::check_gradients(
        [s, p](const std::vector<Tensor>& in) {
          return ops::conv1d(in[0], in[1], in[2], s, p);
        },
        {x, w, b}, rng);

    Tensor wt = Tensor::randn({Ci, Co, K}, rng);
    Tensor bt = Tensor::randn({Co}, rng);
    if ((L - 1) * s - 2 * p + K >= 1) {
      tu::check_gradients(
          [s, p](const std::vector<Tensor>& in) {
            return ops::conv_transpose1d(in[0], in[1], in[2], s, p);
          },
          {x, wt, bt}, rng);
    }
  }
}

TEST_CASE("gradient check: normalization layers") {
  Rng rng(2028);
  for (int i = 0; i < 20; ++i) {
    Tensor x = Tensor::randn({3, 2, 6}, rng);
    Tensor gamma = Tensor::randn({2}, rng, 1.0, 0.1);
    Tensor beta = Tensor::randn({2}, rng, 0.0, 0.1);
    tu::check_gradients(
        [](const std::vector<Tensor>& in) {
          auto state = ops::BatchNormState::for_channels(2);
          return ops::batch_norm1d(in[0], in[1], in[2], state, Mode::train);
        },
        {x, gamma, beta}, rng);
    tu::check_gradients(
        [](const std::vector<Tensor>& in) {
          return ops::instance_norm1d(in[0], in[1], in[2]);
        },
        {x, gamma, beta}, rng);
  }
}

TEST_CASE("gradient check: batch norm eval mode uses running stats") {
  Rng rng(2029);
  Tensor x = Tensor::randn({2, 2, 5}, rng);
  auto state = ops::BatchNormState::for_channels(2);
  state.running_mean = Tensor::from({2}, {0.3, -0.2});
  state.running_var = Tensor::from({2}, {1.5, 0.7});
  Tensor gamma = Tensor::from({2}, {1.1, 0.9});
  Tensor beta = Tensor::from({2}, {0.0, 0.5});
  tu::check_gradients(
      [&state](const std::vector<Tensor>& in) {
        auto local = state;
        return ops::batch_norm1d(in[0], in[1], in[2], local, Mode::eval);
      },
      {x, gamma, beta}, rng);
}

TEST_CASE("gradient check: dropout with a fixed mask") {
  Rng rng(2030);
  Tensor x = Tensor::randn({6, 6}, rng);
  tu::check_gradients(
      [](const std::vector<Tensor>& in) {
        Rng mask_rng(777);  // same mask on every evaluation
        return ops::dropout(in[0], 0.4, Mode::train, mask_rng);
      },
      {x}, rng);
}

TEST_CASE("gradient check: clamp") {
  Rng rng(2031);
  Tensor x = Tensor::randn({5, 5}, rng);
  tu::check_gradients(
      [](const std::vector<Tensor>& in) { return ops::clamp(in[0], -0.5, 0.5); },
      {x}, rng);
}

// --------------------------------------------------------------------------
// Second order: parameter gradient of a gradient-norm functional
// --------------------------------------------------------------------------

namespace {

// Two conv layers with a smooth activation; returns per-example scores.
Tensor tiny_critic(const Tensor& x, const Tensor& w1, const Tensor& b1,
                   const Tensor& w2, const Tensor& b2) {
  Tensor h = ops::conv1d(x, w1, b1, 2, 1);
  h = ops::tanh(h);
  Tensor score = ops::conv1d(h, w2, b2, 1, 0);  // [B,1,1]
  return ops::reshape(score, {score.dim(0)});
}

double grad_norm_functional(const Tensor& x, std::vector<Tensor> theta) {
  Tape tape;
  TapeScope scope(tape);
  Tensor xl = x.clone().set_requires_grad();
  Tensor scores =
      tiny_critic(xl, theta[0], theta[1], theta[2], theta[3]);
  auto g = tape.backward(ops::sum(scores), true);
  Tensor gx = g.at(xl);
  return ops::sq_l2_norm(gx).item();
}

}  // namespace

TEST_CASE("second-order: d/dtheta of ||grad_x C||^2 matches finite differences") {
  Rng rng(4040);
  const int64_t B = 2, L = 8;
  Tensor x = Tensor::randn({B, 1, L}, rng);
  Tensor w1 = Tensor::randn({3, 1, 4}, rng, 0.0, 0.5);
  Tensor b1 = Tensor::randn({3}, rng, 0.0, 0.1);
  Tensor w2 = Tensor::randn({1, 3, 4}, rng, 0.0, 0.5);
  Tensor b2 = Tensor::randn({1}, rng, 0.0, 0.1);
  std::vector<Tensor> theta = {w1, b1, w2, b2};

  // analytic: single tape, double backward
  Tape tape;
  GradientMap second;
  {
    TapeScope scope(tape);
    for (Tensor& t : theta) t.set_requires_grad();
    Tensor xl = x.clone().set_requires_grad();
    Tensor scores = tiny_critic(xl, theta[0], theta[1], theta[2], theta[3]);
    auto g = tape.backward(ops::sum(scores), true);
    Tensor f = ops::sq_l2_norm(g.at(xl));
    second = tape.backward(f);
  }

  for (size_t ti = 0; ti < theta.size(); ++ti) {
    Tensor analytic = second.get_or_zeros(theta[ti]);
    double* values = theta[ti].mutable_data();
    for (int64_t k = 0; k < theta[ti].numel(); ++k) {
      double orig = values[k];
      double h = 1e-5 * std::max(1.0, std::abs(orig));
      values[k] = orig + h;
      double up = grad_norm_functional(x, theta);
      values[k] = orig - h;
      double down = grad_norm_functional(x, theta);
      values[k] = orig;
      double fd = (up - down) / (2.0 * h);
      CAPTURE(ti);
      CAPTURE(k);
      CHECK(tu::rel_err(analytic.flat()[static_cast<size_t>(k)], fd) < 1e-3);
    }
  }
}

// --------------------------------------------------------------------------
// AdamW
// --------------------------------------------------------------------------

TEST_CASE("adamw: zero gradient with zero decay is a fixed point") {
  Tensor p = Tensor::from({3}, {1.0, -2.0, 3.0});
  AdamWHyper hyper;
  hyper.lr = 0.1;
  hyper.weight_decay = 0.0;
  AdamW opt(hyper);
  opt.step({&p}, {Tensor::zeros({3})});
  CHECK(p.flat()[0] == 1.0);
  CHECK(p.flat()[1] == -2.0);
  CHECK(p.flat()[2] == 3.0);
  CHECK(opt.step_count() == 1);
}

TEST_CASE("adamw: single step matches the closed-form update") {
  double p0 = 0.8, g = -0.37;
  AdamWHyper hyper;
  hyper.lr = 3e-3;
  hyper.beta1 = 0.5;
  hyper.beta2 = 0.9;
  hyper.epsilon = 1e-8;
  hyper.weight_decay = 0.04;

  Tensor p = Tensor::scalar(p0);
  AdamW opt(hyper);
  opt.step({&p}, {Tensor::scalar(g)});

  double m = (1 - hyper.beta1) * g;
  double v = (1 - hyper.beta2) * g * g;
  double m_hat = m / (1 - hyper.beta1);
  double v_hat = v / (1 - hyper.beta2);
  double expect = p0 - hyper.lr * hyper.weight_decay * p0 -
                  hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
  CHECK(std::abs(p.item() - expect) < 1e-12);
}

TEST_CASE("adamw: decoupled decay with zero gradient") {
  AdamWHyper hyper;
  hyper.lr = 0.01;
  hyper.weight_decay = 0.5;
  Tensor p = Tensor::scalar(2.0);
  AdamW opt(hyper);
  opt.step({&p}, {Tensor::zeros({1})});
  CHECK(p.item() == doctest::Approx(2.0 * (1.0 - 0.01 * 0.5)).epsilon(1e-12));
}

// --------------------------------------------------------------------------
// Determinism and hygiene
// --------------------------------------------------------------------------

TEST_CASE("identical seeds give bit-identical computation") {
  auto run = [](uint64_t seed) {
    Rng rng(seed);
    Tensor x = Tensor::randn({2, 1, 16}, rng);
    Tensor w = Tensor::randn({2, 1, 4}, rng);
    Tensor b = Tensor::randn({2}, rng);
    Tape tape;
    TapeScope scope(tape);
    w.set_requires_grad();
    Tensor loss = ops::mean(ops::tanh(ops::conv1d(x, w, b, 2, 1)));
    auto grads = tape.backward(loss);
    return grads.at(w).flat();
  };
  auto a = run(555);
  auto b = run(555);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("debug checks flag non-finite op outputs") {
  set_debug_checks(true);
  Tensor x = Tensor::from({2}, {1.0, -1.0});
  CHECK_THROWS_AS(ops::log(x), NumericalError);
  set_debug_checks(false);
  Tensor y = ops::log(x);  // silently NaN when checks are off
  CHECK(std::isnan(y.flat()[1]));
}

TEST_CASE("tensor CSV-style invariants") {
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1.0}), DimensionError);
  CHECK_THROWS_AS(Tensor::zeros({0}), DimensionError);
  CHECK(Tensor::scalar(4.0).item() == 4.0);
}
