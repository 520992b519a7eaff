// Differentiable operations over Tensor.
//
// The op set is deliberately small: the fixed layer vocabulary of the
// generator/critic pair plus the arithmetic needed by losses and the
// gradient-norm penalty. Every backward rule is itself built from these
// ops, which makes second derivatives (backward-of-backward) valid for
// the whole set.
#pragma once

#include <vector>

#include "vibgan/rng.hpp"
#include "vibgan/tensor.hpp"

namespace vibgan::ops {

// ----- arithmetic (numpy-style broadcasting on binary ops) -----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double c);
Tensor add_scalar(const Tensor& x, double c);

// ----- shape -----
Tensor reshape(const Tensor& x, Shape shape);
Tensor broadcast_to(const Tensor& x, Shape shape);
Tensor sum_to_shape(const Tensor& x, Shape shape);
Shape broadcast_shape(const Shape& a, const Shape& b);

// ----- reductions -----
Tensor sum(const Tensor& x);
Tensor sum(const Tensor& x, std::vector<int64_t> axes, bool keepdims = false);
Tensor mean(const Tensor& x);
Tensor mean(const Tensor& x, std::vector<int64_t> axes, bool keepdims = false);
Tensor sq_l2_norm(const Tensor& x);

// ----- elementwise nonlinear -----
Tensor sqrt(const Tensor& x);
Tensor log(const Tensor& x);
Tensor clamp(const Tensor& x, double lo, double hi);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double alpha);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);

enum class Activation { relu, leaky_relu, tanh, sigmoid };
Tensor activation(const Tensor& x, Activation kind, double alpha = 0.2);

// Inverted dropout: train mode zeroes with probability p and scales
// survivors by 1/(1-p); eval mode is the identity and consumes no rng.
Tensor dropout(const Tensor& x, double p, Mode mode, Rng& rng);

// ----- convolution -----
int64_t conv1d_out_len(int64_t len, int64_t kernel, int64_t stride,
                       int64_t padding);
int64_t conv_transpose1d_out_len(int64_t len, int64_t kernel, int64_t stride,
                                 int64_t padding);

// input [B,Cin,L], kernel [Cout,Cin,K], bias [Cout] (undefined = none).
Tensor conv1d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int64_t stride, int64_t padding);

// input [B,Cin,L], kernel [Cin,Cout,K]; zero-bias form is the linear
// adjoint of conv1d with the same kernel/stride/padding.
Tensor conv_transpose1d(const Tensor& input, const Tensor& kernel,
                        const Tensor& bias, int64_t stride, int64_t padding);

// ----- normalization -----
struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  static BatchNormState for_channels(int64_t channels);
};

Tensor batch_norm1d(const Tensor& input, const Tensor& gamma,
                    const Tensor& beta, BatchNormState& state, Mode mode);
Tensor instance_norm1d(const Tensor& input, const Tensor& gamma,
                       const Tensor& beta, double eps = 1e-5);

}  // namespace vibgan::ops
