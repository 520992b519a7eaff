// Shared helpers for the unit suites: finite-difference gradient oracle
// and small numeric utilities. Everything here is independent of the
// backward implementation it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "vibgan/ops.hpp"
#include "vibgan/rng.hpp"
#include "vibgan/tensor.hpp"

namespace testutil {

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Pushes values with |v| < margin away from zero so finite differences
// never straddle a piecewise-linear kink.
inline void nudge_from_zero(vibgan::Tensor& t, double margin) {
  double* p = t.mutable_data();
  for (int64_t i = 0; i < t.numel(); ++i) {
    if (std::abs(p[i]) < margin) p[i] = p[i] < 0.0 ? -margin : margin;
  }
}

// Central finite-difference check of every input element against the
// tape gradient. The probed scalar is sum(w .* f(inputs)) with a random
// probe w, so the whole Jacobian is exercised. `f` must be a pure
// function of its inputs.
inline void check_gradients(
    const std::function<vibgan::Tensor(const std::vector<vibgan::Tensor>&)>& f,
    std::vector<vibgan::Tensor> inputs, vibgan::Rng& rng, double tol = 1e-4) {
  using vibgan::Tensor;
  namespace ops = vibgan::ops;

  Tensor probe;
  {
    vibgan::NoGradGuard guard;
    probe = Tensor::randn(f(inputs).shape(), rng);
  }
  auto loss_of = [&]() {
    vibgan::NoGradGuard guard;
    double acc = 0.0;
    Tensor y = f(inputs);
    for (int64_t i = 0; i < y.numel(); ++i) acc += y.flat()[i] * probe.flat()[i];
    return acc;
  };

  vibgan::Tape tape;
  vibgan::GradientMap grads;
  {
    vibgan::TapeScope scope(tape);
    for (Tensor& t : inputs) t.set_requires_grad(true);
    Tensor loss = ops::sum(ops::mul(f(inputs), probe));
    grads = tape.backward(loss);
  }

  for (Tensor& input : inputs) {
    Tensor analytic = grads.get_or_zeros(input);
    double* values = input.mutable_data();
    for (int64_t k = 0; k < input.numel(); ++k) {
      double orig = values[k];
      double h = 1e-5 * std::max(1.0, std::abs(orig));
      values[k] = orig + h;
      double up = loss_of();
      values[k] = orig - h;
      double down = loss_of();
      values[k] = orig;
      double fd = (up - down) / (2.0 * h);
      double err = rel_err(analytic.flat()[static_cast<size_t>(k)], fd);
      CAPTURE(k);
      CAPTURE(fd);
      CAPTURE(analytic.flat()[static_cast<size_t>(k)]);
      CHECK(err < tol);
    }
  }
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace testutil
