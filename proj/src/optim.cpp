#include "vibgan/optim.hpp"

#include <cmath>

namespace vibgan {

void AdamW::step(const std::vector<Tensor*>& params,
                 const std::vector<Tensor>& grads) {
  if (params.size() != grads.size()) {
    throw DimensionError("adamw_step: parameter/gradient count mismatch");
  }
  if (hyper_.lr <= 0.0) throw ParameterError("adamw_step: lr must be > 0");

  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor* p : params) {
      m_.push_back(Tensor::zeros(p->shape()));
      v_.push_back(Tensor::zeros(p->shape()));
    }
  }
  if (m_.size() != params.size()) {
    throw DimensionError("adamw_step: state was initialized for a different parameter list");
  }

  ++step_count_;
  const double b1 = hyper_.beta1, b2 = hyper_.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));

  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    if (g.shape() != p.shape()) {
      throw DimensionError("adamw_step: gradient shape " + shape_str(g.shape()) +
                           " does not match parameter shape " +
                           shape_str(p.shape()));
    }
    double* pm = m_[i].mutable_data();
    double* pv = v_[i].mutable_data();
    double* pp = p.mutable_data();
    const double* pg = g.data();
    int64_t n = p.numel();
    for (int64_t k = 0; k < n; ++k) {
      pm[k] = b1 * pm[k] + (1.0 - b1) * pg[k];
      pv[k] = b2 * pv[k] + (1.0 - b2) * pg[k] * pg[k];
      double m_hat = pm[k] / bias1;
      double v_hat = pv[k] / bias2;
      // Decoupled decay: applied to the parameter directly, not the
      // gradient.
      pp[k] -= hyper_.lr * hyper_.weight_decay * pp[k];
      pp[k] -= hyper_.lr * m_hat / (std::sqrt(v_hat) + hyper_.epsilon);
    }
  }
}

void AdamW::restore(int64_t step_count, std::vector<Tensor> m,
                    std::vector<Tensor> v) {
  step_count_ = step_count;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace vibgan
