// AdamW with decoupled weight decay.
#pragma once

#include <cstdint>
#include <vector>

#include "vibgan/tensor.hpp"

namespace vibgan {

struct AdamWHyper {
  double lr = 1e-3;
  double beta1 = 0.0;   // zero first moment follows the WGAN-GP convention
  double beta2 = 0.9;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

// Optimizer state over a fixed, ordered parameter list. Moment tensors
// are created lazily to match parameter shapes; step() mutates the
// parameters in place (the single sanctioned write path, to be called
// only after the step's tape has been dropped).
class AdamW {
 public:
  AdamW() = default;
  explicit AdamW(AdamWHyper hyper) : hyper_(hyper) {}

  void step(const std::vector<Tensor*>& params,
            const std::vector<Tensor>& grads);

  int64_t step_count() const { return step_count_; }
  const AdamWHyper& hyper() const { return hyper_; }
  AdamWHyper& hyper() { return hyper_; }

  // Serialization access.
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void restore(int64_t step_count, std::vector<Tensor> m, std::vector<Tensor> v);

 private:
  AdamWHyper hyper_;
  int64_t step_count_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace vibgan
