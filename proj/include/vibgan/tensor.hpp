// Reverse-mode autodiff core: Tensor values plus an append-only Tape.
//
// Tensors are immutable once created (the optimizer owns the single
// sanctioned in-place write path, outside any live tape). Operations
// record nodes on the active tape; every backward rule is expressed in
// tape operations, so backward(create_graph=true) yields gradients that
// can themselves be differentiated again.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "vibgan/rng.hpp"

namespace vibgan {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

// ---------------------------------------------------------------------------
// Error taxonomy. The CLI maps these onto exit codes.
// ---------------------------------------------------------------------------
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};
struct DimensionError : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };
struct ParameterError : Error { using Error::Error; };
struct ContractError : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };
struct IngestionError : Error { using Error::Error; };
struct AllocationError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct DivergenceError : Error { using Error::Error; };

enum class Mode { train, eval };

class Tape;

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor ones(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor randn(Shape shape, Rng& rng, double mean = 0.0,
                      double stddev = 1.0);

  bool defined() const { return static_cast<bool>(data_); }
  const Shape& shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
  int64_t dim(int64_t i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t numel() const { return data_ ? static_cast<int64_t>(data_->size()) : 0; }

  const double* data() const { return data_->data(); }
  const std::vector<double>& flat() const { return *data_; }

  // Optimizer-only write path; must never run while a tape that saved
  // this tensor is still alive.
  double* mutable_data() { return data_->data(); }

  double item() const;
  double at(std::initializer_list<int64_t> idx) const;

  Tensor clone() const;

  bool requires_grad() const { return requires_grad_; }
  Tensor& set_requires_grad(bool on = true) {
    requires_grad_ = on;
    return *this;
  }

  // Identity used for leaf registration and gradient lookup.
  const void* id() const { return static_cast<const void*>(data_.get()); }

  // Tape linkage, maintained by the op layer.
  int64_t node_on(const Tape& tape) const;
  void bind_node(const Tape& tape, int64_t node) const;

  void check_finite(const char* ctx) const;

 private:
  std::shared_ptr<std::vector<double>> data_;
  Shape shape_;
  bool requires_grad_ = false;
  // Bookkeeping only; does not take part in value semantics.
  mutable int64_t node_ = -1;
  mutable uint64_t tape_epoch_ = 0;
};

class GradientMap {
 public:
  bool contains(const Tensor& leaf) const {
    return grads_.count(leaf.id()) != 0;
  }
  const Tensor& at(const Tensor& leaf) const;
  Tensor get_or_zeros(const Tensor& leaf) const;
  void put(const void* key, Tensor grad) { grads_[key] = std::move(grad); }
  size_t size() const { return grads_.size(); }

 private:
  std::unordered_map<const void*, Tensor> grads_;
};

// Backward rule: receives the gradient w.r.t. the node output and
// returns one gradient per input (undefined Tensor for untracked slots).
using BackwardFn = std::function<std::vector<Tensor>(const Tensor&)>;

class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Gradients of a one-element output w.r.t. every tracked leaf.
  // With create_graph the returned gradients are tape-recorded, so a
  // second backward through them is valid.
  GradientMap backward(const Tensor& output, bool create_graph = false);

  int64_t register_leaf(const Tensor& t);
  int64_t append_node(const char* op, std::vector<int64_t> inputs,
                      BackwardFn backward);
  // For ops whose backward rule saves their own (bound) output.
  void set_backward(int64_t node, BackwardFn backward);

  uint64_t epoch() const { return epoch_; }
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    const char* op;
    std::vector<int64_t> inputs;
    BackwardFn backward;  // empty for leaves
  };
  std::vector<Node> nodes_;
  std::unordered_map<const void*, int64_t> leaves_;
  uint64_t epoch_;
};

// RAII activation of a tape for the current thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

Tape* active_tape();
bool grad_enabled();

// Gradient accumulation used inside Tape::backward; defined by the op
// layer so accumulation itself is tape-recorded under create_graph.
Tensor detail_accumulate(const Tensor& a, const Tensor& b);

// When on, every op output is scanned for NaN/Inf.
void set_debug_checks(bool on);
bool debug_checks();

}  // namespace vibgan
