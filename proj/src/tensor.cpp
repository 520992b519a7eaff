#include "vibgan/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace vibgan {

namespace {

thread_local Tape* g_active_tape = nullptr;
thread_local bool g_grad_enabled = true;
bool g_debug_checks = false;

std::atomic<uint64_t> g_tape_epoch_counter{1};

}  // namespace

int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i];
  }
  os << "]";
  return os.str();
}

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::ones(Shape shape) { return full(std::move(shape), 1.0); }

Tensor Tensor::full(Shape shape, double value) {
  for (int64_t d : shape) {
    if (d <= 0) {
      throw DimensionError("tensor extent must be positive, got shape " +
                           shape_str(shape));
    }
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::make_shared<std::vector<double>>(
      static_cast<size_t>(shape_numel(t.shape_)), value);
  return t;
}

Tensor Tensor::scalar(double value) { return full({1}, value); }

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  if (shape_numel(shape) != static_cast<int64_t>(values.size())) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(shape));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::make_shared<std::vector<double>>(std::move(values));
  return t;
}

Tensor Tensor::randn(Shape shape, Rng& rng, double mean, double stddev) {
  Tensor t = zeros(std::move(shape));
  for (double& v : *t.data_) v = rng.normal(mean, stddev);
  return t;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ContractError("item() requires a one-element tensor, got shape " +
                        shape_str(shape_));
  }
  return (*data_)[0];
}

double Tensor::at(std::initializer_list<int64_t> idx) const {
  if (static_cast<int64_t>(idx.size()) != rank()) {
    throw DimensionError("index rank mismatch");
  }
  int64_t flat = 0;
  size_t i = 0;
  for (int64_t ix : idx) {
    flat = flat * shape_[i] + ix;
    ++i;
  }
  return (*data_)[static_cast<size_t>(flat)];
}

Tensor Tensor::clone() const {
  Tensor t;
  t.shape_ = shape_;
  t.data_ = std::make_shared<std::vector<double>>(*data_);
  t.requires_grad_ = requires_grad_;
  return t;
}

int64_t Tensor::node_on(const Tape& tape) const {
  return tape_epoch_ == tape.epoch() ? node_ : -1;
}

void Tensor::bind_node(const Tape& tape, int64_t node) const {
  tape_epoch_ = tape.epoch();
  node_ = node;
}

void Tensor::check_finite(const char* ctx) const {
  for (double v : *data_) {
    if (!std::isfinite(v)) {
      throw NumericalError(std::string("non-finite value in ") + ctx);
    }
  }
}

// ---------------------------------------------------------------------------
// GradientMap
// ---------------------------------------------------------------------------

const Tensor& GradientMap::at(const Tensor& leaf) const {
  auto it = grads_.find(leaf.id());
  if (it == grads_.end()) {
    throw ContractError("no gradient recorded for the given leaf");
  }
  return it->second;
}

Tensor GradientMap::get_or_zeros(const Tensor& leaf) const {
  auto it = grads_.find(leaf.id());
  if (it == grads_.end()) return Tensor::zeros(leaf.shape());
  return it->second;
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Tape::Tape() : epoch_(g_tape_epoch_counter.fetch_add(1)) {}

Tape::~Tape() = default;

int64_t Tape::register_leaf(const Tensor& t) {
  auto it = leaves_.find(t.id());
  if (it != leaves_.end()) {
    t.bind_node(*this, it->second);
    return it->second;
  }
  int64_t id = static_cast<int64_t>(nodes_.size());
  nodes_.push_back(Node{"leaf", {}, nullptr});
  leaves_.emplace(t.id(), id);
  t.bind_node(*this, id);
  return id;
}

int64_t Tape::append_node(const char* op, std::vector<int64_t> inputs,
                          BackwardFn backward) {
  int64_t id = static_cast<int64_t>(nodes_.size());
  nodes_.push_back(Node{op, std::move(inputs), std::move(backward)});
  return id;
}

void Tape::set_backward(int64_t node, BackwardFn backward) {
  nodes_[static_cast<size_t>(node)].backward = std::move(backward);
}

GradientMap Tape::backward(const Tensor& output, bool create_graph) {
  if (output.numel() != 1) {
    throw ContractError("backward requires a scalar output, got shape " +
                        shape_str(output.shape()));
  }
  int64_t root = output.node_on(*this);
  if (root < 0) {
    throw ContractError("backward on a tensor that is not on this tape");
  }

  // Nodes appended while running backward rules (create_graph) get ids
  // beyond this snapshot and are intentionally never processed here.
  size_t snapshot = nodes_.size();
  std::vector<Tensor> grad_by_id(snapshot);

  auto run = [&]() {
    grad_by_id[static_cast<size_t>(root)] = Tensor::ones(output.shape());
    for (int64_t id = root; id >= 0; --id) {
      Tensor g = grad_by_id[static_cast<size_t>(id)];
      if (!g.defined()) continue;
      // Copied out of nodes_: running a backward rule may append nodes
      // (create_graph) and reallocate the vector under us.
      BackwardFn backward = nodes_[static_cast<size_t>(id)].backward;
      if (!backward) continue;  // leaf or constant terminal
      std::vector<int64_t> inputs = nodes_[static_cast<size_t>(id)].inputs;
      std::vector<Tensor> input_grads = backward(g);
      for (size_t k = 0; k < inputs.size(); ++k) {
        int64_t in_id = inputs[k];
        if (in_id < 0 || !input_grads[k].defined()) continue;
        Tensor& slot = grad_by_id[static_cast<size_t>(in_id)];
        if (!slot.defined()) {
          slot = input_grads[k];
        } else {
          // ops::add lives in the op layer; a local fused add keeps the
          // tape linkage when create_graph is active via bind below.
          slot = detail_accumulate(slot, input_grads[k]);
        }
      }
    }
  };

  if (create_graph) {
    // Recording must target this tape even if another scope is active.
    TapeScope scope(*this);
    run();
  } else {
    NoGradGuard guard;
    run();
  }

  GradientMap out;
  for (const auto& [key, id] : leaves_) {
    if (static_cast<size_t>(id) < snapshot &&
        grad_by_id[static_cast<size_t>(id)].defined()) {
      out.put(key, grad_by_id[static_cast<size_t>(id)]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scopes and flags
// ---------------------------------------------------------------------------

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tape* active_tape() { return g_active_tape; }

bool grad_enabled() { return g_grad_enabled; }

void set_debug_checks(bool on) { g_debug_checks = on; }

bool debug_checks() { return g_debug_checks; }

}  // namespace vibgan
