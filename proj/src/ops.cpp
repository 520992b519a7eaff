#include "vibgan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace vibgan::ops {

namespace {

// Binds tracked inputs to the active tape before any closure copies are
// taken, so saved Tensors carry their node ids into backward rules.
struct Recorder {
  Tape* tape = nullptr;
  bool active = false;
  std::vector<int64_t> ids;

  explicit Recorder(std::initializer_list<const Tensor*> ins) {
    tape = active_tape();
    if (!tape || !grad_enabled()) return;
    for (const Tensor* in : ins) {
      if (in->requires_grad() || in->node_on(*tape) >= 0) {
        active = true;
        break;
      }
    }
    if (!active) return;
    ids.reserve(ins.size());
    for (const Tensor* in : ins) {
      int64_t id = in->node_on(*tape);
      if (id < 0 && in->requires_grad()) id = tape->register_leaf(*in);
      ids.push_back(id);
    }
  }

  Tensor finish(const char* op, Tensor out, BackwardFn bw) {
    if (debug_checks()) out.check_finite(op);
    if (!active) return out;
    int64_t node = tape->append_node(op, std::move(ids), std::move(bw));
    out.bind_node(*tape, node);
    return out;
  }

  // For backward rules that save the op's own output: the node is bound
  // first so the closure's saved copy carries its tape linkage, keeping
  // the output differentiable in a second backward.
  template <class MakeBackward>
  Tensor finish_with_output(const char* op, Tensor out, MakeBackward make) {
    if (debug_checks()) out.check_finite(op);
    if (!active) return out;
    int64_t node = tape->append_node(op, std::move(ids), nullptr);
    out.bind_node(*tape, node);
    tape->set_backward(node, make(out));
    return out;
  }
};

template <class F>
Tensor elementwise_kernel(const Tensor& a, const Tensor& b, F&& f) {
  Tensor out = Tensor::zeros(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.mutable_data();
  int64_t n = a.numel();
  for (int64_t i = 0; i < n; ++i) po[i] = f(pa[i], pb[i]);
  return out;
}

template <class F>
Tensor unary_kernel(const Tensor& x, F&& f) {
  Tensor out = Tensor::zeros(x.shape());
  const double* px = x.data();
  double* po = out.mutable_data();
  int64_t n = x.numel();
  for (int64_t i = 0; i < n; ++i) po[i] = f(px[i]);
  return out;
}

Tensor add_same(const Tensor& a, const Tensor& b);
Tensor mul_same(const Tensor& a, const Tensor& b);
Tensor sub_same(const Tensor& a, const Tensor& b);
Tensor div_same(const Tensor& a, const Tensor& b);

Tensor add_same(const Tensor& a, const Tensor& b) {
  Recorder rec({&a, &b});
  Tensor out = elementwise_kernel(a, b, [](double x, double y) { return x + y; });
  return rec.finish("add", std::move(out), [](const Tensor& g) {
    return std::vector<Tensor>{g, g};
  });
}

Tensor sub_same(const Tensor& a, const Tensor& b) {
  Recorder rec({&a, &b});
  Tensor out = elementwise_kernel(a, b, [](double x, double y) { return x - y; });
  return rec.finish("sub", std::move(out), [](const Tensor& g) {
    return std::vector<Tensor>{g, neg(g)};
  });
}

Tensor mul_same(const Tensor& a, const Tensor& b) {
  Recorder rec({&a, &b});
  Tensor out = elementwise_kernel(a, b, [](double x, double y) { return x * y; });
  Tensor sa = a, sb = b;
  return rec.finish("mul", std::move(out), [sa, sb](const Tensor& g) {
    return std::vector<Tensor>{mul_same(g, sb), mul_same(g, sa)};
  });
}

Tensor div_same(const Tensor& a, const Tensor& b) {
  Recorder rec({&a, &b});
  Tensor out = elementwise_kernel(a, b, [](double x, double y) { return x / y; });
  Tensor sb = b;
  return rec.finish_with_output("div", std::move(out), [sb](const Tensor& sout) {
    return [sb, sout](const Tensor& g) {
      // d/da = g/b ; d/db = -g*out/b
      return std::vector<Tensor>{div_same(g, sb),
                                 neg(div_same(mul_same(g, sout), sb))};
    };
  });
}

// Aligns `from` to `to` by right-justified numpy rules; throws if the
// shapes are not broadcast-compatible.
void check_broadcastable(const Shape& from, const Shape& to) {
  if (from.size() > to.size()) {
    throw DimensionError("cannot broadcast " + shape_str(from) + " to " +
                         shape_str(to));
  }
  size_t off = to.size() - from.size();
  for (size_t i = 0; i < from.size(); ++i) {
    if (from[i] != to[off + i] && from[i] != 1) {
      throw DimensionError("cannot broadcast " + shape_str(from) + " to " +
                           shape_str(to));
    }
  }
}

std::vector<int64_t> row_major_strides(const Shape& s) {
  std::vector<int64_t> st(s.size(), 1);
  for (int64_t i = static_cast<int64_t>(s.size()) - 2; i >= 0; --i) {
    st[static_cast<size_t>(i)] =
        st[static_cast<size_t>(i + 1)] * s[static_cast<size_t>(i + 1)];
  }
  return st;
}

}  // namespace

Shape broadcast_shape(const Shape& a, const Shape& b) {
  size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (size_t i = 0; i < rank; ++i) {
    int64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    int64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw DimensionError("shapes " + shape_str(a) + " and " + shape_str(b) +
                           " are not broadcastable");
    }
    out[i] = std::max(da, db);
  }
  return out;
}

Tensor broadcast_to(const Tensor& x, Shape shape) {
  if (x.shape() == shape) return x;
  check_broadcastable(x.shape(), shape);
  Recorder rec({&x});

  size_t rank = shape.size();
  size_t off = rank - x.shape().size();
  // Effective input strides aligned to the output rank; 0 on expanded dims.
  std::vector<int64_t> in_strides(rank, 0);
  {
    auto base = row_major_strides(x.shape());
    for (size_t i = 0; i < x.shape().size(); ++i) {
      in_strides[off + i] = x.shape()[i] == 1 ? 0 : base[i];
    }
  }
  auto out_strides = row_major_strides(shape);

  Tensor out = Tensor::zeros(shape);
  const double* px = x.data();
  double* po = out.mutable_data();
  int64_t n = out.numel();
  for (int64_t flat = 0; flat < n; ++flat) {
    int64_t rem = flat, src = 0;
    for (size_t d = 0; d < rank; ++d) {
      int64_t coord = rem / out_strides[d];
      rem -= coord * out_strides[d];
      src += coord * in_strides[d];
    }
    po[flat] = px[src];
  }

  Shape in_shape = x.shape();
  return rec.finish("broadcast_to", std::move(out),
                    [in_shape](const Tensor& g) {
                      return std::vector<Tensor>{sum_to_shape(g, in_shape)};
                    });
}

Tensor sum_to_shape(const Tensor& x, Shape shape) {
  if (x.shape() == shape) return x;
  check_broadcastable(shape, x.shape());
  Recorder rec({&x});

  size_t rank = x.shape().size();
  size_t off = rank - shape.size();
  std::vector<int64_t> out_eff(rank, 0);
  {
    auto base = row_major_strides(shape);
    for (size_t i = 0; i < shape.size(); ++i) {
      out_eff[off + i] = shape[i] == 1 ? 0 : base[i];
    }
  }
  auto in_strides = row_major_strides(x.shape());

  Tensor out = Tensor::zeros(shape);
  const double* px = x.data();
  double* po = out.mutable_data();
  int64_t n = x.numel();
  for (int64_t flat = 0; flat < n; ++flat) {
    int64_t rem = flat, dst = 0;
    for (size_t d = 0; d < rank; ++d) {
      int64_t coord = rem / in_strides[d];
      rem -= coord * in_strides[d];
      dst += coord * out_eff[d];
    }
    po[dst] += px[flat];
  }

  Shape in_shape = x.shape();
  return rec.finish("sum_to_shape", std::move(out),
                    [in_shape](const Tensor& g) {
                      return std::vector<Tensor>{broadcast_to(g, in_shape)};
                    });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return add_same(a, b);
  Shape s = broadcast_shape(a.shape(), b.shape());
  return add_same(broadcast_to(a, s), broadcast_to(b, s));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return sub_same(a, b);
  Shape s = broadcast_shape(a.shape(), b.shape());
  return sub_same(broadcast_to(a, s), broadcast_to(b, s));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return mul_same(a, b);
  Shape s = broadcast_shape(a.shape(), b.shape());
  return mul_same(broadcast_to(a, s), broadcast_to(b, s));
}

Tensor div(const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return div_same(a, b);
  Shape s = broadcast_shape(a.shape(), b.shape());
  return div_same(broadcast_to(a, s), broadcast_to(b, s));
}

Tensor neg(const Tensor& x) {
  Recorder rec({&x});
  Tensor out = unary_kernel(x, [](double v) { return -v; });
  return rec.finish("neg", std::move(out), [](const Tensor& g) {
    return std::vector<Tensor>{neg(g)};
  });
}

Tensor scale(const Tensor& x, double c) {
  Recorder rec({&x});
  Tensor out = unary_kernel(x, [c](double v) { return v * c; });
  return rec.finish("scale", std::move(out), [c](const Tensor& g) {
    return std::vector<Tensor>{scale(g, c)};
  });
}

Tensor add_scalar(const Tensor& x, double c) {
  Recorder rec({&x});
  Tensor out = unary_kernel(x, [c](double v) { return v + c; });
  return rec.finish("add_scalar", std::move(out), [](const Tensor& g) {
    return std::vector<Tensor>{g};
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape " + shape_str(x.shape()) + " -> " +
                         shape_str(shape) + " changes element count");
  }
  Recorder rec({&x});
  Tensor out = Tensor::from(shape, x.flat());
  Shape in_shape = x.shape();
  return rec.finish("reshape", std::move(out), [in_shape](const Tensor& g) {
    return std::vector<Tensor>{reshape(g, in_shape)};
  });
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

namespace {

void validate_axes(const Tensor& x, std::vector<int64_t>& axes) {
  if (axes.empty()) {
    axes.resize(static_cast<size_t>(x.rank()));
    for (size_t i = 0; i < axes.size(); ++i) axes[i] = static_cast<int64_t>(i);
    return;
  }
  std::sort(axes.begin(), axes.end());
  for (size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] < 0 || axes[i] >= x.rank()) {
      throw ParameterError("reduction axis out of range");
    }
    if (i > 0 && axes[i] == axes[i - 1]) {
      throw ParameterError("duplicate reduction axis");
    }
  }
}

}  // namespace

Tensor sum(const Tensor& x, std::vector<int64_t> axes, bool keepdims) {
  validate_axes(x, axes);
  Shape target = x.shape();
  for (int64_t a : axes) target[static_cast<size_t>(a)] = 1;
  Tensor out = sum_to_shape(x, target);
  if (!keepdims) {
    Shape squeezed;
    for (size_t i = 0; i < target.size(); ++i) {
      bool reduced = std::binary_search(axes.begin(), axes.end(),
                                        static_cast<int64_t>(i));
      if (!reduced) squeezed.push_back(target[i]);
    }
    if (squeezed.empty()) squeezed = {1};
    out = reshape(out, squeezed);
  }
  return out;
}

Tensor sum(const Tensor& x) { return sum(x, {}, false); }

Tensor mean(const Tensor& x, std::vector<int64_t> axes, bool keepdims) {
  validate_axes(x, axes);
  int64_t n = 1;
  for (int64_t a : axes) n *= x.dim(a);
  return scale(sum(x, axes, keepdims), 1.0 / static_cast<double>(n));
}

Tensor mean(const Tensor& x) { return mean(x, {}, false); }

Tensor sq_l2_norm(const Tensor& x) { return sum(mul(x, x)); }

// ---------------------------------------------------------------------------
// Elementwise nonlinear
// ---------------------------------------------------------------------------

Tensor sqrt(const Tensor& x) {
  Recorder rec({&x});
  Tensor out = unary_kernel(x, [](double v) { return std::sqrt(v); });
  return rec.finish_with_output("sqrt", std::move(out), [](const Tensor& sout) {
    return [sout](const Tensor& g) {
      return std::vector<Tensor>{div(scale(g, 0.5), sout)};
    };
  });
}

Tensor log(const Tensor& x) {
  Recorder rec({&x});
  Tensor out = unary_kernel(x, [](double v) { return std::log(v); });
  Tensor sx = x;
  return rec.finish("log", std::move(out), [sx](const Tensor& g) {
    return std::vector<Tensor>{div(g, sx)};
  });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (lo > hi) throw ParameterError("clamp: lo > hi");
  Recorder rec({&x});
  Tensor out =
      unary_kernel(x, [lo, hi](double v) { return std::clamp(v, lo, hi); });
  Tensor sx = x;
  return rec.finish("clamp", std::move(out), [sx, lo, hi](const Tensor& g) {
    Tensor mask = unary_kernel(
        sx, [lo, hi](double v) { return v >= lo && v <= hi ? 1.0 : 0.0; });
    return std::vector<Tensor>{mul(g, mask)};
  });
}

Tensor relu(const Tensor& x) {
  Recorder rec({&x});
  Tensor out = unary_kernel(x, [](double v) { return v > 0.0 ? v : 0.0; });
  Tensor sx = x;
  return rec.finish("relu", std::move(out), [sx](const Tensor& g) {
    Tensor mask = unary_kernel(sx, [](double v) { return v > 0.0 ? 1.0 : 0.0; });
    return std::vector<Tensor>{mul(g, mask)};
  });
}

Tensor leaky_relu(const Tensor& x, double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw ParameterError("leaky_relu: alpha must lie in (0,1)");
  }
  Recorder rec({&x});
  Tensor out =
      unary_kernel(x, [alpha](double v) { return v > 0.0 ? v : alpha * v; });
  Tensor sx = x;
  return rec.finish("leaky_relu", std::move(out), [sx, alpha](const Tensor& g) {
    Tensor mask =
        unary_kernel(sx, [alpha](double v) { return v > 0.0 ? 1.0 : alpha; });
    return std::vector<Tensor>{mul(g, mask)};
  });
}

Tensor tanh(const Tensor& x) {
  Recorder rec({&x});
  Tensor out = unary_kernel(x, [](double v) { return std::tanh(v); });
  return rec.finish_with_output("tanh", std::move(out), [](const Tensor& sout) {
    return [sout](const Tensor& g) {
      // g * (1 - y^2), expressed in ops so it stays differentiable.
      return std::vector<Tensor>{
          mul(g, add_scalar(neg(mul(sout, sout)), 1.0))};
    };
  });
}

Tensor sigmoid(const Tensor& x) {
  Recorder rec({&x});
  Tensor out = unary_kernel(x, [](double v) {
    // Split by sign for numerical stability at large |v|.
    return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                    : std::exp(v) / (1.0 + std::exp(v));
  });
  return rec.finish_with_output("sigmoid", std::move(out), [](const Tensor& sout) {
    return [sout](const Tensor& g) {
      return std::vector<Tensor>{
          mul(g, mul(sout, add_scalar(neg(sout), 1.0)))};
    };
  });
}

Tensor activation(const Tensor& x, Activation kind, double alpha) {
  switch (kind) {
    case Activation::relu:
      return relu(x);
    case Activation::leaky_relu:
      return leaky_relu(x, alpha);
    case Activation::tanh:
      return tanh(x);
    case Activation::sigmoid:
      return sigmoid(x);
  }
  throw ParameterError("unknown activation");
}

Tensor dropout(const Tensor& x, double p, Mode mode, Rng& rng) {
  if (p < 0.0 || p >= 1.0) {
    throw ParameterError("dropout: p must lie in [0,1)");
  }
  if (mode == Mode::eval || p == 0.0) return x;
  Tensor mask = Tensor::zeros(x.shape());
  double keep_scale = 1.0 / (1.0 - p);
  double* pm = mask.mutable_data();
  int64_t n = mask.numel();
  for (int64_t i = 0; i < n; ++i) {
    pm[i] = rng.uniform() >= p ? keep_scale : 0.0;
  }
  return mul(x, mask);
}

// ---------------------------------------------------------------------------
// Convolution primitives. The trio {core, input_grad, kernel_grad} is
// closed under differentiation, which is what makes the gradient
// penalty twice-differentiable through conv layers.
// ---------------------------------------------------------------------------

int64_t conv1d_out_len(int64_t len, int64_t kernel, int64_t stride,
                       int64_t padding) {
  if (stride < 1) throw ParameterError("conv1d: stride must be >= 1");
  if (padding < 0) throw ParameterError("conv1d: padding must be >= 0");
  if (len + 2 * padding < kernel) {
    throw GeometryError("conv1d: kernel " + std::to_string(kernel) +
                        " exceeds padded length " +
                        std::to_string(len + 2 * padding));
  }
  int64_t out = (len + 2 * padding - kernel) / stride + 1;
  if (out <= 0) throw GeometryError("conv1d: non-positive output length");
  return out;
}

int64_t conv_transpose1d_out_len(int64_t len, int64_t kernel, int64_t stride,
                                 int64_t padding) {
  if (stride < 1) throw ParameterError("conv_transpose1d: stride must be >= 1");
  if (padding < 0) throw ParameterError("conv_transpose1d: padding must be >= 0");
  int64_t out = (len - 1) * stride - 2 * padding + kernel;
  if (out < 1) throw GeometryError("conv_transpose1d: non-positive output length");
  return out;
}

namespace {

void require_rank3(const char* op, const Tensor& t, const char* what) {
  if (t.rank() != 3) {
    throw DimensionError(std::string(op) + ": " + what + " must be rank 3, got " +
                         shape_str(t.shape()));
  }
}

Tensor conv_core(const Tensor& x, const Tensor& w, int64_t s, int64_t p);
Tensor conv_input_grad(const Tensor& gy, const Tensor& w, int64_t s, int64_t p,
                       int64_t out_len);
Tensor conv_kernel_grad(const Tensor& x, const Tensor& gy, int64_t s,
                        int64_t p, int64_t kernel_len);

// y[b,o,j] = sum_{c,k} x[b,c,j*s+k-p] * w[o,c,k]
Tensor conv_core(const Tensor& x, const Tensor& w, int64_t s, int64_t p) {
  require_rank3("conv1d", x, "input");
  require_rank3("conv1d", w, "kernel");
  if (x.dim(1) != w.dim(1)) {
    throw DimensionError("conv1d: input channels " + std::to_string(x.dim(1)) +
                         " != kernel channels " + std::to_string(w.dim(1)));
  }
  const int64_t B = x.dim(0), Ci = x.dim(1), L = x.dim(2);
  const int64_t Co = w.dim(0), K = w.dim(2);
  const int64_t Lo = conv1d_out_len(L, K, s, p);

  Recorder rec({&x, &w});
  Tensor out = Tensor::zeros({B, Co, Lo});
  const double* px = x.data();
  const double* pw = w.data();
  double* po = out.mutable_data();
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t o = 0; o < Co; ++o) {
      double* orow = po + (b * Co + o) * Lo;
      for (int64_t c = 0; c < Ci; ++c) {
        const double* xrow = px + (b * Ci + c) * L;
        const double* wrow = pw + (o * Ci + c) * K;
        for (int64_t j = 0; j < Lo; ++j) {
          int64_t base = j * s - p;
          int64_t k0 = std::max<int64_t>(0, -base);
          int64_t k1 = std::min<int64_t>(K, L - base);
          double acc = 0.0;
          for (int64_t k = k0; k < k1; ++k) acc += xrow[base + k] * wrow[k];
          orow[j] += acc;
        }
      }
    }
  }

  Tensor sx = x, sw = w;
  return rec.finish("conv1d", std::move(out), [sx, sw, s, p, L, K](const Tensor& g) {
    return std::vector<Tensor>{conv_input_grad(g, sw, s, p, L),
                               conv_kernel_grad(sx, g, s, p, K)};
  });
}

// gx[b,c,j*s+k-p] += w[o,c,k] * gy[b,o,j]; adjoint of conv_core in x.
Tensor conv_input_grad(const Tensor& gy, const Tensor& w, int64_t s, int64_t p,
                       int64_t out_len) {
  require_rank3("conv1d_input_grad", gy, "gradient");
  require_rank3("conv1d_input_grad", w, "kernel");
  if (gy.dim(1) != w.dim(0)) {
    throw DimensionError("conv1d_input_grad: channel mismatch");
  }
  const int64_t B = gy.dim(0), Co = gy.dim(1), Lo = gy.dim(2);
  const int64_t Ci = w.dim(1), K = w.dim(2);
  if (conv1d_out_len(out_len, K, s, p) != Lo) {
    throw GeometryError("conv1d_input_grad: output length " +
                        std::to_string(out_len) +
                        " is inconsistent with gradient length " +
                        std::to_string(Lo));
  }

  Recorder rec({&gy, &w});
  Tensor out = Tensor::zeros({B, Ci, out_len});
  const double* pg = gy.data();
  const double* pw = w.data();
  double* po = out.mutable_data();
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t o = 0; o < Co; ++o) {
      const double* grow = pg + (b * Co + o) * Lo;
      for (int64_t c = 0; c < Ci; ++c) {
        double* orow = po + (b * Ci + c) * out_len;
        const double* wrow = pw + (o * Ci + c) * K;
        for (int64_t j = 0; j < Lo; ++j) {
          int64_t base = j * s - p;
          int64_t k0 = std::max<int64_t>(0, -base);
          int64_t k1 = std::min<int64_t>(K, out_len - base);
          double gv = grow[j];
          for (int64_t k = k0; k < k1; ++k) orow[base + k] += gv * wrow[k];
        }
      }
    }
  }

  Tensor sgy = gy, sw = w;
  int64_t K_saved = K;
  return rec.finish("conv1d_input_grad", std::move(out),
                    [sgy, sw, s, p, K_saved](const Tensor& g) {
                      return std::vector<Tensor>{
                          conv_core(g, sw, s, p),
                          conv_kernel_grad(g, sgy, s, p, K_saved)};
                    });
}

// gw[o,c,k] = sum_{b,j} x[b,c,j*s+k-p] * gy[b,o,j]
Tensor conv_kernel_grad(const Tensor& x, const Tensor& gy, int64_t s,
                        int64_t p, int64_t kernel_len) {
  require_rank3("conv1d_kernel_grad", x, "input");
  require_rank3("conv1d_kernel_grad", gy, "gradient");
  if (x.dim(0) != gy.dim(0)) {
    throw DimensionError("conv1d_kernel_grad: batch mismatch");
  }
  const int64_t B = x.dim(0), Ci = x.dim(1), L = x.dim(2);
  const int64_t Co = gy.dim(1), Lo = gy.dim(2);
  const int64_t K = kernel_len;
  if (conv1d_out_len(L, K, s, p) != Lo) {
    throw GeometryError("conv1d_kernel_grad: inconsistent geometry");
  }

  Recorder rec({&x, &gy});
  Tensor out = Tensor::zeros({Co, Ci, K});
  const double* px = x.data();
  const double* pg = gy.data();
  double* po = out.mutable_data();
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t o = 0; o < Co; ++o) {
      const double* grow = pg + (b * Co + o) * Lo;
      for (int64_t c = 0; c < Ci; ++c) {
        const double* xrow = px + (b * Ci + c) * L;
        double* orow = po + (o * Ci + c) * K;
        for (int64_t j = 0; j < Lo; ++j) {
          int64_t base = j * s - p;
          int64_t k0 = std::max<int64_t>(0, -base);
          int64_t k1 = std::min<int64_t>(K, L - base);
          double gv = grow[j];
          for (int64_t k = k0; k < k1; ++k) orow[k] += xrow[base + k] * gv;
        }
      }
    }
  }

  Tensor sx = x, sgy = gy;
  int64_t L_saved = L;
  return rec.finish("conv1d_kernel_grad", std::move(out),
                    [sx, sgy, s, p, L_saved](const Tensor& g) {
                      return std::vector<Tensor>{
                          conv_input_grad(sgy, g, s, p, L_saved),
                          conv_core(sx, g, s, p)};
                    });
}

Tensor add_channel_bias(const Tensor& y, const Tensor& bias) {
  if (bias.rank() != 1 || bias.dim(0) != y.dim(1)) {
    throw DimensionError("bias shape " + shape_str(bias.shape()) +
                         " does not match channel count " +
                         std::to_string(y.dim(1)));
  }
  return add(y, reshape(bias, {1, bias.dim(0), 1}));
}

}  // namespace

Tensor conv1d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int64_t stride, int64_t padding) {
  Tensor y = conv_core(input, kernel, stride, padding);
  if (bias.defined()) y = add_channel_bias(y, bias);
  return y;
}

Tensor conv_transpose1d(const Tensor& input, const Tensor& kernel,
                        const Tensor& bias, int64_t stride, int64_t padding) {
  require_rank3("conv_transpose1d", input, "input");
  require_rank3("conv_transpose1d", kernel, "kernel");
  if (input.dim(1) != kernel.dim(0)) {
    throw DimensionError("conv_transpose1d: input channels " +
                         std::to_string(input.dim(1)) +
                         " != kernel input channels " +
                         std::to_string(kernel.dim(0)));
  }
  int64_t out_len =
      conv_transpose1d_out_len(input.dim(2), kernel.dim(2), stride, padding);
  Tensor y = conv_input_grad(input, kernel, stride, padding, out_len);
  if (bias.defined()) y = add_channel_bias(y, bias);
  return y;
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

BatchNormState BatchNormState::for_channels(int64_t channels) {
  BatchNormState s;
  s.running_mean = Tensor::zeros({channels});
  s.running_var = Tensor::ones({channels});
  return s;
}

namespace {

void check_norm_shapes(const char* op, const Tensor& input,
                       const Tensor& gamma, const Tensor& beta) {
  require_rank3(op, input, "input");
  int64_t c = input.dim(1);
  if (gamma.rank() != 1 || gamma.dim(0) != c || beta.rank() != 1 ||
      beta.dim(0) != c) {
    throw DimensionError(std::string(op) + ": affine parameters must have shape [" +
                         std::to_string(c) + "]");
  }
}

Tensor affine_per_channel(const Tensor& normalized, const Tensor& gamma,
                          const Tensor& beta) {
  int64_t c = normalized.dim(1);
  return add(mul(normalized, reshape(gamma, {1, c, 1})),
             reshape(beta, {1, c, 1}));
}

}  // namespace

Tensor batch_norm1d(const Tensor& input, const Tensor& gamma,
                    const Tensor& beta, BatchNormState& state, Mode mode) {
  check_norm_shapes("batch_norm1d", input, gamma, beta);
  const int64_t B = input.dim(0), C = input.dim(1), L = input.dim(2);
  if (state.running_mean.numel() != C || state.running_var.numel() != C) {
    throw DimensionError("batch_norm1d: running stats channel mismatch");
  }

  if (mode == Mode::eval) {
    Tensor mu = reshape(state.running_mean, {1, C, 1});
    Tensor var = reshape(state.running_var, {1, C, 1});
    Tensor y = div(sub(input, mu), sqrt(add_scalar(var, state.eps)));
    return affine_per_channel(y, gamma, beta);
  }

  int64_t n = B * L;
  if (n < 2) {
    throw ParameterError("batch_norm1d: train mode needs B*L >= 2");
  }
  Tensor mu = mean(input, {0, 2}, true);
  Tensor centered = sub(input, mu);
  Tensor var = mean(mul(centered, centered), {0, 2}, true);  // biased
  Tensor y = div(centered, sqrt(add_scalar(var, state.eps)));

  {
    // Running statistics live outside the graph; unbiased variance is
    // kept for eval, mirroring the usual train/eval convention.
    NoGradGuard guard;
    double m = state.momentum;
    Tensor mu_c = reshape(mu, {C});
    Tensor var_u = scale(reshape(var, {C}),
                         static_cast<double>(n) / static_cast<double>(n - 1));
    state.running_mean =
        add(scale(state.running_mean, 1.0 - m), scale(mu_c, m));
    state.running_var =
        add(scale(state.running_var, 1.0 - m), scale(var_u, m));
  }

  return affine_per_channel(y, gamma, beta);
}

Tensor instance_norm1d(const Tensor& input, const Tensor& gamma,
                       const Tensor& beta, double eps) {
  check_norm_shapes("instance_norm1d", input, gamma, beta);
  if (input.dim(2) < 2) {
    throw ParameterError("instance_norm1d: needs L >= 2");
  }
  Tensor mu = mean(input, {2}, true);
  Tensor centered = sub(input, mu);
  Tensor var = mean(mul(centered, centered), {2}, true);
  Tensor y = div(centered, sqrt(add_scalar(var, eps)));
  return affine_per_channel(y, gamma, beta);
}

}  // namespace vibgan::ops

namespace vibgan {

Tensor detail_accumulate(const Tensor& a, const Tensor& b) {
  return ops::add(a, b);
}

}  // namespace vibgan
