#include "vibgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace vibgan {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'W', 'D', 'C', 'G'};
constexpr uint32_t kVersion = 1;
constexpr uint8_t kKindGan = 0;
constexpr uint8_t kKindClassifier = 1;

class Writer {
 public:
  explicit Writer(const fs::path& path)
      : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw IngestionError("cannot write checkpoint " + path.string());
  }

  void bytes(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u8(uint8_t v) { bytes(&v, 1); }
  void u32(uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void u64(uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

  void tensor(const Tensor& t) {
    u32(static_cast<uint32_t>(t.rank()));
    for (int64_t d : t.shape()) i64(d);
    for (double v : t.flat()) f64(v);
  }

  void close() {
    out_.flush();
    if (!out_) throw IngestionError("write failure on " + path_.string());
  }

 private:
  std::ofstream out_;
  fs::path path_;
};

class Reader {
 public:
  explicit Reader(const fs::path& path)
      : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IngestionError("cannot open checkpoint " + path.string());
  }

  void bytes(void* p, size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) {
      throw IngestionError("truncated checkpoint " + path_.string());
    }
  }
  uint8_t u8() {
    uint8_t v;
    bytes(&v, 1);
    return v;
  }
  uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
  }
  int64_t i64() { return static_cast<int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }

  Tensor tensor() {
    uint32_t rank = u32();
    if (rank > 8) throw IngestionError("implausible tensor rank in " + path_.string());
    Shape shape(rank);
    for (auto& d : shape) d = i64();
    int64_t n = shape_numel(shape);
    std::vector<double> values(static_cast<size_t>(n));
    for (auto& v : values) v = f64();
    return Tensor::from(std::move(shape), std::move(values));
  }

 private:
  std::ifstream in_;
  fs::path path_;
};

void write_gan_config(Writer& w, const GanConfig& cfg) {
  w.i64(cfg.z_channels);
  w.i64(cfg.z_length);
  for (int64_t c : cfg.channel_widths) w.i64(c);
  w.i64(cfg.seg_len);
  w.f64(cfg.lr_generator);
  w.f64(cfg.lr_critic);
  w.i64(cfg.critic_iters);
  w.f64(cfg.lambda_gp);
  w.i64(cfg.minibatch);
  w.i64(cfg.epochs);
  w.f64(cfg.critic_dropout_p);
  w.f64(cfg.noise_sigma0);
  w.u64(cfg.seed);
  w.f64(cfg.adamw_beta1);
  w.f64(cfg.adamw_beta2);
  w.f64(cfg.adamw_epsilon);
  w.f64(cfg.adamw_weight_decay);
  w.i64(cfg.eval_interval);
}

GanConfig read_gan_config(Reader& r) {
  GanConfig cfg;
  cfg.z_channels = r.i64();
  cfg.z_length = r.i64();
  for (auto& c : cfg.channel_widths) c = r.i64();
  cfg.seg_len = r.i64();
  cfg.lr_generator = r.f64();
  cfg.lr_critic = r.f64();
  cfg.critic_iters = r.i64();
  cfg.lambda_gp = r.f64();
  cfg.minibatch = r.i64();
  cfg.epochs = r.i64();
  cfg.critic_dropout_p = r.f64();
  cfg.noise_sigma0 = r.f64();
  cfg.seed = r.u64();
  cfg.adamw_beta1 = r.f64();
  cfg.adamw_beta2 = r.f64();
  cfg.adamw_epsilon = r.f64();
  cfg.adamw_weight_decay = r.f64();
  cfg.eval_interval = r.i64();
  return cfg;
}

void write_conv_layers(Writer& w, const std::vector<ConvLayer>& layers) {
  w.u32(static_cast<uint32_t>(layers.size()));
  for (const auto& layer : layers) {
    w.tensor(layer.kernel);
    w.tensor(layer.bias);
    w.i64(layer.stride);
    w.i64(layer.padding);
  }
}

std::vector<ConvLayer> read_conv_layers(Reader& r) {
  uint32_t count = r.u32();
  std::vector<ConvLayer> layers(count);
  for (auto& layer : layers) {
    layer.kernel = r.tensor().set_requires_grad();
    layer.bias = r.tensor().set_requires_grad();
    layer.stride = r.i64();
    layer.padding = r.i64();
  }
  return layers;
}

void write_tensor_list(Writer& w, const std::vector<Tensor>& list) {
  w.u32(static_cast<uint32_t>(list.size()));
  for (const auto& t : list) w.tensor(t);
}

std::vector<Tensor> read_tensor_list(Reader& r, bool requires_grad) {
  uint32_t count = r.u32();
  std::vector<Tensor> list(count);
  for (auto& t : list) {
    t = r.tensor();
    if (requires_grad) t.set_requires_grad();
  }
  return list;
}

void write_optimizer(Writer& w, const AdamW& opt) {
  w.f64(opt.hyper().lr);
  w.f64(opt.hyper().beta1);
  w.f64(opt.hyper().beta2);
  w.f64(opt.hyper().epsilon);
  w.f64(opt.hyper().weight_decay);
  w.i64(opt.step_count());
  write_tensor_list(w, opt.first_moments());
  write_tensor_list(w, opt.second_moments());
}

AdamW read_optimizer(Reader& r) {
  AdamWHyper hyper;
  hyper.lr = r.f64();
  hyper.beta1 = r.f64();
  hyper.beta2 = r.f64();
  hyper.epsilon = r.f64();
  hyper.weight_decay = r.f64();
  AdamW opt(hyper);
  int64_t steps = r.i64();
  auto m = read_tensor_list(r, false);
  auto v = read_tensor_list(r, false);
  opt.restore(steps, std::move(m), std::move(v));
  return opt;
}

void write_rng_state(Writer& w, const Rng::State& state) {
  for (uint64_t word : state) w.u64(word);
}

Rng::State read_rng_state(Reader& r) {
  Rng::State state;
  for (auto& word : state) word = r.u64();
  return state;
}

void write_critic(Writer& w, const CriticParams& critic) {
  write_gan_config(w, critic.cfg);
  w.u8(critic.head == CriticHead::score ? 0 : 1);
  w.u8(critic.use_dropout ? 1 : 0);
  write_conv_layers(w, critic.layers);
  write_tensor_list(w, critic.in_gamma);
  write_tensor_list(w, critic.in_beta);
}

CriticParams read_critic(Reader& r) {
  CriticParams critic;
  critic.cfg = read_gan_config(r);
  critic.head = r.u8() == 0 ? CriticHead::score : CriticHead::sigmoid;
  critic.use_dropout = r.u8() != 0;
  critic.layers = read_conv_layers(r);
  critic.in_gamma = read_tensor_list(r, true);
  critic.in_beta = read_tensor_list(r, true);
  return critic;
}

void write_header(Writer& w, uint8_t kind) {
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u8(kind);
}

void read_header(Reader& r, uint8_t expected_kind, const fs::path& path) {
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw IngestionError("bad checkpoint magic in " + path.string());
  }
  uint32_t version = r.u32();
  if (version != kVersion) {
    throw IngestionError("unsupported checkpoint version " +
                         std::to_string(version) + " in " + path.string());
  }
  uint8_t kind = r.u8();
  if (kind != expected_kind) {
    throw ContractError("checkpoint kind mismatch in " + path.string() +
                        " (expected " +
                        (expected_kind == kKindGan ? "gan" : "classifier") +
                        ")");
  }
}

}  // namespace

void save_gan_checkpoint(const fs::path& path, const GanCheckpoint& cp) {
  Writer w(path);
  write_header(w, kKindGan);
  write_gan_config(w, cp.cfg);
  w.u8(static_cast<uint8_t>(cp.trained_condition));
  w.i64(cp.trained_joint_id);

  write_gan_config(w, cp.generator.cfg);
  write_conv_layers(w, cp.generator.layers);
  write_tensor_list(w, cp.generator.bn_gamma);
  write_tensor_list(w, cp.generator.bn_beta);
  w.u32(static_cast<uint32_t>(cp.generator.bn_state.size()));
  for (const auto& state : cp.generator.bn_state) {
    w.tensor(state.running_mean);
    w.tensor(state.running_var);
    w.f64(state.momentum);
    w.f64(state.eps);
  }

  write_critic(w, cp.critic);
  write_optimizer(w, cp.opt_generator);
  write_optimizer(w, cp.opt_critic);
  write_rng_state(w, cp.rng_state);
  w.close();
}

GanCheckpoint load_gan_checkpoint(const fs::path& path) {
  Reader r(path);
  read_header(r, kKindGan, path);
  GanCheckpoint cp;
  cp.cfg = read_gan_config(r);
  cp.trained_condition = condition_from_int(r.u8());
  cp.trained_joint_id = static_cast<int>(r.i64());

  cp.generator.cfg = read_gan_config(r);
  cp.generator.layers = read_conv_layers(r);
  cp.generator.bn_gamma = read_tensor_list(r, true);
  cp.generator.bn_beta = read_tensor_list(r, true);
  uint32_t bn_count = r.u32();
  cp.generator.bn_state.resize(bn_count);
  for (auto& state : cp.generator.bn_state) {
    state.running_mean = r.tensor();
    state.running_var = r.tensor();
    state.momentum = r.f64();
    state.eps = r.f64();
  }

  cp.critic = read_critic(r);
  cp.opt_generator = read_optimizer(r);
  cp.opt_critic = read_optimizer(r);
  cp.rng_state = read_rng_state(r);
  return cp;
}

void save_classifier_checkpoint(const fs::path& path,
                                const ClassifierCheckpoint& cp) {
  Writer w(path);
  write_header(w, kKindClassifier);
  w.i64(cp.cfg.seg_len);
  for (int64_t c : cp.cfg.channel_widths) w.i64(c);
  w.f64(cp.cfg.lr);
  w.i64(cp.cfg.minibatch);
  w.i64(cp.cfg.epochs);
  w.f64(cp.cfg.threshold);
  w.u64(cp.cfg.seed);
  w.f64(cp.cfg.adamw_beta1);
  w.f64(cp.cfg.adamw_beta2);
  w.f64(cp.cfg.adamw_epsilon);
  w.f64(cp.cfg.adamw_weight_decay);
  write_critic(w, cp.net);
  write_optimizer(w, cp.opt);
  write_rng_state(w, cp.rng_state);
  w.close();
}

ClassifierCheckpoint load_classifier_checkpoint(const fs::path& path) {
  Reader r(path);
  read_header(r, kKindClassifier, path);
  ClassifierCheckpoint cp;
  cp.cfg.seg_len = r.i64();
  for (auto& c : cp.cfg.channel_widths) c = r.i64();
  cp.cfg.lr = r.f64();
  cp.cfg.minibatch = r.i64();
  cp.cfg.epochs = r.i64();
  cp.cfg.threshold = r.f64();
  cp.cfg.seed = r.u64();
  cp.cfg.adamw_beta1 = r.f64();
  cp.cfg.adamw_beta2 = r.f64();
  cp.cfg.adamw_epsilon = r.f64();
  cp.cfg.adamw_weight_decay = r.f64();
  cp.net = read_critic(r);
  cp.opt = read_optimizer(r);
  cp.rng_state = read_rng_state(r);
  return cp;
}

}  // namespace vibgan
