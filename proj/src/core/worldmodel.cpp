#include "core/worldmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/binio.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

namespace ewm::wm {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<const Eigen::VectorXd>;

Eigen::VectorXd activate(const Eigen::VectorXd& x, Activation act) {
  if (act == Activation::Identity) return x;
  return x.array().tanh().matrix();
}

Eigen::VectorXd activate_grad_from_post(const Eigen::VectorXd& post,
                                        Activation act) {
  if (act == Activation::Identity) return Eigen::VectorXd::Ones(post.size());
  return (1.0 - post.array().square()).matrix();
}

}  // namespace

std::size_t MlpSpec::param_count() const {
  std::size_t n = 0;
  for (int l = 0; l < layers(); ++l)
    n += static_cast<std::size_t>(dims[l + 1]) * dims[l] + dims[l + 1];
  return n;
}

std::size_t MlpSpec::layer_offset(int layer) const {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l)
    off += static_cast<std::size_t>(dims[l + 1]) * dims[l] + dims[l + 1];
  return off;
}

void Mlp::resize_zero() { params.assign(spec.param_count(), 0.0); }

void Mlp::init_xavier(std::uint64_t seed) {
  resize_zero();
  Rng rng(seed);
  for (int l = 0; l < spec.layers(); ++l) {
    int in = spec.dims[l], out = spec.dims[l + 1];
    double limit = std::sqrt(6.0 / (in + out));
    double* w = params.data() + spec.layer_offset(l);
    for (int i = 0; i < out * in; ++i) w[i] = rng.uniform(-limit, limit);
    // biases stay zero
  }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  Cache cache;
  return forward(x, cache);
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, Cache& cache) const {
  require(x.size() == spec.dims.front(), ErrorCode::InvalidArgument,
          "mlp: input dimension mismatch");
  require(params.size() == spec.param_count(), ErrorCode::InvalidArgument,
          "mlp: parameter count does not match spec");
  cache.input.clear();
  cache.pre.clear();
  Eigen::VectorXd a = x;
  for (int l = 0; l < spec.layers(); ++l) {
    int in = spec.dims[l], out = spec.dims[l + 1];
    MapMat w(params.data() + spec.layer_offset(l), out, in);
    MapVec b(params.data() + spec.layer_offset(l) + std::size_t(out) * in, out);
    cache.input.push_back(a);
    Eigen::VectorXd pre = w * a + b;
    bool last = (l == spec.layers() - 1);
    if (last) {
      if (spec.output_sigmoid)
        a = (1.0 / (1.0 + (-pre.array()).exp())).matrix();
      else
        a = pre;
    } else {
      a = activate(pre, spec.activation);
    }
    cache.pre.push_back(std::move(pre));
  }
  cache.output = a;
  return a;
}

Eigen::VectorXd Mlp::backward(const Cache& cache, const Eigen::VectorXd& dy,
                              std::vector<double>& grad) const {
  require(grad.size() == params.size(), ErrorCode::InvalidArgument,
          "mlp: gradient buffer size mismatch");
  Eigen::VectorXd delta = dy;
  if (spec.output_sigmoid) {
    const Eigen::VectorXd& out = cache.output;
    delta = (delta.array() * out.array() * (1.0 - out.array())).matrix();
  }
  for (int l = spec.layers() - 1; l >= 0; --l) {
    int in = spec.dims[l], out = spec.dims[l + 1];
    std::size_t off = spec.layer_offset(l);
    const Eigen::VectorXd& x = cache.input[l];

    using MutMat = Eigen::Map<RowMat>;
    using MutVec = Eigen::Map<Eigen::VectorXd>;
    MutMat dw(grad.data() + off, out, in);
    MutVec db(grad.data() + off + std::size_t(out) * in, out);
    dw.noalias() += delta * x.transpose();
    db.noalias() += delta;

    if (l > 0) {
      MapMat w(params.data() + off, out, in);
      Eigen::VectorXd dx = w.transpose() * delta;
      // Activation applied at the output of layer l-1.
      const Eigen::VectorXd& post = cache.input[l];
      delta = (dx.array() *
               activate_grad_from_post(post, spec.activation).array())
                  .matrix();
    }
  }
  // After the loop, delta sits at layer 0's pre-activation.
  MapMat w0(params.data(), spec.dims[1], spec.dims[0]);
  return w0.transpose() * delta;
}

void ModelConfig::validate() const {
  require(latent_dim > 0 && context_len > 0, ErrorCode::InvalidArgument,
          "model: latent_dim and context_len must be positive");
  for (int hdim : hidden)
    require(hdim > 0, ErrorCode::InvalidArgument,
            "model: hidden widths must be positive");
}

namespace {

MlpSpec dynamics_spec(const ModelConfig& cfg) {
  MlpSpec spec;
  spec.dims.push_back(cfg.input_dim());
  for (int hdim : cfg.hidden) spec.dims.push_back(hdim);
  spec.dims.push_back(cfg.latent_dim);
  spec.activation = cfg.activation;
  spec.output_sigmoid = false;
  return spec;
}

}  // namespace

DynamicsModel DynamicsModel::create(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  DynamicsModel m;
  m.config = cfg;
  m.net.spec = dynamics_spec(cfg);
  m.net.init_xavier(seed);
  return m;
}

DynamicsModel DynamicsModel::zeros(const ModelConfig& cfg) {
  cfg.validate();
  DynamicsModel m;
  m.config = cfg;
  m.net.spec = dynamics_spec(cfg);
  m.net.resize_zero();
  return m;
}

Eigen::VectorXd DynamicsModel::pack_input(std::span<const LatentState> context,
                                          const kin::Action& action) const {
  require(static_cast<int>(context.size()) == config.context_len,
          ErrorCode::InvalidArgument, "predict: context length mismatch");
  Eigen::VectorXd x(config.input_dim());
  int pos = 0;
  for (const auto& z : context) {
    require(z.size() == config.latent_dim, ErrorCode::InvalidArgument,
            "predict: latent dimension mismatch");
    x.segment(pos, config.latent_dim) = z;
    pos += config.latent_dim;
  }
  auto flat = kin::flatten_action(action);
  for (double v : flat) x[pos++] = v;
  return x;
}

LatentState DynamicsModel::predict_next(std::span<const LatentState> context,
                                        const kin::Action& action) const {
  return net.forward(pack_input(context, action));
}

WristHead WristHead::create(int latent_dim, int grid, std::uint64_t seed) {
  require(latent_dim > 0 && grid > 0, ErrorCode::InvalidArgument,
          "wrist head: dimensions must be positive");
  WristHead h;
  h.latent_dim = latent_dim;
  h.grid = grid;
  h.net.spec.dims = {latent_dim, grid * grid};
  h.net.spec.activation = Activation::Identity;
  h.net.spec.output_sigmoid = true;
  h.net.init_xavier(seed);
  return h;
}

feat::WristHeatmap WristHead::predict_heatmap(const LatentState& z) const {
  feat::WristHeatmap h;
  h.grid = grid;
  h.values = net.forward(z);
  return h;
}

double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() == b.size() && a.size() > 0, ErrorCode::InvalidArgument,
          "mse: size mismatch");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double loss(const LatentState& z_hat, const LatentState& z,
            const Eigen::VectorXd& v_hat, const Eigen::VectorXd& v,
            double lambda, bool wrist_mask) {
  double total = mse(z_hat, z);
  if (wrist_mask && lambda != 0.0) total += lambda * mse(v_hat, v);
  return total;
}

void TrainConfig::validate() const {
  require(lambda >= 0, ErrorCode::InvalidArgument, "train: lambda must be >= 0");
  require(learning_rate > 0, ErrorCode::InvalidArgument,
          "train: learning rate must be positive");
  require(clip_norm > 0, ErrorCode::InvalidArgument,
          "train: clip norm must be positive");
  require(ema_decay >= 0 && ema_decay < 1, ErrorCode::InvalidArgument,
          "train: ema decay must be in [0,1)");
  require(batch_size > 0 && iterations > 0, ErrorCode::InvalidArgument,
          "train: batch size and iterations must be positive");
  require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1,
          ErrorCode::InvalidArgument, "train: betas must be in [0,1)");
}

void TrainSet::validate(const ModelConfig& cfg, int grid) const {
  int n = size();
  require(n > 0, ErrorCode::InvalidArgument, "train: empty dataset");
  require(contexts.cols() == cfg.context_len * cfg.latent_dim &&
              actions.cols() == kin::kActionDim &&
              targets.cols() == cfg.latent_dim &&
              heatmaps.cols() == grid * grid,
          ErrorCode::InvalidArgument, "train: dataset shape mismatch");
  require(actions.rows() == n && targets.rows() == n && heatmaps.rows() == n &&
              static_cast<int>(wrist_mask.size()) == n,
          ErrorCode::InvalidArgument, "train: dataset row counts differ");
}

BatchLoss eval_batch(const DynamicsModel& model, const WristHead* head,
                     const TrainSet& data, std::span<const int> indices,
                     double lambda, std::vector<double>* model_grad,
                     std::vector<double>* head_grad) {
  require(!indices.empty(), ErrorCode::InvalidArgument, "eval_batch: empty batch");
  int latent_dim = model.config.latent_dim;
  double inv_batch = 1.0 / static_cast<double>(indices.size());

  if (model_grad) model_grad->assign(model.net.params.size(), 0.0);
  if (head_grad && head) head_grad->assign(head->net.params.size(), 0.0);

  BatchLoss out;
  Mlp::Cache model_cache, head_cache;
  std::vector<double> head_scratch;
  Eigen::VectorXd x(model.config.input_dim());
  for (int idx : indices) {
    x << data.contexts.row(idx).transpose(), data.actions.row(idx).transpose();
    Eigen::VectorXd z_hat = model.net.forward(x, model_cache);
    Eigen::VectorXd z = data.targets.row(idx).transpose();
    double latent_loss = (z_hat - z).squaredNorm() / latent_dim;
    out.latent_loss += latent_loss * inv_batch;

    // Per-sample dL/dz_hat; the 1/batch scale is applied at the end.
    Eigen::VectorXd dz = (2.0 / latent_dim) * (z_hat - z);

    bool masked = lambda != 0.0 && head != nullptr && data.wrist_mask[idx];
    if (masked) {
      Eigen::VectorXd v_hat = head->net.forward(z_hat, head_cache);
      Eigen::VectorXd v = data.heatmaps.row(idx).transpose();
      double wrist_loss = (v_hat - v).squaredNorm() / v.size();
      out.wrist_loss += wrist_loss * inv_batch;
      if (model_grad || head_grad) {
        Eigen::VectorXd dv = (lambda * 2.0 / v.size()) * (v_hat - v);
        std::vector<double>* hg = head_grad;
        if (!hg) {
          head_scratch.assign(head->net.params.size(), 0.0);
          hg = &head_scratch;
        }
        dz += head->net.backward(head_cache, dv, *hg);
      }
    }
    if (model_grad) model.net.backward(model_cache, dz, *model_grad);
  }
  if (model_grad)
    for (double& g : *model_grad) g *= inv_batch;
  if (head_grad && head)
    for (double& g : *head_grad) g *= inv_batch;
  out.total = out.latent_loss + lambda * out.wrist_loss;
  return out;
}

namespace {

double grad_sq_norm(const std::vector<double>& g) {
  double s = 0;
  for (double v : g) s += v * v;
  return s;
}

struct AdamState {
  std::vector<double> m, v;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adamw_step(std::vector<double>& params, const std::vector<double>& grad,
                AdamState& state, const TrainConfig& cfg, int step) {
  double bc1 = 1.0 - std::pow(cfg.beta1, step);
  double bc2 = 1.0 - std::pow(cfg.beta2, step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (cfg.weight_decay != 0.0)
      params[i] -= cfg.learning_rate * cfg.weight_decay * params[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1 - cfg.beta2) * grad[i] * grad[i];
    double m_hat = state.m[i] / bc1;
    double v_hat = state.v[i] / bc2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + 1e-8);
  }
}

void ema_update(std::vector<double>& ema, const std::vector<double>& w,
                double decay) {
  for (std::size_t i = 0; i < ema.size(); ++i)
    ema[i] = decay * ema[i] + (1 - decay) * w[i];
}

}  // namespace

TrainResult train(const TrainSet& data, const ModelConfig& model_cfg,
                  int heatmap_grid, const TrainConfig& cfg) {
  cfg.validate();
  data.validate(model_cfg, heatmap_grid);

  TrainResult r;
  r.model = DynamicsModel::create(model_cfg, mix_seed(cfg.seed, "model-init"));
  if (cfg.use_wrist_head)
    r.head = WristHead::create(model_cfg.latent_dim, heatmap_grid,
                               mix_seed(cfg.seed, "head-init"));
  r.ema_model = r.model;
  r.ema_head = r.head;

  Rng shuffle_rng(mix_seed(cfg.seed, "shuffle"));
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  auto reshuffle = [&] {
    for (int i = data.size() - 1; i > 0; --i) {
      int j = static_cast<int>(shuffle_rng.uniform_index(i + 1));
      std::swap(order[i], order[j]);
    }
  };
  reshuffle();

  WristHead* head = cfg.use_wrist_head ? &r.head : nullptr;
  std::vector<double> model_grad, head_grad;
  std::vector<int> batch;
  AdamState model_adam(r.model.net.params.size());
  AdamState head_adam(cfg.use_wrist_head ? r.head.net.params.size() : 0);

  std::size_t cursor = 0;
  r.log.reserve(cfg.iterations);
  for (int step = 1; step <= cfg.iterations; ++step) {
    batch.clear();
    for (int k = 0; k < std::min<int>(cfg.batch_size, data.size()); ++k) {
      if (cursor == order.size()) {
        reshuffle();
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
    }

    BatchLoss bl = eval_batch(r.model, head, data, batch, cfg.lambda,
                              &model_grad, cfg.use_wrist_head ? &head_grad : nullptr);

    double norm = std::sqrt(grad_sq_norm(model_grad) +
                            (cfg.use_wrist_head ? grad_sq_norm(head_grad) : 0.0));
    if (norm > cfg.clip_norm) {
      double scale = cfg.clip_norm / norm;
      for (double& g : model_grad) g *= scale;
      for (double& g : head_grad) g *= scale;
      norm = cfg.clip_norm;
    }

    adamw_step(r.model.net.params, model_grad, model_adam, cfg, step);
    if (cfg.use_wrist_head)
      adamw_step(r.head.net.params, head_grad, head_adam, cfg, step);

    ema_update(r.ema_model.net.params, r.model.net.params, cfg.ema_decay);
    if (cfg.use_wrist_head)
      ema_update(r.ema_head.net.params, r.head.net.params, cfg.ema_decay);

    r.log.push_back({step, bl.latent_loss, bl.wrist_loss, norm});
  }
  return r;
}

double gradient_check(const DynamicsModel& model, const WristHead* head,
                      const TrainSet& sample, double lambda, double eps) {
  require(eps > 0, ErrorCode::InvalidArgument, "gradient_check: eps must be > 0");
  std::vector<int> indices(sample.size());
  std::iota(indices.begin(), indices.end(), 0);

  std::vector<double> model_grad, head_grad;
  eval_batch(model, head, sample, indices, lambda, &model_grad,
             head ? &head_grad : nullptr);

  DynamicsModel m = model;
  WristHead h;
  if (head) h = *head;
  WristHead* hp = head ? &h : nullptr;

  auto loss_at = [&]() {
    return eval_batch(m, hp, sample, indices, lambda, nullptr, nullptr).total;
  };
  auto check = [&](std::vector<double>& params, const std::vector<double>& grad) {
    double worst = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      double saved = params[i];
      params[i] = saved + eps;
      double lp = loss_at();
      params[i] = saved - eps;
      double lm = loss_at();
      params[i] = saved;
      double numeric = (lp - lm) / (2 * eps);
      double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(grad[i] - numeric) / denom);
    }
    return worst;
  };

  double worst = check(m.net.params, model_grad);
  if (head) worst = std::max(worst, check(h.net.params, head_grad));
  return worst;
}

std::vector<LatentState> rollout(const DynamicsModel& model,
                                 std::span<const LatentState> context,
                                 std::span<const kin::Action> actions) {
  require(!actions.empty(), ErrorCode::InvalidArgument,
          "rollout: need at least one action");
  std::vector<LatentState> window(context.begin(), context.end());
  std::vector<LatentState> out;
  out.reserve(actions.size());
  for (const auto& a : actions) {
    LatentState next = model.predict_next(window, a);
    window.erase(window.begin());
    window.push_back(next);
    out.push_back(std::move(next));
  }
  return out;
}

namespace {

constexpr char kCheckpointMagic[8] = {'E', 'W', 'M', 'C', 'K', 'P', 'T', '1'};

void write_params(ByteWriter& w, const std::string& name,
                  const std::vector<double>& p) {
  w.str(name);
  w.u64(p.size());
  for (double v : p) w.f64(v);
}

std::vector<double> read_params(ByteReader& r, const std::string& expect) {
  std::string name = r.str();
  require(name == expect, ErrorCode::ParseError,
          "checkpoint: unexpected block '" + name + "'");
  std::vector<double> p(r.u64());
  for (double& v : p) v = r.f64();
  return p;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  ByteWriter w;
  w.bytes(kCheckpointMagic, 8);
  w.u32(1);  // format version
  w.str(ckpt.config_echo);
  w.u32(static_cast<std::uint32_t>(ckpt.model_config.latent_dim));
  w.u32(static_cast<std::uint32_t>(ckpt.model_config.context_len));
  w.u32(static_cast<std::uint32_t>(ckpt.model_config.hidden.size()));
  for (int hdim : ckpt.model_config.hidden)
    w.u32(static_cast<std::uint32_t>(hdim));
  w.u8(ckpt.model_config.activation == Activation::Tanh ? 0 : 1);
  w.u32(static_cast<std::uint32_t>(ckpt.heatmap_grid));
  write_params(w, "model", ckpt.model.net.params);
  write_params(w, "head", ckpt.head.net.params);
  write_params(w, "ema_model", ckpt.ema_model.net.params);
  write_params(w, "ema_head", ckpt.ema_head.net.params);
  w.u32(crc32(w.data().data() + 8, w.size() - 8));
  write_file_bytes(path, w.data());
}

Checkpoint load_checkpoint(const std::string& path) {
  auto bytes = read_file_bytes(path);
  require(bytes.size() > 12 && std::memcmp(bytes.data(), kCheckpointMagic, 8) == 0,
          ErrorCode::ParseError, "checkpoint: bad magic: " + path);
  std::uint32_t stored_crc = 0;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
  std::uint32_t actual = crc32(bytes.data() + 8, bytes.size() - 12);
  require(stored_crc == actual, ErrorCode::CorruptRecord,
          "checkpoint: checksum mismatch: " + path);

  ByteReader r(bytes.data(), bytes.size() - 4);
  r.seek(8);
  std::uint32_t version = r.u32();
  require(version == 1, ErrorCode::ParseError,
          "checkpoint: unsupported format version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.config_echo = r.str();
  ckpt.model_config.latent_dim = static_cast<int>(r.u32());
  ckpt.model_config.context_len = static_cast<int>(r.u32());
  ckpt.model_config.hidden.resize(r.u32());
  for (int& hdim : ckpt.model_config.hidden) hdim = static_cast<int>(r.u32());
  ckpt.model_config.activation = r.u8() == 0 ? Activation::Tanh : Activation::Identity;
  ckpt.heatmap_grid = static_cast<int>(r.u32());

  auto load_model = [&](const std::string& name) {
    DynamicsModel m = DynamicsModel::zeros(ckpt.model_config);
    auto p = read_params(r, name);
    require(p.size() == m.net.params.size(), ErrorCode::ParseError,
            "checkpoint: parameter count mismatch in " + name);
    m.net.params = std::move(p);
    return m;
  };
  auto load_head = [&](const std::string& name) {
    WristHead h = WristHead::create(ckpt.model_config.latent_dim,
                                    ckpt.heatmap_grid, 0);
    auto p = read_params(r, name);
    require(p.size() == h.net.params.size(), ErrorCode::ParseError,
            "checkpoint: parameter count mismatch in " + name);
    h.net.params = std::move(p);
    return h;
  };
  ckpt.model = load_model("model");
  ckpt.head = load_head("head");
  ckpt.ema_model = load_model("ema_model");
  ckpt.ema_head = load_head("ema_head");
  return ckpt;
}

}  // namespace ewm::wm
