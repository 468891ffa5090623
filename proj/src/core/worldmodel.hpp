#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "core/features.hpp"
#include "core/kinematics.hpp"

namespace ewm::wm {

using feat::LatentState;

enum class Activation { Tanh, Identity };

// Hidden activation applies between layers; the final layer is linear unless
// output_sigmoid is set.
struct MlpSpec {
  std::vector<int> dims;  // [input, hidden..., output]
  Activation activation = Activation::Tanh;
  bool output_sigmoid = false;

  int layers() const { return static_cast<int>(dims.size()) - 1; }
  std::size_t param_count() const;
  std::size_t layer_offset(int layer) const;  // offset of W_layer in the flat buffer
};

// Flat-parameter feed-forward network. Parameter layout per layer:
// W (out x in, row-major) followed by b (out).
struct Mlp {
  MlpSpec spec;
  std::vector<double> params;

  void resize_zero();
  void init_xavier(std::uint64_t seed);

  struct Cache {
    std::vector<Eigen::VectorXd> input;  // per layer input (post-activation)
    std::vector<Eigen::VectorXd> pre;    // per layer pre-activation output
    Eigen::VectorXd output;
  };

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& x, Cache& cache) const;
  // Accumulates parameter gradients into grad (same layout as params) and
  // returns dL/dx. `dy` is dL/d(output).
  Eigen::VectorXd backward(const Cache& cache, const Eigen::VectorXd& dy,
                           std::vector<double>& grad) const;
};

struct ModelConfig {
  int latent_dim = 64;
  int context_len = 3;  // H
  std::vector<int> hidden = {256, 256};
  Activation activation = Activation::Tanh;

  int input_dim() const { return context_len * latent_dim + kin::kActionDim; }
  void validate() const;
};

// Action-conditioned latent dynamics model f: (z_{t-H+1..t}, a_t) -> z_{t+1}.
struct DynamicsModel {
  ModelConfig config;
  Mlp net;

  static DynamicsModel create(const ModelConfig& cfg, std::uint64_t seed);
  static DynamicsModel zeros(const ModelConfig& cfg);

  LatentState predict_next(std::span<const LatentState> context,
                           const kin::Action& action) const;
  Eigen::VectorXd pack_input(std::span<const LatentState> context,
                             const kin::Action& action) const;
};

// Affine map from the predicted latent to heatmap logits, squashed to [0,1].
struct WristHead {
  int latent_dim = 64;
  int grid = 28;
  Mlp net;

  static WristHead create(int latent_dim, int grid, std::uint64_t seed);

  Eigen::VectorXd predict(const LatentState& z) const { return net.forward(z); }
  feat::WristHeatmap predict_heatmap(const LatentState& z) const;
};

// Mean-squared-error convention: per-dimension mean on both terms.
double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double loss(const LatentState& z_hat, const LatentState& z,
            const Eigen::VectorXd& v_hat, const Eigen::VectorXd& v,
            double lambda, bool wrist_mask);

struct TrainConfig {
  double lambda = 1.0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double weight_decay = 0.0;
  double clip_norm = 10.0;
  int batch_size = 64;
  int iterations = 5000;
  double ema_decay = 0.99;
  std::uint64_t seed = 1;
  bool use_wrist_head = true;

  void validate() const;
};

// One row per transition; contexts are always ground-truth latents
// (teacher forcing).
struct TrainSet {
  Eigen::MatrixXd contexts;  // N x (H*D)
  Eigen::MatrixXd actions;   // N x 69
  Eigen::MatrixXd targets;   // N x D
  Eigen::MatrixXd heatmaps;  // N x G*G
  std::vector<char> wrist_mask;

  int size() const { return static_cast<int>(contexts.rows()); }
  void validate(const ModelConfig& cfg, int grid) const;
};

struct TrainLogEntry {
  int step = 0;
  double latent_loss = 0;
  double wrist_loss = 0;
  double grad_norm = 0;  // post-clip global norm
};

struct TrainResult {
  DynamicsModel model;
  WristHead head;
  DynamicsModel ema_model;
  WristHead ema_head;
  std::vector<TrainLogEntry> log;
};

// Batch loss and (optionally) gradients. Gradients are averaged over the
// batch and written with the same layout as the corresponding params.
struct BatchLoss {
  double latent_loss = 0;
  double wrist_loss = 0;
  double total = 0;
};
BatchLoss eval_batch(const DynamicsModel& model, const WristHead* head,
                     const TrainSet& data, std::span<const int> indices,
                     double lambda, std::vector<double>* model_grad,
                     std::vector<double>* head_grad);

// AdamW with decoupled weight decay, global-norm gradient clipping across
// model and head, per-epoch reshuffled batches, and an EMA copy of the
// weights. Deterministic for a fixed seed.
TrainResult train(const TrainSet& data, const ModelConfig& model_cfg,
                  int heatmap_grid, const TrainConfig& cfg);

// Max relative error between analytic and central finite-difference
// gradients over every parameter (model, plus head when given).
double gradient_check(const DynamicsModel& model, const WristHead* head,
                      const TrainSet& sample, double lambda, double eps);

// Autoregressive rollout: each prediction is appended to the context and the
// oldest latent evicted.
std::vector<LatentState> rollout(const DynamicsModel& model,
                                 std::span<const LatentState> context,
                                 std::span<const kin::Action> actions);

// Interface shared by the learned model and test oracles: full-horizon
// latent rollout from a context.
struct RolloutModel {
  virtual ~RolloutModel() = default;
  virtual std::vector<LatentState> rollout(
      std::span<const LatentState> context,
      std::span<const kin::Action> actions) const = 0;
};

struct LearnedRollout final : RolloutModel {
  const DynamicsModel* model;
  explicit LearnedRollout(const DynamicsModel& m) : model(&m) {}
  std::vector<LatentState> rollout(
      std::span<const LatentState> context,
      std::span<const kin::Action> actions) const override {
    return wm::rollout(*model, context, actions);
  }
};

// Binary checkpoint: raw and EMA weights plus the run-config echo.
struct Checkpoint {
  ModelConfig model_config;
  int heatmap_grid = 28;
  DynamicsModel model;
  WristHead head;
  DynamicsModel ema_model;
  WristHead ema_head;
  std::string config_echo;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ewm::wm
