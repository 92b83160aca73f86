#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparselab/types.hpp"

namespace sparselab {

enum class Activation { relu, helu };
enum class LossKind { multilabel, quadratic };

/// Which statistics batch norm consumes during a forward pass. Training
/// uses per-batch moments; `running` freezes them at the stored running
/// values (also the eval path).
enum class StatsMode { batch, running };

struct NetworkConfig {
  Index input_dim = 0;
  Index output_dim = 0;
  int depth = 20;          // fully-connected stages, head excluded
  Index hidden_width = 0;  // 0 selects output_dim
  bool residual = true;
  Activation activation = Activation::relu;
  double helu_sigma = 0.1;
  LossKind loss = LossKind::multilabel;
  bool batch_norm = true;

  Index hidden() const { return hidden_width > 0 ? hidden_width : output_dim; }
  void validate() const;
};

/// One fully-connected stage: affine -> batch norm -> activation.
struct Stage {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
  Eigen::VectorXd bn_scale;
  Eigen::VectorXd bn_shift;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
};

struct Network {
  NetworkConfig config;
  std::vector<Stage> stages;
  Eigen::MatrixXd head_weight;  // output_dim x hidden
  Eigen::VectorXd head_bias;

  Index parameter_count() const;
};

struct TrainConfig {
  int batch_size = 250;
  double initial_lr = 0.01;
  double lr_drop_factor = 0.1;
  int drop_period_epochs = 50;
  int total_epochs = 150;
  double momentum = 0.9;
  double weight_decay = 0.0001;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ProbabilityMap {
  Eigen::VectorXd p;  // length m, entries in [0, 1]
};

/// Inputs as columns (n x N); targets as columns (m x N): binary support
/// labels in multilabel mode, coefficient vectors in quadratic mode.
struct TrainingSet {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;

  Index count() const { return inputs.cols(); }
};

struct StageTrace {
  Eigen::MatrixXd input;
  Eigen::MatrixXd affine;
  Eigen::MatrixXd normalized;  // pre scale/shift; empty without batch norm
  Eigen::MatrixXd pre_activation;
  Eigen::MatrixXd output;  // activation output, skip not yet added
  Eigen::VectorXd mean_used;
  Eigen::VectorXd var_used;
};

struct ForwardTrace {
  std::vector<StageTrace> stages;
  Eigen::MatrixXd features;  // head input (skips applied)
  Eigen::MatrixXd logits;
  Eigen::MatrixXd probabilities;
  StatsMode stats_mode = StatsMode::batch;
};

struct Gradients {
  struct StageGrads {
    Eigen::MatrixXd weight;
    Eigen::VectorXd bias;
    Eigen::VectorXd bn_scale;
    Eigen::VectorXd bn_shift;
  };
  std::vector<StageGrads> stages;
  Eigen::MatrixXd head_weight;
  Eigen::VectorXd head_bias;

  static Gradients zeros_like(const Network& net);
};

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kRunningMomentDecay = 0.9;

/// He-style init: weights N(0, 2/fan_in), biases zero, BN scale 1 shift 0,
/// running moments (0, 1).
Network init_network(const NetworkConfig& config, std::uint64_t seed);

/// Full forward pass retaining every intermediate needed by backward.
/// Never mutates the network; running-moment updates are a separate step.
ForwardTrace forward_pass(const Network& net, const Eigen::MatrixXd& batch,
                          StatsMode stats);

/// Folds the trace's batch statistics into the running moments.
void update_running_moments(Network& net, const ForwardTrace& trace);

/// Convenience eval-mode forward: probabilities column per sample.
Eigen::MatrixXd forward_eval(const Network& net, const Eigen::MatrixXd& batch);
ProbabilityMap predict(const Network& net, const Eigen::VectorXd& input);

/// Loss on network outputs: multilabel expects probabilities, quadratic
/// expects head pre-squash outputs. Mean over coordinates and batch.
double loss(const NetworkConfig& config, const Eigen::MatrixXd& output,
            const Eigen::MatrixXd& target);

/// Loss computed from logits (numerically stable path used in training).
double loss_from_logits(const NetworkConfig& config,
                        const Eigen::MatrixXd& logits,
                        const Eigen::MatrixXd& target);

Gradients backward_pass(const Network& net, const ForwardTrace& trace,
                        const Eigen::MatrixXd& target);

/// Pointers to every trainable coefficient, in a fixed traversal order.
std::vector<double*> parameters(Network& net);

struct EpochStats {
  double mean_loss = 0.0;
  double strict_accuracy = 0.0;
};

struct TrainOutcome {
  std::vector<EpochStats> epochs;
};

/// SGD with momentum, weight decay, and the stepped learning-rate schedule.
/// Deterministic given config.seed. Throws DivergenceError when the loss
/// stops being finite.
TrainOutcome train(Network& net, const TrainingSet& data,
                   const TrainConfig& config);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  Index coordinates_checked = 0;
};

/// Central-difference check of backward_pass on a random parameter subset
/// (at least 200 coordinates, or all of them on small nets). `stats` picks
/// the batch-norm path being validated; the running-stat path is the
/// meaningful one for single-sample checks.
GradientCheckReport gradient_check(Network& net, const Eigen::MatrixXd& batch,
                                   const Eigen::MatrixXd& target,
                                   std::uint64_t seed,
                                   StatsMode stats = StatsMode::running,
                                   Index subset = 200, double step = 1e-5);

double helu(double x, double sigma);
double helu_slope(double x, double sigma);

/// Checkpoint container: config, parameters, running moments, content hash.
/// Reload reproduces eval-mode outputs bit-for-bit on the same platform.
void save_network(const std::string& path, const Network& net);
Network load_network(const std::string& path);
std::string network_hash(const Network& net);

}  // namespace sparselab
