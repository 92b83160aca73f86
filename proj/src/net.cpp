#include "sparselab/net.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sparselab/rng.hpp"
#include "sparselab/textio.hpp"

namespace sparselab {

void NetworkConfig::validate() const {
  if (input_dim < 1 || output_dim < 1)
    throw std::invalid_argument("NetworkConfig: positive input/output dims");
  if (depth < 2) throw std::invalid_argument("NetworkConfig: depth >= 2");
  if (activation == Activation::helu &&
      (helu_sigma <= 0.0 || helu_sigma >= 1.0))
    throw std::invalid_argument("NetworkConfig: helu requires 0 < sigma < 1");
}

void TrainConfig::validate() const {
  if (batch_size < 1 || total_epochs < 1 || drop_period_epochs < 1)
    throw std::invalid_argument("TrainConfig: positive counts required");
  if (initial_lr <= 0.0 || momentum < 0.0 || weight_decay < 0.0)
    throw std::invalid_argument("TrainConfig: positive rates required");
  if (lr_drop_factor <= 0.0 || lr_drop_factor >= 1.0)
    throw std::invalid_argument("TrainConfig: lr_drop_factor in (0, 1)");
}

Index Network::parameter_count() const {
  Index count = head_weight.size() + head_bias.size();
  for (const Stage& s : stages)
    count += s.weight.size() + s.bias.size() + s.bn_scale.size() +
             s.bn_shift.size();
  return count;
}

Gradients Gradients::zeros_like(const Network& net) {
  Gradients g;
  g.stages.resize(net.stages.size());
  for (std::size_t i = 0; i < net.stages.size(); ++i) {
    const Stage& s = net.stages[i];
    g.stages[i].weight = Eigen::MatrixXd::Zero(s.weight.rows(), s.weight.cols());
    g.stages[i].bias = Eigen::VectorXd::Zero(s.bias.size());
    g.stages[i].bn_scale = Eigen::VectorXd::Zero(s.bn_scale.size());
    g.stages[i].bn_shift = Eigen::VectorXd::Zero(s.bn_shift.size());
  }
  g.head_weight =
      Eigen::MatrixXd::Zero(net.head_weight.rows(), net.head_weight.cols());
  g.head_bias = Eigen::VectorXd::Zero(net.head_bias.size());
  return g;
}

double helu(double x, double sigma) {
  const double a = std::abs(x);
  if (a <= 1.0 - sigma) return 0.0;
  if (a >= 1.0) return x;
  return x > 0.0 ? (x - 1.0 + sigma) / sigma : (x + 1.0 - sigma) / sigma;
}

double helu_slope(double x, double sigma) {
  const double a = std::abs(x);
  if (a <= 1.0 - sigma) return 0.0;
  if (a >= 1.0) return 1.0;
  return 1.0 / sigma;
}

namespace {

Eigen::MatrixXd activate(const NetworkConfig& config,
                         const Eigen::MatrixXd& x) {
  if (config.activation == Activation::relu) return x.cwiseMax(0.0);
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i)
      out(i, j) = helu(x(i, j), config.helu_sigma);
  return out;
}

Eigen::MatrixXd activation_slope(const NetworkConfig& config,
                                 const Eigen::MatrixXd& pre) {
  Eigen::MatrixXd out(pre.rows(), pre.cols());
  if (config.activation == Activation::relu) {
    for (Index j = 0; j < pre.cols(); ++j)
      for (Index i = 0; i < pre.rows(); ++i)
        out(i, j) = pre(i, j) > 0.0 ? 1.0 : 0.0;
    return out;
  }
  for (Index j = 0; j < pre.cols(); ++j)
    for (Index i = 0; i < pre.rows(); ++i)
      out(i, j) = helu_slope(pre(i, j), config.helu_sigma);
  return out;
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) {
      const double v = x(i, j);
      out(i, j) = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                           : std::exp(v) / (1.0 + std::exp(v));
    }
  return out;
}

// Index of the block (pair of stages) containing stage i, or -1 when the
// stage is outside every skip pair. Stage 0 projects the input and is not
// part of a block; pairs are (1,2), (3,4), ...
struct BlockLayout {
  explicit BlockLayout(const NetworkConfig& config)
      : enabled(config.residual), depth(config.depth) {}
  bool is_block_start(Index stage) const {
    return enabled && stage >= 1 && (stage % 2 == 1) && stage + 1 < depth;
  }
  bool is_block_end(Index stage) const {
    return enabled && stage >= 2 && (stage % 2 == 0);
  }
  bool enabled;
  Index depth;
};

}  // namespace

Network init_network(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  RandomStream rng(seed);
  Network net;
  net.config = config;
  const Index hidden = config.hidden();

  net.stages.resize(static_cast<std::size_t>(config.depth));
  for (Index i = 0; i < config.depth; ++i) {
    const Index fan_in = (i == 0) ? config.input_dim : hidden;
    Stage& s = net.stages[static_cast<std::size_t>(i)];
    const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
    s.weight = std_dev * rng.gaussian_matrix(hidden, fan_in);
    s.bias = Eigen::VectorXd::Zero(hidden);
    s.bn_scale = Eigen::VectorXd::Ones(hidden);
    s.bn_shift = Eigen::VectorXd::Zero(hidden);
    s.running_mean = Eigen::VectorXd::Zero(hidden);
    s.running_var = Eigen::VectorXd::Ones(hidden);
  }
  const double head_std = std::sqrt(2.0 / static_cast<double>(hidden));
  net.head_weight = head_std * rng.gaussian_matrix(config.output_dim, hidden);
  net.head_bias = Eigen::VectorXd::Zero(config.output_dim);
  return net;
}

ForwardTrace forward_pass(const Network& net, const Eigen::MatrixXd& batch,
                          StatsMode stats) {
  if (batch.rows() != net.config.input_dim)
    throw std::invalid_argument("forward_pass: input width != input_dim");
  const NetworkConfig& config = net.config;
  const BlockLayout layout(config);

  ForwardTrace trace;
  trace.stages.resize(net.stages.size());
  trace.stats_mode = stats;
  Eigen::MatrixXd z = batch;
  Eigen::MatrixXd block_input;

  for (Index i = 0; i < config.depth; ++i) {
    const Stage& s = net.stages[static_cast<std::size_t>(i)];
    StageTrace& st = trace.stages[static_cast<std::size_t>(i)];
    if (layout.is_block_start(i)) block_input = z;

    st.input = z;
    st.affine = s.weight * z;
    st.affine.colwise() += s.bias;

    if (config.batch_norm) {
      if (stats == StatsMode::batch) {
        st.mean_used = st.affine.rowwise().mean();
        const Eigen::MatrixXd centered = st.affine.colwise() - st.mean_used;
        st.var_used = centered.cwiseProduct(centered).rowwise().mean();
      } else {
        st.mean_used = s.running_mean;
        st.var_used = s.running_var;
      }
      const Eigen::VectorXd inv_std =
          (st.var_used.array() + kBatchNormEpsilon).sqrt().inverse().matrix();
      st.normalized = inv_std.asDiagonal() * (st.affine.colwise() - st.mean_used);
      st.pre_activation = s.bn_scale.asDiagonal() * st.normalized;
      st.pre_activation.colwise() += s.bn_shift;
    } else {
      st.pre_activation = st.affine;
    }

    st.output = activate(config, st.pre_activation);
    z = st.output;
    if (layout.is_block_end(i)) z += block_input;
  }

  trace.features = z;
  trace.logits = net.head_weight * z;
  trace.logits.colwise() += net.head_bias;
  trace.probabilities = sigmoid(trace.logits);
  return trace;
}

void update_running_moments(Network& net, const ForwardTrace& trace) {
  if (!net.config.batch_norm) return;
  for (std::size_t i = 0; i < net.stages.size(); ++i) {
    Stage& s = net.stages[i];
    const StageTrace& st = trace.stages[i];
    s.running_mean = kRunningMomentDecay * s.running_mean +
                     (1.0 - kRunningMomentDecay) * st.mean_used;
    s.running_var = kRunningMomentDecay * s.running_var +
                    (1.0 - kRunningMomentDecay) * st.var_used;
  }
}

Eigen::MatrixXd forward_eval(const Network& net,
                             const Eigen::MatrixXd& batch) {
  // Lean inference path: running-stat batch norm folded into a per-unit
  // affine, no trace retention.
  if (batch.rows() != net.config.input_dim)
    throw std::invalid_argument("forward_eval: input width != input_dim");
  const NetworkConfig& config = net.config;
  const BlockLayout layout(config);

  Eigen::MatrixXd z = batch;
  Eigen::MatrixXd next, block_input;
  for (Index i = 0; i < config.depth; ++i) {
    const Stage& s = net.stages[static_cast<std::size_t>(i)];
    if (layout.is_block_start(i)) block_input = z;

    next.noalias() = s.weight * z;
    next.colwise() += s.bias;
    if (config.batch_norm) {
      const Eigen::ArrayXd inv_std =
          (s.running_var.array() + kBatchNormEpsilon).sqrt().inverse();
      const Eigen::VectorXd slope = (s.bn_scale.array() * inv_std).matrix();
      const Eigen::VectorXd offset =
          s.bn_shift - slope.cwiseProduct(s.running_mean);
      next = slope.asDiagonal() * next;
      next.colwise() += offset;
    }
    if (config.activation == Activation::relu) {
      next = next.cwiseMax(0.0);
    } else {
      for (Index c = 0; c < next.size(); ++c)
        next.data()[c] = helu(next.data()[c], config.helu_sigma);
    }
    if (layout.is_block_end(i)) next += block_input;
    z.swap(next);
  }

  Eigen::MatrixXd logits;
  logits.noalias() = net.head_weight * z;
  logits.colwise() += net.head_bias;
  return sigmoid(logits);
}

ProbabilityMap predict(const Network& net, const Eigen::VectorXd& input) {
  return ProbabilityMap{forward_eval(net, input).col(0)};
}

double loss(const NetworkConfig& config, const Eigen::MatrixXd& output,
            const Eigen::MatrixXd& target) {
  if (output.rows() != target.rows() || output.cols() != target.cols())
    throw std::invalid_argument("loss: output/target shape mismatch");
  const double scale = static_cast<double>(output.size());
  if (config.loss == LossKind::quadratic)
    return (output - target).squaredNorm() / scale;

  double total = 0.0;
  for (Index j = 0; j < output.cols(); ++j)
    for (Index i = 0; i < output.rows(); ++i) {
      const double p = std::clamp(output(i, j), 1e-7, 1.0 - 1e-7);
      const double s = target(i, j);
      total -= s * std::log(p) + (1.0 - s) * std::log(1.0 - p);
    }
  return total / scale;
}

double loss_from_logits(const NetworkConfig& config,
                        const Eigen::MatrixXd& logits,
                        const Eigen::MatrixXd& target) {
  if (logits.rows() != target.rows() || logits.cols() != target.cols())
    throw std::invalid_argument("loss: logits/target shape mismatch");
  const double scale = static_cast<double>(logits.size());
  if (config.loss == LossKind::quadratic)
    return (logits - target).squaredNorm() / scale;

  // softplus(a) - s*a, stable for either sign of a
  double total = 0.0;
  for (Index j = 0; j < logits.cols(); ++j)
    for (Index i = 0; i < logits.rows(); ++i) {
      const double a = logits(i, j);
      const double softplus =
          a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
      total += softplus - target(i, j) * a;
    }
  return total / scale;
}

Gradients backward_pass(const Network& net, const ForwardTrace& trace,
                        const Eigen::MatrixXd& target) {
  const NetworkConfig& config = net.config;
  const BlockLayout layout(config);
  const double scale = static_cast<double>(trace.logits.size());

  Gradients grads = Gradients::zeros_like(net);

  Eigen::MatrixXd d_logits;
  if (config.loss == LossKind::quadratic) {
    d_logits = 2.0 * (trace.logits - target) / scale;
  } else {
    d_logits = (trace.probabilities - target) / scale;
  }

  grads.head_weight = d_logits * trace.features.transpose();
  grads.head_bias = d_logits.rowwise().sum();
  Eigen::MatrixXd dz = net.head_weight.transpose() * d_logits;

  // Walk stages backwards; at a block end the incoming gradient also flows
  // along the skip to the block input, which is the input of the previous
  // stage.
  Eigen::MatrixXd skip_grad;
  bool skip_pending = false;
  Index skip_target = -1;

  for (Index i = config.depth - 1; i >= 0; --i) {
    const Stage& s = net.stages[static_cast<std::size_t>(i)];
    const StageTrace& st = trace.stages[static_cast<std::size_t>(i)];
    Gradients::StageGrads& sg = grads.stages[static_cast<std::size_t>(i)];

    if (layout.is_block_end(i)) {
      skip_grad = dz;
      skip_pending = true;
      skip_target = i - 1;  // block input == input of stage i-1
    }

    // through the activation
    Eigen::MatrixXd da =
        dz.cwiseProduct(activation_slope(config, st.pre_activation));

    if (config.batch_norm) {
      // through scale/shift
      sg.bn_scale = da.cwiseProduct(st.normalized).rowwise().sum();
      sg.bn_shift = da.rowwise().sum();
      Eigen::MatrixXd dxhat = s.bn_scale.asDiagonal() * da;

      const Eigen::VectorXd inv_std =
          (st.var_used.array() + kBatchNormEpsilon).sqrt().inverse().matrix();
      // Batch statistics are functions of the parameters below, so they
      // contribute their own gradient terms; frozen stats do not.
      if (trace.stats_mode == StatsMode::batch) {
        const Eigen::VectorXd mean_dxhat = dxhat.rowwise().mean();
        const Eigen::VectorXd mean_dxhat_xhat =
            dxhat.cwiseProduct(st.normalized).rowwise().mean();
        Eigen::MatrixXd combined =
            dxhat - mean_dxhat_xhat.asDiagonal() * st.normalized;
        combined.colwise() -= mean_dxhat;
        da = inv_std.asDiagonal() * combined;
      } else {
        da = inv_std.asDiagonal() * dxhat;
      }
    }

    sg.weight = da * st.input.transpose();
    sg.bias = da.rowwise().sum();
    dz = s.weight.transpose() * da;

    if (skip_pending && skip_target == i) {
      dz += skip_grad;
      skip_pending = false;
    }
  }
  return grads;
}

std::vector<double*> parameters(Network& net) {
  std::vector<double*> params;
  auto add_matrix = [&](Eigen::MatrixXd& m) {
    for (Index i = 0; i < m.size(); ++i) params.push_back(m.data() + i);
  };
  auto add_vector = [&](Eigen::VectorXd& v) {
    for (Index i = 0; i < v.size(); ++i) params.push_back(v.data() + i);
  };
  for (Stage& s : net.stages) {
    add_matrix(s.weight);
    add_vector(s.bias);
    add_vector(s.bn_scale);
    add_vector(s.bn_shift);
  }
  add_matrix(net.head_weight);
  add_vector(net.head_bias);
  return params;
}

namespace {

std::vector<const double*> gradient_pointers(const Gradients& grads) {
  std::vector<const double*> out;
  auto add_matrix = [&](const Eigen::MatrixXd& m) {
    for (Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
  };
  auto add_vector = [&](const Eigen::VectorXd& v) {
    for (Index i = 0; i < v.size(); ++i) out.push_back(v.data() + i);
  };
  for (const Gradients::StageGrads& s : grads.stages) {
    add_matrix(s.weight);
    add_vector(s.bias);
    add_vector(s.bn_scale);
    add_vector(s.bn_shift);
  }
  add_matrix(grads.head_weight);
  add_vector(grads.head_bias);
  return out;
}

void sgd_step(Network& net, const Gradients& grads, Gradients& velocity,
              double lr, double momentum, double weight_decay) {
  auto step = [&](auto& param, const auto& grad, auto& vel) {
    vel = momentum * vel + (grad + weight_decay * param).eval();
    param -= lr * vel;
  };
  for (std::size_t i = 0; i < net.stages.size(); ++i) {
    step(net.stages[i].weight, grads.stages[i].weight,
         velocity.stages[i].weight);
    step(net.stages[i].bias, grads.stages[i].bias, velocity.stages[i].bias);
    step(net.stages[i].bn_scale, grads.stages[i].bn_scale,
         velocity.stages[i].bn_scale);
    step(net.stages[i].bn_shift, grads.stages[i].bn_shift,
         velocity.stages[i].bn_shift);
  }
  step(net.head_weight, grads.head_weight, velocity.head_weight);
  step(net.head_bias, grads.head_bias, velocity.head_bias);
}

double batch_strict_accuracy(const Eigen::MatrixXd& logits,
                             const Eigen::MatrixXd& targets) {
  Index hits = 0;
  for (Index j = 0; j < logits.cols(); ++j) {
    Index d = 0;
    for (Index i = 0; i < targets.rows(); ++i)
      if (targets(i, j) != 0.0) ++d;
    if (d == 0) continue;
    // top-d of the logits column, ties to the lowest index
    std::vector<Index> order(static_cast<std::size_t>(logits.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::nth_element(order.begin(), order.begin() + d - 1, order.end(),
                     [&](Index a, Index b) {
                       return logits(a, j) != logits(b, j)
                                  ? logits(a, j) > logits(b, j)
                                  : a < b;
                     });
    bool match = true;
    for (Index r = 0; r < d; ++r)
      if (targets(order[static_cast<std::size_t>(r)], j) == 0.0) {
        match = false;
        break;
      }
    hits += match;
  }
  return static_cast<double>(hits) / static_cast<double>(logits.cols());
}

}  // namespace

TrainOutcome train(Network& net, const TrainingSet& data,
                   const TrainConfig& config) {
  config.validate();
  if (data.count() == 0) throw std::invalid_argument("train: empty dataset");
  if (data.inputs.rows() != net.config.input_dim ||
      data.targets.rows() != net.config.output_dim)
    throw std::invalid_argument("train: dataset shape mismatch");

  RandomStream rng(config.seed);
  Gradients velocity = Gradients::zeros_like(net);
  TrainOutcome outcome;

  std::vector<Index> order(static_cast<std::size_t>(data.count()));
  std::iota(order.begin(), order.end(), Index{0});

  for (int epoch = 0; epoch < config.total_epochs; ++epoch) {
    const double lr = config.initial_lr *
                      std::pow(config.lr_drop_factor,
                               epoch / config.drop_period_epochs);
    rng.shuffle(order);

    double loss_sum = 0.0;
    double acc_sum = 0.0;
    Index batches = 0;

    for (Index start = 0; start < data.count();
         start += config.batch_size) {
      const Index size = std::min<Index>(config.batch_size,
                                         data.count() - start);
      Eigen::MatrixXd x(net.config.input_dim, size);
      Eigen::MatrixXd t(net.config.output_dim, size);
      for (Index b = 0; b < size; ++b) {
        x.col(b) = data.inputs.col(order[static_cast<std::size_t>(start + b)]);
        t.col(b) = data.targets.col(order[static_cast<std::size_t>(start + b)]);
      }

      ForwardTrace trace = forward_pass(net, x, StatsMode::batch);
      update_running_moments(net, trace);
      const double batch_loss = loss_from_logits(net.config, trace.logits, t);
      if (!std::isfinite(batch_loss))
        throw DivergenceError("train: loss became non-finite");
      loss_sum += batch_loss;
      acc_sum += batch_strict_accuracy(trace.logits, t);
      ++batches;

      const Gradients grads = backward_pass(net, trace, t);
      sgd_step(net, grads, velocity, lr, config.momentum,
               config.weight_decay);
    }

    EpochStats stats;
    stats.mean_loss = loss_sum / static_cast<double>(batches);
    stats.strict_accuracy = acc_sum / static_cast<double>(batches);
    outcome.epochs.push_back(stats);
  }
  return outcome;
}

GradientCheckReport gradient_check(Network& net, const Eigen::MatrixXd& batch,
                                   const Eigen::MatrixXd& target,
                                   std::uint64_t seed, StatsMode stats,
                                   Index subset, double step) {
  if (net.parameter_count() > 50'000)
    throw std::invalid_argument(
        "gradient_check: network too large for finite differences");

  const ForwardTrace trace = forward_pass(net, batch, stats);
  const Gradients grads = backward_pass(net, trace, target);
  const std::vector<double*> params = parameters(net);
  const std::vector<const double*> grad_ptrs = gradient_pointers(grads);

  std::vector<Index> picks(params.size());
  std::iota(picks.begin(), picks.end(), Index{0});
  if (static_cast<Index>(params.size()) > subset) {
    RandomStream rng(seed);
    rng.shuffle(picks);
    picks.resize(static_cast<std::size_t>(subset));
  }

  auto loss_at = [&]() {
    const ForwardTrace t = forward_pass(net, batch, stats);
    return loss_from_logits(net.config, t.logits, target);
  };

  GradientCheckReport report;
  for (Index pick : picks) {
    double* p = params[static_cast<std::size_t>(pick)];
    const double saved = *p;
    *p = saved + step;
    const double plus = loss_at();
    *p = saved - step;
    const double minus = loss_at();
    *p = saved;

    const double fd = (plus - minus) / (2.0 * step);
    const double analytic = *grad_ptrs[static_cast<std::size_t>(pick)];
    const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-4});
    report.max_relative_error =
        std::max(report.max_relative_error, std::abs(fd - analytic) / denom);
    ++report.coordinates_checked;
  }
  return report;
}

namespace {

void write_vector_line(std::ostream& out, const char* name,
                       const Eigen::VectorXd& v) {
  out << name << ' ' << v.size();
  for (Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v[i]);
  out << '\n';
}

Eigen::VectorXd read_vector_line(std::istream& in, const std::string& name) {
  std::string token;
  if (!(in >> token) || token != name)
    throw std::runtime_error("load_network: expected " + name);
  Index size = 0;
  in >> size;
  Eigen::VectorXd v(size);
  for (Index i = 0; i < size; ++i)
    if (!(in >> v[i])) throw std::runtime_error("load_network: truncated");
  return v;
}

void serialize_network(std::ostream& out, const Network& net) {
  const NetworkConfig& c = net.config;
  out << "input_dim " << c.input_dim << '\n';
  out << "output_dim " << c.output_dim << '\n';
  out << "depth " << c.depth << '\n';
  out << "hidden_width " << c.hidden_width << '\n';
  out << "residual " << (c.residual ? 1 : 0) << '\n';
  out << "activation " << (c.activation == Activation::relu ? "relu" : "helu")
      << '\n';
  out << "helu_sigma " << format_double(c.helu_sigma) << '\n';
  out << "loss "
      << (c.loss == LossKind::multilabel ? "multilabel" : "quadratic") << '\n';
  out << "batch_norm " << (c.batch_norm ? 1 : 0) << '\n';
  for (const Stage& s : net.stages) {
    out << "stage\n";
    write_matrix(out, s.weight);
    write_vector_line(out, "bias", s.bias);
    write_vector_line(out, "bn_scale", s.bn_scale);
    write_vector_line(out, "bn_shift", s.bn_shift);
    write_vector_line(out, "running_mean", s.running_mean);
    write_vector_line(out, "running_var", s.running_var);
  }
  out << "head\n";
  write_matrix(out, net.head_weight);
  write_vector_line(out, "head_bias", net.head_bias);
}

}  // namespace

std::string network_hash(const Network& net) {
  std::ostringstream body;
  serialize_network(body, net);
  return ContentHash().add(body.str()).hex();
}

void save_network(const std::string& path, const Network& net) {
  std::ostringstream body;
  serialize_network(body, net);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_network: cannot open " + path);
  out << "sparselab-network 1\n";
  out << "hash " << ContentHash().add(body.str()).hex() << '\n';
  out << body.str();
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_network: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "sparselab-network" || version != 1)
    throw std::runtime_error("load_network: not a network checkpoint");
  std::string token, stored_hash;
  in >> token >> stored_hash;
  if (token != "hash") throw std::runtime_error("load_network: missing hash");

  NetworkConfig c;
  auto expect = [&](const char* name) {
    if (!(in >> token) || token != name)
      throw std::runtime_error(std::string("load_network: expected ") + name);
  };
  expect("input_dim");
  in >> c.input_dim;
  expect("output_dim");
  in >> c.output_dim;
  expect("depth");
  in >> c.depth;
  expect("hidden_width");
  in >> c.hidden_width;
  expect("residual");
  int flag;
  in >> flag;
  c.residual = flag != 0;
  expect("activation");
  in >> token;
  c.activation = token == "helu" ? Activation::helu : Activation::relu;
  expect("helu_sigma");
  in >> c.helu_sigma;
  expect("loss");
  in >> token;
  c.loss = token == "quadratic" ? LossKind::quadratic : LossKind::multilabel;
  expect("batch_norm");
  in >> flag;
  c.batch_norm = flag != 0;

  Network net;
  net.config = c;
  net.stages.resize(static_cast<std::size_t>(c.depth));
  for (Stage& s : net.stages) {
    expect("stage");
    s.weight = read_matrix(in);
    s.bias = read_vector_line(in, "bias");
    s.bn_scale = read_vector_line(in, "bn_scale");
    s.bn_shift = read_vector_line(in, "bn_shift");
    s.running_mean = read_vector_line(in, "running_mean");
    s.running_var = read_vector_line(in, "running_var");
  }
  expect("head");
  net.head_weight = read_matrix(in);
  net.head_bias = read_vector_line(in, "head_bias");

  if (network_hash(net) != stored_hash)
    throw std::runtime_error("load_network: content hash mismatch");
  return net;
}

}  // namespace sparselab
