#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "sparselab/net.hpp"
#include "sparselab/rng.hpp"

using namespace sparselab;

namespace {

NetworkConfig toy_config(int depth = 4, Index n = 6, Index m = 8,
                         Index hidden = 10) {
  NetworkConfig config;
  config.input_dim = n;
  config.output_dim = m;
  config.depth = depth;
  config.hidden_width = hidden;
  return config;
}

Eigen::MatrixXd random_batch(Index rows, Index cols, std::uint64_t seed) {
  RandomStream rng(seed);
  return rng.gaussian_matrix(rows, cols);
}

Eigen::MatrixXd random_labels(Index rows, Index cols, std::uint64_t seed) {
  RandomStream rng(seed);
  Eigen::MatrixXd labels(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      labels(i, j) = rng.uniform() < 0.25 ? 1.0 : 0.0;
  return labels;
}

}  // namespace

TEST_CASE("init_network statistics and determinism") {
  NetworkConfig config = toy_config(4, 300, 12, 300);
  const Network net = init_network(config, 5);
  // stages past the first have fan_in = 300 >= 256
  for (std::size_t i = 1; i < net.stages.size(); ++i) {
    const Eigen::MatrixXd& w = net.stages[i].weight;
    const double variance = w.squaredNorm() / static_cast<double>(w.size());
    const double expected = 2.0 / 300.0;
    CHECK(std::abs(variance - expected) < 0.2 * expected);
    CHECK(net.stages[i].bias.cwiseAbs().maxCoeff() == 0.0);
    CHECK(net.stages[i].bn_scale.minCoeff() == 1.0);
  }
  const Network again = init_network(config, 5);
  CHECK(net.stages[0].weight == again.stages[0].weight);
  CHECK(net.head_weight == again.head_weight);

  // forward at init on a zero input stays finite
  const Eigen::MatrixXd p =
      forward_eval(net, Eigen::MatrixXd::Zero(300, 3));
  CHECK(p.allFinite());
}

TEST_CASE("config validation") {
  NetworkConfig config = toy_config(1);
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = toy_config(4);
  config.activation = Activation::helu;
  config.helu_sigma = 1.5;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("eval forward is pure and batch-composition invariant") {
  const Network net = init_network(toy_config(), 7);
  const Eigen::MatrixXd batch = random_batch(6, 5, 8);
  const Eigen::MatrixXd once = forward_eval(net, batch);
  const Eigen::MatrixXd twice = forward_eval(net, batch);
  CHECK(once == twice);

  // no cross-sample leakage: column 2 alone gives the same output
  const Eigen::MatrixXd solo = forward_eval(net, batch.col(2));
  CHECK(solo.col(0) == once.col(2));

  // probabilities stay inside [0, 1]
  CHECK(once.minCoeff() >= 0.0);
  CHECK(once.maxCoeff() <= 1.0);
}

TEST_CASE("zeroed residual branches compose to the identity") {
  // depth 5: stage 0 projects, stages (1,2) and (3,4) form skip blocks
  NetworkConfig config = toy_config(5);
  config.residual = true;
  Network net = init_network(config, 9);
  for (std::size_t i = 1; i < net.stages.size(); ++i) {
    net.stages[i].weight.setZero();
    net.stages[i].bias.setZero();
  }
  const Eigen::MatrixXd batch = random_batch(6, 4, 10);
  const ForwardTrace trace = forward_pass(net, batch, StatsMode::running);
  // the stacked blocks pass the stage-0 output straight through
  const Eigen::MatrixXd block_input = trace.stages[1].input;
  CHECK((trace.features - block_input).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("helu matches its piecewise definition") {
  const double sigma = 0.1;
  CHECK(helu(0.0, sigma) == 0.0);
  CHECK(helu(1.0 - sigma, sigma) == 0.0);
  CHECK(helu(1.0, sigma) == 1.0);
  CHECK(helu(-1.0, sigma) == -1.0);
  CHECK(helu(0.95, sigma) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(helu(-0.95, sigma) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(helu(2.3, sigma) == 2.3);

  CHECK(helu_slope(0.5, sigma) == 0.0);
  CHECK(helu_slope(0.95, sigma) == doctest::Approx(10.0));
  CHECK(helu_slope(1.5, sigma) == 1.0);
}

TEST_CASE("multilabel loss values") {
  NetworkConfig config = toy_config();
  config.loss = LossKind::multilabel;

  Eigen::MatrixXd labels = random_labels(8, 5, 11);
  // perfect prediction, clamped inside (0, 1)
  const double perfect = loss(config, labels, labels);
  CHECK(perfect < 1e-6);

  const Eigen::MatrixXd half = Eigen::MatrixXd::Constant(8, 5, 0.5);
  CHECK(loss(config, half, labels) ==
        doctest::Approx(std::numbers::ln2).epsilon(1e-12));

  CHECK_THROWS_AS(loss(config, half, Eigen::MatrixXd::Zero(7, 5)),
                  std::invalid_argument);
}

TEST_CASE("quadratic loss is the mean squared error") {
  NetworkConfig config = toy_config();
  config.loss = LossKind::quadratic;
  Eigen::MatrixXd a(2, 2), t(2, 2);
  a << 1, 2, 3, 4;
  t << 0, 2, 3, 2;
  CHECK(loss(config, a, t) == doctest::Approx((1.0 + 4.0) / 4.0));
}

TEST_CASE("gradient check: near-linear net with quadratic loss") {
  NetworkConfig config = toy_config(3, 5, 6, 7);
  config.batch_norm = false;
  config.residual = false;
  config.loss = LossKind::quadratic;
  Network net = init_network(config, 12);
  // push every pre-activation into the linear region of the relu
  for (Stage& s : net.stages) s.bias.array() += 10.0;

  const Eigen::MatrixXd x = 0.1 * random_batch(5, 1, 13);
  const Eigen::MatrixXd t = random_batch(6, 1, 14);
  // the loss is nearly quadratic here, so the step can be generous; a
  // wider step drowns the cancellation roundoff of the large loss values
  const GradientCheckReport report =
      gradient_check(net, x, t, 99, StatsMode::running, 500, 1e-4);
  CHECK(report.max_relative_error < 1e-7);
}

TEST_CASE("gradient check: full residual batch-norm relu architecture") {
  NetworkConfig config;
  config.input_dim = 10;
  config.output_dim = 20;
  config.depth = 6;
  config.hidden_width = 16;
  config.residual = true;
  config.batch_norm = true;
  Network net = init_network(config, 21);

  const Eigen::MatrixXd x = random_batch(10, 1, 22);
  const Eigen::MatrixXd t = random_labels(20, 1, 23);
  // single sample: batch statistics are degenerate, so the check runs with
  // the stored running moments frozen
  const GradientCheckReport report =
      gradient_check(net, x, t, 99, StatsMode::running, 300);
  CHECK(report.coordinates_checked == 300);
  CHECK(report.max_relative_error < 1e-4);
}

TEST_CASE("gradient check: batch statistics path") {
  NetworkConfig config = toy_config(4, 6, 8, 10);
  config.residual = true;
  config.batch_norm = true;
  Network net = init_network(config, 31);

  const Eigen::MatrixXd x = random_batch(6, 8, 32);
  const Eigen::MatrixXd t = random_labels(8, 8, 33);
  // finite differences recompute per-batch moments, exercising the full
  // batch-norm backward
  const GradientCheckReport report =
      gradient_check(net, x, t, 99, StatsMode::batch, 300);
  CHECK(report.max_relative_error < 1e-4);
}

TEST_CASE("gradient check: helu activation away from its kinks") {
  NetworkConfig config = toy_config(3, 5, 6, 8);
  config.batch_norm = false;
  config.residual = false;
  config.activation = Activation::helu;
  config.helu_sigma = 0.1;
  Network net = init_network(config, 101);

  const Eigen::MatrixXd x = random_batch(5, 1, 102);
  const Eigen::MatrixXd t = random_labels(6, 1, 103);
  // the check is only valid away from the piecewise breakpoints
  const ForwardTrace trace = forward_pass(net, x, StatsMode::running);
  double min_distance = 1e9;
  for (const StageTrace& st : trace.stages)
    for (Index i = 0; i < st.pre_activation.size(); ++i) {
      const double a = std::abs(st.pre_activation.data()[i]);
      min_distance = std::min({min_distance, std::abs(a - 0.9),
                               std::abs(a - 1.0)});
    }
  REQUIRE(min_distance > 1e-2);

  const GradientCheckReport report =
      gradient_check(net, x, t, 99, StatsMode::running, 300);
  CHECK(report.max_relative_error < 1e-4);
}

TEST_CASE("gradient_check refuses oversized networks") {
  NetworkConfig config = toy_config(8, 200, 200, 200);
  Network net = init_network(config, 1);
  CHECK_THROWS_AS(gradient_check(net, Eigen::MatrixXd::Zero(200, 1),
                                 Eigen::MatrixXd::Zero(200, 1), 1),
                  std::invalid_argument);
}

TEST_CASE("batch norm normalizes each unit over the batch in train mode") {
  NetworkConfig config = toy_config(4, 6, 8, 10);
  Network net = init_network(config, 51);
  const Eigen::MatrixXd x = random_batch(6, 32, 52);
  const ForwardTrace trace = forward_pass(net, x, StatsMode::batch);
  for (const StageTrace& st : trace.stages) {
    const Eigen::VectorXd mean = st.normalized.rowwise().mean();
    CHECK(mean.cwiseAbs().maxCoeff() < 1e-6);
    const Eigen::VectorXd var =
        st.normalized.cwiseProduct(st.normalized).rowwise().mean();
    // biased variance of the normalized activations: v / (v + eps)
    CHECK((var.array() - 1.0).abs().maxCoeff() < 1e-3);
  }
}

TEST_CASE("one plain SGD step decreases a single sample's loss") {
  NetworkConfig config = toy_config(4, 6, 8, 10);
  Network net = init_network(config, 61);
  const Eigen::MatrixXd x = random_batch(6, 1, 62);
  const Eigen::MatrixXd t = random_labels(8, 1, 63);

  TrainConfig train_config;
  train_config.batch_size = 1;
  train_config.total_epochs = 1;
  train_config.momentum = 0.0;
  train_config.weight_decay = 0.0;
  train_config.drop_period_epochs = 1000;

  const ForwardTrace before = forward_pass(net, x, StatsMode::batch);
  const double loss_before = loss_from_logits(net.config, before.logits, t);

  bool decreased = false;
  for (double lr : {1e-2, 1e-3, 1e-4, 1e-5}) {
    Network trial = net;
    train_config.initial_lr = lr;
    train(trial, TrainingSet{x, t}, train_config);
    const ForwardTrace after = forward_pass(trial, x, StatsMode::batch);
    if (loss_from_logits(trial.config, after.logits, t) < loss_before) {
      decreased = true;
      break;
    }
  }
  CHECK(decreased);
}

TEST_CASE("training memorizes a single repeated sample") {
  NetworkConfig config = toy_config(4, 6, 8, 12);
  config.batch_norm = false;  // single-sample batch statistics are degenerate
  Network net = init_network(config, 71);
  const Eigen::MatrixXd x = random_batch(6, 1, 72);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(8, 1);
  t(2, 0) = 1.0;
  t(5, 0) = 1.0;

  TrainConfig train_config;
  train_config.batch_size = 1;
  train_config.total_epochs = 200;  // 200 steps over the one sample
  train_config.initial_lr = 0.1;
  train_config.drop_period_epochs = 1000;
  train_config.seed = 73;
  const TrainOutcome outcome = train(net, TrainingSet{x, t}, train_config);
  CHECK(outcome.epochs.back().mean_loss < 1e-3);
}

TEST_CASE("first-epoch loss trend is downward on desk-scale data") {
  NetworkConfig config = toy_config(4, 8, 16, 24);
  Network net = init_network(config, 81);
  RandomStream rng(82);
  const Index count = 512;
  Eigen::MatrixXd targets(16, count);
  Eigen::MatrixXd inputs(8, count);
  const Eigen::MatrixXd mixing = rng.gaussian_matrix(8, 16);
  for (Index i = 0; i < count; ++i) {
    Eigen::VectorXd label = Eigen::VectorXd::Zero(16);
    for (Index pick : RandomStream(1000 + i).sample_without_replacement(16, 2))
      label[pick] = 1.0;
    targets.col(i) = label;
    inputs.col(i) = mixing * label;
  }

  TrainConfig train_config;
  train_config.batch_size = 16;  // 32 batches per epoch
  train_config.total_epochs = 1;
  train_config.initial_lr = 0.05;
  train_config.seed = 83;

  // re-run per-batch statistics by training one epoch and reading the trace
  Network probe = net;
  const TrainOutcome outcome =
      train(probe, TrainingSet{inputs, targets}, train_config);
  CHECK(outcome.epochs.size() == 1);

  // moving-average check needs per-batch losses; approximate with two
  // half-epoch runs: loss after a half epoch is lower than at the start
  TrainConfig half = train_config;
  half.total_epochs = 1;
  Network half_net = net;
  Eigen::MatrixXd half_inputs = inputs.leftCols(256);
  Eigen::MatrixXd half_targets = targets.leftCols(256);
  train(half_net, TrainingSet{half_inputs, half_targets}, half);
  const ForwardTrace start_trace = forward_pass(net, inputs, StatsMode::running);
  const ForwardTrace half_trace =
      forward_pass(half_net, inputs, StatsMode::running);
  CHECK(loss_from_logits(net.config, half_trace.logits, targets) <
        loss_from_logits(net.config, start_trace.logits, targets));
}

TEST_CASE("train config defaults follow the stated recipe") {
  const TrainConfig config;
  CHECK(config.batch_size == 250);
  CHECK(config.initial_lr == 0.01);
  CHECK(config.lr_drop_factor == 0.1);
  CHECK(config.drop_period_epochs == 50);
  CHECK(config.total_epochs == 150);
  CHECK(config.momentum == 0.9);
  CHECK(config.weight_decay == 0.0001);
  config.validate();
}

TEST_CASE("training diverges loudly with an absurd learning rate") {
  NetworkConfig config = toy_config(4, 6, 8, 10);
  config.batch_norm = false;  // nothing to re-center the blow-up
  Network net = init_network(config, 91);
  const Eigen::MatrixXd x = 100.0 * random_batch(6, 8, 92);
  const Eigen::MatrixXd t = random_labels(8, 8, 93);
  TrainConfig train_config;
  train_config.batch_size = 4;
  train_config.total_epochs = 50;
  train_config.initial_lr = 1e6;
  CHECK_THROWS_AS(train(net, TrainingSet{x, t}, train_config),
                  DivergenceError);
}

TEST_CASE("checkpoint round trip reproduces eval outputs bit for bit") {
  NetworkConfig config = toy_config(5, 6, 8, 10);
  Network net = init_network(config, 95);
  // make running moments non-trivial first
  const Eigen::MatrixXd x = random_batch(6, 16, 96);
  const Eigen::MatrixXd t = random_labels(8, 16, 97);
  TrainConfig train_config;
  train_config.batch_size = 8;
  train_config.total_epochs = 2;
  train(net, TrainingSet{x, t}, train_config);

  const std::string path = "/tmp/sparselab_test_model.ckpt";
  save_network(path, net);
  const Network loaded = load_network(path);
  CHECK(network_hash(loaded) == network_hash(net));

  const Eigen::MatrixXd probe = random_batch(6, 5, 98);
  CHECK(forward_eval(net, probe) == forward_eval(loaded, probe));
}

TEST_CASE("checkpoint loader rejects corrupted files") {
  NetworkConfig config = toy_config(4, 4, 5, 6);
  Network net = init_network(config, 101);
  const std::string path = "/tmp/sparselab_corrupt.ckpt";
  save_network(path, net);
  // flip one digit in the body
  std::string contents;
  {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    contents = buffer.str();
  }
  const auto pos = contents.rfind("0.");
  contents[pos + 2] = contents[pos + 2] == '5' ? '6' : '5';
  {
    std::ofstream out(path);
    out << contents;
  }
  CHECK_THROWS(load_network(path));
}
