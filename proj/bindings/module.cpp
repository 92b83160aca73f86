// Python bindings for the main operations: generators, the RIP oracle,
// the solvers, metrics, and the support classifier.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sparselab/aiht.hpp"
#include "sparselab/datagen.hpp"
#include "sparselab/dictgen.hpp"
#include "sparselab/net.hpp"
#include "sparselab/oracle.hpp"
#include "sparselab/rip.hpp"
#include "sparselab/solvers.hpp"
#include "sparselab/stereo.hpp"
#include "sparselab/textio.hpp"

namespace py = pybind11;
using namespace sparselab;

namespace {

Dictionary as_dictionary(const Eigen::MatrixXd& entries) {
  Dictionary dict;
  dict.entries = entries;
  dict.column_norms_unit = dict.columns_unit_to();
  return dict;
}

SolverConfig solver_config(int max_iterations, double step_size,
                           double tolerance, Index k) {
  SolverConfig config;
  config.max_iterations = max_iterations;
  config.step_size = step_size;
  config.tolerance = tolerance;
  config.k = k;
  return config;
}

py::dict result_dict(const RecoveryResult& result) {
  py::dict out;
  out["estimate"] = result.estimate.values;
  out["support"] = result.estimate.support;
  out["iterations"] = result.iterations_used;
  out["converged"] = result.converged;
  out["objective_trace"] = result.objective_trace;
  return out;
}

}  // namespace

PYBIND11_MODULE(_sparselab, m) {
  m.doc() = "sparse support recovery laboratory (C++ core)";

  // generators ------------------------------------------------------------
  m.def(
      "gaussian_unit_columns",
      [](Index n, Index m_, std::uint64_t seed) {
        return gaussian_unit_columns(n, m_, seed).entries;
      },
      py::arg("n"), py::arg("m"), py::arg("seed"));
  m.def(
      "decaying_spectrum",
      [](Index n, Index m_, std::uint64_t seed) {
        return decaying_spectrum(n, m_, seed).entries;
      },
      py::arg("n"), py::arg("m"), py::arg("seed"));
  m.def(
      "rank_perturbed",
      [](Index n, Index m_, double epsilon, Index r, std::uint64_t seed) {
        const RankPerturbedDictionary rp =
            rank_perturbed(n, m_, epsilon, r, seed);
        py::dict out;
        out["dictionary"] = rp.dictionary.entries;
        out["perturbation"] = rp.perturbation;
        out["norm_scales"] = rp.norm_scales;
        out["epsilon"] = rp.epsilon;
        return out;
      },
      py::arg("n"), py::arg("m"), py::arg("epsilon"), py::arg("r"),
      py::arg("seed"));
  m.def(
      "clustered",
      [](Index n, Index c, Index cluster_size, double epsilon,
         std::uint64_t seed) {
        ClusteredDictSpec spec;
        spec.n = n;
        spec.c = c;
        spec.cluster_sizes.assign(static_cast<std::size_t>(c), cluster_size);
        spec.epsilon = epsilon;
        const ClusteredDictionary cd = clustered(spec, seed);
        py::dict out;
        out["dictionary"] = cd.dictionary.entries;
        out["centers"] = cd.centers;
        out["details"] = cd.details;
        out["v"] = cd.v;
        out["norm_scales"] = cd.norm_scales;
        return out;
      },
      py::arg("n"), py::arg("clusters"), py::arg("cluster_size"),
      py::arg("epsilon"), py::arg("seed"));

  // oracle ------------------------------------------------------------------
  m.def(
      "brute_force_l0",
      [](const Eigen::VectorXd& y, const Eigen::MatrixXd& phi, Index k_max) {
        const SparseSignal x =
            brute_force_l0(Observation{y}, as_dictionary(phi), k_max);
        return py::make_tuple(x.values, x.support);
      },
      py::arg("y"), py::arg("phi"), py::arg("k_max"));
  m.def(
      "least_squares_on_support",
      [](const Eigen::VectorXd& y, const Eigen::MatrixXd& phi,
         const IndexSet& support) {
        return least_squares_on_support(Observation{y}, as_dictionary(phi),
                                        support)
            .values;
      },
      py::arg("y"), py::arg("phi"), py::arg("support"));

  // rip ---------------------------------------------------------------------
  m.def(
      "delta_k",
      [](const Eigen::MatrixXd& phi, Index k) {
        const RipReport report = delta_k_exhaustive(as_dictionary(phi), k);
        py::dict out;
        out["delta"] = report.delta;
        out["witness"] = report.witness_support;
        out["side"] =
            report.side == RipReport::Side::lower ? "lower" : "upper";
        return out;
      },
      py::arg("phi"), py::arg("k"));
  m.def(
      "iht_condition_holds",
      [](const Eigen::MatrixXd& phi, Index k) {
        return iht_condition_holds(as_dictionary(phi), k);
      },
      py::arg("phi"), py::arg("k"));
  m.def(
      "cor3_transform",
      [](const Eigen::MatrixXd& phi, const Eigen::MatrixXd& perturbation,
         double epsilon, const Eigen::VectorXd& norm_scales) {
        const Cor3Transform t = cor3_transform(as_dictionary(phi),
                                               perturbation, epsilon,
                                               norm_scales);
        return py::make_tuple(t.w, t.d);
      },
      py::arg("phi"), py::arg("perturbation"), py::arg("epsilon"),
      py::arg("norm_scales"));

  // solvers -------------------------------------------------------------------
  m.def("hard_threshold", &hard_threshold, py::arg("x"), py::arg("k"));
  m.def("gated_hard_threshold", &gated_hard_threshold, py::arg("x"),
        py::arg("k"), py::arg("omega_on"), py::arg("omega_off"));
  m.def(
      "iht",
      [](const Eigen::VectorXd& y, const Eigen::MatrixXd& phi, Index k,
         double step_size, int max_iterations, double tolerance) {
        return result_dict(iht(Observation{y}, as_dictionary(phi),
                               solver_config(max_iterations, step_size,
                                             tolerance, k)));
      },
      py::arg("y"), py::arg("phi"), py::arg("k"), py::arg("step_size") = 1.0,
      py::arg("max_iterations") = 1000, py::arg("tolerance") = 1e-9);
  m.def(
      "weighted_iht",
      [](const Eigen::VectorXd& y, const Eigen::MatrixXd& phi,
         const Eigen::MatrixXd& w, const Eigen::VectorXd& d, Index k,
         int max_iterations, double tolerance) {
        return result_dict(weighted_iht(Observation{y}, as_dictionary(phi), w,
                                        d,
                                        solver_config(max_iterations, 1.0,
                                                      tolerance, k)));
      },
      py::arg("y"), py::arg("phi"), py::arg("w"), py::arg("d"), py::arg("k"),
      py::arg("max_iterations") = 1000, py::arg("tolerance") = 1e-9);
  m.def(
      "ista",
      [](const Eigen::VectorXd& y, const Eigen::MatrixXd& phi, double lambda,
         int max_iterations, double tolerance) {
        return result_dict(ista(Observation{y}, as_dictionary(phi), lambda,
                                solver_config(max_iterations, 0.0, tolerance,
                                              0)));
      },
      py::arg("y"), py::arg("phi"), py::arg("lambda_"),
      py::arg("max_iterations") = 1000, py::arg("tolerance") = 1e-9);
  m.def(
      "omp",
      [](const Eigen::VectorXd& y, const Eigen::MatrixXd& phi, Index k) {
        return result_dict(omp(Observation{y}, as_dictionary(phi), k));
      },
      py::arg("y"), py::arg("phi"), py::arg("k"));

  // adaptive IHT over the clustered model ------------------------------------
  m.def(
      "aiht_clustered",
      [](const Eigen::VectorXd& y, Index n, Index c, Index cluster_size,
         double epsilon, std::uint64_t seed, Index k_x, Index k_c, Index tau,
         Index t_detail) {
        ClusteredDictSpec spec;
        spec.n = n;
        spec.c = c;
        spec.cluster_sizes.assign(static_cast<std::size_t>(c), cluster_size);
        spec.epsilon = epsilon;
        const ClusteredDictionary cd = clustered(spec, seed);
        const AihtSchedule schedule =
            build_cluster_schedule(cd, k_x, k_c, tau, t_detail);
        return result_dict(run_aiht(Observation{y}, schedule));
      },
      py::arg("y"), py::arg("n"), py::arg("clusters"), py::arg("cluster_size"),
      py::arg("epsilon"), py::arg("seed"), py::arg("k_x"), py::arg("k_c"),
      py::arg("tau") = 30, py::arg("t_detail") = 30);

  // metrics -------------------------------------------------------------------
  m.def("top_d_support", &top_d_support, py::arg("scores"), py::arg("d"));

  // network -------------------------------------------------------------------
  py::class_<Network>(m, "Network")
      .def_property_readonly("parameter_count", &Network::parameter_count)
      .def("forward",
           [](const Network& net, const Eigen::MatrixXd& batch) {
             return forward_eval(net, batch);
           })
      .def("save", [](const Network& net,
                      const std::string& path) { save_network(path, net); })
      .def_property_readonly("hash", &network_hash);
  m.def(
      "init_network",
      [](Index input_dim, Index output_dim, int depth, Index hidden,
         bool residual, const std::string& activation, const std::string& loss,
         bool batch_norm, std::uint64_t seed) {
        NetworkConfig config;
        config.input_dim = input_dim;
        config.output_dim = output_dim;
        config.depth = depth;
        config.hidden_width = hidden;
        config.residual = residual;
        config.activation =
            activation == "helu" ? Activation::helu : Activation::relu;
        config.loss =
            loss == "quadratic" ? LossKind::quadratic : LossKind::multilabel;
        config.batch_norm = batch_norm;
        return init_network(config, seed);
      },
      py::arg("input_dim"), py::arg("output_dim"), py::arg("depth") = 20,
      py::arg("hidden") = 0, py::arg("residual") = true,
      py::arg("activation") = "relu", py::arg("loss") = "multilabel",
      py::arg("batch_norm") = true, py::arg("seed") = 0);
  m.def("load_network", &load_network, py::arg("path"));
  m.def(
      "train_network",
      [](Network& net, const Eigen::MatrixXd& inputs,
         const Eigen::MatrixXd& targets, int batch_size, double initial_lr,
         double lr_drop_factor, int drop_period_epochs, int total_epochs,
         double momentum, double weight_decay, std::uint64_t seed) {
        TrainConfig config;
        config.batch_size = batch_size;
        config.initial_lr = initial_lr;
        config.lr_drop_factor = lr_drop_factor;
        config.drop_period_epochs = drop_period_epochs;
        config.total_epochs = total_epochs;
        config.momentum = momentum;
        config.weight_decay = weight_decay;
        config.seed = seed;
        const TrainOutcome outcome =
            train(net, TrainingSet{inputs, targets}, config);
        std::vector<double> losses;
        for (const EpochStats& stats : outcome.epochs)
          losses.push_back(stats.mean_loss);
        return losses;
      },
      py::arg("net"), py::arg("inputs"), py::arg("targets"),
      py::arg("batch_size") = 250, py::arg("initial_lr") = 0.01,
      py::arg("lr_drop_factor") = 0.1, py::arg("drop_period_epochs") = 50,
      py::arg("total_epochs") = 150, py::arg("momentum") = 0.9,
      py::arg("weight_decay") = 0.0001, py::arg("seed") = 0);

  // stereo -------------------------------------------------------------------
  m.def(
      "nullspace_dictionary",
      [](const Eigen::MatrixXd& directions) {
        LightingRig rig{directions};
        const NullspaceSystem system = nullspace_dictionary(rig);
        return system.projector;
      },
      py::arg("lighting_directions"));
  m.def(
      "make_rig",
      [](Index q, std::uint64_t seed) { return make_rig(q, seed).directions; },
      py::arg("q"), py::arg("seed"));
  m.def("angular_error_deg", &angular_error_deg, py::arg("a"), py::arg("b"));
}
