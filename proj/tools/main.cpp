// Command-line front end: seeded generators, the RIP oracle, solver runs,
// network training, and the experiment runner behind one binary.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "sparselab/datagen.hpp"
#include "sparselab/dictgen.hpp"
#include "sparselab/harness.hpp"
#include "sparselab/net.hpp"
#include "sparselab/rip.hpp"
#include "sparselab/solvers.hpp"
#include "sparselab/textio.hpp"

namespace {

using namespace sparselab;

struct CommonOptions {
  std::string spec_file;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string engines;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--spec", common.spec_file, "experiment file (key = value)");
  cmd->add_option("--seed", common.seed, "base seed")
      ->each([&common](const std::string&) { common.seed_set = true; });
  cmd->add_option("--out", common.out, "output directory or file");
  cmd->add_option("--engine", common.engines,
                  "engine list, comma separated (iht,ista,omp,net:<ckpt>)");
  cmd->add_option("--threads", common.threads, "worker threads");
}

ConfigFile load_spec(const CommonOptions& common) {
  ConfigFile config = common.spec_file.empty()
                          ? ConfigFile{}
                          : ConfigFile::parse_file(common.spec_file);
  if (common.seed_set)
    config.set("experiment.seed", std::to_string(common.seed));
  if (!common.out.empty()) config.set("experiment.out", common.out);
  if (!common.engines.empty()) config.set("engines.list", common.engines);
  if (common.threads > 0)
    config.set("experiment.threads", std::to_string(common.threads));
  return config;
}

int run_experiment_kind(const std::string& kind, const CommonOptions& common) {
  ConfigFile config = load_spec(common);
  config.set("experiment.kind", kind);
  ExperimentSpec spec{std::move(config)};
  const ExperimentResult result = run_experiment(spec);
  for (const std::string& file : result.files_written)
    std::cout << file << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparselab: sparse support recovery laboratory"};
  app.require_subcommand(1);

  // gen-dict -----------------------------------------------------------
  auto* gen_dict = app.add_subcommand("gen-dict", "generate a dictionary");
  CommonOptions gd_common;
  add_common(gen_dict, gd_common);
  std::string gd_kind = "gaussian";
  Index gd_n = 20, gd_m = 100, gd_rank = 1, gd_clusters = 8, gd_cluster_size = 6;
  double gd_epsilon = 0.01;
  gen_dict->add_option("--kind", gd_kind,
                       "gaussian | decaying | rank_perturbed | clustered");
  gen_dict->add_option("--n", gd_n, "rows");
  gen_dict->add_option("--m", gd_m, "columns");
  gen_dict->add_option("--epsilon", gd_epsilon, "perturbation weight");
  gen_dict->add_option("--rank", gd_rank, "perturbation rank");
  gen_dict->add_option("--clusters", gd_clusters, "cluster count");
  gen_dict->add_option("--cluster-size", gd_cluster_size, "columns per cluster");

  // gen-corpus ---------------------------------------------------------
  auto* gen_corpus = app.add_subcommand("gen-corpus", "generate a corpus");
  CommonOptions gc_common;
  add_common(gen_corpus, gc_common);
  std::string gc_dict;
  Index gc_count = 1000, gc_dmin = 1, gc_dmax = 10;
  std::string gc_law = "uniform_gapped";
  double gc_a = 0.1, gc_b = 0.5, gc_noise = -1.0;
  gen_corpus->add_option("--dict", gc_dict, "dictionary file")->required();
  gen_corpus->add_option("--count", gc_count, "sample count");
  gen_corpus->add_option("--d-min", gc_dmin, "min support size");
  gen_corpus->add_option("--d-max", gc_dmax, "max support size");
  gen_corpus->add_option("--law", gc_law, "uniform_gapped | gaussian_bimodal");
  gen_corpus->add_option("--law-a", gc_a, "law parameter (low / mean)");
  gen_corpus->add_option("--law-b", gc_b, "law parameter (high / std)");
  gen_corpus->add_option("--noise-std", gc_noise, "observation noise std");

  // rip -----------------------------------------------------------------
  auto* rip_cmd = app.add_subcommand("rip", "exhaustive RIP constant");
  CommonOptions rip_common;
  add_common(rip_cmd, rip_common);
  std::string rip_dict;
  Index rip_k = 2;
  rip_cmd->add_option("--dict", rip_dict, "dictionary file")->required();
  rip_cmd->add_option("--k", rip_k, "sparsity level");

  // solve ----------------------------------------------------------------
  auto* solve_cmd =
      app.add_subcommand("solve", "run one engine over a corpus");
  CommonOptions solve_common;
  add_common(solve_cmd, solve_common);
  std::string solve_dict, solve_corpus;
  double solve_lambda = 1e-3;
  solve_cmd->add_option("--dict", solve_dict, "dictionary file")->required();
  solve_cmd->add_option("--corpus", solve_corpus, "corpus file")->required();
  solve_cmd->add_option("--ista-lambda", solve_lambda, "ISTA penalty");

  // experiment kinds ------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train a support classifier");
  CommonOptions train_common;
  add_common(train_cmd, train_common);

  auto* eval_cmd =
      app.add_subcommand("eval", "accuracy sweep over engines and d");
  CommonOptions eval_common;
  add_common(eval_cmd, eval_common);

  auto* stereo_cmd =
      app.add_subcommand("stereo", "photometric stereo study");
  CommonOptions stereo_common;
  add_common(stereo_cmd, stereo_common);

  // report -----------------------------------------------------------------
  auto* report_cmd =
      app.add_subcommand("report", "emit plot-ready files from results");
  std::string report_in, report_out;
  report_cmd->add_option("--in", report_in, "results directory")->required();
  report_cmd->add_option("--out", report_out, "plot output directory")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_dict->parsed()) {
      ConfigFile config = load_spec(gd_common);
      const std::string out = config.get("experiment.out", "dictionary.txt");
      const std::uint64_t seed = config.get_seed("experiment.seed", 0);
      Dictionary dict;
      if (gd_kind == "gaussian") {
        dict = gaussian_unit_columns(gd_n, gd_m, seed);
      } else if (gd_kind == "decaying") {
        dict = decaying_spectrum(gd_n, gd_m, seed);
      } else if (gd_kind == "rank_perturbed") {
        dict = rank_perturbed(gd_n, gd_m, gd_epsilon, gd_rank, seed).dictionary;
      } else if (gd_kind == "clustered") {
        ClusteredDictSpec spec;
        spec.n = gd_n;
        spec.c = gd_clusters;
        spec.cluster_sizes.assign(static_cast<std::size_t>(gd_clusters),
                                  gd_cluster_size);
        spec.epsilon = gd_epsilon;
        dict = clustered(spec, seed).dictionary;
      } else {
        std::cerr << "unknown dictionary kind: " << gd_kind << '\n';
        return 1;
      }
      save_dictionary(out, dict);
      std::cout << out << " (hash " << hash_matrix_hex(dict.entries) << ")\n";
      return 0;
    }

    if (gen_corpus->parsed()) {
      ConfigFile config = load_spec(gc_common);
      const std::string out = config.get("experiment.out", "corpus.txt");
      const std::uint64_t seed = config.get_seed("experiment.seed", 0);
      const Dictionary dict = load_dictionary(gc_dict);
      const AmplitudeLaw law =
          gc_law == "gaussian_bimodal"
              ? AmplitudeLaw::gaussian_bimodal(gc_a, gc_b)
              : AmplitudeLaw::uniform_gapped(gc_a, gc_b);
      std::optional<double> noise;
      if (gc_noise >= 0.0) noise = gc_noise;
      const Corpus corpus =
          make_corpus(dict, gc_count, gc_dmin, gc_dmax, law, seed, noise);
      save_corpus(out, corpus);
      std::cout << out << " (" << corpus.count() << " samples)\n";
      return 0;
    }

    if (rip_cmd->parsed()) {
      const Dictionary dict = load_dictionary(rip_dict);
      const RipReport report = delta_k_exhaustive(dict, rip_k);
      std::cout << "delta_" << report.k << " = "
                << format_double(report.delta) << '\n';
      std::cout << "witness =";
      for (Index i : report.witness_support) std::cout << ' ' << i;
      std::cout << '\n'
                << "side = "
                << (report.side == RipReport::Side::lower ? "lower" : "upper")
                << '\n';
      std::cout << "iht_condition (k = " << report.k << "/3) = "
                << (report.delta < kIhtRipThreshold ? "holds" : "violated")
                << '\n';
      return 0;
    }

    if (solve_cmd->parsed()) {
      ConfigFile config = load_spec(solve_common);
      const Dictionary dict = load_dictionary(solve_dict);
      const Corpus corpus = load_corpus(solve_corpus, dict);
      const std::string engine_name = config.get("engines.list", "omp");
      const EvalEngine engine = make_engine(engine_name, dict, solve_lambda);
      std::vector<Eigen::VectorXd> predictions;
      predictions.reserve(static_cast<std::size_t>(corpus.count()));
      for (const CorpusSample& sample : corpus.samples)
        predictions.push_back(
            engine.run(sample.y.values, sample.x.cardinality()).scores);
      const MetricReport report = evaluate_predictions(predictions, corpus);
      std::cout << "engine = " << engine_name << '\n';
      std::cout << "s_acc = " << format_double(report.s_acc) << '\n';
      std::cout << "l_acc = " << format_double(report.l_acc) << '\n';
      for (const auto& [d, slice] : report.per_d)
        std::cout << "d " << d << ": s_acc = " << format_double(slice.s_acc)
                  << ", l_acc = " << format_double(slice.l_acc) << " ("
                  << slice.count << " samples)\n";
      return 0;
    }

    if (train_cmd->parsed()) return run_experiment_kind("train", train_common);
    if (eval_cmd->parsed())
      return run_experiment_kind("recovery_sweep", eval_common);
    if (stereo_cmd->parsed())
      return run_experiment_kind("stereo_study", stereo_common);

    if (report_cmd->parsed()) {
      for (const std::string& file : emit_plot_data(report_in, report_out))
        std::cout << file << '\n';
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
