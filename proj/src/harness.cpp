#include "sparselab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "sparselab/aiht.hpp"
#include "sparselab/rip.hpp"
#include "sparselab/solvers.hpp"
#include "sparselab/stereo.hpp"
#include "sparselab/textio.hpp"

namespace sparselab {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// ConfigFile
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return RandomStream::splitmix64(seed ^ RandomStream::splitmix64(tag + 1));
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text) {
  ConfigFile config;
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidSpecError("config: expected key = value, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidSpecError("config: empty key");
    config.values_[section.empty() ? key : section + "." + key] = value;
  }
  return config;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  return parse_text(read_file(path));
}

bool ConfigFile::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string ConfigFile::get(const std::string& key,
                            const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string ConfigFile::require(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw InvalidSpecError("config: missing required key " + key);
  return it->second;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stod(it->second);
}

std::int64_t ConfigFile::get_int(const std::string& key,
                                 std::int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stoll(it->second);
}

std::uint64_t ConfigFile::get_seed(const std::string& key,
                                   std::uint64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stoull(it->second);
}

void ConfigFile::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string ConfigFile::canonical() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << " = " << value << '\n';
  return out.str();
}

void ExperimentSpec::validate() const {
  static const std::vector<std::string> kinds = {
      "recovery_sweep", "ablation", "cor3_study",
      "aiht_study",     "stereo_study", "train"};
  const std::string k = kind();
  if (std::find(kinds.begin(), kinds.end(), k) == kinds.end())
    throw InvalidSpecError("unknown experiment kind: " + k);
  (void)out_dir();
}

// ---------------------------------------------------------------------------
// Engines
// ---------------------------------------------------------------------------

EvalEngine make_engine(const std::string& name, const Dictionary& phi,
                       double ista_lambda) {
  EvalEngine engine;
  engine.name = name;

  if (name == "iht") {
    engine.run = [phi](const Eigen::VectorXd& y, Index d) {
      SolverConfig config;
      config.k = d;
      const RecoveryResult r = iht(Observation{y}, phi, config);
      EngineOutput out;
      out.scores = r.estimate.values.cwiseAbs();
      out.iterations = r.iterations_used;
      out.residual = std::sqrt(2.0 * r.objective_trace.back());
      return out;
    };
  } else if (name == "ista") {
    engine.run = [phi, ista_lambda](const Eigen::VectorXd& y, Index) {
      SolverConfig config;
      config.step_size = 0.0;  // auto 1/||Phi||^2
      const RecoveryResult r = ista(Observation{y}, phi, ista_lambda, config);
      EngineOutput out;
      out.scores = r.estimate.values.cwiseAbs();
      out.iterations = r.iterations_used;
      out.residual = std::sqrt(2.0 * r.objective_trace.back());
      return out;
    };
  } else if (name == "omp") {
    engine.run = [phi](const Eigen::VectorXd& y, Index d) {
      const RecoveryResult r = omp(Observation{y}, phi, std::min(d, phi.n()));
      EngineOutput out;
      out.scores = r.estimate.values.cwiseAbs();
      out.iterations = r.iterations_used;
      out.residual = std::sqrt(2.0 * r.objective_trace.back());
      return out;
    };
  } else if (name.rfind("net:", 0) == 0) {
    const std::string path = name.substr(4);
    Network net;
    try {
      net = load_network(path);
    } catch (const std::exception& err) {
      throw MissingCheckpointError("engine net: " + std::string(err.what()));
    }
    if (net.config.input_dim != phi.n() || net.config.output_dim != phi.m())
      throw InvalidSpecError("engine net: checkpoint shape does not match "
                             "the dictionary");
    auto shared = std::make_shared<Network>(std::move(net));
    engine.run = [shared](const Eigen::VectorXd& y, Index) {
      EngineOutput out;
      out.scores = forward_eval(*shared, y).col(0);
      out.iterations = shared->config.depth;
      out.residual = 0.0;
      return out;
    };
  } else {
    throw InvalidSpecError("unknown engine: " + name);
  }
  return engine;
}

void parallel_for(Index count, int threads,
                  const std::function<void(Index)>& body) {
  if (threads <= 1 || count <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> cursor{0};
  std::vector<std::thread> pool;
  const int workers = std::min<int>(threads, static_cast<int>(count));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const Index i = cursor.fetch_add(1);
        if (i >= count) break;
        body(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Experiment implementations
// ---------------------------------------------------------------------------

namespace {

struct OutputWriter {
  explicit OutputWriter(const std::string& dir) : dir_(dir) {
    fs::create_directories(dir);
  }

  std::ofstream open(const std::string& name, ExperimentResult& result) {
    const std::string path = (fs::path(dir_) / name).string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    result.files_written.push_back(path);
    return out;
  }

  std::string dir_;
};

Dictionary build_dictionary(const ConfigFile& config, std::uint64_t seed,
                            std::string* extra_hash_lines = nullptr,
                            ClusteredDictionary* clustered_out = nullptr,
                            RankPerturbedDictionary* perturbed_out = nullptr) {
  const std::string kind = config.get("dictionary.kind", "gaussian");
  const Index n = config.get_int("dictionary.n", 20);
  const Index m = config.get_int("dictionary.m", 100);
  if (kind == "gaussian") return gaussian_unit_columns(n, m, seed);
  if (kind == "decaying") return decaying_spectrum(n, m, seed);
  if (kind == "rank_perturbed") {
    RankPerturbedDictionary rp = rank_perturbed(
        n, m, config.get_double("dictionary.epsilon", 0.01),
        config.get_int("dictionary.rank", 1), seed);
    if (extra_hash_lines)
      *extra_hash_lines += "perturbation_hash = " +
                           hash_matrix_hex(rp.perturbation) + "\n";
    Dictionary dict = rp.dictionary;
    if (perturbed_out) *perturbed_out = std::move(rp);
    return dict;
  }
  if (kind == "clustered") {
    ClusteredDictSpec spec;
    spec.n = n;
    spec.c = config.get_int("dictionary.clusters", 8);
    spec.cluster_sizes.assign(
        static_cast<std::size_t>(spec.c),
        config.get_int("dictionary.cluster_size", 6));
    spec.epsilon = config.get_double("dictionary.epsilon", 0.01);
    ClusteredDictionary cd = clustered(spec, seed);
    Dictionary dict = cd.dictionary;
    if (clustered_out) *clustered_out = std::move(cd);
    return dict;
  }
  throw InvalidSpecError("unknown dictionary kind: " + kind);
}

AmplitudeLaw law_from_config(const ConfigFile& config,
                             const std::string& section) {
  const std::string kind = config.get(section + ".law", "uniform_gapped");
  if (kind == "uniform_gapped")
    return AmplitudeLaw::uniform_gapped(
        config.get_double(section + ".law_low", 0.1),
        config.get_double(section + ".law_high", 0.5));
  if (kind == "gaussian_bimodal")
    return AmplitudeLaw::gaussian_bimodal(
        config.get_double(section + ".law_mean", 0.3),
        config.get_double(section + ".law_std", 0.1));
  throw InvalidSpecError("unknown amplitude law: " + kind);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string current;
  for (char ch : text) {
    if (ch == ',') {
      if (!trim(current).empty()) items.push_back(trim(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  if (!trim(current).empty()) items.push_back(trim(current));
  return items;
}

void write_manifest(OutputWriter& writer, ExperimentResult& result,
                    const ExperimentSpec& spec,
                    const std::vector<std::pair<std::string, std::string>>&
                        artifact_hashes) {
  std::ofstream out = writer.open("manifest.txt", result);
  out << "# sparselab experiment manifest\n";
  out << "# spec echo (canonical)\n";
  std::istringstream spec_lines(spec.config.canonical());
  std::string line;
  while (std::getline(spec_lines, line)) out << line << '\n';
  out << "# artifact hashes\n";
  for (const auto& [name, hash] : artifact_hashes)
    out << name << " = " << hash << '\n';
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid]
                           : 0.5 * (values[mid - 1] + values[mid]);
}

struct SweepCell {
  std::string engine;
  Index d = 0;
  Index count = 0;
  double s_acc = 0.0;
  double l_acc = 0.0;
  double mean_us = 0.0;
  double median_us = 0.0;
};

ExperimentResult run_recovery_sweep(const ExperimentSpec& spec) {
  ExperimentResult result;
  OutputWriter writer(spec.out_dir());
  const ConfigFile& config = spec.config;

  const std::uint64_t seed = config.get_seed("experiment.seed", 0);
  const int threads =
      static_cast<int>(config.get_int("experiment.threads", 1));
  const Dictionary phi =
      build_dictionary(config, derive_seed(seed, 'D'));
  const AmplitudeLaw law = law_from_config(config, "corpus");
  const Index d_min = config.get_int("corpus.d_min", 1);
  const Index d_max = config.get_int("corpus.d_max", 10);
  const Index trials = config.get_int("corpus.trials", 100);
  std::optional<double> noise;
  if (config.has("corpus.noise_std"))
    noise = config.get_double("corpus.noise_std", 0.0);

  const double ista_lambda = config.get_double("engines.ista_lambda", 1e-3);
  std::vector<EvalEngine> engines;
  for (const std::string& name :
       split_list(config.get("engines.list", "iht,ista,omp")))
    engines.push_back(make_engine(name, phi, ista_lambda));

  std::vector<TrialRecord> records;
  std::vector<SweepCell> cells;

  for (Index d = d_min; d <= d_max; ++d) {
    const Corpus corpus =
        make_corpus(phi, trials, d, d, law, derive_seed(seed, 1000 + d),
                    noise);
    for (const EvalEngine& engine : engines) {
      std::vector<TrialRecord> batch(static_cast<std::size_t>(trials));
      std::vector<Eigen::VectorXd> predictions(
          static_cast<std::size_t>(trials));
      parallel_for(trials, threads, [&](Index i) {
        const CorpusSample& sample =
            corpus.samples[static_cast<std::size_t>(i)];
        const auto start = std::chrono::steady_clock::now();
        const EngineOutput out = engine.run(sample.y.values, d);
        const auto stop = std::chrono::steady_clock::now();
        predictions[static_cast<std::size_t>(i)] = out.scores;
        TrialRecord& record = batch[static_cast<std::size_t>(i)];
        record.engine = engine.name;
        record.sample = static_cast<std::uint64_t>(i);
        record.d = d;
        record.iterations = out.iterations;
        record.residual = out.residual;
        record.wall_seconds =
            std::chrono::duration<double>(stop - start).count();
        const IndexSet top = top_d_support(out.scores, d);
        record.strict = same_support(top, sample.x.support);
        const IndexSet window =
            top_d_support(out.scores, std::min(phi.n(), phi.m()));
        Index overlap = 0;
        for (Index idx : sample.x.support)
          if (std::binary_search(window.begin(), window.end(), idx))
            ++overlap;
        record.loose =
            d > 0 ? static_cast<double>(overlap) / static_cast<double>(d)
                  : 1.0;
      });

      SweepCell cell;
      cell.engine = engine.name;
      cell.d = d;
      cell.count = trials;
      std::vector<double> times;
      for (const TrialRecord& record : batch) {
        cell.s_acc += record.strict ? 1.0 : 0.0;
        cell.l_acc += record.loose;
        times.push_back(record.wall_seconds * 1e6);
      }
      cell.s_acc /= static_cast<double>(trials);
      cell.l_acc /= static_cast<double>(trials);
      cell.mean_us = std::accumulate(times.begin(), times.end(), 0.0) /
                     static_cast<double>(times.size());
      cell.median_us = median(times);
      cells.push_back(cell);
      records.insert(records.end(), batch.begin(), batch.end());
    }
  }

  write_manifest(writer, result, spec,
                 {{"dictionary_hash", hash_matrix_hex(phi.entries)}});

  {
    std::ofstream out = writer.open("results.tsv", result);
    out << "# recovery sweep: one row per (engine, d)\n";
    out << "# columns: engine d count s_acc l_acc\n";
    for (const SweepCell& cell : cells)
      out << cell.engine << '\t' << cell.d << '\t' << cell.count << '\t'
          << format_double(cell.s_acc) << '\t' << format_double(cell.l_acc)
          << '\n';
  }
  {
    std::ofstream out = writer.open("trials.tsv", result);
    out << "# per-trial records (deterministic given the spec)\n";
    out << "# columns: engine sample d strict loose iterations residual\n";
    for (const TrialRecord& r : records)
      out << r.engine << '\t' << r.sample << '\t' << r.d << '\t'
          << (r.strict ? 1 : 0) << '\t' << format_double(r.loose) << '\t'
          << r.iterations << '\t' << format_double(r.residual) << '\n';
  }
  {
    std::ofstream out = writer.open("timing.tsv", result);
    out << "# wall-clock timing; excluded from the byte-identity contract\n";
    out << "# columns: engine d count mean_us median_us\n";
    for (const SweepCell& cell : cells)
      out << cell.engine << '\t' << cell.d << '\t' << cell.count << '\t'
          << format_double(cell.mean_us) << '\t'
          << format_double(cell.median_us) << '\n';
  }
  return result;
}

NetworkConfig network_config_from(const ConfigFile& config, Index n, Index m) {
  NetworkConfig net_config;
  net_config.input_dim = n;
  net_config.output_dim = m;
  net_config.depth = static_cast<int>(config.get_int("network.depth", 20));
  net_config.hidden_width = config.get_int("network.hidden", 0);
  net_config.residual = config.get_int("network.residual", 1) != 0;
  net_config.activation = config.get("network.activation", "relu") == "helu"
                              ? Activation::helu
                              : Activation::relu;
  net_config.helu_sigma = config.get_double("network.helu_sigma", 0.1);
  net_config.loss = config.get("network.loss", "multilabel") == "quadratic"
                        ? LossKind::quadratic
                        : LossKind::multilabel;
  net_config.batch_norm = config.get_int("network.batch_norm", 1) != 0;
  return net_config;
}

TrainConfig train_config_from(const ConfigFile& config, std::uint64_t seed) {
  TrainConfig train_config;
  train_config.batch_size =
      static_cast<int>(config.get_int("training.batch_size", 250));
  train_config.initial_lr = config.get_double("training.initial_lr", 0.01);
  train_config.lr_drop_factor =
      config.get_double("training.lr_drop_factor", 0.1);
  train_config.drop_period_epochs =
      static_cast<int>(config.get_int("training.drop_period_epochs", 50));
  train_config.total_epochs =
      static_cast<int>(config.get_int("training.total_epochs", 150));
  train_config.momentum = config.get_double("training.momentum", 0.9);
  train_config.weight_decay =
      config.get_double("training.weight_decay", 0.0001);
  train_config.seed = config.get_seed("training.seed", derive_seed(seed, 'T'));
  return train_config;
}

ExperimentResult run_train(const ExperimentSpec& spec) {
  ExperimentResult result;
  OutputWriter writer(spec.out_dir());
  const ConfigFile& config = spec.config;
  const std::uint64_t seed = config.get_seed("experiment.seed", 0);

  const Dictionary phi = build_dictionary(config, derive_seed(seed, 'D'));
  const AmplitudeLaw law = law_from_config(config, "corpus");
  std::optional<double> noise;
  if (config.has("corpus.noise_std"))
    noise = config.get_double("corpus.noise_std", 0.0);
  const Corpus corpus = make_corpus(
      phi, config.get_int("corpus.count", 50000),
      config.get_int("corpus.d_min", 1), config.get_int("corpus.d_max", 10),
      law, derive_seed(seed, 'C'), noise);

  NetworkConfig net_config = network_config_from(config, phi.n(), phi.m());
  const TrainConfig train_config = train_config_from(config, seed);

  Network net = init_network(net_config, derive_seed(seed, 'N'));
  const TrainingSet data = to_training_set(corpus, net_config.loss);
  const TrainOutcome outcome = train(net, data, train_config);

  const std::string checkpoint_path =
      (fs::path(spec.out_dir()) / "model.ckpt").string();
  save_network(checkpoint_path, net);
  result.files_written.push_back(checkpoint_path);

  write_manifest(writer, result, spec,
                 {{"dictionary_hash", hash_matrix_hex(phi.entries)},
                  {"checkpoint_hash", network_hash(net)}});
  {
    std::ofstream out = writer.open("trace.tsv", result);
    out << "# training trace\n# columns: epoch mean_loss strict_accuracy\n";
    for (std::size_t e = 0; e < outcome.epochs.size(); ++e)
      out << e << '\t' << format_double(outcome.epochs[e].mean_loss) << '\t'
          << format_double(outcome.epochs[e].strict_accuracy) << '\n';
  }
  {
    std::ofstream out = writer.open("dictionary.txt", result);
    write_matrix(out, phi.entries);
  }
  return result;
}

ExperimentResult run_ablation(const ExperimentSpec& spec) {
  ExperimentResult result;
  OutputWriter writer(spec.out_dir());
  const ConfigFile& config = spec.config;
  const std::uint64_t seed = config.get_seed("experiment.seed", 0);

  const Dictionary phi = build_dictionary(config, derive_seed(seed, 'D'));
  const AmplitudeLaw law = law_from_config(config, "corpus");
  const Corpus train_corpus = make_corpus(
      phi, config.get_int("corpus.count", 20000),
      config.get_int("corpus.d_min", 1), config.get_int("corpus.d_max", 8),
      law, derive_seed(seed, 'C'));
  const Corpus test_corpus = make_corpus(
      phi, config.get_int("corpus.test_count", 2000),
      config.get_int("corpus.d_min", 1), config.get_int("corpus.d_max", 8),
      law, derive_seed(seed, 'E'));

  const TrainConfig train_config = train_config_from(config, seed);
  const NetworkConfig base = network_config_from(config, phi.n(), phi.m());

  struct Variant {
    std::string name;
    NetworkConfig config;
  };
  std::vector<Variant> variants;
  variants.push_back({"baseline", base});
  {
    NetworkConfig c = base;
    c.residual = false;
    variants.push_back({"no_residual", c});
  }
  {
    NetworkConfig c = base;
    c.activation = Activation::helu;
    variants.push_back({"helu", c});
  }
  {
    NetworkConfig c = base;
    c.loss = LossKind::quadratic;
    variants.push_back({"quadratic_loss", c});
  }

  std::ofstream out = writer.open("results.tsv", result);
  out << "# ablation study: one row per (variant, d)\n";
  out << "# columns: variant d count s_acc l_acc\n";
  std::vector<std::pair<std::string, std::string>> hashes = {
      {"dictionary_hash", hash_matrix_hex(phi.entries)}};

  for (const Variant& variant : variants) {
    Network net = init_network(variant.config, derive_seed(seed, 'N'));
    const TrainingSet data = to_training_set(train_corpus, variant.config.loss);
    train(net, data, train_config);
    hashes.emplace_back("checkpoint_hash_" + variant.name, network_hash(net));

    std::vector<Eigen::VectorXd> predictions;
    predictions.reserve(static_cast<std::size_t>(test_corpus.count()));
    for (const CorpusSample& sample : test_corpus.samples) {
      const Eigen::MatrixXd p = forward_eval(net, sample.y.values);
      predictions.push_back(p.col(0));
    }
    const MetricReport report = evaluate_predictions(predictions, test_corpus);
    for (const auto& [d, slice] : report.per_d)
      out << variant.name << '\t' << d << '\t' << slice.count << '\t'
          << format_double(slice.s_acc) << '\t' << format_double(slice.l_acc)
          << '\n';
  }
  write_manifest(writer, result, spec, hashes);
  return result;
}

ExperimentResult run_cor3_study(const ExperimentSpec& spec) {
  ExperimentResult result;
  OutputWriter writer(spec.out_dir());
  const ConfigFile& config = spec.config;
  const std::uint64_t seed = config.get_seed("experiment.seed", 0);
  const Index trials = config.get_int("study.trials", 100);
  const Index n = config.get_int("dictionary.n", 10);
  const Index m = config.get_int("dictionary.m", 30);
  const double epsilon = config.get_double("dictionary.epsilon", 0.01);
  const Index rank = config.get_int("dictionary.rank", 1);
  const AmplitudeLaw law = law_from_config(config, "corpus");

  std::ofstream out = writer.open("results.tsv", result);
  out << "# rank-annihilation study, 1-sparse recovery per seed\n";
  out << "# columns: trial delta2_pre delta2_post iht_success wiht_success\n";

  Index iht_wins = 0, wiht_wins = 0, delta_drops = 0;
  for (Index trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = derive_seed(seed, 7000 + trial);
    const RankPerturbedDictionary rp =
        rank_perturbed(n, m, epsilon, rank, trial_seed);
    const Cor3Transform transform = cor3_transform(
        rp.dictionary, rp.perturbation, rp.epsilon, rp.norm_scales);

    // delta_2 before and after the transform (unit columns restored for
    // the comparison)
    const double pre = delta_k_exhaustive(rp.dictionary, 2).delta;
    Eigen::MatrixXd transformed =
        transform.w * rp.dictionary.entries * transform.d.asDiagonal();
    for (Index j = 0; j < transformed.cols(); ++j)
      transformed.col(j) /= transformed.col(j).norm();
    const double post =
        delta_k_exhaustive(Dictionary{transformed, true}, 2).delta;

    RandomStream rng = RandomStream(trial_seed).substream('x');
    Eigen::VectorXd values = Eigen::VectorXd::Zero(m);
    values[static_cast<Index>(rng.next_index(
        static_cast<std::uint64_t>(m)))] = law.draw(rng);
    const SparseSignal truth = SparseSignal::from_values(values);
    const Observation y{rp.dictionary.entries * values};

    SolverConfig solver_config;
    solver_config.k = 1;
    const bool iht_ok = same_support(
        iht(y, rp.dictionary, solver_config).estimate.support, truth.support);
    const bool wiht_ok = same_support(
        weighted_iht(y, rp.dictionary, transform.w, transform.d, solver_config)
            .estimate.support,
        truth.support);

    iht_wins += iht_ok;
    wiht_wins += wiht_ok;
    delta_drops += (post < pre);
    out << trial << '\t' << format_double(pre) << '\t' << format_double(post)
        << '\t' << (iht_ok ? 1 : 0) << '\t' << (wiht_ok ? 1 : 0) << '\n';
  }
  out << "# summary: iht " << iht_wins << "/" << trials << ", weighted "
      << wiht_wins << "/" << trials << ", delta2 drops " << delta_drops << "/"
      << trials << '\n';
  write_manifest(writer, result, spec, {});
  return result;
}

ExperimentResult run_aiht_study(const ExperimentSpec& spec) {
  ExperimentResult result;
  OutputWriter writer(spec.out_dir());
  const ConfigFile& config = spec.config;
  const std::uint64_t seed = config.get_seed("experiment.seed", 0);
  const Index trials = config.get_int("study.trials", 200);
  const Index d = config.get_int("study.d", 3);
  const Index tau = config.get_int("study.tau", 30);
  const Index t_detail = config.get_int("study.t_detail", 30);
  const AmplitudeLaw law = law_from_config(config, "corpus");

  ClusteredDictSpec cd_spec;
  cd_spec.n = config.get_int("dictionary.n", 24);
  cd_spec.c = config.get_int("dictionary.clusters", 8);
  cd_spec.cluster_sizes.assign(
      static_cast<std::size_t>(cd_spec.c),
      config.get_int("dictionary.cluster_size", 6));
  cd_spec.epsilon = config.get_double("dictionary.epsilon", 0.01);

  std::ofstream out = writer.open("results.tsv", result);
  out << "# adaptive-IHT study on the clustered family\n";
  out << "# columns: trial phase1_match aiht_success iht_success\n";

  Index phase1_hits = 0, aiht_hits = 0, iht_hits = 0;
  for (Index trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = derive_seed(seed, 9000 + trial);
    const ClusteredDictionary cd = clustered(cd_spec, trial_seed);
    const Index m = cd_spec.total_columns();

    RandomStream rng = RandomStream(trial_seed).substream('x');
    const IndexSet support = rng.sample_without_replacement(m, d);
    Eigen::VectorXd values = Eigen::VectorXd::Zero(m);
    for (Index i : support) values[i] = law.draw(rng);
    const SparseSignal truth = SparseSignal::from_values(values);
    const Observation y{cd.dictionary.entries * values};
    const IndexSet true_clusters = cluster_support(truth, cd_spec);
    const Index k_c = static_cast<Index>(true_clusters.size());

    const AihtSchedule schedule =
        build_cluster_schedule(cd, d, k_c, tau, t_detail);
    const RecoveryResult aiht_result = run_aiht(y, schedule);
    const bool aiht_ok = same_support(aiht_result.estimate.support,
                                      truth.support);

    // cluster phase in isolation for the phase-1 success indicator
    AihtSchedule phase1 = schedule;
    phase1.layers.resize(static_cast<std::size_t>(schedule.phase_boundary));
    phase1.decoder.clear();
    phase1.refit_dictionary.reset();
    const RecoveryResult z = run_aiht(y, phase1);
    const bool phase1_ok = same_support(z.estimate.support, true_clusters);

    SolverConfig solver_config;
    solver_config.k = d;
    const bool iht_ok = same_support(
        iht(y, cd.dictionary, solver_config).estimate.support, truth.support);

    phase1_hits += phase1_ok;
    aiht_hits += aiht_ok;
    iht_hits += iht_ok;
    out << trial << '\t' << (phase1_ok ? 1 : 0) << '\t' << (aiht_ok ? 1 : 0)
        << '\t' << (iht_ok ? 1 : 0) << '\n';
  }
  out << "# summary: phase1 " << phase1_hits << "/" << trials << ", aiht "
      << aiht_hits << "/" << trials << ", iht " << iht_hits << "/" << trials
      << '\n';
  write_manifest(writer, result, spec, {});
  return result;
}

ExperimentResult run_stereo_study(const ExperimentSpec& spec) {
  ExperimentResult result;
  OutputWriter writer(spec.out_dir());
  const ConfigFile& config = spec.config;
  const std::uint64_t seed = config.get_seed("experiment.seed", 0);

  const Index q = config.get_int("stereo.q", 10);
  const Index points = config.get_int("stereo.points", 2000);
  OutlierLaw law;
  law.count_min = config.get_int("stereo.outliers_min", 3);
  law.count_max = config.get_int("stereo.outliers_max", 3);
  law.magnitude_low = config.get_double("stereo.magnitude_low", 0.2);
  law.magnitude_high = config.get_double("stereo.magnitude_high", 1.0);

  const LightingRig rig = make_rig(q, derive_seed(seed, 'L'));
  const Scene scene = synthesize_scene(points, rig, law, derive_seed(seed, 'S'));
  const NullspaceSystem system = nullspace_dictionary(rig);

  std::ofstream out = writer.open("results.tsv", result);
  out << "# photometric stereo study\n";
  out << "# columns: engine mean_error_deg\n";

  const StereoResult naive = naive_least_squares(scene, rig);
  out << "naive_ls\t" << format_double(naive.mean_angular_error_deg) << '\n';
  const StereoResult rnd4 = random4_baseline(scene, rig, derive_seed(seed, 'R'));
  out << "rnd4\t" << format_double(rnd4.mean_angular_error_deg) << '\n';
  const StereoResult oracle =
      estimate_normals(scene, rig, oracle_engine(scene));
  out << "oracle\t" << format_double(oracle.mean_angular_error_deg) << '\n';

  std::vector<std::pair<std::string, std::string>> hashes = {
      {"rig_hash", hash_matrix_hex(rig.directions)}};

  for (const std::string& name :
       split_list(config.get("engines.list", "omp"))) {
    SupportEngine engine;
    if (name.rfind("net:", 0) == 0) {
      Network net;
      try {
        net = load_network(name.substr(4));
      } catch (const std::exception& err) {
        throw MissingCheckpointError("stereo engine: " +
                                     std::string(err.what()));
      }
      hashes.emplace_back("checkpoint_hash", network_hash(net));
      auto shared = std::make_shared<Network>(std::move(net));
      engine = [shared](Index, const Eigen::VectorXd& y) {
        return forward_eval(*shared, y).col(0).eval();
      };
    } else if (name == "omp") {
      const Dictionary phi = system.phi;
      const Index k = law.count_max;
      engine = [phi, k](Index, const Eigen::VectorXd& y) {
        return omp(Observation{y}, phi, k).estimate.values.cwiseAbs().eval();
      };
    } else {
      throw InvalidSpecError("unknown stereo engine: " + name);
    }
    const StereoResult run = estimate_normals(scene, rig, engine);
    out << name << '\t' << format_double(run.mean_angular_error_deg) << '\n';
  }

  write_manifest(writer, result, spec, hashes);
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::string kind = spec.kind();
  if (kind == "recovery_sweep") return run_recovery_sweep(spec);
  if (kind == "train") return run_train(spec);
  if (kind == "ablation") return run_ablation(spec);
  if (kind == "cor3_study") return run_cor3_study(spec);
  if (kind == "aiht_study") return run_aiht_study(spec);
  if (kind == "stereo_study") return run_stereo_study(spec);
  throw InvalidSpecError("unknown experiment kind: " + kind);
}

std::vector<std::string> emit_plot_data(const std::string& results_dir,
                                        const std::string& out_dir) {
  const std::string results_path =
      (fs::path(results_dir) / "results.tsv").string();
  std::ifstream in(results_path);
  if (!in)
    throw std::runtime_error("emit_plot_data: cannot open " + results_path);
  fs::create_directories(out_dir);

  // rows: label d count s l  (sweep/ablation shape)
  struct Row {
    std::string label;
    Index d;
    double s, l;
  };
  std::vector<Row> rows;
  std::vector<std::string> labels;
  std::vector<Index> ds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    Row row;
    Index count;
    if (!(fields >> row.label >> row.d >> count >> row.s >> row.l)) continue;
    rows.push_back(row);
    if (std::find(labels.begin(), labels.end(), row.label) == labels.end())
      labels.push_back(row.label);
    if (std::find(ds.begin(), ds.end(), row.d) == ds.end())
      ds.push_back(row.d);
  }
  std::sort(ds.begin(), ds.end());

  std::vector<std::string> written;
  for (const char* metric : {"s_acc", "l_acc"}) {
    const std::string path =
        (fs::path(out_dir) / (std::string("plot_") + metric + ".tsv"))
            .string();
    std::ofstream out(path);
    out << "# accuracy-vs-d curves (" << metric << ")\n";
    out << "# columns: d";
    for (const std::string& label : labels) out << ' ' << label;
    out << '\n';
    for (Index d : ds) {
      out << d;
      for (const std::string& label : labels) {
        double value = std::nan("");
        for (const Row& row : rows)
          if (row.label == label && row.d == d)
            value = std::string_view(metric) == "s_acc" ? row.s : row.l;
        out << '\t' << format_double(value);
      }
      out << '\n';
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace sparselab
