#include <doctest.h>

#include <filesystem>

#include "sparselab/dictgen.hpp"
#include "sparselab/harness.hpp"
#include "sparselab/net.hpp"
#include "sparselab/textio.hpp"

using namespace sparselab;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("/tmp/sparselab_harness") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

ExperimentSpec sweep_spec(const std::string& out, int threads = 1) {
  ConfigFile config = ConfigFile::parse_text(R"(
[experiment]
kind = recovery_sweep
seed = 7
[dictionary]
kind = gaussian
n = 10
m = 24
[corpus]
d_min = 1
d_max = 3
trials = 25
[engines]
list = iht,omp
)");
  config.set("experiment.out", out);
  config.set("experiment.threads", std::to_string(threads));
  return ExperimentSpec{config};
}

}  // namespace

TEST_CASE("config file parsing") {
  const ConfigFile config = ConfigFile::parse_text(R"(
top = 1
# a comment
[alpha]
key = hello world   # trailing comment
number = 2.5
[beta]
count = 42
)");
  CHECK(config.require("top") == "1");
  CHECK(config.get("alpha.key", "") == "hello world");
  CHECK(config.get_double("alpha.number", 0.0) == 2.5);
  CHECK(config.get_int("beta.count", 0) == 42);
  CHECK(config.get("missing.key", "fallback") == "fallback");
  CHECK_THROWS_AS(config.require("missing.key"), InvalidSpecError);
  CHECK_THROWS_AS(ConfigFile::parse_text("not a key value line"),
                  InvalidSpecError);

  // canonical form is sorted and stable
  const ConfigFile reparsed = ConfigFile::parse_text(config.canonical());
  CHECK(reparsed.canonical() == config.canonical());
}

TEST_CASE("engine construction and errors") {
  const Dictionary phi = gaussian_unit_columns(10, 20, 3);
  for (const char* name : {"iht", "ista", "omp"}) {
    const EvalEngine engine = make_engine(name, phi, 1e-3);
    const EngineOutput out = engine.run(phi.entries.col(4), 1);
    CHECK(out.scores.size() == 20);
    CHECK(top_d_support(out.scores, 1) == IndexSet{4});
  }
  CHECK_THROWS_AS(make_engine("sbl", phi, 1e-3), InvalidSpecError);
  CHECK_THROWS_AS(make_engine("net:/nonexistent/path.ckpt", phi, 1e-3),
                  MissingCheckpointError);
}

TEST_CASE("network engine rejects mismatched checkpoints") {
  NetworkConfig config;
  config.input_dim = 4;
  config.output_dim = 6;
  config.depth = 2;
  const Network net = init_network(config, 1);
  const std::string path = "/tmp/sparselab_engine_mismatch.ckpt";
  save_network(path, net);
  const Dictionary phi = gaussian_unit_columns(10, 20, 3);
  CHECK_THROWS_AS(make_engine("net:" + path, phi, 1e-3), InvalidSpecError);
}

TEST_CASE("recovery sweep writes deterministic tables") {
  const std::string out_a = fresh_dir("sweep_a");
  const ExperimentResult first = run_experiment(sweep_spec(out_a));
  CHECK(first.files_written.size() == 4);
  for (const std::string& file : first.files_written)
    CHECK(fs::exists(file));

  // one row per (engine, d)
  const std::string results = read_file(out_a + "/results.tsv");
  Index rows = 0;
  for (const char ch : results)
    if (ch == '\n') ++rows;
  CHECK(rows == 2 + 2 * 3);  // two header comments + engines x d

  // replay into a second directory: identical tables, independent of the
  // worker count
  const std::string out_b = fresh_dir("sweep_b");
  run_experiment(sweep_spec(out_b, 4));
  CHECK(read_file(out_a + "/results.tsv") == read_file(out_b + "/results.tsv"));
  CHECK(read_file(out_a + "/trials.tsv") == read_file(out_b + "/trials.tsv"));

  // manifest echoes the spec and the dictionary hash
  const std::string manifest = read_file(out_a + "/manifest.txt");
  CHECK(manifest.find("experiment.kind = recovery_sweep") !=
        std::string::npos);
  CHECK(manifest.find("dictionary_hash = ") != std::string::npos);
}

TEST_CASE("emit_plot_data produces per-metric curve files") {
  const std::string out = fresh_dir("sweep_plot");
  run_experiment(sweep_spec(out));
  const std::string plots = fresh_dir("sweep_plot_out");
  const std::vector<std::string> files = emit_plot_data(out, plots);
  REQUIRE(files.size() == 2);

  const std::string s_acc = read_file(files[0]);
  CHECK(s_acc.find("# columns: d iht omp") != std::string::npos);
  Index data_rows = 0;
  std::istringstream lines(s_acc);
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#') {
      ++data_rows;
      // numeric round trip
      std::istringstream fields(line);
      double d, a, b;
      CHECK((fields >> d >> a >> b));
    }
  CHECK(data_rows == 3);  // one per d
}

TEST_CASE("train experiment emits a loadable checkpoint") {
  const std::string out = fresh_dir("train");
  ConfigFile config = ConfigFile::parse_text(R"(
[experiment]
kind = train
seed = 11
[dictionary]
kind = gaussian
n = 8
m = 16
[corpus]
count = 400
d_min = 1
d_max = 3
[network]
depth = 4
hidden = 12
[training]
batch_size = 32
total_epochs = 3
initial_lr = 0.05
)");
  config.set("experiment.out", out);
  const ExperimentResult result = run_experiment(ExperimentSpec{config});
  CHECK(fs::exists(out + "/model.ckpt"));
  CHECK(fs::exists(out + "/trace.tsv"));
  const Network net = load_network(out + "/model.ckpt");
  CHECK(net.config.depth == 4);

  // the emitted checkpoint plugs straight into a sweep engine
  const Dictionary phi = load_dictionary(out + "/dictionary.txt");
  const EvalEngine engine = make_engine("net:" + out + "/model.ckpt", phi, 0.0);
  CHECK(engine.run(phi.entries.col(0), 1).scores.size() == 16);
}

TEST_CASE("cor3 study emits per-trial rows and a summary") {
  const std::string out = fresh_dir("cor3");
  ConfigFile config = ConfigFile::parse_text(R"(
[experiment]
kind = cor3_study
seed = 3
[dictionary]
n = 10
m = 30
epsilon = 0.01
rank = 1
[study]
trials = 10
)");
  config.set("experiment.out", out);
  run_experiment(ExperimentSpec{config});
  const std::string results = read_file(out + "/results.tsv");
  CHECK(results.find("# summary:") != std::string::npos);
  CHECK(results.find("delta2 drops 10/10") != std::string::npos);
}

TEST_CASE("aiht study emits success summaries") {
  const std::string out = fresh_dir("aiht");
  ConfigFile config = ConfigFile::parse_text(R"(
[experiment]
kind = aiht_study
seed = 5
[dictionary]
n = 24
clusters = 8
cluster_size = 6
epsilon = 0.01
[study]
trials = 10
d = 3
tau = 30
t_detail = 3000
)");
  config.set("experiment.out", out);
  run_experiment(ExperimentSpec{config});
  const std::string results = read_file(out + "/results.tsv");
  CHECK(results.find("# summary: phase1 10/10, aiht 10/10, iht 0/10") !=
        std::string::npos);
}

TEST_CASE("stereo study compares engines") {
  const std::string out = fresh_dir("stereo");
  ConfigFile config = ConfigFile::parse_text(R"(
[experiment]
kind = stereo_study
seed = 9
[stereo]
q = 10
points = 100
outliers_min = 3
outliers_max = 3
[engines]
list = omp
)");
  config.set("experiment.out", out);
  run_experiment(ExperimentSpec{config});
  const std::string results = read_file(out + "/results.tsv");
  CHECK(results.find("naive_ls\t") != std::string::npos);
  CHECK(results.find("rnd4\t") != std::string::npos);
  CHECK(results.find("oracle\t") != std::string::npos);
  CHECK(results.find("omp\t") != std::string::npos);
}

TEST_CASE("invalid specs are rejected") {
  ConfigFile config;
  config.set("experiment.kind", "nonsense");
  config.set("experiment.out", "/tmp/sparselab_harness/none");
  CHECK_THROWS_AS(run_experiment(ExperimentSpec{config}), InvalidSpecError);

  ConfigFile missing;
  missing.set("experiment.kind", "recovery_sweep");
  CHECK_THROWS_AS(ExperimentSpec{missing}.validate(), InvalidSpecError);
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<int> counts(500, 0);
  parallel_for(500, 4, [&](Index i) { counts[static_cast<std::size_t>(i)]++; });
  for (int c : counts) CHECK(c == 1);
}
