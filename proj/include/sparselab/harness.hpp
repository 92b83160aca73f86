#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparselab/datagen.hpp"
#include "sparselab/dictgen.hpp"
#include "sparselab/net.hpp"
#include "sparselab/types.hpp"

namespace sparselab {

class InvalidSpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingCheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sectioned key = value configuration ('#' starts a comment). Keys are
/// addressed as "section.key"; keys before any section header live in "".
class ConfigFile {
 public:
  static ConfigFile parse_text(const std::string& text);
  static ConfigFile parse_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  void set(const std::string& key, const std::string& value);

  /// Canonical text form (sorted keys) echoed into manifests.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> values_;
};

/// One experiment cell outcome. Wall time is reported separately from the
/// deterministic tables.
struct TrialRecord {
  std::string engine;
  std::uint64_t sample = 0;
  Index d = 0;
  bool strict = false;
  double loose = 0.0;  // in [0, 1]
  double wall_seconds = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct EngineOutput {
  Eigen::VectorXd scores;  // length m, higher = more likely in the support
  int iterations = 0;
  double residual = 0.0;
};

/// Support-scoring engine over a fixed dictionary: maps (y, d) to scores
/// ranking coordinates by likelihood of being in the support. Engines are
/// pure and safe to call from several threads.
struct EvalEngine {
  std::string name;
  std::function<EngineOutput(const Eigen::VectorXd& y, Index d)> run;
};

/// Builds a named engine over `phi`. Names: iht, ista, omp, net:<path>.
/// ISTA uses `ista_lambda`; net engines load the checkpoint eagerly and
/// throw MissingCheckpointError when it cannot be read.
EvalEngine make_engine(const std::string& name, const Dictionary& phi,
                       double ista_lambda);

struct ExperimentSpec {
  ConfigFile config;

  std::string kind() const { return config.require("experiment.kind"); }
  std::string out_dir() const { return config.require("experiment.out"); }
  void validate() const;
};

struct ExperimentResult {
  std::vector<std::string> files_written;
};

/// Executes the experiment described by the spec and writes a manifest,
/// deterministic result tables, and a timing table into the output
/// directory. Replaying the same spec reproduces the result tables byte
/// for byte (timing excluded).
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Reads results.tsv from a results directory and writes plot-ready files
/// (one per figure analogue) with documented columns.
std::vector<std::string> emit_plot_data(const std::string& results_dir,
                                        const std::string& out_dir);

/// Maps a worker function over [0, count) with `threads` workers; results
/// are written by index so the outcome is independent of scheduling.
void parallel_for(Index count, int threads,
                  const std::function<void(Index)>& body);

}  // namespace sparselab
