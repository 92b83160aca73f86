#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparselab/net.hpp"
#include "sparselab/rng.hpp"
#include "sparselab/types.hpp"

namespace sparselab {

/// Nonzero-amplitude distribution for synthetic signals.
/// uniform_gapped: uniform on +/-[low, high] (the near-zero band excluded);
/// gaussian_bimodal: N(+mean, std) or N(-mean, std) with equal probability.
struct AmplitudeLaw {
  enum class Kind { uniform_gapped, gaussian_bimodal } kind =
      Kind::uniform_gapped;
  double low = 0.1;    // uniform_gapped band
  double high = 0.5;
  double mean = 0.3;   // gaussian_bimodal
  double std_dev = 0.1;

  static AmplitudeLaw uniform_gapped(double low, double high);
  static AmplitudeLaw gaussian_bimodal(double mean, double std_dev);
  double draw(RandomStream& rng) const;
  std::string describe() const;
  void validate() const;
};

struct CorpusSample {
  SparseSignal x;
  Observation y;
  LabelVector labels;
};

struct Corpus {
  std::vector<CorpusSample> samples;
  std::string dictionary_hash;
  AmplitudeLaw law;
  Index d_min = 0;
  Index d_max = 0;
  std::uint64_t seed = 0;
  std::optional<double> noise_std;

  Index count() const { return static_cast<Index>(samples.size()); }
};

/// Per-support-size accuracy slice plus the aggregates.
struct MetricReport {
  double s_acc = 0.0;
  double l_acc = 0.0;
  struct PerD {
    Index count = 0;
    double s_acc = 0.0;
    double l_acc = 0.0;
  };
  std::map<Index, PerD> per_d;
};

/// Samples (x*, y = Phi x* [+ noise], s*) with support size uniform in
/// [d_min, d_max], support uniform over C(m, d), amplitudes from `law`.
/// Deterministic given the seed; sample i draws from substream i.
Corpus make_corpus(const Dictionary& phi, Index count, Index d_min,
                   Index d_max, const AmplitudeLaw& law, std::uint64_t seed,
                   std::optional<double> noise_std = std::nullopt);

/// Indices of the d largest scores, ties to the lowest index. Callers
/// scoring solver estimates pass magnitudes.
IndexSet top_d_support(const Eigen::VectorXd& scores, Index d);

/// Fraction of samples whose top-d predicted set equals the true support.
double strict_accuracy(const std::vector<Eigen::VectorXd>& predictions,
                       const Corpus& truths);

/// Mean over samples of |S_gt intersect S_pred(window)| / d. The window
/// defaults to n (every support below n is unique by the spark argument).
double loose_accuracy(const std::vector<Eigen::VectorXd>& predictions,
                      const Corpus& truths, Index window = 0);

MetricReport evaluate_predictions(
    const std::vector<Eigen::VectorXd>& predictions, const Corpus& truths,
    Index window = 0);

/// Network training view: inputs are observations; targets are binary
/// labels (multilabel) or the coefficients themselves (quadratic).
TrainingSet to_training_set(const Corpus& corpus, LossKind loss);

/// Corpus files keep per-sample records only (d, support, amplitudes);
/// observations are re-derived on load. `verify` additionally recomputes
/// every record from the stored seed and rejects mismatches.
void save_corpus(const std::string& path, const Corpus& corpus);
Corpus load_corpus(const std::string& path, const Dictionary& phi,
                   bool verify = false);

}  // namespace sparselab
