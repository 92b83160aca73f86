#include "sparselab/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sparselab/textio.hpp"

namespace sparselab {

AmplitudeLaw AmplitudeLaw::uniform_gapped(double low, double high) {
  AmplitudeLaw law;
  law.kind = Kind::uniform_gapped;
  law.low = low;
  law.high = high;
  law.validate();
  return law;
}

AmplitudeLaw AmplitudeLaw::gaussian_bimodal(double mean, double std_dev) {
  AmplitudeLaw law;
  law.kind = Kind::gaussian_bimodal;
  law.mean = mean;
  law.std_dev = std_dev;
  law.validate();
  return law;
}

void AmplitudeLaw::validate() const {
  if (kind == Kind::uniform_gapped && (low <= 0.0 || high <= low))
    throw std::invalid_argument("AmplitudeLaw: require 0 < low < high");
  if (kind == Kind::gaussian_bimodal && std_dev <= 0.0)
    throw std::invalid_argument("AmplitudeLaw: require std_dev > 0");
}

double AmplitudeLaw::draw(RandomStream& rng) const {
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  if (kind == Kind::uniform_gapped) return sign * rng.uniform(low, high);
  return sign * mean + std_dev * rng.normal();
}

std::string AmplitudeLaw::describe() const {
  std::ostringstream out;
  if (kind == Kind::uniform_gapped)
    out << "uniform_gapped " << format_double(low) << ' '
        << format_double(high);
  else
    out << "gaussian_bimodal " << format_double(mean) << ' '
        << format_double(std_dev);
  return out.str();
}

namespace {

CorpusSample make_sample(const Dictionary& phi, Index d_min, Index d_max,
                         const AmplitudeLaw& law,
                         std::optional<double> noise_std, RandomStream sub) {
  const Index d =
      d_min + static_cast<Index>(sub.next_index(
                  static_cast<std::uint64_t>(d_max - d_min) + 1));
  const IndexSet support = sub.sample_without_replacement(phi.m(), d);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(phi.m());
  for (Index i : support) values[i] = law.draw(sub);

  CorpusSample sample;
  sample.x = SparseSignal::from_values(values);
  sample.y.values = phi.entries * values;
  if (noise_std)
    sample.y.values += *noise_std * sub.gaussian_vector(phi.n());
  sample.labels = labels_from_signal(sample.x);
  return sample;
}

}  // namespace

Corpus make_corpus(const Dictionary& phi, Index count, Index d_min,
                   Index d_max, const AmplitudeLaw& law, std::uint64_t seed,
                   std::optional<double> noise_std) {
  law.validate();
  if (d_min < 0 || d_max < d_min)
    throw std::invalid_argument("make_corpus: bad d range");
  if (d_max >= phi.n())
    throw std::invalid_argument(
        "make_corpus: d must stay below n for unique sparse solutions");

  Corpus corpus;
  corpus.dictionary_hash = hash_matrix_hex(phi.entries);
  corpus.law = law;
  corpus.d_min = d_min;
  corpus.d_max = d_max;
  corpus.seed = seed;
  corpus.noise_std = noise_std;

  const RandomStream base(seed);
  corpus.samples.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i)
    corpus.samples.push_back(
        make_sample(phi, d_min, d_max, law, noise_std,
                    base.substream(static_cast<std::uint64_t>(i))));
  return corpus;
}

IndexSet top_d_support(const Eigen::VectorXd& scores, Index d) {
  if (d < 0 || d > scores.size())
    throw std::invalid_argument("top_d_support: require 0 <= d <= m");
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  });
  IndexSet out(order.begin(), order.begin() + d);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct SampleScore {
  bool strict = false;
  double loose = 1.0;
};

SampleScore score_sample(const Eigen::VectorXd& prediction,
                         const CorpusSample& sample, Index window) {
  SampleScore score;
  const Index d = sample.x.cardinality();
  if (d == 0) {
    score.strict = true;
    return score;
  }
  const IndexSet top_d = top_d_support(prediction, d);
  score.strict = same_support(top_d, sample.x.support);

  const IndexSet top_w = top_d_support(prediction, std::min(window, prediction.size()));
  Index overlap = 0;
  for (Index i : sample.x.support)
    if (std::binary_search(top_w.begin(), top_w.end(), i)) ++overlap;
  score.loose = static_cast<double>(overlap) / static_cast<double>(d);
  return score;
}

Index default_window(const Corpus& truths, Index window) {
  if (window > 0) return window;
  if (truths.samples.empty()) return 0;
  return truths.samples.front().y.dimension();
}

}  // namespace

double strict_accuracy(const std::vector<Eigen::VectorXd>& predictions,
                       const Corpus& truths) {
  return evaluate_predictions(predictions, truths).s_acc;
}

double loose_accuracy(const std::vector<Eigen::VectorXd>& predictions,
                      const Corpus& truths, Index window) {
  return evaluate_predictions(predictions, truths, window).l_acc;
}

MetricReport evaluate_predictions(
    const std::vector<Eigen::VectorXd>& predictions, const Corpus& truths,
    Index window) {
  if (static_cast<Index>(predictions.size()) != truths.count())
    throw std::invalid_argument("evaluate_predictions: length mismatch");
  MetricReport report;
  if (truths.count() == 0) return report;

  const Index w = default_window(truths, window);
  double strict_sum = 0.0, loose_sum = 0.0;
  std::map<Index, std::pair<double, double>> sums;
  std::map<Index, Index> counts;

  for (Index i = 0; i < truths.count(); ++i) {
    const CorpusSample& sample = truths.samples[static_cast<std::size_t>(i)];
    const SampleScore score =
        score_sample(predictions[static_cast<std::size_t>(i)], sample, w);
    strict_sum += score.strict ? 1.0 : 0.0;
    loose_sum += score.loose;
    const Index d = sample.x.cardinality();
    sums[d].first += score.strict ? 1.0 : 0.0;
    sums[d].second += score.loose;
    counts[d] += 1;
  }

  report.s_acc = strict_sum / static_cast<double>(truths.count());
  report.l_acc = loose_sum / static_cast<double>(truths.count());
  for (const auto& [d, pair] : sums) {
    MetricReport::PerD slice;
    slice.count = counts[d];
    slice.s_acc = pair.first / static_cast<double>(counts[d]);
    slice.l_acc = pair.second / static_cast<double>(counts[d]);
    report.per_d[d] = slice;
  }
  return report;
}

TrainingSet to_training_set(const Corpus& corpus, LossKind loss) {
  if (corpus.count() == 0)
    throw std::invalid_argument("to_training_set: empty corpus");
  const Index n = corpus.samples.front().y.dimension();
  const Index m = corpus.samples.front().x.dimension();
  TrainingSet set;
  set.inputs.resize(n, corpus.count());
  set.targets.resize(m, corpus.count());
  for (Index i = 0; i < corpus.count(); ++i) {
    const CorpusSample& s = corpus.samples[static_cast<std::size_t>(i)];
    set.inputs.col(i) = s.y.values;
    if (loss == LossKind::multilabel) {
      for (Index j = 0; j < m; ++j)
        set.targets(j, i) =
            static_cast<double>(s.labels.bits[static_cast<std::size_t>(j)]);
    } else {
      set.targets.col(i) = s.x.values;
    }
  }
  return set;
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_corpus: cannot open " + path);
  out << "sparselab-corpus 1\n";
  out << "dictionary_hash " << corpus.dictionary_hash << '\n';
  out << "law " << corpus.law.describe() << '\n';
  out << "d_range " << corpus.d_min << ' ' << corpus.d_max << '\n';
  out << "seed " << corpus.seed << '\n';
  out << "noise_std "
      << (corpus.noise_std ? format_double(*corpus.noise_std)
                           : std::string("none"))
      << '\n';
  out << "count " << corpus.count() << '\n';
  for (const CorpusSample& s : corpus.samples) {
    out << "s " << s.x.cardinality();
    for (Index i : s.x.support) out << ' ' << i;
    for (Index i : s.x.support) out << ' ' << format_double(s.x.values[i]);
    out << '\n';
  }
}

Corpus load_corpus(const std::string& path, const Dictionary& phi,
                   bool verify) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_corpus: cannot open " + path);
  std::string magic, token;
  int version = 0;
  in >> magic >> version;
  if (magic != "sparselab-corpus" || version != 1)
    throw std::runtime_error("load_corpus: not a corpus file");

  Corpus corpus;
  in >> token >> corpus.dictionary_hash;
  if (corpus.dictionary_hash != hash_matrix_hex(phi.entries))
    throw std::runtime_error(
        "load_corpus: corpus was generated against a different dictionary");

  std::string kind;
  in >> token >> kind;
  if (kind == "uniform_gapped") {
    double low, high;
    in >> low >> high;
    corpus.law = AmplitudeLaw::uniform_gapped(low, high);
  } else {
    double mean, std_dev;
    in >> mean >> std_dev;
    corpus.law = AmplitudeLaw::gaussian_bimodal(mean, std_dev);
  }
  in >> token >> corpus.d_min >> corpus.d_max;
  in >> token >> corpus.seed;
  in >> token >> kind;
  if (kind != "none") corpus.noise_std = std::stod(kind);
  Index count = 0;
  in >> token >> count;

  const RandomStream base(corpus.seed);
  for (Index i = 0; i < count; ++i) {
    Index d = 0;
    if (!(in >> token >> d) || token != "s")
      throw std::runtime_error("load_corpus: truncated sample records");
    IndexSet support(static_cast<std::size_t>(d));
    for (Index& idx : support) in >> idx;
    Eigen::VectorXd values = Eigen::VectorXd::Zero(phi.m());
    for (Index j = 0; j < d; ++j) {
      double amplitude;
      in >> amplitude;
      values[support[static_cast<std::size_t>(j)]] = amplitude;
    }

    CorpusSample sample;
    sample.x = SparseSignal::from_values(values);
    sample.y.values = phi.entries * values;
    if (verify || corpus.noise_std) {
      // Replay the generator's substream: bit-exact regeneration of the
      // record (and of the noise, which is not stored).
      const CorpusSample regenerated =
          make_sample(phi, corpus.d_min, corpus.d_max, corpus.law,
                      corpus.noise_std,
                      base.substream(static_cast<std::uint64_t>(i)));
      if (verify && (regenerated.x.support != sample.x.support ||
                     regenerated.x.values != sample.x.values))
        throw std::runtime_error(
            "load_corpus: stored records disagree with the seed replay");
      if (corpus.noise_std) sample.y = regenerated.y;
    }
    sample.labels = labels_from_signal(sample.x);
    corpus.samples.push_back(std::move(sample));
  }
  return corpus;
}

}  // namespace sparselab
