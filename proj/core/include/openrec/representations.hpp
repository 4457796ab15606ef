#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "openrec/descriptors.hpp"
#include "openrec/seed.hpp"

namespace openrec {

// ---------------------------------------------------------------------------
// Visual-word dictionary and bag-of-words
// ---------------------------------------------------------------------------

struct Dictionary {
  std::vector<Eigen::VectorXd> words;

  std::size_t size() const noexcept { return words.size(); }
  Eigen::Index dim() const noexcept { return words.empty() ? 0 : words.front().size(); }
};

/// Sum of squared point-to-centroid distances at each assignment step.
struct KMeansReport {
  std::vector<double> objective;
  int iterations = 0;
  bool converged = false;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or `max_iter` is reached. A cluster that empties keeps its
/// previous centroid. Throws InvalidArgument if |pool| < V or V < 2.
Dictionary build_dictionary(std::span<const Eigen::VectorXd> pool, std::size_t V,
                            std::uint64_t seed, int max_iter = 100,
                            KMeansReport* report = nullptr);

/// Index of the closest word (Euclidean); lowest index on ties.
std::size_t nearest_word(const Dictionary& dict, const Eigen::VectorXd& feature);

/// Word index of every feature, in feature order.
std::vector<int> assign_words(std::span<const Eigen::VectorXd> features, const Dictionary& dict);

struct BowHistogram {
  std::vector<int> counts;

  int total() const;
  Eigen::VectorXd as_vector() const;
};

BowHistogram bow_encode(std::span<const Eigen::VectorXd> features, const Dictionary& dict);
BowHistogram bow_encode(const FeatureSet& features, const Dictionary& dict);

// ---------------------------------------------------------------------------
// LDA with incremental collapsed Gibbs sampling
// ---------------------------------------------------------------------------

struct LdaParams {
  int K = 30;
  double alpha = 1.0;
  double beta = 0.1;
  int iterations = 30;
};

struct TopicModel {
  std::string scope = "shared";  // "shared" or a category label
  int K = 0;
  int V = 0;
  double alpha = 1.0;
  double beta = 0.1;
  std::uint64_t rng_seed = 0;
  std::uint64_t updates = 0;          // number of documents folded in
  std::vector<std::int64_t> n_wk;     // V x K, row-major (w * K + k)
  std::vector<std::int64_t> n_k;      // K

  static TopicModel create(int V, int K, double alpha, double beta, std::uint64_t seed,
                           std::string scope = "shared");

  std::int64_t count(int w, int k) const { return n_wk[static_cast<std::size_t>(w) * K + k]; }
};

struct TopicHistogram {
  std::vector<double> theta;         // K, sums to 1
  std::vector<int> topic_counts;     // n_{o,k}
};

/// Samples topics for `doc` (uniform random initialization, then `iters`
/// collapsed Gibbs sweeps over the doc's tokens only) and folds the final
/// assignments into the model counters. The RNG stream is derived from
/// rng_seed and the update counter. Returns the doc's topic histogram.
TopicHistogram lda_update(TopicModel& model, std::span<const int> doc, int iters = 30);

/// Same sampler on a private copy of the counters; the model is untouched.
/// theta_k = (n_ok + alpha) / (n_o + K alpha).
TopicHistogram lda_infer(const TopicModel& model, std::span<const int> doc, int iters,
                         std::uint64_t seed);
TopicHistogram lda_infer(const TopicModel& model, std::span<const int> doc, int iters = 30);

/// phi(w, k) = (n_wk + beta) / (n_k + V beta); each column sums to 1.
Eigen::MatrixXd phi(const TopicModel& model);

using LocalLdaModels = std::map<std::string, TopicModel>;

/// Per-category models. An unseen category gets a fresh model whose seed is
/// derived from `seed` and the label; only that category's counters change.
TopicHistogram local_lda_update(LocalLdaModels& models, const std::string& category,
                                std::span<const int> doc, int V, const LdaParams& params,
                                std::uint64_t seed);

}  // namespace openrec
