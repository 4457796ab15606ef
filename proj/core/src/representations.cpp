#include "openrec/representations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace openrec {

// ---------------------------------------------------------------------------
// k-means

namespace {

double squared(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).squaredNorm(); }

std::size_t closest(const std::vector<Eigen::VectorXd>& centers, const Eigen::VectorXd& x,
                    double* dist2 = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = squared(centers[c], x);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist2) *dist2 = best_d;
  return best;
}

}  // namespace

Dictionary build_dictionary(std::span<const Eigen::VectorXd> pool, std::size_t V,
                            std::uint64_t seed, int max_iter, KMeansReport* report) {
  if (V < 2) throw InvalidArgument("build_dictionary: V must be >= 2");
  if (pool.size() < V) throw InvalidArgument("build_dictionary: pool smaller than V");
  if (max_iter < 1) throw InvalidArgument("build_dictionary: max_iter must be >= 1");
  const Eigen::Index dim = pool.front().size();
  for (const auto& x : pool) {
    if (x.size() != dim) throw InvalidArgument("build_dictionary: mixed feature dimensions");
    if (!x.allFinite()) throw InvalidArgument("build_dictionary: non-finite feature");
  }

  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> centers;
  centers.reserve(V);
  centers.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);

  std::vector<double> d2(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) d2[i] = squared(pool[i], centers[0]);
  while (centers.size() < V) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = pool.size() - 1;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (r < d2[i]) {
          pick = i;
          break;
        }
        r -= d2[i];
      }
      while (d2[pick] == 0.0 && pick > 0) --pick;  // rounding at the tail
    } else {
      // Fewer distinct points than V: duplicate an existing center.
      pick = std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng);
    }
    centers.push_back(pool[pick]);
    for (std::size_t i = 0; i < pool.size(); ++i) d2[i] = std::min(d2[i], squared(pool[i], centers.back()));
  }

  std::vector<std::size_t> assign(pool.size(), V);
  KMeansReport local;
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      double d = 0.0;
      const std::size_t c = closest(centers, pool[i], &d);
      objective += d;
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    local.objective.push_back(objective);
    local.iterations = it;
    if (!changed) {
      local.converged = true;
      break;
    }
    std::vector<Eigen::VectorXd> sums(V, Eigen::VectorXd::Zero(dim));
    std::vector<std::size_t> counts(V, 0);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      sums[assign[i]] += pool[i];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < V; ++c)
      if (counts[c] > 0) centers[c] = sums[c] / static_cast<double>(counts[c]);
  }
  if (!local.converged) {
    double objective = 0.0;
    for (const auto& x : pool) {
      double d = 0.0;
      closest(centers, x, &d);
      objective += d;
    }
    local.objective.push_back(objective);
    local.iterations = max_iter;
  }
  if (report) *report = std::move(local);
  return Dictionary{std::move(centers)};
}

std::size_t nearest_word(const Dictionary& dict, const Eigen::VectorXd& feature) {
  if (dict.size() == 0) throw InvalidArgument("nearest_word: empty dictionary");
  if (feature.size() != dict.dim())
    throw InvalidArgument("nearest_word: feature dimension does not match the dictionary");
  return closest(dict.words, feature);
}

std::vector<int> assign_words(std::span<const Eigen::VectorXd> features, const Dictionary& dict) {
  std::vector<int> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(static_cast<int>(nearest_word(dict, f)));
  return out;
}

int BowHistogram::total() const {
  int t = 0;
  for (int c : counts) t += c;
  return t;
}

Eigen::VectorXd BowHistogram::as_vector() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) v(static_cast<Eigen::Index>(i)) = counts[i];
  return v;
}

BowHistogram bow_encode(std::span<const Eigen::VectorXd> features, const Dictionary& dict) {
  if (features.empty()) throw InvalidArgument("bow_encode: no features");
  BowHistogram h;
  h.counts.assign(dict.size(), 0);
  for (int w : assign_words(features, dict)) ++h.counts[static_cast<std::size_t>(w)];
  return h;
}

BowHistogram bow_encode(const FeatureSet& features, const Dictionary& dict) {
  const auto v = features.vectors();
  return bow_encode(v, dict);
}

// ---------------------------------------------------------------------------
// LDA

TopicModel TopicModel::create(int V, int K, double alpha, double beta, std::uint64_t seed,
                              std::string scope) {
  if (V < 1 || K < 1) throw InvalidArgument("TopicModel: V and K must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw InvalidArgument("TopicModel: alpha, beta must be > 0");
  TopicModel m;
  m.scope = std::move(scope);
  m.K = K;
  m.V = V;
  m.alpha = alpha;
  m.beta = beta;
  m.rng_seed = seed;
  m.n_wk.assign(static_cast<std::size_t>(V) * K, 0);
  m.n_k.assign(static_cast<std::size_t>(K), 0);
  return m;
}

namespace {

void check_doc(const TopicModel& model, std::span<const int> doc, int iters) {
  if (iters < 1) throw InvalidArgument("lda: iterations must be >= 1");
  for (int w : doc)
    if (w < 0 || w >= model.V) throw InvalidArgument("lda: word index out of range");
}

// Folds `doc` into the given counters and runs the collapsed sampler on its
// tokens. The counters hold the final assignments on return.
TopicHistogram gibbs(std::vector<std::int64_t>& n_wk, std::vector<std::int64_t>& n_k, int V,
                     int K, double alpha, double beta, std::span<const int> doc, int iters,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> uniform(0, K - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<int> z(doc.size());
  std::vector<std::int64_t> n_ok(static_cast<std::size_t>(K), 0);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    z[i] = uniform(rng);
    ++n_wk[static_cast<std::size_t>(doc[i]) * K + z[i]];
    ++n_k[z[i]];
    ++n_ok[z[i]];
  }

  const double vbeta = V * beta;
  std::vector<double> p(static_cast<std::size_t>(K));
  for (int it = 0; it < iters && K > 1; ++it) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const std::size_t row = static_cast<std::size_t>(doc[i]) * K;
      --n_wk[row + z[i]];
      --n_k[z[i]];
      --n_ok[z[i]];
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        total += (static_cast<double>(n_ok[k]) + alpha) * (static_cast<double>(n_wk[row + k]) + beta) /
                 (static_cast<double>(n_k[k]) + vbeta);
        p[k] = total;
      }
      const double r = unit(rng) * total;
      int k = 0;
      while (k + 1 < K && p[k] <= r) ++k;
      z[i] = k;
      ++n_wk[row + k];
      ++n_k[k];
      ++n_ok[k];
    }
  }

  TopicHistogram h;
  h.topic_counts.resize(static_cast<std::size_t>(K));
  h.theta.resize(static_cast<std::size_t>(K));
  const double denom = static_cast<double>(doc.size()) + K * alpha;
  for (int k = 0; k < K; ++k) {
    h.topic_counts[k] = static_cast<int>(n_ok[k]);
    h.theta[k] = (static_cast<double>(n_ok[k]) + alpha) / denom;
  }
  return h;
}

}  // namespace

TopicHistogram lda_update(TopicModel& model, std::span<const int> doc, int iters) {
  check_doc(model, doc, iters);
  const std::uint64_t seed = mix_seed(model.rng_seed, model.updates);
  auto h = gibbs(model.n_wk, model.n_k, model.V, model.K, model.alpha, model.beta, doc, iters, seed);
  if (!doc.empty()) ++model.updates;
  return h;
}

TopicHistogram lda_infer(const TopicModel& model, std::span<const int> doc, int iters,
                         std::uint64_t seed) {
  check_doc(model, doc, iters);
  auto n_wk = model.n_wk;
  auto n_k = model.n_k;
  return gibbs(n_wk, n_k, model.V, model.K, model.alpha, model.beta, doc, iters, seed);
}

TopicHistogram lda_infer(const TopicModel& model, std::span<const int> doc, int iters) {
  std::uint64_t h = mix_seed(model.rng_seed, ~model.updates);
  for (int w : doc) h = mix_seed(h, static_cast<std::uint64_t>(w));
  return lda_infer(model, doc, iters, h);
}

Eigen::MatrixXd phi(const TopicModel& model) {
  Eigen::MatrixXd out(model.V, model.K);
  const double vbeta = model.V * model.beta;
  for (int w = 0; w < model.V; ++w)
    for (int k = 0; k < model.K; ++k)
      out(w, k) = (static_cast<double>(model.count(w, k)) + model.beta) /
                  (static_cast<double>(model.n_k[k]) + vbeta);
  return out;
}

TopicHistogram local_lda_update(LocalLdaModels& models, const std::string& category,
                                std::span<const int> doc, int V, const LdaParams& params,
                                std::uint64_t seed) {
  auto it = models.find(category);
  if (it == models.end()) {
    it = models
             .emplace(category, TopicModel::create(V, params.K, params.alpha, params.beta,
                                                   mix_seed(seed, hash_label(category)), category))
             .first;
  }
  return lda_update(it->second, doc, params.iterations);
}

}  // namespace openrec
