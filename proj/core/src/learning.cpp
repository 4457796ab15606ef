#include "openrec/learning.hpp"

#include <cmath>
#include <limits>

namespace openrec {

namespace {

void require_same_size(const Eigen::VectorXd& p, const Eigen::VectorXd& q, const char* what) {
  if (p.size() != q.size()) throw InvalidArgument(std::string(what) + ": size mismatch");
}

// Picks the best (lowest) score; ties keep the first. Applies the CT rule.
Prediction finish(std::vector<std::pair<std::string, double>> scores, std::optional<double> ct,
                  bool higher_is_better = false) {
  if (scores.empty()) throw InvalidArgument("classify: memory is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const bool better = higher_is_better ? scores[i].second > scores[best].second
                                         : scores[i].second < scores[best].second;
    if (better) best = i;
  }
  Prediction p;
  p.label = scores[best].first;
  p.score = scores[best].second;
  if (ct && (higher_is_better ? p.score < *ct : p.score > *ct)) {
    p.unknown = true;
    p.label = kUnknownLabel;
  }
  p.scores = std::move(scores);
  return p;
}

}  // namespace

double l2(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  require_same_size(p, q, "l2");
  return (p - q).norm();
}

double chi2(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  require_same_size(p, q, "chi2");
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double den = p(i) + q(i);
    if (den == 0.0) continue;
    const double d = p(i) - q(i);
    s += d * d / den;
  }
  return 0.5 * s;
}

double kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  require_same_size(p, q, "kl");
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) == 0.0) continue;
    if (q(i) == 0.0) return std::numeric_limits<double>::infinity();
    s += p(i) * std::log(p(i) / q(i));
  }
  return s;
}

double js(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  require_same_size(p, q, "js");
  const Eigen::VectorXd m = 0.5 * (p + q);
  return kl(p, m) + kl(q, m);
}

double distance(Metric metric, const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  return metric == Metric::L2 ? l2(p, q) : chi2(p, q);
}

FeatureMatrix feature_matrix(const FeatureSet& set) {
  const auto v = set.vectors();
  return feature_matrix(v);
}

FeatureMatrix feature_matrix(std::span<const Eigen::VectorXd> features) {
  if (features.empty()) return FeatureMatrix();
  FeatureMatrix m(features.front().size(), static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (features[j].size() != m.rows()) throw InvalidArgument("feature_matrix: mixed dimensions");
    m.col(static_cast<Eigen::Index>(j)) = features[j];
  }
  return m;
}

double set_distance(const FeatureMatrix& U, const FeatureMatrix& V) {
  if (U.cols() == 0 || V.cols() == 0) throw InvalidArgument("set_distance: empty feature set");
  if (U.rows() != V.rows()) throw InvalidArgument("set_distance: feature dimension mismatch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < U.cols(); ++i)
    sum += std::sqrt((V.colwise() - U.col(i)).colwise().squaredNorm().minCoeff());
  return sum / static_cast<double>(U.cols());
}

double icd(const InstanceCategory& category) {
  const std::size_t n = category.instances.size();
  if (n < 2) throw InvalidArgument("icd: category needs at least 2 instances");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) sum += set_distance(category.instances[i], category.instances[j]);
  return sum / static_cast<double>(n * (n - 1));
}

double ocd_min(const FeatureMatrix& target, const InstanceCategory& category) {
  if (category.instances.empty()) throw InvalidArgument("ocd: empty category");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : category.instances) best = std::min(best, set_distance(target, o));
  return best;
}

double ocd_mean(const FeatureMatrix& target, const InstanceCategory& category) {
  if (category.instances.empty()) throw InvalidArgument("ocd: empty category");
  double sum = 0.0;
  for (const auto& o : category.instances) sum += set_distance(target, o);
  return sum / static_cast<double>(category.instances.size());
}

double nocd_approach1(const FeatureMatrix& target, const InstanceCategory& category,
                      double category_icd) {
  if (!(category_icd > 0.0))
    throw DegenerateInput("degenerate category '" + category.label + "': ICD is zero");
  return ocd_min(target, category) / category_icd;
}

double nocd_approach1(const FeatureMatrix& target, const InstanceCategory& category) {
  return nocd_approach1(target, category, icd(category));
}

double nocd_approach2(const FeatureMatrix& target, const InstanceCategory& category,
                      double category_icd, double icd_bar) {
  if (!(icd_bar > 0.0)) throw DegenerateInput("nocd_approach2: mean ICD must be positive");
  return 2.0 * ocd_mean(target, category) / (category_icd + icd_bar);
}

double nocd_approach2(const FeatureMatrix& target, const InstanceCategory& category,
                      double icd_bar) {
  return nocd_approach2(target, category, icd(category), icd_bar);
}

namespace {

Prediction classify_sets(const FeatureMatrix& target, std::span<const InstanceCategory> memory,
                         std::span<const double> icds, InstanceMode mode,
                         std::optional<double> ct) {
  if (memory.empty()) throw InvalidArgument("classify: memory is empty");
  if (mode == InstanceMode::NnFixed)
    throw InvalidArgument("classify: nn_fixed needs a fixed-size representation");
  double icd_bar = 0.0;
  if (mode == InstanceMode::A2) {
    for (double v : icds) icd_bar += v;
    icd_bar /= static_cast<double>(icds.size());
  }
  std::vector<std::pair<std::string, double>> scores;
  scores.reserve(memory.size());
  for (std::size_t c = 0; c < memory.size(); ++c) {
    const double s = mode == InstanceMode::A1
                         ? nocd_approach1(target, memory[c], icds[c])
                         : nocd_approach2(target, memory[c], icds[c], icd_bar);
    scores.emplace_back(memory[c].label, s);
  }
  return finish(std::move(scores), ct);
}

}  // namespace

Prediction classify_instances(const FeatureMatrix& target, std::span<const InstanceCategory> memory,
                              InstanceMode mode, std::optional<double> ct) {
  if (mode == InstanceMode::NnFixed)
    throw InvalidArgument("classify: nn_fixed needs a fixed-size representation");
  std::vector<double> icds;
  for (const auto& c : memory) icds.push_back(icd(c));
  return classify_sets(target, memory, icds, mode, ct);
}

Prediction classify_instances(const Eigen::VectorXd& target, std::span<const FixedCategory> memory,
                              Metric metric, std::optional<double> ct) {
  std::vector<std::pair<std::string, double>> scores;
  for (const auto& c : memory) {
    if (c.instances.empty()) throw InvalidArgument("classify: empty category");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : c.instances) best = std::min(best, distance(metric, target, v));
    scores.emplace_back(c.label, best);
  }
  return finish(std::move(scores), ct);
}

// ---------------------------------------------------------------------------
// Naive Bayes

void bayes_teach(BayesMemory& memory, const std::string& label, const Eigen::VectorXd& x) {
  if (x.size() == 0) throw InvalidArgument("bayes_teach: empty vector");
  if (!x.allFinite() || (x.array() < 0.0).any())
    throw InvalidArgument("bayes_teach: x must be finite and non-negative");
  if (!memory.categories.empty() && memory.categories.begin()->second.a.size() != x.size())
    throw InvalidArgument("bayes_teach: dimension mismatch");

  auto [it, inserted] = memory.categories.try_emplace(label);
  BayesCategory& cat = it->second;
  if (inserted) {
    cat.label = label;
    cat.count = 1;
    cat.a = x;
  } else {
    ++cat.count;
    cat.a += x;
  }
  ++memory.total;
  for (auto& [name, c] : memory.categories) {
    c.prior = static_cast<double>(c.count) / static_cast<double>(memory.total);
  }
  const Eigen::VectorXd smoothed = cat.a.array() + 1.0;
  cat.cond = smoothed / smoothed.sum();
}

Prediction bayes_classify(const BayesMemory& memory, const Eigen::VectorXd& y) {
  if (memory.categories.empty()) throw InvalidArgument("bayes_classify: memory is empty");
  std::vector<std::pair<std::string, double>> scores;
  for (const auto& [label, c] : memory.categories) {
    if (c.cond.size() != y.size()) throw InvalidArgument("bayes_classify: dimension mismatch");
    double s = std::log(c.prior);
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y(i) != 0.0) s += y(i) * std::log(c.cond(i));
    scores.emplace_back(label, s);
  }
  return finish(std::move(scores), std::nullopt, true);
}

// ---------------------------------------------------------------------------
// SpinSetLearner

SpinSetLearner::SpinSetLearner(InstanceMode mode, std::optional<double> ct)
    : mode_(mode), ct_(ct) {
  if (mode == InstanceMode::NnFixed)
    throw InvalidArgument("SpinSetLearner: mode must be A1 or A2");
}

void SpinSetLearner::teach(const std::string& label, const Sample& sample) {
  if (sample.features.cols() == 0) throw InvalidArgument("teach: sample has no local features");
  std::size_t c = 0;
  while (c < memory_.size() && memory_[c].label != label) ++c;
  if (c == memory_.size()) {
    memory_.push_back(InstanceCategory{label, {}});
    pair_sums_.push_back(0.0);
  }
  auto& cat = memory_[c];
  for (const auto& o : cat.instances)
    pair_sums_[c] += set_distance(sample.features, o) + set_distance(o, sample.features);
  cat.instances.push_back(sample.features);
}

Prediction SpinSetLearner::predict(const Sample& sample) {
  std::vector<double> icds;
  for (std::size_t c = 0; c < memory_.size(); ++c) {
    const auto n = static_cast<double>(memory_[c].instances.size());
    if (n < 2) throw InvalidArgument("predict: category '" + memory_[c].label + "' needs 2 instances");
    icds.push_back(pair_sums_[c] / (n * (n - 1)));
  }
  return classify_sets(sample.features, memory_, icds, mode_, ct_);
}

std::size_t SpinSetLearner::stored_instances() const {
  std::size_t n = 0;
  for (const auto& c : memory_) n += c.instances.size();
  return n;
}

// ---------------------------------------------------------------------------
// VectorNnLearner

VectorNnLearner::VectorNnLearner(Metric metric, std::optional<double> ct)
    : metric_(metric), ct_(ct) {}

void VectorNnLearner::teach(const std::string& label, const Sample& sample) {
  if (sample.vector.size() == 0) throw InvalidArgument("teach: sample has no vector");
  for (auto& c : memory_) {
    if (c.label == label) {
      c.instances.push_back(sample.vector);
      return;
    }
  }
  memory_.push_back(FixedCategory{label, {sample.vector}});
}

Prediction VectorNnLearner::predict(const Sample& sample) {
  return classify_instances(sample.vector, memory_, metric_, ct_);
}

std::size_t VectorNnLearner::stored_instances() const {
  std::size_t n = 0;
  for (const auto& c : memory_) n += c.instances.size();
  return n;
}

// ---------------------------------------------------------------------------
// BayesLearner

void BayesLearner::teach(const std::string& label, const Sample& sample) {
  bayes_teach(memory_, label, sample.vector);
}

Prediction BayesLearner::predict(const Sample& sample) {
  return bayes_classify(memory_, sample.vector);
}

// ---------------------------------------------------------------------------
// LdaLearner

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd to_vector(const std::vector<int>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

}  // namespace

LdaLearner::LdaLearner(int V, const LdaParams& params, std::uint64_t seed, bool bayes,
                       std::optional<double> ct)
    : params_(params),
      model_(TopicModel::create(V, params.K, params.alpha, params.beta, seed)),
      bayes_(bayes),
      ct_(ct) {}

void LdaLearner::teach(const std::string& label, const Sample& sample) {
  if (sample.words.empty()) throw InvalidArgument("teach: sample has no visual words");
  std::size_t c = 0;
  while (c < labels_.size() && labels_[c] != label) ++c;
  if (c == labels_.size()) {
    labels_.push_back(label);
    docs_.emplace_back();
  }
  const TopicHistogram h = lda_update(model_, sample.words, params_.iterations);
  docs_[c].push_back(sample.words);
  if (bayes_) bayes_teach(bayes_memory_, label, to_vector(h.topic_counts));
}

void LdaLearner::refresh() {
  if (thetas_version_ == model_.updates) return;
  thetas_.assign(docs_.size(), {});
  for (std::size_t c = 0; c < docs_.size(); ++c)
    for (const auto& d : docs_[c])
      thetas_[c].push_back(to_vector(lda_infer(model_, d, params_.iterations).theta));
  thetas_version_ = model_.updates;
}

Prediction LdaLearner::predict(const Sample& sample) {
  if (sample.words.empty()) throw InvalidArgument("predict: sample has no visual words");
  const TopicHistogram h = lda_infer(model_, sample.words, params_.iterations);
  if (bayes_) return bayes_classify(bayes_memory_, to_vector(h.topic_counts));
  refresh();
  const Eigen::VectorXd theta = to_vector(h.theta);
  std::vector<std::pair<std::string, double>> scores;
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : thetas_[c]) best = std::min(best, chi2(theta, t));
    scores.emplace_back(labels_[c], best);
  }
  return finish(std::move(scores), ct_);
}

std::size_t LdaLearner::stored_instances() const {
  std::size_t n = 0;
  for (const auto& d : docs_) n += d.size();
  return n;
}

// ---------------------------------------------------------------------------
// LocalLdaLearner

LocalLdaLearner::LocalLdaLearner(int V, const LdaParams& params, std::uint64_t seed, bool bayes,
                                 std::optional<double> ct)
    : V_(V), params_(params), seed_(seed), bayes_(bayes), ct_(ct) {
  if (V < 1) throw InvalidArgument("LocalLdaLearner: V must be >= 1");
}

void LocalLdaLearner::teach(const std::string& label, const Sample& sample) {
  if (sample.words.empty()) throw InvalidArgument("teach: sample has no visual words");
  auto [it, inserted] = entries_.try_emplace(label);
  if (inserted) {
    labels_.push_back(label);
    it->second.topic_totals = Eigen::VectorXd::Zero(params_.K);
  }
  const TopicHistogram h = local_lda_update(models_, label, sample.words, V_, params_, seed_);
  it->second.docs.push_back(sample.words);
  it->second.topic_totals += to_vector(h.topic_counts);
  ++it->second.count;
}

Prediction LocalLdaLearner::predict(const Sample& sample) {
  if (sample.words.empty()) throw InvalidArgument("predict: sample has no visual words");
  std::int64_t total = 0;
  for (const auto& [label, e] : entries_) total += e.count;

  std::vector<std::pair<std::string, double>> scores;
  for (const auto& label : labels_) {
    Entry& e = entries_.at(label);
    const TopicModel& model = models_.at(label);
    const TopicHistogram h = lda_infer(model, sample.words, params_.iterations);
    if (bayes_) {
      const Eigen::VectorXd smoothed = e.topic_totals.array() + 1.0;
      const Eigen::VectorXd cond = smoothed / smoothed.sum();
      double s = std::log(static_cast<double>(e.count) / static_cast<double>(total));
      for (int k = 0; k < params_.K; ++k) s += h.topic_counts[k] * std::log(cond(k));
      scores.emplace_back(label, s);
      continue;
    }
    if (e.version != model.updates) {
      e.thetas.clear();
      for (const auto& d : e.docs)
        e.thetas.push_back(to_vector(lda_infer(model, d, params_.iterations).theta));
      e.version = model.updates;
    }
    const Eigen::VectorXd theta = to_vector(h.theta);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : e.thetas) best = std::min(best, chi2(theta, t));
    scores.emplace_back(label, best);
  }
  if (bayes_) return finish(std::move(scores), std::nullopt, true);
  return finish(std::move(scores), ct_);
}

std::size_t LocalLdaLearner::stored_instances() const {
  std::size_t n = 0;
  for (const auto& [label, e] : entries_) n += e.docs.size();
  return n;
}

}  // namespace openrec
