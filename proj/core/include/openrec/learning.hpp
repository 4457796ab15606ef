#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "openrec/descriptors.hpp"
#include "openrec/representations.hpp"

namespace openrec {

inline constexpr const char* kUnknownLabel = "UNKNOWN";

struct Prediction {
  std::string label;
  double score = 0.0;
  bool unknown = false;
  /// One score per known category, in the learner's category order.
  std::vector<std::pair<std::string, double>> scores;
};

// ---------------------------------------------------------------------------
// Distances between fixed-size representations
// ---------------------------------------------------------------------------

double l2(const Eigen::VectorXd& p, const Eigen::VectorXd& q);
/// 1/2 sum (p_i - q_i)^2 / (p_i + q_i), skipping p_i + q_i = 0.
double chi2(const Eigen::VectorXd& p, const Eigen::VectorXd& q);
/// Natural log; 0 log(0/q) = 0, p log(p/0) = +inf.
double kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q);
/// KL(P, M) + KL(Q, M) with M = (P + Q) / 2.
double js(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

enum class Metric { L2, Chi2 };
double distance(Metric metric, const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// ---------------------------------------------------------------------------
// Variable-size (set of local features) instance-based learning
// ---------------------------------------------------------------------------

/// A view as a set of local features: one column per feature.
using FeatureMatrix = Eigen::MatrixXd;

FeatureMatrix feature_matrix(const FeatureSet& set);
FeatureMatrix feature_matrix(std::span<const Eigen::VectorXd> features);

/// D(U, V) = mean over u in U of min over v in V of ||u - v||. Not symmetric.
double set_distance(const FeatureMatrix& U, const FeatureMatrix& V);

struct InstanceCategory {
  std::string label;
  std::vector<FeatureMatrix> instances;
};

/// Mean of D(U, V) over ordered pairs of distinct instances. Needs >= 2.
double icd(const InstanceCategory& category);

/// min_O D(T, O) and mean_O D(T, O).
double ocd_min(const FeatureMatrix& target, const InstanceCategory& category);
double ocd_mean(const FeatureMatrix& target, const InstanceCategory& category);

/// min_O D(T, O) / ICD(C). Throws DegenerateInput when ICD = 0.
double nocd_approach1(const FeatureMatrix& target, const InstanceCategory& category);
double nocd_approach1(const FeatureMatrix& target, const InstanceCategory& category,
                      double category_icd);
/// 2 mean_O D(T, O) / (ICD(C) + icd_bar).
double nocd_approach2(const FeatureMatrix& target, const InstanceCategory& category,
                      double icd_bar);
double nocd_approach2(const FeatureMatrix& target, const InstanceCategory& category,
                      double category_icd, double icd_bar);

enum class InstanceMode { A1, A2, NnFixed };

/// NOCD classification over feature sets (A1 or A2). icd_bar for A2 is the
/// mean ICD over all categories. Best score > ct gives UNKNOWN; ties keep the
/// lowest category index.
Prediction classify_instances(const FeatureMatrix& target, std::span<const InstanceCategory> memory,
                              InstanceMode mode, std::optional<double> ct = std::nullopt);

struct FixedCategory {
  std::string label;
  std::vector<Eigen::VectorXd> instances;
};

/// 1-NN over all stored vectors.
Prediction classify_instances(const Eigen::VectorXd& target, std::span<const FixedCategory> memory,
                              Metric metric, std::optional<double> ct = std::nullopt);

// ---------------------------------------------------------------------------
// Incremental naive Bayes
// ---------------------------------------------------------------------------

struct BayesCategory {
  std::string label;
  std::int64_t count = 0;     // N_k
  Eigen::VectorXd a;          // accumulated feature counts
  double prior = 0.0;         // P(C_k) = N_k / N
  Eigen::VectorXd cond;       // P(x_i | C_k), Laplace smoothed
};

struct BayesMemory {
  std::map<std::string, BayesCategory> categories;  // label order
  std::int64_t total = 0;                           // N
};

void bayes_teach(BayesMemory& memory, const std::string& label, const Eigen::VectorXd& x);

/// log P(C_k) + sum_i y_i log P(x_i | C_k); argmax, ties to the lowest label.
Prediction bayes_classify(const BayesMemory& memory, const Eigen::VectorXd& y);

// ---------------------------------------------------------------------------
// Stateful learners driven by cross-validation and the teaching protocols
// ---------------------------------------------------------------------------

/// One object view in every form a learner may ask for. Which fields are
/// filled depends on the representation.
struct Sample {
  std::string id;
  FeatureMatrix features;   // spin-images, one per column
  Eigen::VectorXd vector;   // GOOD or BoW counts
  std::vector<int> words;   // visual-word document
};

class Learner {
 public:
  virtual ~Learner() = default;

  virtual void teach(const std::string& label, const Sample& sample) = 0;
  /// Non-const: learners may refresh caches.
  virtual Prediction predict(const Sample& sample) = 0;
  virtual std::size_t stored_instances() const = 0;
  virtual std::size_t category_count() const = 0;
};

/// Feature-set memory with NOCD A1 / A2.
class SpinSetLearner : public Learner {
 public:
  SpinSetLearner(InstanceMode mode, std::optional<double> ct);

  void teach(const std::string& label, const Sample& sample) override;
  Prediction predict(const Sample& sample) override;
  std::size_t stored_instances() const override;
  std::size_t category_count() const override { return memory_.size(); }

  const std::vector<InstanceCategory>& memory() const { return memory_; }

 private:
  InstanceMode mode_;
  std::optional<double> ct_;
  std::vector<InstanceCategory> memory_;
  std::vector<double> pair_sums_;  // sum of D over ordered pairs, per category
};

/// 1-NN over fixed-size vectors (GOOD, BoW).
class VectorNnLearner : public Learner {
 public:
  VectorNnLearner(Metric metric, std::optional<double> ct);

  void teach(const std::string& label, const Sample& sample) override;
  Prediction predict(const Sample& sample) override;
  std::size_t stored_instances() const override;
  std::size_t category_count() const override { return memory_.size(); }

  const std::vector<FixedCategory>& memory() const { return memory_; }

 private:
  Metric metric_;
  std::optional<double> ct_;
  std::vector<FixedCategory> memory_;
};

/// Naive Bayes over a fixed-size count vector.
class BayesLearner : public Learner {
 public:
  void teach(const std::string& label, const Sample& sample) override;
  Prediction predict(const Sample& sample) override;
  std::size_t stored_instances() const override { return static_cast<std::size_t>(memory_.total); }
  std::size_t category_count() const override { return memory_.categories.size(); }

  const BayesMemory& memory() const { return memory_; }

 private:
  BayesMemory memory_;
};

/// Shared topic model; instances compared by chi2 on theta. Stored instance
/// thetas are re-inferred lazily after the model changes.
class LdaLearner : public Learner {
 public:
  LdaLearner(int V, const LdaParams& params, std::uint64_t seed, bool bayes,
             std::optional<double> ct);

  void teach(const std::string& label, const Sample& sample) override;
  Prediction predict(const Sample& sample) override;
  std::size_t stored_instances() const override;
  std::size_t category_count() const override { return labels_.size(); }

  const TopicModel& model() const { return model_; }

 private:
  void refresh();

  LdaParams params_;
  TopicModel model_;
  bool bayes_;
  std::optional<double> ct_;
  std::vector<std::string> labels_;
  std::vector<std::vector<std::vector<int>>> docs_;  // per category
  std::vector<std::vector<Eigen::VectorXd>> thetas_;
  std::uint64_t thetas_version_ = ~0ULL;
  BayesMemory bayes_memory_;
};

/// One topic model per category. A target is inferred under every category
/// model and compared with that category's instances (chi2 1-NN) or scored
/// by the category's naive-Bayes model over topic counts.
class LocalLdaLearner : public Learner {
 public:
  LocalLdaLearner(int V, const LdaParams& params, std::uint64_t seed, bool bayes,
                  std::optional<double> ct);

  void teach(const std::string& label, const Sample& sample) override;
  Prediction predict(const Sample& sample) override;
  std::size_t stored_instances() const override;
  std::size_t category_count() const override { return labels_.size(); }

  const LocalLdaModels& models() const { return models_; }

 private:
  struct Entry {
    std::vector<std::vector<int>> docs;
    std::vector<Eigen::VectorXd> thetas;
    std::uint64_t version = ~0ULL;
    Eigen::VectorXd topic_totals;  // naive-Bayes accumulator over topic counts
    std::int64_t count = 0;
  };

  int V_;
  LdaParams params_;
  std::uint64_t seed_;
  bool bayes_;
  std::optional<double> ct_;
  std::vector<std::string> labels_;
  std::map<std::string, Entry> entries_;
  LocalLdaModels models_;
};

}  // namespace openrec
