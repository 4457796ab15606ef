#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "openrec/descriptors.hpp"
#include "openrec/evaluation.hpp"
#include "openrec/nbv.hpp"
#include "openrec/representations.hpp"
#include "openrec/synthgen.hpp"

namespace openrec {

enum class Representation { Good, SpinSet, Bow, Lda, LocalLda };
std::string_view to_string(Representation r);

enum class LearnerKind { Instance, Bayes };
std::string_view to_string(LearnerKind k);

/// Every tunable of an experiment. Keys in the config file use the field
/// names below.
struct ExperimentConfig {
  Representation representation = Representation::Good;
  LearnerKind learner = LearnerKind::Instance;
  InstanceMode instance_mode = InstanceMode::A1;  // spinset only: a1 | a2

  // GOOD
  int good_bins = kDefaultGoodBins;
  double sign_threshold = kDefaultSignThreshold;

  // Spin-images
  double voxel = 0.01;
  int image_width = 4;
  double support_length = 0.05;
  double support_angle = 90.0;
  int normal_k = 10;

  // Dictionary and topics
  int dictionary_size = 90;
  int dictionary_pool = 20000;  // features sampled for k-means
  int kmeans_iters = 100;
  int topics = 30;
  double alpha = 1.0;
  double beta = 0.1;
  int gibbs_iters = 30;

  std::optional<double> ct;

  // Offline evaluation
  int folds = 10;

  // Teaching protocol
  double tau = 0.67;
  int window_mult = 3;
  int breakpoint_limit = 100;
  int views_per_teach = 3;
  int runs = 1;
  std::optional<int> rho;
  std::optional<double> alc;

  // Next-best-view
  double nbv_sigma = 0.5;
  int nbv_resolution = 128;
  double nbv_cluster_link = 0.03;
  int nbv_cluster_min_pts = 10;
  int nbv_current_pose = 0;

  // Dataset generation
  std::vector<std::string> categories;  // subset of the default families; empty = all
  int views_per_category = 40;
  int points = 1000;
  double noise_sigma = 0.002;
  bool partial_views = true;
  bool assign_contexts = false;

  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir = ".";

  /// Throws InvalidArgument naming the first offending key.
  void validate() const;

  GoodParams good_params() const;
  SpinImageParams spin_params() const;
  LdaParams lda_params() const;
  ProtocolParams protocol_params() const;
  NbvParams nbv_params() const;
  DatasetSpec dataset_spec() const;
};

/// Sets one key from its textual value. Throws InvalidArgument for an unknown
/// key or a value that does not parse.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

/// `key = value` lines; `#` starts a comment; values may be double-quoted.
/// Unknown keys and duplicate keys are errors (ParseError with line number).
void apply_config_text(ExperimentConfig& config, std::string_view text);

std::vector<std::string> config_keys();

}  // namespace openrec
