#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "openrec/config.hpp"
#include "openrec/evaluation.hpp"
#include "openrec/learning.hpp"
#include "openrec/pointcloud.hpp"
#include "openrec/representations.hpp"

namespace openrec {

/// Runs f(0) .. f(n-1) on up to `jobs` threads. The first exception thrown by
/// any call is rethrown after all threads finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

struct DatasetView {
  std::string category;
  std::string id;  // file path relative to the root
  std::filesystem::path path;
};

struct Dataset {
  std::vector<DatasetView> views;
  std::map<std::string, char> contexts;  // empty when the manifest has none
};

/// Reads <root>/manifest.json when present, otherwise every <root>/<dir>/*.pcd
/// in sorted order with the directory name as category.
Dataset load_dataset(const std::filesystem::path& root);

struct SampleBank {
  std::vector<Sample> samples;  // parallel to the dataset views
  std::vector<std::string> labels;
  std::optional<Dictionary> dictionary;
  int vocabulary = 0;  // V for topic models
};

/// Loads every view and fills the Sample fields the representation needs.
/// BoW and topic representations share one dictionary built from a seeded
/// subsample of the spin-images of all views.
SampleBank build_samples(const Dataset& dataset, const ExperimentConfig& config);

/// Fresh learner for the configured representation and learner kind.
std::unique_ptr<Learner> make_learner(const ExperimentConfig& config, int vocabulary,
                                      std::uint64_t seed);

/// k-fold cross-validation: each fold teaches a fresh learner its training
/// views in dataset order, then predicts the test views.
ConfusionMatrix run_cross_validation(const SampleBank& bank, const ExperimentConfig& config);

/// Groups the bank by category (first-appearance order).
std::vector<ProtocolCategory> protocol_categories(const SampleBank& bank, const Dataset& dataset);

struct ProtocolRun {
  std::uint64_t seed = 0;
  ProtocolLog log;
  ProtocolSummary summary;
  std::optional<double> reference_alc;  // ALC of the no-context run used to pick rho
};

/// One teaching experiment with the given seed. With `context_change`, rho
/// comes from the config, else from `alc`, else from a no-context run of the
/// same learner; categories without a context go to A (first rho + 1 in
/// shuffled order) or B.
ProtocolRun run_protocol_experiment(const SampleBank& bank, const Dataset& dataset,
                                    const ExperimentConfig& config, bool context_change,
                                    std::uint64_t seed);

}  // namespace openrec
