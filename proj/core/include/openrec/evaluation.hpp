#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "openrec/learning.hpp"

namespace openrec {

// ---------------------------------------------------------------------------
// Offline metrics
// ---------------------------------------------------------------------------

/// Rows are true labels, columns predicted labels, both in `labels` order.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> labels);

  /// Unseen labels (including UNKNOWN predictions) are appended.
  void add(const std::string& truth, const std::string& predicted, std::int64_t count = 1);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::int64_t at(std::size_t row, std::size_t col) const { return counts_[row][col]; }
  std::int64_t total() const;
  std::size_t index_of(const std::string& label);

  static ConfusionMatrix from_counts(std::vector<std::string> labels,
                                     std::vector<std::vector<std::int64_t>> counts);

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<std::int64_t>> counts_;
};

struct Metrics {
  double accuracy = 0.0;
  double precision_micro = 0.0;
  double precision_macro = 0.0;
  double recall_micro = 0.0;
  double recall_macro = 0.0;
  /// Some class had an empty column (precision) or row (recall); that class
  /// contributed 0 to the macro average.
  bool macro_precision_undefined = false;
  bool macro_recall_undefined = false;
};

Metrics metrics(const ConfusionMatrix& cm);

/// Stratified fold index per item: categories in sorted order, items shuffled
/// within each category, then dealt round-robin with a counter that carries
/// over between categories. A category with fewer than k items is simply
/// absent from some test folds.
std::vector<int> stratified_folds(std::span<const std::string> labels, int k, std::uint64_t seed);

/// For each fold, `run_fold(train, test)` returns one predicted label per
/// test index. Folds run on up to `jobs` threads; the merged matrix does not
/// depend on `jobs`. Labels are sorted; UNKNOWN is appended if predicted.
using FoldRunner = std::function<std::vector<std::string>(const std::vector<std::size_t>& train,
                                                          const std::vector<std::size_t>& test)>;
ConfusionMatrix kfold(std::span<const std::string> labels, int k, std::uint64_t seed,
                      const FoldRunner& run_fold, int jobs = 1);

// ---------------------------------------------------------------------------
// Simulated teacher
// ---------------------------------------------------------------------------

struct ProtocolCategory {
  std::string label;
  std::vector<Sample> views;
  char context = 'A';
};

struct ProtocolParams {
  double tau = 0.67;
  int window_mult = 3;
  int breakpoint_limit = 100;
  int views_per_teach = 3;
  /// Shuffles category introduction order and view order within categories.
  std::uint64_t seed = 1;
  bool shuffle = true;
};

enum class Action { Teach, Ask, Correct };
std::string_view to_string(Action a);

enum class Termination { Breakpoint, LackOfData };
std::string_view to_string(Termination t);

struct ProtocolEvent {
  std::int64_t iteration = 0;  // running event counter, 1-based
  Action action = Action::Teach;
  std::string category;
  std::string view_id;
  std::string predicted;  // ask only
  bool correct = false;   // ask only
  double s = 0.0;         // ask only: sliding-window accuracy after this ask
  int n = 0;              // categories introduced so far
  char context = 'A';
};

struct ProtocolLog {
  std::vector<ProtocolEvent> events;
  std::vector<std::string> introduced;        // labels in introduction order
  std::vector<std::int64_t> introduced_at;    // iteration of the first teach event
  Termination termination = Termination::LackOfData;
  double tau = 0.67;
  int window_mult = 3;
  bool context_run = false;
  int rho = 0;
};

struct ProtocolSummary {
  std::int64_t qci = 0;  // question / correction iterations (asks)
  int nlc = 0;           // learned categories
  double aic = 0.0;      // stored instances per learned category
  double gca = 0.0;      // correct asks / asks
  double apa = 0.0;      // mean sliding-window accuracy over asks
  Termination termination = Termination::LackOfData;
  // Context runs only.
  bool context_run = false;
  int rho = 0;
  int alc1 = 0;
  int alc2 = 0;
  std::optional<double> adaptability;  // only when terminated at breakpoint
};

/// Single-context teaching protocol.
std::pair<ProtocolLog, ProtocolSummary> run_protocol(std::vector<ProtocolCategory> dataset,
                                                     Learner& learner,
                                                     const ProtocolParams& params = {});

/// Context-change protocol: categories come from context A until n > rho,
/// then from context B. Asks for out-of-context categories are skipped.
std::pair<ProtocolLog, ProtocolSummary> run_context_protocol(std::vector<ProtocolCategory> dataset,
                                                             Learner& learner, int rho,
                                                             const ProtocolParams& params = {});

/// Uniform integer in [ceil(0.65 alc), floor(0.85 alc)].
int pick_rho(double alc, std::uint64_t seed);

/// Sliding-window accuracy of every ask, recomputed from the raw events.
std::vector<double> replay_sliding_accuracy(const ProtocolLog& log, int window_mult = 3);

/// Summary recomputed from the log alone. AIC counts teach and correct events.
ProtocolSummary summarize(const ProtocolLog& log);

}  // namespace openrec
