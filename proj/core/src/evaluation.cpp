#include "openrec/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <set>
#include <thread>

namespace openrec {

// ---------------------------------------------------------------------------
// Confusion matrix and metrics

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels) : labels_(std::move(labels)) {
  counts_.assign(labels_.size(), std::vector<std::int64_t>(labels_.size(), 0));
}

ConfusionMatrix ConfusionMatrix::from_counts(std::vector<std::string> labels,
                                             std::vector<std::vector<std::int64_t>> counts) {
  if (counts.size() != labels.size()) throw InvalidArgument("confusion matrix must be square");
  for (const auto& row : counts) {
    if (row.size() != labels.size()) throw InvalidArgument("confusion matrix must be square");
    for (auto v : row)
      if (v < 0) throw InvalidArgument("confusion matrix counts must be non-negative");
  }
  ConfusionMatrix cm(std::move(labels));
  cm.counts_ = std::move(counts);
  return cm;
}

std::size_t ConfusionMatrix::index_of(const std::string& label) {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it != labels_.end()) return static_cast<std::size_t>(it - labels_.begin());
  labels_.push_back(label);
  for (auto& row : counts_) row.push_back(0);
  counts_.emplace_back(labels_.size(), 0);
  return labels_.size() - 1;
}

void ConfusionMatrix::add(const std::string& truth, const std::string& predicted, std::int64_t count) {
  const std::size_t r = index_of(truth);
  const std::size_t c = index_of(predicted);
  counts_[r][c] += count;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts_)
    for (auto v : row) t += v;
  return t;
}

Metrics metrics(const ConfusionMatrix& cm) {
  const std::size_t n = cm.size();
  const std::int64_t total = cm.total();
  if (n == 0 || total == 0) throw InvalidArgument("metrics: empty confusion matrix");

  Metrics m;
  std::int64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
  double prec_sum = 0.0, rec_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t tp = cm.at(i, i);
    std::int64_t col = 0, row = 0;
    for (std::size_t j = 0; j < n; ++j) {
      col += cm.at(j, i);
      row += cm.at(i, j);
    }
    tp_sum += tp;
    fp_sum += col - tp;
    fn_sum += row - tp;
    if (col > 0)
      prec_sum += static_cast<double>(tp) / static_cast<double>(col);
    else
      m.macro_precision_undefined = true;
    if (row > 0)
      rec_sum += static_cast<double>(tp) / static_cast<double>(row);
    else
      m.macro_recall_undefined = true;
  }
  m.accuracy = static_cast<double>(tp_sum) / static_cast<double>(total);
  m.precision_micro = static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fp_sum);
  m.recall_micro = static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fn_sum);
  m.precision_macro = prec_sum / static_cast<double>(n);
  m.recall_macro = rec_sum / static_cast<double>(n);
  return m;
}

// ---------------------------------------------------------------------------
// k-fold

std::vector<int> stratified_folds(std::span<const std::string> labels, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("kfold: k must be >= 2");
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<int> fold(labels.size(), 0);
  std::size_t dealt = 0;
  for (auto& [label, items] : by_label) {
    std::shuffle(items.begin(), items.end(), rng);
    for (std::size_t i : items) fold[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
  }
  return fold;
}

ConfusionMatrix kfold(std::span<const std::string> labels, int k, std::uint64_t seed,
                      const FoldRunner& run_fold, int jobs) {
  const std::vector<int> fold = stratified_folds(labels, k, seed);
  std::vector<std::vector<std::string>> predictions(static_cast<std::size_t>(k));
  std::vector<std::vector<std::size_t>> tests(static_cast<std::size_t>(k));
  std::vector<std::vector<std::size_t>> trains(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (int f = 0; f < k; ++f) (fold[i] == f ? tests : trains)[static_cast<std::size_t>(f)].push_back(i);

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int f = next++; f < k; f = next++) {
      const auto uf = static_cast<std::size_t>(f);
      if (tests[uf].empty()) continue;
      try {
        predictions[uf] = run_fold(trains[uf], tests[uf]);
        if (predictions[uf].size() != tests[uf].size())
          throw InvalidArgument("kfold: one prediction per test item required");
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, k);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::set<std::string> names(labels.begin(), labels.end());
  ConfusionMatrix cm(std::vector<std::string>(names.begin(), names.end()));
  for (int f = 0; f < k; ++f) {
    const auto uf = static_cast<std::size_t>(f);
    for (std::size_t j = 0; j < tests[uf].size(); ++j)
      cm.add(labels[tests[uf][j]], predictions[uf][j]);
  }
  return cm;
}

// ---------------------------------------------------------------------------
// Teaching protocol

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Teach: return "teach";
    case Action::Ask: return "ask";
    case Action::Correct: return "correct";
  }
  return "?";
}

std::string_view to_string(Termination t) {
  return t == Termination::Breakpoint ? "breakpoint" : "lack_of_data";
}

namespace {

double window_accuracy(const std::vector<char>& results, std::size_t window) {
  std::int64_t correct = 0;
  for (std::size_t i = results.size() - window; i < results.size(); ++i) correct += results[i];
  return static_cast<double>(correct) / static_cast<double>(window);
}

std::size_t window_size(std::size_t asks, int window_mult, int n) {
  return std::min(asks, static_cast<std::size_t>(window_mult) * static_cast<std::size_t>(n));
}

struct Engine {
  std::vector<ProtocolCategory>& data;
  Learner& learner;
  const ProtocolParams& params;
  std::optional<int> rho;

  ProtocolLog log;
  std::vector<std::size_t> cursor;  // next unseen view per category
  std::vector<char> used;           // category already introduced
  std::vector<std::size_t> known;   // data indices, introduction order
  std::int64_t counter = 0;
  char context = 'A';

  void emit(ProtocolEvent e) {
    e.iteration = ++counter;
    e.n = static_cast<int>(known.size());
    e.context = context;
    log.events.push_back(std::move(e));
  }

  // Teaches the next category of the current context; false when none is
  // left or it lacks views.
  bool introduce() {
    std::size_t pick = data.size();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!used[i] && (!rho || data[i].context == context)) {
        pick = i;
        break;
      }
    }
    if (pick == data.size()) return false;
    const auto need = static_cast<std::size_t>(params.views_per_teach);
    if (data[pick].views.size() < need) return false;
    used[pick] = 1;
    known.push_back(pick);
    log.introduced.push_back(data[pick].label);
    log.introduced_at.push_back(counter + 1);
    for (std::size_t v = 0; v < need; ++v) {
      const Sample& s = data[pick].views[cursor[pick]++];
      learner.teach(data[pick].label, s);
      ProtocolEvent e;
      e.action = Action::Teach;
      e.category = data[pick].label;
      e.view_id = s.id;
      emit(std::move(e));
    }
    return true;
  }

  void run() {
    cursor.assign(data.size(), 0);
    used.assign(data.size(), 0);
    log.tau = params.tau;
    log.window_mult = params.window_mult;
    log.context_run = rho.has_value();
    log.rho = rho.value_or(0);

    if (!introduce()) {
      log.termination = Termination::LackOfData;
      return;
    }
    for (;;) {
      if (rho && context == 'A' && static_cast<int>(known.size()) > *rho) context = 'B';
      if (!introduce()) {
        log.termination = Termination::LackOfData;
        return;
      }
      const int n = static_cast<int>(known.size());
      std::vector<char> results;
      std::size_t c = 0;
      for (;;) {
        const std::size_t cat = known[c];
        c = (c + 1) % known.size();
        if (rho && data[cat].context != context) continue;
        if (cursor[cat] >= data[cat].views.size()) {
          log.termination = Termination::LackOfData;
          return;
        }
        const Sample& s = data[cat].views[cursor[cat]++];
        const Prediction p = learner.predict(s);
        const bool ok = !p.unknown && p.label == data[cat].label;
        results.push_back(ok ? 1 : 0);
        ProtocolEvent ask;
        ask.action = Action::Ask;
        ask.category = data[cat].label;
        ask.view_id = s.id;
        ask.predicted = p.label;
        ask.correct = ok;
        ask.s = window_accuracy(results, window_size(results.size(), params.window_mult, n));
        const double s_now = ask.s;
        emit(std::move(ask));
        if (!ok) {
          learner.teach(data[cat].label, s);
          ProtocolEvent corr;
          corr.action = Action::Correct;
          corr.category = data[cat].label;
          corr.view_id = s.id;
          emit(std::move(corr));
        }
        const auto asks = static_cast<std::int64_t>(results.size());
        if (asks >= n && s_now > params.tau) break;
        if (asks >= n && asks >= params.breakpoint_limit) {
          log.termination = Termination::Breakpoint;
          return;
        }
      }
    }
  }
};

std::pair<ProtocolLog, ProtocolSummary> run_engine(std::vector<ProtocolCategory> dataset,
                                                   Learner& learner, const ProtocolParams& params,
                                                   std::optional<int> rho) {
  if (dataset.empty()) throw InvalidArgument("protocol: empty dataset");
  if (!(params.tau > 0.0 && params.tau < 1.0)) throw InvalidArgument("protocol: tau must be in (0, 1)");
  if (params.window_mult < 1) throw InvalidArgument("protocol: window_mult must be >= 1");
  if (params.breakpoint_limit < 1) throw InvalidArgument("protocol: breakpoint_limit must be >= 1");
  if (params.views_per_teach < 1) throw InvalidArgument("protocol: views_per_teach must be >= 1");

  if (params.shuffle) {
    std::mt19937_64 rng(params.seed);
    std::shuffle(dataset.begin(), dataset.end(), rng);
    for (auto& cat : dataset) std::shuffle(cat.views.begin(), cat.views.end(), rng);
  }
  Engine engine{dataset, learner, params, rho, {}, {}, {}, {}, 0, 'A'};
  engine.run();
  ProtocolSummary summary = summarize(engine.log);
  return {std::move(engine.log), summary};
}

}  // namespace

std::pair<ProtocolLog, ProtocolSummary> run_protocol(std::vector<ProtocolCategory> dataset,
                                                     Learner& learner,
                                                     const ProtocolParams& params) {
  return run_engine(std::move(dataset), learner, params, std::nullopt);
}

std::pair<ProtocolLog, ProtocolSummary> run_context_protocol(std::vector<ProtocolCategory> dataset,
                                                             Learner& learner, int rho,
                                                             const ProtocolParams& params) {
  if (rho < 1) throw InvalidArgument("protocol: rho must be >= 1");
  bool has_a = false, has_b = false;
  for (const auto& c : dataset) {
    if (c.context != 'A' && c.context != 'B') throw InvalidArgument("protocol: context must be A or B");
    (c.context == 'A' ? has_a : has_b) = true;
  }
  if (!has_a || !has_b) throw InvalidArgument("protocol: both contexts need categories");
  return run_engine(std::move(dataset), learner, params, rho);
}

int pick_rho(double alc, std::uint64_t seed) {
  const int lo = static_cast<int>(std::ceil(0.65 * alc - 1e-9));
  const int hi = static_cast<int>(std::floor(0.85 * alc + 1e-9));
  if (!(alc > 0.0) || lo > hi || hi < 1)
    throw InvalidArgument("pick_rho: interval [0.65 alc, 0.85 alc] holds no positive integer");
  std::mt19937_64 rng(seed);
  return std::uniform_int_distribution<int>(std::max(lo, 1), hi)(rng);
}

std::vector<double> replay_sliding_accuracy(const ProtocolLog& log, int window_mult) {
  std::vector<double> out;
  std::vector<char> results;
  for (const auto& e : log.events) {
    if (e.action == Action::Teach) {
      results.clear();
    } else if (e.action == Action::Ask) {
      results.push_back(e.correct ? 1 : 0);
      out.push_back(window_accuracy(results, window_size(results.size(), window_mult, e.n)));
    }
  }
  return out;
}

ProtocolSummary summarize(const ProtocolLog& log) {
  ProtocolSummary s;
  s.termination = log.termination;
  s.context_run = log.context_run;
  s.rho = log.rho;

  std::int64_t correct = 0, stored = 0;
  double s_sum = 0.0;
  std::int64_t asks_since_intro = 0;
  bool last_round_crossed = log.introduced.size() <= 1;
  for (const auto& e : log.events) {
    switch (e.action) {
      case Action::Teach:
        ++stored;
        asks_since_intro = 0;
        last_round_crossed = e.n <= 1;
        break;
      case Action::Correct:
        ++stored;
        break;
      case Action::Ask:
        ++s.qci;
        ++asks_since_intro;
        if (e.correct) ++correct;
        s_sum += e.s;
        last_round_crossed = asks_since_intro >= e.n && e.s > log.tau;
        break;
    }
  }
  // A round that never crossed tau did not teach its category.
  const int introduced = static_cast<int>(log.introduced.size());
  s.nlc = last_round_crossed ? introduced : introduced - 1;
  s.gca = s.qci > 0 ? static_cast<double>(correct) / static_cast<double>(s.qci) : 0.0;
  s.apa = s.qci > 0 ? s_sum / static_cast<double>(s.qci) : 0.0;
  s.aic = s.nlc > 0 ? static_cast<double>(stored) / s.nlc : 0.0;

  if (log.context_run) {
    std::vector<char> intro_context;
    for (const auto& e : log.events)
      if (e.action == Action::Teach && e.n > static_cast<int>(intro_context.size()))
        intro_context.push_back(e.context);
    for (char c : intro_context) (c == 'A' ? s.alc1 : s.alc2) += 1;
    if (!last_round_crossed && !intro_context.empty())
      (intro_context.back() == 'A' ? s.alc1 : s.alc2) -= 1;
    if (log.termination == Termination::Breakpoint && s.alc1 > 0)
      s.adaptability = static_cast<double>(s.alc2) / static_cast<double>(s.alc1);
  }
  return s;
}

}  // namespace openrec
