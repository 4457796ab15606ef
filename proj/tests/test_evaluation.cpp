#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "openrec/evaluation.hpp"
#include "oracles.hpp"

using namespace openrec;

namespace {

// Answers from the view id ("label/index"), optionally wrong for some labels.
// Predicts the truth encoded in the view id. Once a category from `poison`
// has been taught, every later prediction is wrong.
class ScriptedLearner : public Learner {
 public:
  explicit ScriptedLearner(std::set<std::string> poison = {}, bool always_wrong = false)
      : poison_(std::move(poison)), always_wrong_(always_wrong) {}

  void teach(const std::string& label, const Sample&) override {
    ++stored_;
    labels_.insert(label);
    broken_ |= poison_.count(label) > 0;
  }
  Prediction predict(const Sample& s) override {
    const std::string truth = s.id.substr(0, s.id.find('/'));
    Prediction p;
    p.label = always_wrong_ || broken_ ? "wrong" : truth;
    return p;
  }
  std::size_t stored_instances() const override { return stored_; }
  std::size_t category_count() const override { return labels_.size(); }

 private:
  std::set<std::string> poison_;
  bool always_wrong_;
  bool broken_ = false;
  std::size_t stored_ = 0;
  std::set<std::string> labels_;
};

std::vector<ProtocolCategory> dataset(int categories, int views, int in_a = 0) {
  std::vector<ProtocolCategory> out;
  for (int c = 0; c < categories; ++c) {
    ProtocolCategory cat;
    cat.label = "cat" + std::to_string(c);
    cat.context = c < in_a ? 'A' : 'B';
    for (int v = 0; v < views; ++v) {
      Sample s;
      s.id = cat.label + "/" + std::to_string(v);
      cat.views.push_back(s);
    }
    out.push_back(cat);
  }
  return out;
}

void check_log_invariants(const ProtocolLog& log, const ProtocolSummary& summary) {
  const auto replay = replay_sliding_accuracy(log, log.window_mult);
  std::vector<double> logged;
  std::set<std::string> introduced;
  std::set<std::string> seen_views;
  std::int64_t asks = 0, correct = 0;
  for (const auto& e : log.events) {
    if (e.action == Action::Teach) introduced.insert(e.category);
    if (e.action == Action::Ask) {
      CHECK(introduced.count(e.category) == 1);
      CHECK(e.s >= 0.0);
      CHECK(e.s <= 1.0);
      logged.push_back(e.s);
      ++asks;
      correct += e.correct;
    }
    if (e.action != Action::Correct) CHECK(seen_views.insert(e.view_id).second);
  }
  CHECK(replay == logged);
  CHECK(summary.qci == asks);
  if (asks > 0) CHECK(summary.gca == static_cast<double>(correct) / static_cast<double>(asks));
  const auto again = summarize(log);
  CHECK(again.nlc == summary.nlc);
  CHECK(again.gca == summary.gca);
  CHECK(again.apa == summary.apa);
}

}  // namespace

TEST_CASE("metrics of hand-computed matrices") {
  const auto perfect = ConfusionMatrix::from_counts({"a", "b", "c"}, {{3, 0, 0}, {0, 4, 0}, {0, 0, 2}});
  const auto p = metrics(perfect);
  CHECK(p.accuracy == 1.0);
  CHECK(p.precision_micro == 1.0);
  CHECK(p.precision_macro == 1.0);
  CHECK(p.recall_micro == 1.0);
  CHECK(p.recall_macro == 1.0);

  const auto m = metrics(ConfusionMatrix::from_counts({"a", "b"}, {{5, 1}, {2, 4}}));
  CHECK(std::abs(m.accuracy - 0.75) <= 1e-12);
  CHECK(std::abs(m.precision_macro - (5.0 / 7 + 4.0 / 5) / 2) <= 1e-12);
  CHECK(std::abs(m.recall_macro - (5.0 / 6 + 4.0 / 6) / 2) <= 1e-12);
  CHECK(m.precision_micro == m.accuracy);
  CHECK(m.recall_micro == m.accuracy);

  const auto three = metrics(ConfusionMatrix::from_counts({"a", "b", "c"}, {{4, 1, 0}, {2, 3, 1}, {0, 0, 0}}));
  CHECK(three.macro_recall_undefined);
  CHECK_FALSE(three.macro_precision_undefined);
  CHECK(std::abs(three.precision_macro - (4.0 / 6 + 3.0 / 4 + 0.0) / 3) <= 1e-12);
  CHECK(std::abs(three.recall_macro - (4.0 / 5 + 3.0 / 6 + 0.0) / 3) <= 1e-12);

  CHECK_THROWS_AS(metrics(ConfusionMatrix{}), InvalidArgument);
  CHECK_THROWS_AS(metrics(ConfusionMatrix({"a"})), InvalidArgument);
  CHECK_THROWS_AS(ConfusionMatrix::from_counts({"a"}, {{1, 2}}), InvalidArgument);
}

TEST_CASE("micro precision equals accuracy on single-label data") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    oracle::Rng rng(seed);
    const int n = 2 + static_cast<int>(seed % 5);
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    std::vector<std::vector<std::int64_t>> counts(n, std::vector<std::int64_t>(n));
    for (auto& row : counts)
      for (auto& v : row) v = static_cast<std::int64_t>(rng() % 10);
    counts[0][0] += 1;
    const auto m = metrics(ConfusionMatrix::from_counts(labels, counts));
    CHECK(std::abs(m.precision_micro - m.accuracy) <= 1e-12);
    CHECK(std::abs(m.recall_micro - m.accuracy) <= 1e-12);
  }
}

TEST_CASE("stratified folds balance categories") {
  std::vector<std::string> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 20; ++i) labels.push_back("c" + std::to_string(c));
  const auto folds = stratified_folds(labels, 10, 4);
  std::map<std::pair<std::string, int>, int> per;
  for (std::size_t i = 0; i < labels.size(); ++i) ++per[{labels[i], folds[i]}];
  for (const auto& [key, count] : per) CHECK(count == 2);
  CHECK(folds == stratified_folds(labels, 10, 4));
  CHECK_THROWS_AS(stratified_folds(labels, 1, 4), InvalidArgument);
}

TEST_CASE("leave-one-out 1-NN matches an exhaustive oracle") {
  oracle::Rng rng(5);
  std::vector<Eigen::VectorXd> x;
  std::vector<std::string> labels;
  for (int i = 0; i < 24; ++i) {
    const int c = i % 3;
    x.push_back(Eigen::Vector2d(c + oracle::uniform(rng, -0.8, 0.8), oracle::uniform(rng, -0.8, 0.8)));
    labels.push_back("c" + std::to_string(c));
  }
  const auto runner = [&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test) {
    std::vector<std::string> out;
    for (std::size_t t : test) {
      std::size_t best = train.front();
      for (std::size_t j : train)
        if ((x[j] - x[t]).norm() < (x[best] - x[t]).norm()) best = j;
      out.push_back(labels[best]);
    }
    return out;
  };
  const auto cm = kfold(labels, static_cast<int>(labels.size()), 9, runner);

  ConfusionMatrix want({"c0", "c1", "c2"});
  for (std::size_t t = 0; t < x.size(); ++t) {
    std::size_t best = t == 0 ? 1 : 0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != t && (x[j] - x[t]).norm() < (x[best] - x[t]).norm()) best = j;
    want.add(labels[t], labels[best]);
  }
  REQUIRE(cm.labels() == want.labels());
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(cm.at(r, c) == want.at(r, c));

  const auto again = kfold(labels, 10, 3, runner, 1);
  const auto threaded = kfold(labels, 10, 3, runner, 4);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(again.at(r, c) == threaded.at(r, c));
  CHECK(again.total() == 24);
}

TEST_CASE("kfold propagates runner errors and appends UNKNOWN") {
  std::vector<std::string> labels{"a", "a", "b", "b"};
  CHECK_THROWS_AS(kfold(labels, 2, 1,
                        [](const auto&, const auto&) -> std::vector<std::string> {
                          throw IoError("boom");
                        }),
                  IoError);
  const auto cm = kfold(labels, 2, 1, [](const auto&, const auto& test) {
    return std::vector<std::string>(test.size(), kUnknownLabel);
  });
  CHECK(cm.labels().back() == kUnknownLabel);
}

TEST_CASE("protocol defaults") {
  const ProtocolParams p;
  CHECK(p.tau == 0.67);
  CHECK(p.window_mult == 3);
  CHECK(p.breakpoint_limit == 100);
  CHECK(p.views_per_teach == 3);
}

TEST_CASE("perfect learner learns every category") {
  ScriptedLearner learner;
  const auto [log, summary] = run_protocol(dataset(5, 20), learner);
  CHECK(summary.termination == Termination::LackOfData);
  CHECK(summary.nlc == 5);
  CHECK(summary.gca == 1.0);
  CHECK(summary.apa == 1.0);
  CHECK(log.introduced.size() == 5);
  int teaches = 0;
  for (const auto& e : log.events) teaches += e.action == Action::Teach;
  CHECK(teaches == 15);
  CHECK(summary.aic == 3.0);
  check_log_invariants(log, summary);
}

TEST_CASE("always-wrong learner breaks after the iteration budget") {
  ScriptedLearner learner({}, true);
  const auto [log, summary] = run_protocol(dataset(5, 60), learner);
  CHECK(summary.termination == Termination::Breakpoint);
  CHECK(summary.nlc == 1);
  CHECK(summary.qci == 100);
  CHECK(summary.gca == 0.0);
  std::int64_t asks_after_second = 0;
  for (const auto& e : log.events) asks_after_second += e.action == Action::Ask && e.n == 2;
  CHECK(asks_after_second == 100);
  CHECK(learner.stored_instances() == 6 + 100);
  CHECK(summary.aic == 106.0);
  check_log_invariants(log, summary);
}

TEST_CASE("running out of views ends with lack_of_data") {
  ScriptedLearner learner({}, true);
  const auto [log, summary] = run_protocol(dataset(3, 10), learner);
  CHECK(summary.termination == Termination::LackOfData);
  CHECK(summary.nlc == 1);
  check_log_invariants(log, summary);
}

TEST_CASE("protocol log is deterministic per seed") {
  ProtocolParams params;
  params.seed = 21;
  ScriptedLearner a({"cat2"}), b({"cat2"});
  const auto ra = run_protocol(dataset(5, 50), a, params);
  const auto rb = run_protocol(dataset(5, 50), b, params);
  REQUIRE(ra.first.events.size() == rb.first.events.size());
  for (std::size_t i = 0; i < ra.first.events.size(); ++i) {
    CHECK(ra.first.events[i].view_id == rb.first.events[i].view_id);
    CHECK(ra.first.events[i].s == rb.first.events[i].s);
  }
  check_log_invariants(ra.first, ra.second);
  params.seed = 22;
  ScriptedLearner c({"cat2"});
  const auto rc = run_protocol(dataset(5, 50), c, params);
  CHECK(rc.first.introduced != ra.first.introduced);
}

TEST_CASE("protocol input validation") {
  ScriptedLearner learner;
  ProtocolParams bad;
  bad.tau = 1.0;
  CHECK_THROWS_AS(run_protocol(dataset(2, 5), learner, bad), InvalidArgument);
  CHECK_THROWS_AS(run_protocol({}, learner), InvalidArgument);
  CHECK_THROWS_AS(run_context_protocol(dataset(4, 5, 4), learner, 2), InvalidArgument);
  CHECK_THROWS_AS(run_context_protocol(dataset(4, 5, 2), learner, 0), InvalidArgument);
}

TEST_CASE("context protocol with a perfect learner") {
  for (int rho = 1; rho <= 3; ++rho) {
    ScriptedLearner learner;
    const auto [log, summary] = run_context_protocol(dataset(8, 30, 4), learner, rho);
    CHECK(summary.context_run);
    CHECK(summary.termination == Termination::LackOfData);
    CHECK(summary.alc1 == rho + 1);
    CHECK(summary.alc2 == 4);
    CHECK_FALSE(summary.adaptability.has_value());
    for (const auto& e : log.events)
      if (e.action == Action::Ask) {
        const bool in_a = e.category < "cat4";
        CHECK(in_a == (e.context == 'A'));
      }
    check_log_invariants(log, summary);
  }
}

TEST_CASE("context protocol adaptability at breakpoint") {
  // Everything fails once the third B category has been taught.
  ProtocolParams params;
  params.shuffle = false;
  ScriptedLearner learner({"cat6"});
  const auto [log, summary] = run_context_protocol(dataset(8, 80, 4), learner, 2, params);
  CHECK(summary.termination == Termination::Breakpoint);
  CHECK(summary.alc1 == 3);
  CHECK(summary.alc2 == 2);
  REQUIRE(summary.adaptability.has_value());
  CHECK(*summary.adaptability == 2.0 / 3.0);

  // Recount from the log: introductions that crossed tau, by context.
  std::map<char, int> learned;
  for (std::size_t i = 0; i < log.introduced.size(); ++i) {
    const auto& label = log.introduced[i];
    const bool last = i + 1 == log.introduced.size();
    if (!last) ++learned[label < "cat4" ? 'A' : 'B'];
  }
  CHECK(learned['A'] == summary.alc1);
  CHECK(learned['B'] == summary.alc2);
  check_log_invariants(log, summary);
}

TEST_CASE("pick_rho interval and uniformity") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const int r20 = pick_rho(20, s);
    CHECK(r20 >= 13);
    CHECK(r20 <= 17);
    const int r40 = pick_rho(40, s);
    CHECK(r40 >= 26);
    CHECK(r40 <= 34);
  }
  std::map<int, int> freq;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) ++freq[pick_rho(20, static_cast<std::uint64_t>(s))];
  REQUIRE(freq.size() == 5);
  for (const auto& [v, c] : freq) CHECK(std::abs(c / double(draws) - 0.2) <= 0.03);
  CHECK_THROWS_AS(pick_rho(0.0, 1), InvalidArgument);
}
