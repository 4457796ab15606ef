#include <doctest.h>

#include <cmath>

#include "openrec/serialization.hpp"
#include "oracles.hpp"

using namespace openrec;

namespace {

class Scripted : public Learner {
 public:
  void teach(const std::string&, const Sample&) override { ++stored_; }
  Prediction predict(const Sample& s) override {
    Prediction p;
    p.label = (++calls_ % 3 == 0) ? "nope" : s.id.substr(0, s.id.find('/'));
    return p;
  }
  std::size_t stored_instances() const override { return stored_; }
  std::size_t category_count() const override { return 0; }

 private:
  std::size_t stored_ = 0;
  int calls_ = 0;
};

std::vector<ProtocolCategory> categories(int count, int views, int in_a) {
  std::vector<ProtocolCategory> out;
  for (int c = 0; c < count; ++c) {
    ProtocolCategory cat;
    cat.label = "k" + std::to_string(c);
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

}  // namespace

TEST_CASE("json output has sorted keys and null for non-finite numbers") {
  Json j;
  j["zeta"] = 1;
  j["alpha"] = std::nan("");
  j["mid"] = "x";
  const std::string s = dump_json(j, -1);
  CHECK(s == R"({"alpha":null,"mid":"x","zeta":1})");
  CHECK_THROWS_AS(parse_json("{oops"), ParseError);
}

TEST_CASE("csv quoting follows RFC 4180") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  const std::vector<std::string> row{"a", "b,c", ""};
  CHECK(csv_row(row) == "a,\"b,c\",\r\n");
}

TEST_CASE("confusion csv round-trips with awkward labels") {
  auto cm = ConfusionMatrix::from_counts({"mug, red", "say \"x\"", "plain"}, {{3, 1, 0}, {0, 5, 2}, {1, 0, 4}});
  const auto back = confusion_from_csv(confusion_csv(cm));
  REQUIRE(back.labels() == cm.labels());
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(back.at(r, c) == cm.at(r, c));
  CHECK(metrics(back).accuracy == metrics(cm).accuracy);
  CHECK_THROWS_AS(confusion_from_csv("truth,a\r\nb,1\r\n"), ParseError);
}

TEST_CASE("dictionary and topic model round-trip exactly") {
  oracle::Rng rng(1);
  Dictionary d;
  d.words = oracle::random_features(rng, 5, 7);
  const auto back = dictionary_from_json(parse_json(dump_json(to_json(d))));
  REQUIRE(back.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(back.words[i] == d.words[i]);

  auto m = TopicModel::create(6, 3, 1.0, 0.1, 9);
  lda_update(m, std::vector<int>{0, 1, 2, 2, 5}, 10);
  const auto mb = topic_model_from_json(parse_json(dump_json(to_json(m))));
  CHECK(mb.n_wk == m.n_wk);
  CHECK(mb.n_k == m.n_k);
  CHECK(mb.updates == m.updates);
  CHECK(lda_infer(mb, std::vector<int>{1, 2}, 10).theta == lda_infer(m, std::vector<int>{1, 2}, 10).theta);
}

TEST_CASE("learner memories round-trip") {
  BayesMemory bm;
  bayes_teach(bm, "a", Eigen::Vector3d(1, 2, 0));
  bayes_teach(bm, "b", Eigen::Vector3d(0, 0, 7));
  bayes_teach(bm, "a", Eigen::Vector3d(3, 0, 1));
  const auto bb = bayes_memory_from_json(parse_json(dump_json(to_json(bm))));
  CHECK(bb.total == bm.total);
  for (const auto& [l, c] : bm.categories) {
    CHECK(bb.categories.at(l).a == c.a);
    CHECK(bb.categories.at(l).cond == c.cond);
    CHECK(bb.categories.at(l).prior == c.prior);
  }

  oracle::Rng rng(2);
  std::vector<InstanceCategory> inst{{"x", {feature_matrix(oracle::random_features(rng, 3, 4))}}};
  const auto ib = instance_memory_from_json(to_json(std::span<const InstanceCategory>(inst)));
  REQUIRE(ib.size() == 1);
  CHECK(ib[0].instances[0] == inst[0].instances[0]);

  std::vector<FixedCategory> fixed{{"y", oracle::random_features(rng, 2, 5)}};
  const auto fb = fixed_memory_from_json(to_json(std::span<const FixedCategory>(fixed)));
  REQUIRE(fb.size() == 1);
  CHECK(fb[0].instances[1] == fixed[0].instances[1]);
}

TEST_CASE("protocol log replays from jsonl") {
  Scripted learner;
  const auto [log, summary] = run_context_protocol(categories(6, 40, 3), learner, 2);
  const Json sj = to_json(summary, log);
  const auto replayed = protocol_log_from_jsonl(protocol_jsonl(log), parse_json(dump_json(sj)));
  REQUIRE(replayed.events.size() == log.events.size());
  CHECK(replayed.introduced == log.introduced);
  CHECK(replay_sliding_accuracy(replayed, replayed.window_mult) == replay_sliding_accuracy(log, log.window_mult));
  const auto again = summarize(replayed);
  CHECK(dump_json(to_json(again, replayed)) == dump_json(sj));

  const auto fields = summary_csv_fields(summary, 5);
  CHECK(fields.size() == summary_csv_header().size());
  CHECK(fields[0] == "5");

  for (const auto& e : log.events) {
    const auto back = protocol_event_from_json(to_json(e));
    CHECK(back.view_id == e.view_id);
    CHECK(back.s == e.s);
    CHECK(back.context == e.context);
  }
}

TEST_CASE("descriptor json carries type, params and values") {
  GoodDescriptor g;
  g.bins = {0.5, 0.5};
  g.n = 1;
  GoodParams gp;
  const Json j = descriptor_json(g, gp);
  CHECK(j.at("type") == "good");
  CHECK(j.at("values").size() == 2);
  CHECK(j.at("params").at("n") == gp.n);

  BowHistogram h;
  h.counts = {1, 0, 3};
  CHECK(descriptor_json(h).at("values") == Json::array({1, 0, 3}));
}
