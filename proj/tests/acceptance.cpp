// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Tolerances and budgets are fixed constants below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "openrec/descriptors.hpp"
#include "openrec/evaluation.hpp"
#include "openrec/learning.hpp"
#include "openrec/nbv.hpp"
#include "openrec/pipeline.hpp"
#include "openrec/representations.hpp"
#include "openrec/segmentation.hpp"
#include "openrec/synthgen.hpp"
#include "oracles.hpp"

using namespace openrec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      pass = false;
      detail << what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------------------

void good_invariance(Outcome& o) {
  const auto t0 = Clock::now();
  const auto cloud = oracle::anisotropic_object(2024);
  const auto ref = compute_good(cloud, 15);
  oracle::Rng rng(100);
  int close = 0, identical = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const auto moved = compute_good(transform(cloud, oracle::random_rigid(rng)), 15);
    close += cosine(moved.bins, ref.bins) >= 0.99;
    identical += moved.bins == ref.bins;
  }
  double ds = 0;
  for (double factor : {0.5, 2.0, 3.7, 12.0}) {
    PointCloud scaled = cloud;
    for (auto& p : scaled.points) p *= factor;
    ds = std::max(ds, max_abs_diff(compute_good(scaled, 15).bins, ref.bins));
  }
  PointCloud doubled = cloud;
  doubled.points.insert(doubled.points.end(), cloud.points.begin(), cloud.points.end());
  const double dd = max_abs_diff(compute_good(doubled, 15).bins, ref.bins);
  const double secs = seconds_since(t0);
  o.detail << "cos>=0.99 " << close << "/" << trials << ", identical " << identical << "/" << trials
           << ", scale " << ds << ", dup " << dd << ", " << secs << " s";
  o.require(close == trials, " | cosine below 0.99");
  o.require(identical >= 95, " | fewer than 95 bit-identical");
  o.require(ds <= 1e-9 && dd <= 1e-9, " | scale/duplication drift");
  o.require(secs < 10.0, " | over 10 s");
}

void good_length(Outcome& o) {
  const auto cloud = oracle::anisotropic_object(5);
  const auto n5 = compute_good(cloud, 5).bins.size();
  const auto n15 = compute_good(cloud, 15).bins.size();
  o.detail << "n=5 -> " << n5 << ", n=15 -> " << n15;
  o.require(n5 == 75 && n15 == 675, " | wrong length");
}

void desk_recognition(Outcome& o) {
  const auto t0 = Clock::now();
  const fs::path root = fs::temp_directory_path() / "openrec_acceptance_dataset";
  fs::remove_all(root);
  ExperimentConfig config;
  config.views_per_category = 40;
  config.noise_sigma = 0.002;
  config.seed = 7;
  config.folds = 10;
  generate_dataset(config.dataset_spec(), root);
  const Dataset dataset = load_dataset(root);

  const double good = metrics(run_cross_validation(build_samples(dataset, config), config)).accuracy;

  ExperimentConfig bow = config;
  bow.representation = Representation::Bow;
  bow.learner = LearnerKind::Bayes;
  bow.dictionary_size = 90;
  const double bayes = metrics(run_cross_validation(build_samples(dataset, bow), bow)).accuracy;
  fs::remove_all(root);

  const double secs = seconds_since(t0);
  o.detail << dataset.views.size() << " views, GOOD 1-NN " << good << ", Bayes+BoW " << bayes << ", " << secs
           << " s";
  o.require(dataset.views.size() == 200, " | dataset size");
  o.require(good >= 0.90, " | GOOD accuracy below 0.90");
  o.require(bayes >= 0.80, " | Bayes+BoW accuracy below 0.80");
  o.require(secs < 120.0, " | over 2 min");
}

void oracle_equivalence(Outcome& o) {
  const int instances = 50;
  std::map<std::string, int> agree;
  for (std::uint64_t seed = 0; seed < instances; ++seed) {
    oracle::Rng rng(seed + 1000);

    const auto u = oracle::random_features(rng, 1 + rng() % 20, 5);
    const auto v = oracle::random_features(rng, 1 + rng() % 20, 5);
    agree["set_distance"] +=
        std::abs(set_distance(feature_matrix(u), feature_matrix(v)) - oracle::set_distance(u, v)) <= 1e-9;

    std::vector<oracle::FeatureList> members;
    InstanceCategory cat{"c", {}};
    for (int i = 0; i < 4; ++i) {
      members.push_back(oracle::random_features(rng, 2 + rng() % 8, 5));
      cat.instances.push_back(feature_matrix(members.back()));
    }
    agree["icd"] += std::abs(icd(cat) - oracle::icd(members)) <= 1e-9;
    const auto target = oracle::random_features(rng, 6, 5);
    const double bar = oracle::uniform(rng, 0.1, 1.0);
    agree["nocd_i"] +=
        std::abs(nocd_approach1(feature_matrix(target), cat) - oracle::nocd1(target, members)) <= 1e-9;
    agree["nocd_ii"] +=
        std::abs(nocd_approach2(feature_matrix(target), cat, bar) - oracle::nocd2(target, members, bar)) <= 1e-9;

    const auto cloud = oracle::random_cloud(rng, 80 + seed * 3, 0.25);
    auto got = euclidean_cluster_indices(cloud, 0.07, 1 + seed % 3, 30 + seed);
    std::sort(got.begin(), got.end());
    agree["euclidean_cluster"] += got == oracle::clusters(cloud, 0.07, 1 + seed % 3, 30 + seed);

    const auto small = oracle::random_cloud(rng, 300, 0.1);
    const auto ds = voxel_downsample(small, 0.025);
    const auto want = oracle::voxel_centroids(small, 0.025);
    bool vox = ds.size() == want.size();
    for (std::size_t i = 0; vox && i < want.size(); ++i) vox = (ds.points[i] - want[i]).norm() <= 1e-9;
    agree["voxel_downsample"] += vox;

    const auto patch = oracle::random_cloud(rng, 50, 0.04);
    const auto normals = estimate_normals(patch, 10);
    const std::size_t k = seed % patch.size();
    const SpinImageParams sp;
    const auto img = compute_spin_image(patch, normals, patch.points[k], normals[k], sp);
    const auto counts = oracle::spin_counts(patch, normals, patch.points[k], normals[k], sp.image_width,
                                            sp.support_length, sp.support_angle_deg);
    agree["spin_image"] += (img.histogram - counts).cwiseAbs().maxCoeff() == 0.0;

    const auto object = oracle::anisotropic_object(seed, 300);
    const auto d = compute_good(object, 5);
    const auto local = d.frame.to_local(object);
    bool bins_ok = true;
    for (int b = 0; b < 3; ++b) {
      std::vector<std::pair<double, double>> ab;
      for (const auto& p : local.points) {
        switch (d.order[static_cast<std::size_t>(b)]) {
          case ProjectionPlane::XoZ: ab.emplace_back(p.x(), p.z()); break;
          case ProjectionPlane::XoY: ab.emplace_back(p.x(), p.y()); break;
          case ProjectionPlane::YoZ: ab.emplace_back(p.y(), p.z()); break;
        }
      }
      const Eigen::MatrixXd want_bins = oracle::bin_counts(ab, d.side_length, 5);
      for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c)
          bins_ok &= std::llround(d.bins[static_cast<std::size_t>(b * 25 + r * 5 + c)] * 300.0) ==
                     static_cast<long long>(want_bins(r, c));
    }
    agree["good_binning"] += bins_ok;
  }
  for (const auto& [name, n] : agree) {
    o.detail << name << " " << n << "/" << instances << " ";
    o.require(n == instances, " | " + name + " mismatch");
  }
}

void bayes_order(Outcome& o) {
  oracle::Rng rng(55);
  std::vector<std::pair<std::string, Eigen::VectorXd>> events;
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXd x(10);
    for (int k = 0; k < 10; ++k) x(k) = static_cast<double>(rng() % 6);
    events.emplace_back(std::string(1, char('a' + i % 3)), x);
  }
  std::vector<Eigen::VectorXd> probes;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd y(10);
    for (int k = 0; k < 10; ++k) y(k) = static_cast<double>(rng() % 10);
    probes.push_back(y);
  }
  BayesMemory ref;
  for (const auto& [l, x] : events) bayes_teach(ref, l, x);
  std::vector<std::string> ref_pred;
  for (const auto& y : probes) ref_pred.push_back(bayes_classify(ref, y).label);

  int identical = 0;
  auto order = events;
  for (int p = 0; p < 20; ++p) {
    std::shuffle(order.begin(), order.end(), rng);
    BayesMemory m;
    for (const auto& [l, x] : order) bayes_teach(m, l, x);
    bool same = m.total == ref.total && m.categories.size() == ref.categories.size();
    for (const auto& [l, c] : m.categories) {
      const auto& r = ref.categories.at(l);
      same &= c.count == r.count && c.a == r.a && c.prior == r.prior && c.cond == r.cond;
    }
    for (std::size_t i = 0; i < probes.size(); ++i) same &= bayes_classify(m, probes[i]).label == ref_pred[i];
    identical += same;
  }
  o.detail << identical << "/20 permutations identical over 100 probes";
  o.require(identical == 20, " | order dependence");
}

void lda_contracts(Outcome& o) {
  oracle::Rng rng(66);
  auto m = TopicModel::create(25, 5, 1.0, 0.1, 3);
  bool normalized = true, read_only = true;
  for (int d = 0; d < 20; ++d) {
    std::vector<int> doc;
    for (int i = 0; i < 40; ++i) doc.push_back(static_cast<int>(rng() % 25));
    const auto h = lda_update(m, doc, 15);
    double s = 0;
    for (double t : h.theta) s += t;
    normalized &= std::abs(s - 1.0) <= 1e-9;
    const Eigen::MatrixXd p = phi(m);
    for (int k = 0; k < m.K; ++k) normalized &= std::abs(p.col(k).sum() - 1.0) <= 1e-9;
    const auto counters = m.n_wk;
    const auto totals = m.n_k;
    const auto updates = m.updates;
    const auto inferred = lda_infer(m, doc, 15);
    read_only &= m.n_wk == counters && m.n_k == totals && m.updates == updates;
    double si = 0;
    for (double t : inferred.theta) si += t;
    normalized &= std::abs(si - 1.0) <= 1e-9;
  }

  LocalLdaModels models;
  const LdaParams params{4, 1.0, 0.1, 20};
  local_lda_update(models, "a", std::vector<int>{0, 1, 2, 3}, 12, params, 9);
  local_lda_update(models, "b", std::vector<int>{7, 8, 9}, 12, params, 9);
  bool isolated = true;
  for (int t = 0; t < 10; ++t) {
    const auto b = models.at("b");
    local_lda_update(models, "a", std::vector<int>{t % 12, (t + 1) % 12, 2}, 12, params, 9);
    isolated &= models.at("b").n_wk == b.n_wk && models.at("b").n_k == b.n_k && models.at("b").updates == b.updates;
  }

  int separated = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto two = TopicModel::create(2, 2, 1.0, 0.1, seed);
    lda_update(two, std::vector<int>(10, 0), 200);
    lda_update(two, std::vector<int>(60, 1), 200);
    const auto p = phi(two);
    separated += p.col(0).maxCoeff() > 0.8 && p.col(1).maxCoeff() > 0.8;
  }
  o.detail << "normalized " << normalized << ", infer read-only " << read_only << ", local isolation "
           << isolated << ", two-topic " << separated << "/10";
  o.require(normalized, " | normalization");
  o.require(read_only, " | lda_infer mutated the model");
  o.require(isolated, " | local update leaked");
  o.require(separated >= 9, " | two-topic separation");
}

// Predicts the truth encoded in the view id; once a category from `poison`
// has been taught, every later prediction is wrong.
class Scripted : public Learner {
 public:
  Scripted(std::set<std::string> poison, bool always_wrong) : poison_(std::move(poison)), wrong_(always_wrong) {}
  void teach(const std::string& label, const Sample&) override {
    ++stored_;
    broken_ |= poison_.count(label) > 0;
  }
  Prediction predict(const Sample& s) override {
    const std::string truth = s.id.substr(0, s.id.find('/'));
    Prediction p;
    p.label = wrong_ || broken_ ? "?" : truth;
    return p;
  }
  std::size_t stored_instances() const override { return stored_; }
  std::size_t category_count() const override { return 0; }

 private:
  std::set<std::string> poison_;
  bool wrong_;
  bool broken_ = false;
  std::size_t stored_ = 0;
};

std::vector<ProtocolCategory> scripted_dataset(int categories, int views, int in_a) {
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

bool replay_matches(const ProtocolLog& log) {
  std::vector<double> logged;
  for (const auto& e : log.events)
    if (e.action == Action::Ask) logged.push_back(e.s);
  return replay_sliding_accuracy(log, log.window_mult) == logged;
}

void protocol_fidelity(Outcome& o) {
  const ProtocolParams defaults;
  Scripted perfect({}, false);
  const auto [plog, psum] = run_protocol(scripted_dataset(5, 40, 0), perfect, defaults);
  int teach_views = 0;
  for (const auto& e : plog.events)
    if (e.action == Action::Teach && e.category == plog.introduced.front()) ++teach_views;

  Scripted wrong({}, true);
  const auto [wlog, wsum] = run_protocol(scripted_dataset(5, 60, 0), wrong, defaults);
  std::int64_t asks_after_first = 0;
  for (const auto& e : wlog.events) asks_after_first += e.action == Action::Ask;

  o.detail << "perfect: " << to_string(psum.termination) << " NLC " << psum.nlc << " GCA " << psum.gca
           << "; wrong: " << to_string(wsum.termination) << " after " << asks_after_first << " asks, NLC "
           << wsum.nlc << "; tau " << defaults.tau << ", teach views " << teach_views;
  o.require(psum.termination == Termination::LackOfData && psum.nlc == 5 && psum.gca == 1.0,
            " | perfect learner summary");
  o.require(wsum.termination == Termination::Breakpoint && asks_after_first == 100 && wsum.nlc == 1,
            " | breakpoint budget");
  o.require(replay_matches(plog) && replay_matches(wlog), " | sliding-window replay");
  o.require(defaults.tau == 0.67 && defaults.breakpoint_limit == 100 && defaults.window_mult == 3 &&
                teach_views == 3,
            " | defaults");
}

void context_protocol(Outcome& o) {
  bool perfect_ok = true;
  for (int rho = 1; rho <= 3; ++rho) {
    Scripted perfect({}, false);
    const auto [log, s] = run_context_protocol(scripted_dataset(8, 40, 4), perfect, rho);
    perfect_ok &= s.alc1 == rho + 1 && s.alc2 == 8 - 4 && !s.adaptability && replay_matches(log);
  }

  // Third context-B category breaks the learner: breakpoint with a defined ratio.
  ProtocolParams fixed;
  fixed.shuffle = false;
  Scripted stuck({"cat6"}, false);
  const auto [blog, bsum] = run_context_protocol(scripted_dataset(8, 80, 4), stuck, 2, fixed);
  // Every introduction but the one that broke counts as learned, by context.
  std::map<char, int> learned;
  for (std::size_t i = 0; i + 1 < blog.introduced.size(); ++i)
    ++learned[blog.introduced[i] < "cat4" ? 'A' : 'B'];
  const int alc1 = learned['A'], alc2 = learned['B'];
  const bool ratio_ok = bsum.termination == Termination::Breakpoint && bsum.adaptability &&
                        bsum.alc1 == alc1 && bsum.alc2 == alc2 &&
                        *bsum.adaptability == static_cast<double>(alc2) / alc1;

  int in_range = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const double alc = 10 + i % 31;
    const int r = pick_rho(alc, static_cast<std::uint64_t>(i));
    in_range += r >= 0.65 * alc - 1e-9 && r <= 0.85 * alc + 1e-9;
  }
  o.detail << "perfect runs " << (perfect_ok ? "ok" : "bad") << "; breakpoint ALC1 " << bsum.alc1 << " ALC2 "
           << bsum.alc2 << " adaptability " << bsum.adaptability.value_or(NAN) << "; rho in range " << in_range
           << "/" << draws;
  o.require(perfect_ok, " | perfect-learner context counts");
  o.require(ratio_ok, " | adaptability recomputation");
  o.require(in_range == draws, " | rho out of interval");
}

void segmentation(Outcome& o) {
  const auto t0 = Clock::now();
  TableSpec table;
  std::vector<ShapeSpec> objects;
  const double xs[] = {-0.3, 0.0, 0.3};
  for (int i = 0; i < 3; ++i) {
    ShapeSpec s;
    s.kind = ShapeKind::Box;
    s.dimensions = {0.08, 0.06, 0.1};
    s.points = 500;
    s.noise_sigma = 0.001;
    s.seed = 40 + static_cast<std::uint64_t>(i);
    s.pose = on_table_pose(s, table, xs[i], 0.1 * (i - 1), 0.5 * i);
    objects.push_back(s);
  }
  const Scene scene = generate_scene(objects, table, 9);
  DetectionParams params;
  params.plane_tau = 0.02;
  params.plane_iterations = 200;
  const Detection det = detect(scene.cloud, params);

  const double angle =
      std::acos(std::min(1.0, std::abs(det.table.normal.normalized().z()))) * 180.0 / M_PI;
  std::map<std::tuple<double, double, double>, int> label_of;
  for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
    const auto& p = scene.cloud.points[i];
    label_of[{p.x(), p.y(), p.z()}] = scene.labels[i];
  }
  double worst = 1.0;
  for (const auto& c : det.accepted) {
    std::map<int, int> votes;
    for (const auto& p : c.cloud.points) votes[label_of[{p.x(), p.y(), p.z()}]] += 1;
    int best = 0;
    for (const auto& [label, n] : votes)
      if (label >= 1) best = std::max(best, n);
    worst = std::min(worst, static_cast<double>(best) / static_cast<double>(c.cloud.size()));
  }
  const double secs = seconds_since(t0);
  o.detail << "normal " << angle << " deg, candidates " << det.accepted.size() << ", min purity " << worst
           << ", " << secs << " s";
  o.require(angle <= 2.0, " | plane normal");
  o.require(det.accepted.size() == 3, " | candidate count");
  o.require(worst >= 0.95, " | cluster purity");
  o.require(secs < 5.0, " | over 5 s");
}

void nbv(Outcome& o) {
  const bool one = viewpoint_entropy(SegmentedScene::from_areas({17.0})) == 0.0;
  bool equal = true;
  for (int k = 2; k <= 10; ++k)
    equal &= std::abs(viewpoint_entropy(SegmentedScene::from_areas(std::vector<double>(k, 5.0))) - std::log(k)) <=
             1e-12;

  // Dense wall at x = 0.5 in front of a cube at x = 0.75.
  PointCloud world;
  std::vector<int> labels;
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) {
      world.push_back({0.5, -0.2 + 0.004 * i, -0.2 + 0.004 * j});
      labels.push_back(1);
    }
  for (int i = 0; i <= 5; ++i)
    for (int j = 0; j <= 5; ++j)
      for (int k = 0; k <= 5; ++k) {
        world.push_back({0.725 + 0.01 * k, -0.025 + 0.01 * i, -0.025 + 0.01 * j});
        labels.push_back(2);
      }
  RenderParams rp;
  rp.resolution = 64;
  std::size_t hidden_seen = 0;
  for (std::size_t i : render_virtual_indices(world, CameraPose::look_at({-1, 0, 0}, {0.6, 0, 0}), rp))
    hidden_seen += labels[i] == 2;

  const std::vector<double> weights{0.9, 0.3, 1.8, 0.0, 0.6};
  double total = 0;
  for (double w : weights) total += w;
  std::vector<int> freq(weights.size(), 0);
  std::mt19937_64 rng(2718);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++freq[select_next_view(weights, rng)];
  double worst = 0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    worst = std::max(worst, std::abs(freq[i] / double(draws) - weights[i] / total));

  o.detail << "H(1)=0 " << one << ", H(K)=log K " << equal << ", hidden points rendered " << hidden_seen
           << ", max frequency error " << worst;
  o.require(one && equal, " | entropy closed forms");
  o.require(hidden_seen == 0, " | occlusion");
  o.require(worst <= 0.02, " | selection frequencies");
}

void metrics_check(Outcome& o) {
  const auto two = metrics(ConfusionMatrix::from_counts({"a", "b"}, {{5, 1}, {2, 4}}));
  bool ok2 = std::abs(two.accuracy - 9.0 / 12) <= 1e-12 &&
             std::abs(two.precision_macro - (5.0 / 7 + 4.0 / 5) / 2) <= 1e-12 &&
             std::abs(two.recall_macro - (5.0 / 6 + 4.0 / 6) / 2) <= 1e-12 &&
             std::abs(two.precision_micro - 9.0 / 12) <= 1e-12 && std::abs(two.recall_micro - 9.0 / 12) <= 1e-12;

  // Columns: a 10+1+2 = 13, b 2+7+0 = 9, c 3+2+8 = 13; rows 15, 10, 10.
  const auto three =
      metrics(ConfusionMatrix::from_counts({"a", "b", "c"}, {{10, 2, 3}, {1, 7, 2}, {2, 0, 8}}));
  bool ok3 = std::abs(three.accuracy - 25.0 / 35) <= 1e-12 &&
             std::abs(three.precision_macro - (10.0 / 13 + 7.0 / 9 + 8.0 / 13) / 3) <= 1e-12 &&
             std::abs(three.recall_macro - (10.0 / 15 + 7.0 / 10 + 8.0 / 10) / 3) <= 1e-12 &&
             std::abs(three.precision_micro - 25.0 / 35) <= 1e-12 &&
             std::abs(three.recall_micro - 25.0 / 35) <= 1e-12;

  int identity = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    oracle::Rng rng(seed);
    const int n = 2 + static_cast<int>(seed % 6);
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("l" + std::to_string(i));
    std::vector<std::vector<std::int64_t>> counts(n, std::vector<std::int64_t>(n));
    for (auto& row : counts)
      for (auto& v : row) v = static_cast<std::int64_t>(rng() % 20);
    counts[0][0] += 1;
    const auto m = metrics(ConfusionMatrix::from_counts(names, counts));
    identity += std::abs(m.precision_micro - m.accuracy) <= 1e-12;
  }
  o.detail << "2x2 " << (ok2 ? "ok" : "bad") << ", 3x3 " << (ok3 ? "ok" : "bad") << ", micro=accuracy "
           << identity << "/100";
  o.require(ok2, " | 2x2");
  o.require(ok3, " | 3x3");
  o.require(identity == 100, " | micro precision identity");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"GOOD invariances", good_invariance},
      {"GOOD descriptor length", good_length},
      {"desk-scale recognition", desk_recognition},
      {"oracle equivalence", oracle_equivalence},
      {"naive-Bayes order invariance", bayes_order},
      {"LDA contracts", lda_contracts},
      {"protocol fidelity", protocol_fidelity},
      {"context protocol", context_protocol},
      {"segmentation", segmentation},
      {"next-best-view", nbv},
      {"metrics", metrics_check},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string(" | exception: ") + e.what());
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
