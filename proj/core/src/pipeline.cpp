#include "openrec/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "openrec/descriptors.hpp"
#include "openrec/pcd_io.hpp"
#include "openrec/seed.hpp"
#include "openrec/serialization.hpp"

namespace openrec {

namespace fs = std::filesystem;

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Dataset load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("dataset root '" + root.string() + "' is not a directory");
  Dataset out;
  const fs::path manifest = root / "manifest.json";
  if (fs::exists(manifest)) {
    const Manifest m = manifest_from_json(parse_json(read_text_file(manifest)));
    for (const auto& v : m.views) out.views.push_back({v.category, v.file, root / v.file});
    out.contexts = m.contexts;
  } else {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root))
      if (e.is_directory()) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(d))
        if (e.is_regular_file() && e.path().extension() == ".pcd") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      const std::string category = d.filename().string();
      for (const auto& f : files)
        out.views.push_back({category, fs::relative(f, root).generic_string(), f});
    }
  }
  if (out.views.empty()) throw InvalidArgument("dataset '" + root.string() + "' holds no views");
  return out;
}

SampleBank build_samples(const Dataset& dataset, const ExperimentConfig& config) {
  config.validate();
  const std::size_t n = dataset.views.size();
  SampleBank bank;
  bank.samples.resize(n);
  for (const auto& v : dataset.views) bank.labels.push_back(v.category);

  const bool good = config.representation == Representation::Good;
  std::vector<FeatureSet> sets(good ? 0 : n);
  parallel_for(n, config.jobs, [&](std::size_t i) {
    const auto& view = dataset.views[i];
    const PointCloud cloud = load_pcd(view.path);
    if (cloud.empty()) throw InvalidArgument("view '" + view.id + "' is empty");
    Sample& s = bank.samples[i];
    s.id = view.id;
    if (good) {
      const auto d = compute_good(cloud, config.good_params());
      s.vector = Eigen::Map<const Eigen::VectorXd>(d.bins.data(), static_cast<Eigen::Index>(d.bins.size()));
    } else {
      sets[i] = compute_feature_set(cloud, config.spin_params());
      if (sets[i].size() == 0) throw InvalidArgument("view '" + view.id + "' yields no keypoints");
    }
  });
  if (good) return bank;

  if (config.representation == Representation::SpinSet) {
    for (std::size_t i = 0; i < n; ++i) bank.samples[i].features = feature_matrix(sets[i]);
    return bank;
  }

  std::vector<Eigen::VectorXd> pool;
  for (const auto& s : sets)
    for (const auto& img : s.spin_images) pool.push_back(img.flattened());
  if (pool.size() > static_cast<std::size_t>(config.dictionary_pool)) {
    std::vector<Eigen::VectorXd> picked;
    std::mt19937_64 rng(mix_seed(config.seed, 0xD1C7ULL));
    std::sample(pool.begin(), pool.end(), std::back_inserter(picked),
                static_cast<std::size_t>(config.dictionary_pool), rng);
    pool = std::move(picked);
  }
  bank.dictionary = build_dictionary(pool, static_cast<std::size_t>(config.dictionary_size),
                                     mix_seed(config.seed, 0xB0ULL), config.kmeans_iters);
  bank.vocabulary = config.dictionary_size;
  parallel_for(n, config.jobs, [&](std::size_t i) {
    Sample& s = bank.samples[i];
    const auto vectors = sets[i].vectors();
    s.words = assign_words(vectors, *bank.dictionary);
    s.vector = bow_encode(vectors, *bank.dictionary).as_vector();
  });
  return bank;
}

std::unique_ptr<Learner> make_learner(const ExperimentConfig& config, int vocabulary,
                                      std::uint64_t seed) {
  const bool bayes = config.learner == LearnerKind::Bayes;
  switch (config.representation) {
    case Representation::Good:
    case Representation::Bow:
      if (bayes) return std::make_unique<BayesLearner>();
      return std::make_unique<VectorNnLearner>(Metric::L2, config.ct);
    case Representation::SpinSet:
      if (bayes) throw InvalidArgument("learner: bayes needs a fixed-size representation");
      return std::make_unique<SpinSetLearner>(config.instance_mode, config.ct);
    case Representation::Lda:
      return std::make_unique<LdaLearner>(vocabulary, config.lda_params(), seed, bayes, config.ct);
    case Representation::LocalLda:
      return std::make_unique<LocalLdaLearner>(vocabulary, config.lda_params(), seed, bayes, config.ct);
  }
  throw InvalidArgument("learner: unknown representation");
}

ConfusionMatrix run_cross_validation(const SampleBank& bank, const ExperimentConfig& config) {
  const auto runner = [&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test) {
    auto learner = make_learner(config, bank.vocabulary, mix_seed(config.seed, train.size()));
    for (std::size_t i : train) learner->teach(bank.labels[i], bank.samples[i]);
    std::vector<std::string> out;
    for (std::size_t i : test) out.push_back(learner->predict(bank.samples[i]).label);
    return out;
  };
  return kfold(bank.labels, config.folds, config.seed, runner, config.jobs);
}

std::vector<ProtocolCategory> protocol_categories(const SampleBank& bank, const Dataset& dataset) {
  std::vector<ProtocolCategory> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < bank.samples.size(); ++i) {
    const std::string& label = bank.labels[i];
    auto [it, inserted] = index.try_emplace(label, out.size());
    if (inserted) {
      ProtocolCategory c;
      c.label = label;
      const auto ctx = dataset.contexts.find(label);
      c.context = ctx == dataset.contexts.end() ? 'A' : ctx->second;
      out.push_back(std::move(c));
    }
    out[it->second].views.push_back(bank.samples[i]);
  }
  return out;
}

ProtocolRun run_protocol_experiment(const SampleBank& bank, const Dataset& dataset,
                                    const ExperimentConfig& config, bool context_change,
                                    std::uint64_t seed) {
  ProtocolParams params = config.protocol_params();
  params.seed = seed;
  auto categories = protocol_categories(bank, dataset);
  const std::uint64_t learner_seed = mix_seed(seed, 0x1EA7ULL);

  ProtocolRun run;
  run.seed = seed;
  if (!context_change) {
    auto learner = make_learner(config, bank.vocabulary, learner_seed);
    std::tie(run.log, run.summary) = run_protocol(std::move(categories), *learner, params);
    return run;
  }

  int rho = 0;
  if (config.rho) {
    rho = *config.rho;
  } else {
    double alc = 0.0;
    if (config.alc) {
      alc = *config.alc;
    } else {
      auto learner = make_learner(config, bank.vocabulary, learner_seed);
      alc = run_protocol(categories, *learner, params).second.nlc;
      run.reference_alc = alc;
    }
    rho = pick_rho(alc, mix_seed(seed, 0x540ULL));
  }

  if (dataset.contexts.empty()) {
    if (static_cast<std::size_t>(rho) + 1 >= categories.size())
      throw InvalidArgument("protocol: rho + 1 must leave at least one category for context B");
    std::vector<std::size_t> order(categories.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(mix_seed(seed, 0xC0ULL));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t r = 0; r < order.size(); ++r)
      categories[order[r]].context = r <= static_cast<std::size_t>(rho) ? 'A' : 'B';
  }
  auto learner = make_learner(config, bank.vocabulary, learner_seed);
  std::tie(run.log, run.summary) = run_context_protocol(std::move(categories), *learner, rho, params);
  return run;
}

}  // namespace openrec
