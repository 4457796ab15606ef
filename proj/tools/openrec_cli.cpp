// openrec: dataset generation, descriptor dumps, cross-validation, teaching
// protocols and next-best-view ranking from the command line.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "openrec/config.hpp"
#include "openrec/descriptors.hpp"
#include "openrec/nbv.hpp"
#include "openrec/pcd_io.hpp"
#include "openrec/pipeline.hpp"
#include "openrec/representations.hpp"
#include "openrec/serialization.hpp"
#include "openrec/synthgen.hpp"

namespace fs = std::filesystem;
using namespace openrec;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> jobs;
  std::vector<std::string> overrides;
};

// Progress records on stderr, one JSON object per line.
void log_event(const std::string& event, Json fields = Json::object()) {
  fields["event"] = event;
  std::cerr << fields.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
}

ExperimentConfig resolve_config(const GlobalOptions& g) {
  ExperimentConfig config;
  if (!g.config_path.empty()) apply_config_text(config, read_text_file(g.config_path));
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) config.seed = *g.seed;
  if (g.out_dir) config.out_dir = *g.out_dir;
  if (g.jobs) config.jobs = *g.jobs;
  config.validate();
  return config;
}

fs::path prepare_out_dir(const ExperimentConfig& config) {
  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

Json config_echo(const ExperimentConfig& c) {
  return {{"representation", std::string(to_string(c.representation))},
          {"learner", std::string(to_string(c.learner))},
          {"seed", c.seed},
          {"good_bins", c.good_bins},
          {"dictionary_size", c.dictionary_size},
          {"topics", c.topics},
          {"folds", c.folds},
          {"tau", c.tau},
          {"ct", c.ct ? Json(*c.ct) : Json(nullptr)}};
}

int cmd_gen(const ExperimentConfig& config) {
  const fs::path root = prepare_out_dir(config);
  const auto dataset = generate_dataset(config.dataset_spec(), root);
  log_event("gen.done", {{"root", root.string()}, {"views", dataset.views.size()}});
  return 0;
}

int cmd_describe(const ExperimentConfig& config, const std::string& input,
                 const std::string& dictionary_path, const std::string& model_path) {
  const PointCloud cloud = load_pcd(input);
  if (cloud.empty()) throw InvalidArgument("'" + input + "' holds no points");
  Json out;
  switch (config.representation) {
    case Representation::Good: {
      const auto params = config.good_params();
      out = descriptor_json(compute_good(cloud, params), params);
      break;
    }
    case Representation::SpinSet:
      out = descriptor_json(compute_feature_set(cloud, config.spin_params()), config.spin_params());
      break;
    case Representation::Bow:
    case Representation::Lda:
    case Representation::LocalLda: {
      if (dictionary_path.empty()) throw InvalidArgument("describe: --dictionary is required for this representation");
      const Dictionary dict = dictionary_from_json(parse_json(read_text_file(dictionary_path)));
      const auto vectors = compute_feature_set(cloud, config.spin_params()).vectors();
      if (config.representation == Representation::Bow) {
        out = descriptor_json(bow_encode(vectors, dict));
        break;
      }
      if (model_path.empty()) throw InvalidArgument("describe: --topic-model is required for topic representations");
      const TopicModel model = topic_model_from_json(parse_json(read_text_file(model_path)));
      if (static_cast<std::size_t>(model.V) != dict.size())
        throw InvalidArgument("describe: topic model vocabulary does not match the dictionary");
      const auto words = assign_words(vectors, dict);
      out = descriptor_json(lda_infer(model, words, config.gibbs_iters, config.seed), config.lda_params());
      break;
    }
  }
  std::cout << dump_json(out) << '\n';
  return 0;
}

int cmd_cv(const ExperimentConfig& config, const std::string& dataset_root) {
  const fs::path dir = prepare_out_dir(config);
  const auto start = std::chrono::steady_clock::now();
  const Dataset dataset = load_dataset(dataset_root);
  const SampleBank bank = build_samples(dataset, config);
  log_event("cv.samples", {{"views", bank.samples.size()}});
  const ConfusionMatrix cm = run_cross_validation(bank, config);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json out = to_json(metrics(cm));
  out["config"] = config_echo(config);
  out["views"] = bank.samples.size();
  out["labels"] = cm.labels();
  write_text_file(dir / "metrics.json", dump_json(out) + "\n");
  write_text_file(dir / "confusion.csv", confusion_csv(cm));
  if (bank.dictionary) write_text_file(dir / "dictionary.json", dump_json(to_json(*bank.dictionary)) + "\n");
  log_event("cv.done", {{"accuracy", out["accuracy"]}, {"seconds", seconds}});
  std::cout << dump_json(out) << '\n';
  return 0;
}

int cmd_protocol(const ExperimentConfig& config, const std::string& dataset_root, bool context_change) {
  const fs::path dir = prepare_out_dir(config);
  const Dataset dataset = load_dataset(dataset_root);
  const SampleBank bank = build_samples(dataset, config);
  log_event("protocol.samples", {{"views", bank.samples.size()}});

  std::vector<ProtocolRun> runs(static_cast<std::size_t>(config.runs));
  parallel_for(runs.size(), config.jobs, [&](std::size_t r) {
    runs[r] = run_protocol_experiment(bank, dataset, config, context_change, config.seed + r);
  });

  std::string csv = csv_row(summary_csv_header());
  Json all = Json::array();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    Json summary = to_json(run.summary, run.log);
    summary["seed"] = run.seed;
    if (run.reference_alc) summary["reference_alc"] = *run.reference_alc;
    const std::string suffix = runs.size() == 1 ? "" : "_run" + std::to_string(r);
    write_text_file(dir / ("protocol_log" + suffix + ".jsonl"), protocol_jsonl(run.log));
    write_text_file(dir / ("summary" + suffix + ".json"), dump_json(summary) + "\n");
    csv += csv_row(summary_csv_fields(run.summary, run.seed));
    log_event("protocol.run", {{"seed", run.seed},
                               {"termination", summary["termination"]},
                               {"nlc", run.summary.nlc},
                               {"qci", run.summary.qci}});
    all.push_back(std::move(summary));
  }
  write_text_file(dir / "summary.csv", csv);
  std::cout << dump_json(runs.size() == 1 ? all[0] : all) << '\n';
  return 0;
}

int cmd_nbv(const ExperimentConfig& config, const std::string& world_path, const std::string& poses_path) {
  const PointCloud world = load_pcd(world_path);
  const auto poses = parse_poses_json(read_text_file(poses_path));
  if (poses.empty()) throw InvalidArgument("nbv: no candidate poses");
  if (static_cast<std::size_t>(config.nbv_current_pose) >= poses.size())
    throw InvalidArgument("nbv_current_pose: index out of range");
  const auto& current = poses[static_cast<std::size_t>(config.nbv_current_pose)];
  auto scores = evaluate_candidates(world, poses, current, config.nbv_params());

  std::vector<double> weights;
  for (const auto& s : scores) weights.push_back(s.weighted);
  const std::size_t selected = select_next_view(weights, config.seed);

  std::stable_sort(scores.begin(), scores.end(),
                   [](const CandidateScore& a, const CandidateScore& b) { return a.weighted > b.weighted; });
  Json ranking = Json::array();
  for (const auto& s : scores) ranking.push_back(to_json(s));
  const Json out = {{"current_pose", config.nbv_current_pose},
                    {"seed", config.seed},
                    {"selected", selected},
                    {"ranking", ranking}};
  std::cout << dump_json(out) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-ended 3D object category learning toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed (overrides the config)");
  app.add_option("--out-dir", g.out_dir, "output directory (overrides the config)");
  app.add_option("--jobs", g.jobs, "worker threads (overrides the config)");
  app.add_option("--set", g.overrides, "config override key=value; repeatable");

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset into --out-dir");

  std::string input, dictionary_path, model_path;
  auto* describe = app.add_subcommand("describe", "print the descriptor of one PCD file as JSON");
  describe->add_option("input", input, "point cloud (.pcd)")->required();
  describe->add_option("--dictionary", dictionary_path, "dictionary JSON for bow and topic representations");
  describe->add_option("--topic-model", model_path, "topic model JSON for topic representations");

  std::string dataset_root;
  auto* cv = app.add_subcommand("cv", "k-fold cross-validation; writes metrics.json and confusion.csv");
  cv->add_option("dataset", dataset_root, "dataset root")->required();

  bool context_change = false;
  auto* protocol = app.add_subcommand("protocol", "simulated-teacher experiment; writes JSONL log and summaries");
  protocol->add_option("dataset", dataset_root, "dataset root")->required();
  protocol->add_flag("--context-change", context_change, "run the two-context variant");

  std::string world_path, poses_path;
  auto* nbv = app.add_subcommand("nbv", "rank candidate camera poses by weighted viewpoint entropy");
  nbv->add_option("world", world_path, "world point cloud (.pcd)")->required();
  nbv->add_option("poses", poses_path, "candidate poses JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const ExperimentConfig config = resolve_config(g);
    if (gen->parsed()) return cmd_gen(config);
    if (describe->parsed()) return cmd_describe(config, input, dictionary_path, model_path);
    if (cv->parsed()) return cmd_cv(config, dataset_root);
    if (protocol->parsed()) return cmd_protocol(config, dataset_root, context_change);
    if (nbv->parsed()) return cmd_nbv(config, world_path, poses_path);
  } catch (const std::exception& e) {
    std::cerr << "openrec: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
