#include "openrec/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace openrec {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw InvalidArgument(std::string(key) + ": expected " + expected + ", got '" + std::string(value) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view v, const char* expected) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, expected);
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) bad_value(key, v, expected);
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

bool is_none(std::string_view v) { return v == "none" || v.empty(); }

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)>;

template <typename T>
Setter num(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, std::string_view k, std::string_view v) {
    c.*field = parse_number<T>(k, v, std::is_integral_v<T> ? "an integer" : "a number");
  };
}

Setter flag(bool ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, std::string_view k, std::string_view v) { c.*field = parse_bool(k, v); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"representation",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (v == "good") c.representation = Representation::Good;
         else if (v == "spinset") c.representation = Representation::SpinSet;
         else if (v == "bow") c.representation = Representation::Bow;
         else if (v == "lda") c.representation = Representation::Lda;
         else if (v == "local_lda") c.representation = Representation::LocalLda;
         else bad_value(k, v, "good, spinset, bow, lda or local_lda");
       }},
      {"learner",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (v == "instance") c.learner = LearnerKind::Instance;
         else if (v == "bayes") c.learner = LearnerKind::Bayes;
         else bad_value(k, v, "instance or bayes");
       }},
      {"instance_mode",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (v == "a1") c.instance_mode = InstanceMode::A1;
         else if (v == "a2") c.instance_mode = InstanceMode::A2;
         else bad_value(k, v, "a1 or a2");
       }},
      {"good_bins", num(&ExperimentConfig::good_bins)},
      {"sign_threshold", num(&ExperimentConfig::sign_threshold)},
      {"voxel", num(&ExperimentConfig::voxel)},
      {"image_width", num(&ExperimentConfig::image_width)},
      {"support_length", num(&ExperimentConfig::support_length)},
      {"support_angle", num(&ExperimentConfig::support_angle)},
      {"normal_k", num(&ExperimentConfig::normal_k)},
      {"dictionary_size", num(&ExperimentConfig::dictionary_size)},
      {"dictionary_pool", num(&ExperimentConfig::dictionary_pool)},
      {"kmeans_iters", num(&ExperimentConfig::kmeans_iters)},
      {"topics", num(&ExperimentConfig::topics)},
      {"alpha", num(&ExperimentConfig::alpha)},
      {"beta", num(&ExperimentConfig::beta)},
      {"gibbs_iters", num(&ExperimentConfig::gibbs_iters)},
      {"ct",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (is_none(v)) c.ct.reset();
         else c.ct = parse_number<double>(k, v, "a number or none");
       }},
      {"folds", num(&ExperimentConfig::folds)},
      {"tau", num(&ExperimentConfig::tau)},
      {"window_mult", num(&ExperimentConfig::window_mult)},
      {"breakpoint_limit", num(&ExperimentConfig::breakpoint_limit)},
      {"views_per_teach", num(&ExperimentConfig::views_per_teach)},
      {"runs", num(&ExperimentConfig::runs)},
      {"rho",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (is_none(v)) c.rho.reset();
         else c.rho = parse_number<int>(k, v, "an integer or none");
       }},
      {"alc",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (is_none(v)) c.alc.reset();
         else c.alc = parse_number<double>(k, v, "a number or none");
       }},
      {"nbv_sigma", num(&ExperimentConfig::nbv_sigma)},
      {"nbv_resolution", num(&ExperimentConfig::nbv_resolution)},
      {"nbv_cluster_link", num(&ExperimentConfig::nbv_cluster_link)},
      {"nbv_cluster_min_pts", num(&ExperimentConfig::nbv_cluster_min_pts)},
      {"nbv_current_pose", num(&ExperimentConfig::nbv_current_pose)},
      {"categories",
       [](ExperimentConfig& c, std::string_view, std::string_view v) {
         c.categories.clear();
         while (!v.empty()) {
           const auto comma = v.find(',');
           const auto item = trim(v.substr(0, comma));
           if (!item.empty()) c.categories.emplace_back(item);
           if (comma == std::string_view::npos) break;
           v.remove_prefix(comma + 1);
         }
       }},
      {"views_per_category", num(&ExperimentConfig::views_per_category)},
      {"points", num(&ExperimentConfig::points)},
      {"noise_sigma", num(&ExperimentConfig::noise_sigma)},
      {"partial_views", flag(&ExperimentConfig::partial_views)},
      {"assign_contexts", flag(&ExperimentConfig::assign_contexts)},
      {"seed", num(&ExperimentConfig::seed)},
      {"jobs", num(&ExperimentConfig::jobs)},
      {"out_dir", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.out_dir = v; }},
  };
  return table;
}

void require(bool ok, const char* key, const char* rule) {
  if (!ok) throw InvalidArgument(std::string(key) + ": " + rule);
}

}  // namespace

std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::Good: return "good";
    case Representation::SpinSet: return "spinset";
    case Representation::Bow: return "bow";
    case Representation::Lda: return "lda";
    case Representation::LocalLda: return "local_lda";
  }
  return "?";
}

std::string_view to_string(LearnerKind k) { return k == LearnerKind::Instance ? "instance" : "bayes"; }

void ExperimentConfig::validate() const {
  require(good_bins >= 2, "good_bins", "must be >= 2");
  require(sign_threshold >= 0.0, "sign_threshold", "must be >= 0");
  require(voxel > 0.0, "voxel", "must be > 0");
  require(image_width >= 1, "image_width", "must be >= 1");
  require(support_length > 0.0, "support_length", "must be > 0");
  require(support_angle > 0.0 && support_angle <= 180.0, "support_angle", "must be in (0, 180]");
  require(normal_k >= 3, "normal_k", "must be >= 3");
  require(dictionary_size >= 2, "dictionary_size", "must be >= 2");
  require(dictionary_pool >= dictionary_size, "dictionary_pool", "must be >= dictionary_size");
  require(kmeans_iters >= 1, "kmeans_iters", "must be >= 1");
  require(topics >= 1, "topics", "must be >= 1");
  require(alpha > 0.0, "alpha", "must be > 0");
  require(beta > 0.0, "beta", "must be > 0");
  require(gibbs_iters >= 1, "gibbs_iters", "must be >= 1");
  require(!ct || *ct >= 0.0, "ct", "must be >= 0");
  require(folds >= 2, "folds", "must be >= 2");
  require(tau >= 0.0 && tau <= 1.0, "tau", "must be in [0, 1]");
  require(window_mult >= 1, "window_mult", "must be >= 1");
  require(breakpoint_limit >= 1, "breakpoint_limit", "must be >= 1");
  require(views_per_teach >= 1, "views_per_teach", "must be >= 1");
  require(runs >= 1, "runs", "must be >= 1");
  require(!rho || *rho >= 1, "rho", "must be >= 1");
  require(!alc || *alc > 0.0, "alc", "must be > 0");
  require(nbv_sigma > 0.0, "nbv_sigma", "must be > 0");
  require(nbv_resolution >= 1, "nbv_resolution", "must be >= 1");
  require(nbv_cluster_link > 0.0, "nbv_cluster_link", "must be > 0");
  require(nbv_cluster_min_pts >= 1, "nbv_cluster_min_pts", "must be >= 1");
  require(nbv_current_pose >= 0, "nbv_current_pose", "must be >= 0");
  require(views_per_category >= 1, "views_per_category", "must be >= 1");
  require(points >= 50, "points", "must be >= 50");
  require(noise_sigma >= 0.0, "noise_sigma", "must be >= 0");
  require(jobs >= 1, "jobs", "must be >= 1");
  require(!out_dir.empty(), "out_dir", "must not be empty");
  require(learner == LearnerKind::Instance || representation != Representation::SpinSet, "learner",
          "bayes needs a fixed-size representation (good, bow, lda or local_lda)");
  std::set<std::string> known;
  for (const auto& f : default_families()) known.insert(f.name);
  std::set<std::string> seen;
  for (const auto& c : categories) {
    if (!known.count(c)) throw InvalidArgument("categories: unknown category '" + c + "'");
    if (!seen.insert(c).second) throw InvalidArgument("categories: duplicate '" + c + "'");
  }
}

GoodParams ExperimentConfig::good_params() const { return {good_bins, sign_threshold, kGoodEpsilon}; }

SpinImageParams ExperimentConfig::spin_params() const {
  return {voxel, image_width, support_length, support_angle, normal_k};
}

LdaParams ExperimentConfig::lda_params() const { return {topics, alpha, beta, gibbs_iters}; }

ProtocolParams ExperimentConfig::protocol_params() const {
  ProtocolParams p;
  p.tau = tau;
  p.window_mult = window_mult;
  p.breakpoint_limit = breakpoint_limit;
  p.views_per_teach = views_per_teach;
  p.seed = seed;
  return p;
}

NbvParams ExperimentConfig::nbv_params() const {
  NbvParams p;
  p.sigma = nbv_sigma;
  p.render.resolution = nbv_resolution;
  p.cluster_link = nbv_cluster_link;
  p.cluster_min_pts = static_cast<std::size_t>(nbv_cluster_min_pts);
  return p;
}

DatasetSpec ExperimentConfig::dataset_spec() const {
  DatasetSpec s;
  if (!categories.empty()) {
    std::vector<CategoryFamily> picked;
    for (const auto& name : categories)
      for (const auto& f : default_families())
        if (f.name == name) picked.push_back(f);
    s.categories = std::move(picked);
  }
  s.views_per_category = views_per_category;
  s.points = points;
  s.noise_sigma = noise_sigma;
  s.seed = seed;
  s.partial_views = partial_views;
  s.assign_contexts = assign_contexts;
  return s;
}

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw InvalidArgument("unknown config key '" + std::string(key) + "'");
  it->second(config, key, trim(value));
}

void apply_config_text(ExperimentConfig& config, std::string_view text) {
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("missing key", line_no);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    else if (value.find('"') != std::string_view::npos)
      throw ParseError("unbalanced quote", line_no);
    if (!seen.insert(std::string(key)).second)
      throw ParseError("duplicate key '" + std::string(key) + "'", line_no);
    try {
      set_config_value(config, key, value);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : setters()) keys.push_back(k);
  return keys;
}

}  // namespace openrec
