#include "openrec/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace openrec {

namespace {

Json vec_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vec_from(const Json& j) {
  if (!j.is_array()) throw ParseError("expected a number array", 0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Json matrix_json(const FeatureMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(vec_json(m.col(c)));
  return out;
}

FeatureMatrix matrix_from(const Json& j) {
  if (!j.is_array()) throw ParseError("expected a list of feature vectors", 0);
  std::vector<Eigen::VectorXd> cols;
  for (const auto& c : j) cols.push_back(vec_from(c));
  for (const auto& c : cols)
    if (c.size() != cols.front().size()) throw ParseError("feature vectors differ in length", 0);
  return feature_matrix(cols);
}

// Wraps nlohmann's type errors so callers only see ParseError.
template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what(), 0);
  }
}

// RFC-4180 record splitter; returns rows of fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw ParseError("csv: unterminated quoted field", rows.size() + 1);
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("json: ") + e.what(), 0);
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Json descriptor_json(const GoodDescriptor& d, const GoodParams& params) {
  Json order = Json::array();
  for (auto p : d.order) order.push_back(std::string(to_string(p)));
  return {{"type", "good"},
          {"params",
           {{"n", params.n},
            {"sign_threshold", params.sign_threshold},
            {"epsilon", params.epsilon},
            {"order", order},
            {"side_length", d.side_length}}},
          {"values", d.bins}};
}

Json descriptor_json(const FeatureSet& set, const SpinImageParams& params) {
  Json values = Json::array();
  for (const auto& s : set.spin_images) values.push_back(vec_json(s.flattened()));
  return {{"type", "spinset"},
          {"params",
           {{"voxel", params.voxel},
            {"image_width", params.image_width},
            {"support_length", params.support_length},
            {"support_angle_deg", params.support_angle_deg},
            {"normal_k", params.normal_k},
            {"keypoints", set.size()}}},
          {"values", values}};
}

Json descriptor_json(const BowHistogram& h) {
  return {{"type", "bow"}, {"params", {{"dictionary_size", h.counts.size()}}}, {"values", h.counts}};
}

Json descriptor_json(const TopicHistogram& h, const LdaParams& params) {
  return {{"type", "lda"},
          {"params",
           {{"K", params.K},
            {"alpha", params.alpha},
            {"beta", params.beta},
            {"iterations", params.iterations},
            {"topic_counts", h.topic_counts}}},
          {"values", h.theta}};
}

Json to_json(const Dictionary& dict) {
  Json words = Json::array();
  for (const auto& w : dict.words) words.push_back(vec_json(w));
  return {{"size", dict.size()}, {"dim", dict.dim()}, {"words", words}};
}

Dictionary dictionary_from_json(const Json& j) {
  return guarded("dictionary", [&] {
    Dictionary d;
    for (const auto& w : j.at("words")) d.words.push_back(vec_from(w));
    for (const auto& w : d.words)
      if (w.size() != d.dim()) throw ParseError("dictionary: words differ in length", 0);
    return d;
  });
}

Json to_json(const TopicModel& m) {
  return {{"scope", m.scope}, {"K", m.K},         {"V", m.V},         {"alpha", m.alpha},
          {"beta", m.beta},   {"rng_seed", m.rng_seed}, {"updates", m.updates},
          {"n_wk", m.n_wk},   {"n_k", m.n_k}};
}

TopicModel topic_model_from_json(const Json& j) {
  return guarded("topic model", [&] {
    TopicModel m;
    m.scope = j.at("scope").get<std::string>();
    m.K = j.at("K").get<int>();
    m.V = j.at("V").get<int>();
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    m.updates = j.at("updates").get<std::uint64_t>();
    m.n_wk = j.at("n_wk").get<std::vector<std::int64_t>>();
    m.n_k = j.at("n_k").get<std::vector<std::int64_t>>();
    if (m.K < 1 || m.V < 1 || m.n_k.size() != static_cast<std::size_t>(m.K) ||
        m.n_wk.size() != static_cast<std::size_t>(m.K) * static_cast<std::size_t>(m.V))
      throw ParseError("topic model: counter sizes do not match K and V", 0);
    return m;
  });
}

Json to_json(const BayesMemory& memory) {
  Json cats = Json::object();
  for (const auto& [label, c] : memory.categories)
    cats[label] = {{"count", c.count}, {"a", vec_json(c.a)}};
  return {{"total", memory.total}, {"categories", cats}};
}

BayesMemory bayes_memory_from_json(const Json& j) {
  return guarded("bayes memory", [&] {
    BayesMemory m;
    m.total = j.at("total").get<std::int64_t>();
    std::int64_t sum = 0;
    for (const auto& [label, c] : j.at("categories").items()) {
      BayesCategory cat;
      cat.label = label;
      cat.count = c.at("count").get<std::int64_t>();
      cat.a = vec_from(c.at("a"));
      if (cat.count < 1 || cat.a.size() == 0 || (cat.a.array() < 0.0).any())
        throw ParseError("bayes memory: invalid category '" + label + "'", 0);
      if (!m.categories.empty() && m.categories.begin()->second.a.size() != cat.a.size())
        throw ParseError("bayes memory: dimension mismatch", 0);
      const Eigen::VectorXd smoothed = cat.a.array() + 1.0;
      cat.cond = smoothed / smoothed.sum();
      sum += cat.count;
      m.categories.emplace(label, std::move(cat));
    }
    if (sum != m.total) throw ParseError("bayes memory: total does not match category counts", 0);
    for (auto& [label, cat] : m.categories)
      cat.prior = static_cast<double>(cat.count) / static_cast<double>(m.total);
    return m;
  });
}

Json to_json(std::span<const InstanceCategory> memory) {
  Json out = Json::array();
  for (const auto& c : memory) {
    Json inst = Json::array();
    for (const auto& m : c.instances) inst.push_back(matrix_json(m));
    out.push_back({{"label", c.label}, {"instances", inst}});
  }
  return out;
}

std::vector<InstanceCategory> instance_memory_from_json(const Json& j) {
  return guarded("instance memory", [&] {
    std::vector<InstanceCategory> out;
    for (const auto& c : j) {
      InstanceCategory cat{c.at("label").get<std::string>(), {}};
      for (const auto& m : c.at("instances")) cat.instances.push_back(matrix_from(m));
      out.push_back(std::move(cat));
    }
    return out;
  });
}

Json to_json(std::span<const FixedCategory> memory) {
  Json out = Json::array();
  for (const auto& c : memory) {
    Json inst = Json::array();
    for (const auto& v : c.instances) inst.push_back(vec_json(v));
    out.push_back({{"label", c.label}, {"instances", inst}});
  }
  return out;
}

std::vector<FixedCategory> fixed_memory_from_json(const Json& j) {
  return guarded("fixed memory", [&] {
    std::vector<FixedCategory> out;
    for (const auto& c : j) {
      FixedCategory cat{c.at("label").get<std::string>(), {}};
      for (const auto& v : c.at("instances")) cat.instances.push_back(vec_from(v));
      out.push_back(std::move(cat));
    }
    return out;
  });
}

Json to_json(const Metrics& m) {
  return {{"accuracy", m.accuracy},
          {"precision_micro", m.precision_micro},
          {"precision_macro", m.precision_macro},
          {"recall_micro", m.recall_micro},
          {"recall_macro", m.recall_macro},
          {"macro_precision_undefined", m.macro_precision_undefined},
          {"macro_recall_undefined", m.macro_recall_undefined}};
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string csv_row(std::span<const std::string> fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += csv_field(fields[i]);
  }
  out += "\r\n";
  return out;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::vector<std::string> header{"truth"};
  header.insert(header.end(), cm.labels().begin(), cm.labels().end());
  std::string out = csv_row(header);
  for (std::size_t r = 0; r < cm.size(); ++r) {
    std::vector<std::string> row{cm.labels()[r]};
    for (std::size_t c = 0; c < cm.size(); ++c) row.push_back(std::to_string(cm.at(r, c)));
    out += csv_row(row);
  }
  return out;
}

ConfusionMatrix confusion_from_csv(std::string_view csv) {
  const auto rows = parse_csv(csv);
  if (rows.empty()) throw ParseError("confusion csv: empty", 0);
  const auto& header = rows.front();
  if (header.empty() || header.front() != "truth") throw ParseError("confusion csv: bad header", 1);
  std::vector<std::string> labels(header.begin() + 1, header.end());
  if (rows.size() != labels.size() + 1) throw ParseError("confusion csv: matrix is not square", 0);
  std::vector<std::vector<std::int64_t>> counts;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != labels.size() + 1 || rows[r].front() != labels[r - 1])
      throw ParseError("confusion csv: row does not match header", r + 1);
    std::vector<std::int64_t> row;
    for (std::size_t c = 1; c < rows[r].size(); ++c) {
      try {
        std::size_t used = 0;
        row.push_back(std::stoll(rows[r][c], &used));
        if (used != rows[r][c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("confusion csv: bad count '" + rows[r][c] + "'", r + 1);
      }
    }
    counts.push_back(std::move(row));
  }
  return ConfusionMatrix::from_counts(std::move(labels), std::move(counts));
}

Json to_json(const ProtocolEvent& e) {
  Json j = {{"iteration", e.iteration},
            {"action", std::string(to_string(e.action))},
            {"category", e.category},
            {"view_id", e.view_id},
            {"n", e.n},
            {"context", std::string(1, e.context)}};
  if (e.action == Action::Ask) {
    j["predicted"] = e.predicted;
    j["correct"] = e.correct;
    j["s"] = e.s;
  }
  return j;
}

ProtocolEvent protocol_event_from_json(const Json& j) {
  return guarded("protocol event", [&] {
    ProtocolEvent e;
    e.iteration = j.at("iteration").get<std::int64_t>();
    const auto action = j.at("action").get<std::string>();
    if (action == "teach") e.action = Action::Teach;
    else if (action == "ask") e.action = Action::Ask;
    else if (action == "correct") e.action = Action::Correct;
    else throw ParseError("protocol event: unknown action '" + action + "'", 0);
    e.category = j.at("category").get<std::string>();
    e.view_id = j.at("view_id").get<std::string>();
    e.n = j.at("n").get<int>();
    const auto ctx = j.at("context").get<std::string>();
    if (ctx.size() != 1) throw ParseError("protocol event: context must be one letter", 0);
    e.context = ctx[0];
    if (e.action == Action::Ask) {
      e.predicted = j.at("predicted").get<std::string>();
      e.correct = j.at("correct").get<bool>();
      e.s = j.at("s").get<double>();
    }
    return e;
  });
}

std::string protocol_jsonl(const ProtocolLog& log) {
  std::string out;
  for (const auto& e : log.events) {
    out += to_json(e).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

Json to_json(const ProtocolSummary& s, const ProtocolLog& log) {
  Json j = {{"qci", s.qci},
            {"nlc", s.nlc},
            {"aic", s.aic},
            {"gca", s.gca},
            {"apa", s.apa},
            {"termination", std::string(to_string(s.termination))},
            {"tau", log.tau},
            {"window_mult", log.window_mult},
            {"context_run", s.context_run}};
  if (s.context_run) {
    j["rho"] = s.rho;
    j["alc1"] = s.alc1;
    j["alc2"] = s.alc2;
    j["adaptability"] = s.adaptability ? Json(*s.adaptability) : Json(nullptr);
  }
  return j;
}

ProtocolLog protocol_log_from_jsonl(std::string_view jsonl, const Json& summary) {
  ProtocolLog log;
  std::size_t line_no = 0, start = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    ++line_no;
    const std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      log.events.push_back(protocol_event_from_json(parse_json(line)));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  for (const auto& e : log.events)
    if (e.action == Action::Teach && e.n > static_cast<int>(log.introduced.size())) {
      log.introduced.push_back(e.category);
      log.introduced_at.push_back(e.iteration);
    }
  return guarded("protocol summary", [&] {
    const auto term = summary.at("termination").get<std::string>();
    if (term == to_string(Termination::Breakpoint)) log.termination = Termination::Breakpoint;
    else if (term == to_string(Termination::LackOfData)) log.termination = Termination::LackOfData;
    else throw ParseError("protocol summary: unknown termination '" + term + "'", 0);
    log.tau = summary.at("tau").get<double>();
    log.window_mult = summary.at("window_mult").get<int>();
    log.context_run = summary.at("context_run").get<bool>();
    if (log.context_run) log.rho = summary.at("rho").get<int>();
    return log;
  });
}

std::vector<std::string> summary_csv_header() {
  return {"seed", "termination", "qci", "nlc", "aic", "gca", "apa",
          "context_run", "rho", "alc1", "alc2", "adaptability"};
}

std::vector<std::string> summary_csv_fields(const ProtocolSummary& s, std::uint64_t seed) {
  const auto num = [](double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
  };
  return {std::to_string(seed),
          std::string(to_string(s.termination)),
          std::to_string(s.qci),
          std::to_string(s.nlc),
          num(s.aic),
          num(s.gca),
          num(s.apa),
          s.context_run ? "true" : "false",
          s.context_run ? std::to_string(s.rho) : "",
          s.context_run ? std::to_string(s.alc1) : "",
          s.context_run ? std::to_string(s.alc2) : "",
          s.adaptability ? num(*s.adaptability) : ""};
}

Json to_json(const CandidateScore& c) {
  return {{"index", c.index},       {"visible_points", c.visible_points},
          {"clusters", c.clusters}, {"entropy", c.entropy},
          {"weighted", c.weighted}, {"probability", c.probability}};
}

Json manifest_json(const GeneratedDataset& dataset) {
  const DatasetSpec& spec = dataset.spec;
  Json families = Json::array();
  for (const auto& f : spec.categories)
    families.push_back({{"name", f.name},
                        {"kind", std::string(to_string(f.kind))},
                        {"dimensions", f.dimensions},
                        {"jitter", f.jitter}});
  Json views = Json::array();
  for (const auto& v : dataset.views)
    views.push_back({{"category", v.category},
                     {"file", v.file},
                     {"kind", std::string(to_string(v.spec.kind))},
                     {"dimensions", v.spec.dimensions},
                     {"points", v.spec.points},
                     {"seed", v.spec.seed}});
  Json j = {{"seed", spec.seed},
            {"views_per_category", spec.views_per_category},
            {"points", spec.points},
            {"noise_sigma", spec.noise_sigma},
            {"partial_views", spec.partial_views},
            {"camera_distance", spec.camera_distance},
            {"min_elevation_deg", spec.min_elevation_deg},
            {"max_elevation_deg", spec.max_elevation_deg},
            {"categories", families},
            {"views", views}};
  if (!dataset.contexts.empty()) {
    Json ctx = Json::object();
    for (const auto& [name, c] : dataset.contexts) ctx[name] = std::string(1, c);
    j["contexts"] = ctx;
  }
  return j;
}

Manifest manifest_from_json(const Json& j) {
  return guarded("manifest", [&] {
    Manifest m;
    m.seed = j.value("seed", std::uint64_t{0});
    for (const auto& v : j.at("views"))
      m.views.push_back({v.at("category").get<std::string>(), v.at("file").get<std::string>()});
    if (j.contains("contexts")) {
      for (const auto& [name, c] : j.at("contexts").items()) {
        const auto s = c.get<std::string>();
        if (s != "A" && s != "B") throw ParseError("manifest: context must be A or B", 0);
        m.contexts[name] = s[0];
      }
    }
    return m;
  });
}

}  // namespace openrec
