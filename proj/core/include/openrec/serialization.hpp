#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "openrec/descriptors.hpp"
#include "openrec/evaluation.hpp"
#include "openrec/learning.hpp"
#include "openrec/nbv.hpp"
#include "openrec/representations.hpp"
#include "openrec/synthgen.hpp"

namespace openrec {

using Json = nlohmann::json;

/// Keys come out sorted (std::map-backed objects). Non-finite numbers are
/// written as null.
std::string dump_json(const Json& j, int indent = 2);
/// Throws ParseError.
Json parse_json(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// ---------------------------------------------------------------------------
// Descriptors and representations: {type, params, values}
// ---------------------------------------------------------------------------

Json descriptor_json(const GoodDescriptor& d, const GoodParams& params);
/// values holds one flattened spin-image per keypoint.
Json descriptor_json(const FeatureSet& set, const SpinImageParams& params);
Json descriptor_json(const BowHistogram& h);
Json descriptor_json(const TopicHistogram& h, const LdaParams& params);

Json to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const Json& j);

Json to_json(const TopicModel& model);
TopicModel topic_model_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Learner memories
// ---------------------------------------------------------------------------

Json to_json(const BayesMemory& memory);
BayesMemory bayes_memory_from_json(const Json& j);

Json to_json(std::span<const InstanceCategory> memory);
std::vector<InstanceCategory> instance_memory_from_json(const Json& j);

Json to_json(std::span<const FixedCategory> memory);
std::vector<FixedCategory> fixed_memory_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Evaluation results
// ---------------------------------------------------------------------------

Json to_json(const Metrics& m);

/// RFC-4180 field: quoted when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view field);
/// Joined with commas and terminated by CRLF.
std::string csv_row(std::span<const std::string> fields);

/// Header "truth", then one column per predicted label; one row per label.
std::string confusion_csv(const ConfusionMatrix& cm);
ConfusionMatrix confusion_from_csv(std::string_view csv);

Json to_json(const ProtocolEvent& e);
ProtocolEvent protocol_event_from_json(const Json& j);
/// One compact JSON object per line.
std::string protocol_jsonl(const ProtocolLog& log);

/// Flat object. Carries tau and window_mult so a log can be replayed.
Json to_json(const ProtocolSummary& s, const ProtocolLog& log);

/// Rebuilds a log from its JSONL events plus the run-level fields of the
/// summary object (termination, tau, window_mult, context_run, rho).
ProtocolLog protocol_log_from_jsonl(std::string_view jsonl, const Json& summary);

std::vector<std::string> summary_csv_header();
std::vector<std::string> summary_csv_fields(const ProtocolSummary& s, std::uint64_t seed);

Json to_json(const CandidateScore& c);

// ---------------------------------------------------------------------------
// Dataset manifest
// ---------------------------------------------------------------------------

Json manifest_json(const GeneratedDataset& dataset);

struct ManifestEntry {
  std::string category;
  std::string file;  // relative to the dataset root
};

struct Manifest {
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> views;
  std::map<std::string, char> contexts;
};

Manifest manifest_from_json(const Json& j);

}  // namespace openrec
