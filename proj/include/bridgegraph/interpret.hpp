#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgegraph/cluster.hpp"
#include "bridgegraph/config.hpp"

namespace bridgegraph {

struct InterpretError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One feature line of the prompt: a name and its cluster z-score.
struct FeatureZ {
  std::string name;
  double z = 0.0;
};

// Everything the prompt template needs for one cluster.
struct InterpretationRequest {
  int cluster_id = 0;
  int bridge_count = 0;                 // > 0; empty clusters are never rendered
  std::vector<std::string> city_names;  // aligned with city_pct
  std::vector<double> city_pct;         // must sum to 100 +- 0.1
  std::vector<FeatureZ> top_features;   // descending |z|, at most 8 entries
};

// Builds the request for one profile row: city axes copied from the table,
// features ranked by |z| descending (ties broken by name) and truncated to
// eight. Throws InterpretError when the row is empty or its city percentages
// do not sum to 100 +- 0.1.
InterpretationRequest make_request(const ClusterProfileTable& table,
                                   std::size_t row);

// Renders the five-section prompt. Byte-deterministic: the same request
// always yields the same string. City percentages are printed to one decimal,
// z-scores to two. Performs no validation; callers go through make_request.
std::string render_prompt(const InterpretationRequest& req);

// Result of splitting a model reply into the five required sections.
//
// A line counts as a section header when, after trimming and stripping
// decoration, it consists of exactly one of the five titles below. Accepted
// decoration, in order: leading '#' marks, a numbering token ("1.", "1)",
// "(1)", "[1]"), an opening bracket '[' or U+3010, the title itself
// (ASCII case-insensitive), a closing bracket ']' or U+3011, and a trailing
// ':' or U+FF1A. Titles:
//
//   Cluster Overview / Strengths / Weaknesses / Bridge Role Type /
//   City-Specific Context
//
// The five headers must appear in this order; text before the first header
// is ignored; each body is the text up to the next matched header and must
// be non-empty after trimming.
struct SectionSplit {
  bool ok = false;
  std::string overview;
  std::string strengths;
  std::string weaknesses;
  std::string role;
  std::string city_context;
  std::string failure;  // first missing or empty section's title when !ok
};

// Pure function of the text; no I/O.
SectionSplit validate_sections(const std::string& text);

// One cluster's interpretation. When valid, the five section bodies are
// stored trimmed and char_count is their total byte length; when invalid,
// failure carries the last error seen (transport, bad payload, or the first
// missing/empty section title) and the bodies are empty.
struct InterpretationReport {
  int cluster_id = 0;
  bool valid = false;
  std::string overview;
  std::string strengths;
  std::string weaknesses;
  std::string role;
  std::string city_context;
  std::size_t char_count = 0;
  std::string failure;
  std::string generated_at;  // ISO-8601 UTC, stamped when the call finishes
  std::string model;
  double temperature = 0.0;
  int attempts = 0;  // HTTP requests actually issued
};

// Issues one chat request for the prompt and parses the reply into sections.
// Wire format is chat-completions style: the request carries {"model",
// "temperature", "messages": [{"role": "user", "content": prompt}]} and the
// reply must answer {"choices": [{"message": {"content": ...}}]}; cfg.endpoint
// is the full URL of the completions route, and cfg.temperature must lie in
// [0, 2]. Retries (up to cfg.max_retries extra requests) when the transport
// fails, the reply is not the expected JSON shape, or section validation fails.
// Exhausted retries produce an invalid report; this function never throws on
// server behaviour, so one bad cluster cannot abort the run. Requests are
// strictly sequential: the next begins only after the previous finished.
InterpretationReport generate_report(const LlmConfig& cfg, int cluster_id,
                                     const std::string& prompt);

// make_request + render_prompt + generate_report over every profile row, in
// row order. Throws only on request-construction errors (invalid table).
std::vector<InterpretationReport> interpret_clusters(
    const LlmConfig& cfg, const ClusterProfileTable& table);

// Aggregate quality over one batch of reports.
struct QualityMetrics {
  double completeness_rate = 0.0;      // valid / attempted
  double length_variance_ratio = 1.0;  // max char_count / min char_count, valid only
  double mean_length = 0.0;            // mean char_count over valid reports
};

// Throws InterpretError when no report in the batch is valid.
QualityMetrics quality_metrics(const std::vector<InterpretationReport>& reports);

// The standard temperature ladder for stability comparisons.
std::vector<double> temperature_sweep();

// Writes one report as Markdown: a metadata block, then the five canonical
// headers with their bodies. Invalid reports get the metadata block and the
// failure reason instead of sections.
void write_report_md(const InterpretationReport& r, const std::string& path);

// One row of quality_metrics.csv.
struct TemperatureRun {
  double temperature = 0.0;
  QualityMetrics metrics;
};

// quality_metrics.csv: temperature,completeness_rate,length_variance_ratio,
// mean_length. Temperatures to two decimals, rates/ratios to four, mean
// length to two.
void write_quality_metrics_csv(const std::vector<TemperatureRun>& runs,
                               const std::string& path);

}  // namespace bridgegraph
