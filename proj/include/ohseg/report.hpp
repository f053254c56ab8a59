// Run manifests, CSV/JSON report emission and SVG figures.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ohseg/corpus.hpp"
#include "ohseg/metrics.hpp"
#include "ohseg/stats.hpp"

namespace ohseg {

const char* tool_version();

/// Provenance block embedded in every emitted report.
struct RunManifest {
  std::string command;
  Json params = Json::object();                      // every parameter, defaults included
  std::map<std::string, std::string> input_hashes;   // label -> sha256
  std::string stopword_hash;                         // empty when unused
  std::string version = tool_version();
  std::string timestamp;
  std::optional<std::uint64_t> seed;

  Json to_json() const;
};

/// SOURCE_DATE_EPOCH when set (ISO-8601 UTC), otherwise the current time.
std::string manifest_timestamp();

/// SHA-256 over the sorted relative paths and contents of every regular file
/// under `dir`.
std::string hash_directory(const std::filesystem::path& dir);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// CSV

std::string csv_escape(const std::string& field);
/// RFC 4180 records; quoted fields may contain commas, quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

inline constexpr const char* kObservationHeader = "algorithm,annotator,transcript,category,offset,score";
std::string observations_csv(const std::vector<PairObservation>& observations);
/// Throws MetricError on a malformed header or row.
std::vector<PairObservation> parse_observations_csv(const std::string& text);

struct SegmentLengthRow {
  std::string transcript;
  std::string annotator;
  std::size_t segment = 0;
  std::size_t length = 0;
};
inline constexpr const char* kSegmentLengthHeader = "transcript,annotator,segment,length";
std::vector<SegmentLengthRow> segment_length_rows(const Corpus& corpus,
                                                  const std::vector<std::string>& annotators = {});
std::string segment_lengths_csv(const std::vector<SegmentLengthRow>& rows);
std::vector<SegmentLengthRow> parse_segment_lengths_csv(const std::string& text);

// ---------------------------------------------------------------------------
// JSON summaries

Json to_json(const MicroAverage& m);
Json to_json(const ErrorCounts& e);
Json to_json(const stats::KruskalWallisResult& r);
Json to_json(const stats::DscfResult& r);
Json to_json(const AgreementReport& r);

/// Groups of per-observation scores keyed by algorithm, in first-seen order.
stats::GroupedScores groups_from_observations(const std::vector<PairObservation>& observations);

struct GroupTests {
  std::optional<stats::KruskalWallisResult> kruskal_wallis;
  std::optional<stats::DscfResult> dscf;
  std::vector<std::string> notes;  // why a test was not run
};
/// Kruskal-Wallis and asymptotic DSCF over the groups when they apply.
GroupTests run_group_tests(const stats::GroupedScores& groups, double alpha);

Json evaluation_summary(const EvalReport& report, const GroupTests& tests, const RunManifest& manifest);

// ---------------------------------------------------------------------------
// SVG figures. Both take CSV-derived rows so external tools can re-plot the
// same data.

/// Histogram of segment lengths with unit-width bins up to `max_bins`; longer
/// segments fall in the last bin.
std::string segment_length_svg(const std::vector<SegmentLengthRow>& rows, const std::string& timestamp,
                               std::size_t max_bins = 60);
/// Mean boundary similarity per algorithm with 95% CI whiskers.
std::string group_scores_svg(const std::vector<PairObservation>& observations, const std::string& timestamp);

}  // namespace ohseg
