// Transcript and segmentation data model, on-disk formats and validation.
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ohseg {

using Json = nlohmann::ordered_json;

/// One rule violation found while validating corpus data.
struct Finding {
  std::string where;  // file, transcript id or annotator/transcript key
  std::string rule;   // machine-readable rule name, e.g. "boundary_range"
  std::string message;
};

class CorpusError : public std::runtime_error {
 public:
  explicit CorpusError(std::vector<Finding> findings);
  const std::vector<Finding>& findings() const { return findings_; }

 private:
  std::vector<Finding> findings_;
};

struct Turn {
  std::string speaker;
  std::vector<std::string> sentences;
  // Per-sentence POS tags, parallel to tokenize(sentence).
  std::optional<std::vector<std::vector<std::string>>> tags;
  Json extra = Json::object();
};

struct Transcript {
  std::string id;
  std::optional<std::string> title;
  std::vector<Turn> turns;
  Json extra = Json::object();

  std::size_t sentence_count() const;
  std::size_t turn_count() const { return turns.size(); }
  /// Flattened, 0-based sentence list.
  std::vector<std::string> sentences() const;
  /// Flattened per-sentence tags; nullopt when any turn lacks tags.
  std::optional<std::vector<std::vector<std::string>>> sentence_tags() const;
};

/// Half-open sentence range [start, end) marking a selected extract.
struct SentenceRange {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const SentenceRange&, const SentenceRange&) = default;
};

struct Segmentation {
  std::string transcript_id;
  std::string annotator;
  std::vector<std::size_t> boundaries;  // gap g separates sentence g-1 from g
  std::optional<std::vector<SentenceRange>> selected;
  Json extra = Json::object();

  std::size_t segment_count() const { return boundaries.size() + 1; }
};

struct Corpus {
  std::vector<Transcript> transcripts;
  std::vector<Segmentation> segmentations;

  const Transcript* find_transcript(const std::string& id) const;
  const Segmentation* find_segmentation(const std::string& annotator,
                                        const std::string& transcript_id) const;
  /// Annotator names in sorted order.
  std::vector<std::string> annotators() const;
};

// JSON conversion. Unknown fields land in `extra` and are written back out.
Transcript transcript_from_json(const Json& j);
Json to_json(const Transcript& t, bool include_tags = true);
Segmentation segmentation_from_json(const Json& j);
Json to_json(const Segmentation& s);

std::vector<Finding> validate_transcript(const Transcript& t);
std::vector<Finding> validate_segmentation(const Segmentation& s, const Transcript& t);
/// Boundary-only checks (ordering, duplicates, range) against a sentence count.
std::vector<Finding> validate_boundaries(const std::vector<std::size_t>& boundaries,
                                         std::size_t sentence_count, const std::string& where);

/// Parses and validates a corpus directory, collecting every finding.
/// Never throws for data problems; filesystem errors still propagate.
std::pair<Corpus, std::vector<Finding>> scan_corpus(const std::filesystem::path& dir);

/// Loads `dir/transcripts/*.json` and `dir/segmentations/<annotator>/*.json`.
/// Throws CorpusError on any parse or validation problem.
Corpus load_corpus(const std::filesystem::path& dir);

/// Loads only segmentation documents laid out as `<dir>/<annotator>/<id>.json`.
std::vector<Segmentation> load_segmentations(const std::filesystem::path& dir);

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
void save_segmentation(const Segmentation& s, const std::filesystem::path& segmentations_dir);

/// Writes `contents` to a temp file next to `path` and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);
/// Pretty JSON with a trailing newline, as stored on disk.
std::string dump_document(const Json& j);

/// Sentence counts of each segment; sums to t.sentence_count().
std::vector<std::size_t> segment_masses(const Segmentation& seg, const Transcript& t);
std::vector<std::size_t> segment_masses(const std::vector<std::size_t>& boundaries,
                                        std::size_t sentence_count);

struct LengthStatistics {
  std::size_t segment_count = 0;
  std::size_t boundary_count = 0;
  std::size_t segmentation_count = 0;
  std::size_t potential_boundaries = 0;
  double mean = 0;
  double stddev = 0;  // sample standard deviation
  std::size_t min = 0;
  std::size_t max = 0;
  std::size_t median = 0;  // lower median
  double placement_rate = 0;
  std::vector<std::pair<std::string, std::size_t>> per_transcript_median;
};

/// Lower median: for an even count, the smaller of the two middle values.
std::size_t lower_median(std::vector<std::size_t> values);

/// Statistics over the masses of every segmentation in the corpus, optionally
/// restricted to the named annotators.
LengthStatistics length_statistics(const Corpus& corpus,
                                   const std::vector<std::string>& annotators = {});

}  // namespace ohseg
