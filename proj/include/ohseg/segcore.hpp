// Segmenter contract shared by all algorithms, plus the uniform baseline.
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ohseg/corpus.hpp"
#include "ohseg/preprocess.hpp"

namespace ohseg {

class ParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure of one segmenter on one transcript (too short, no tokens, ...).
class SegmenterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ThresholdPolicy { kLiberal, kCustom };

struct TextTilingParams {
  std::size_t w = 20;  // token-sequence size
  std::size_t k = 10;  // block size, in token-sequences
  std::size_t smoothing_rounds = 1;
  std::size_t smoothing_width = 2;
  ThresholdPolicy threshold = ThresholdPolicy::kLiberal;
  double custom_cutoff = 0.0;  // used with kCustom

  void validate() const;
};

struct BayesSegParams {
  std::size_t k = 1;  // number of segments
  double alpha = 0.2;
  bool estimate_alpha = false;

  void validate() const;
};

struct UniformParams {
  std::size_t length = 1;  // segment length in sentences

  void validate() const;
};

using SegmenterParams = std::variant<TextTilingParams, BayesSegParams, UniformParams>;

struct SegmenterRequest {
  const Transcript* transcript = nullptr;
  SegmenterParams params;
};

struct SegmenterResult {
  std::vector<std::size_t> boundaries;
  Json details = Json::object();  // algorithm-specific diagnostics
};

const char* algorithm_name(const SegmenterParams& params);
Pipeline pipeline_for(const SegmenterParams& params);
/// Canonical JSON of the parameters, used for digests and manifests.
Json params_to_json(const SegmenterParams& params);
/// Annotator id for algorithm output: "<algorithm>-<first 8 hex of params digest>".
std::string algorithm_annotator(const SegmenterParams& params);

/// Runs the configured algorithm on one transcript.
SegmenterResult run_segmenter(const SegmenterRequest& request, const StopwordList& stopwords);

/// Boundaries at L, 2L, ... strictly below n; the remainder is the last segment.
std::vector<std::size_t> uniform_segment(std::size_t n_sentences, std::size_t length);

/// K for a transcript: segment count of the reference annotator's segmentation.
std::size_t reference_segment_count(const Corpus& corpus, const std::string& transcript_id,
                                    const std::string& annotator = "original");

enum class MedianPolicy { kCorpusGlobal, kPerTranscript };

/// Uniform segment length from manual segment masses (lower median).
/// kCorpusGlobal pools all masses of the given annotators (all when empty).
std::size_t median_segment_length(const Corpus& corpus, MedianPolicy policy,
                                  const std::string& transcript_id = {},
                                  const std::vector<std::string>& annotators = {});

/// Splits a flat list of sentence token lists into a token stream where each
/// token remembers the sentence it came from.
struct AlignedTokens {
  std::vector<std::string> tokens;
  std::vector<std::size_t> sentence_of;  // parallel to tokens
  // first_token[s] = index of the first token at or after sentence s;
  // size sentence_count + 1.
  std::vector<std::size_t> first_token;
  std::size_t sentence_count = 0;
};

AlignedTokens align_tokens(const std::vector<TokenizedSentence>& sentences);

}  // namespace ohseg
