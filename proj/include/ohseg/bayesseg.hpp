// BayesSeg: MAP segmentation under a Dirichlet-compound-multinomial segment
// likelihood, found exactly by dynamic programming.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ohseg/segcore.hpp"

namespace ohseg::bayesseg {

using WordId = std::uint32_t;

/// Per-sentence bags of word ids over a per-transcript vocabulary.
class SentenceBags {
 public:
  SentenceBags() = default;
  /// Builds the vocabulary in first-occurrence order.
  static SentenceBags from_tokens(const std::vector<std::vector<std::string>>& sentences);
  static SentenceBags from_ids(std::vector<std::vector<WordId>> sentences, std::size_t vocabulary_size);

  std::size_t sentence_count() const { return sentences_.size(); }
  std::size_t vocabulary_size() const { return vocabulary_size_; }
  std::size_t token_count() const { return total_tokens_; }
  /// Sorted (word, count) pairs for one sentence.
  const std::vector<std::pair<WordId, std::uint32_t>>& bag(std::size_t sentence) const {
    return sentences_[sentence];
  }
  /// Dense counts for sentences [begin, end).
  std::vector<std::uint32_t> segment_counts(std::size_t begin, std::size_t end) const;

 private:
  std::vector<std::vector<std::pair<WordId, std::uint32_t>>> sentences_;
  std::size_t vocabulary_size_ = 0;
  std::size_t total_tokens_ = 0;
};

/// log P(counts) for a segment: lgamma(V a) - lgamma(V a + N)
///   + sum over nonzero n_w of [lgamma(a + n_w) - lgamma(a)].
double dcm_log_likelihood(const std::vector<std::uint32_t>& counts, double alpha,
                          std::size_t vocabulary_size);

struct MapResult {
  std::vector<std::size_t> boundaries;
  double log_likelihood = 0;
};

/// Exactly K segments maximizing the summed segment likelihood. Among equal
/// objectives (within 1e-12 relative) the earliest split point wins at
/// every step of the backtrace.
MapResult map_segmentation(const SentenceBags& bags, std::size_t k, double alpha);

/// Sum of segment likelihoods for a given boundary list, recomputed directly.
double segmentation_log_likelihood(const SentenceBags& bags, const std::vector<std::size_t>& boundaries,
                                   double alpha);

struct AlphaSearch {
  double lower = 1e-3;
  double upper = 10.0;
  double relative_tolerance = 1e-3;
  std::size_t max_iterations = 20;
};

struct AlphaEstimate {
  double alpha = 0;
  MapResult segmentation;
  double initial_log_likelihood = 0;  // MAP objective at the starting alpha
  std::size_t iterations = 0;
  bool converged = false;
};

/// Alternates MAP segmentation with a golden-section search over log alpha
/// for the current segmentation. Never returns a worse objective than the
/// starting alpha's MAP segmentation.
AlphaEstimate estimate_alpha(const SentenceBags& bags, std::size_t k, double initial_alpha,
                             const AlphaSearch& search = {});

}  // namespace ohseg::bayesseg
