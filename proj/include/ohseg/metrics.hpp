// Boundary edit distance style comparison of two boundary sets, boundary
// similarity, micro-averaging and chance-corrected agreement.
//
// All scores are SIMILARITIES: 1 means perfect agreement.
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ohseg/corpus.hpp"

namespace ohseg {

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using BoundarySet = std::vector<std::size_t>;  // sorted, strictly increasing

struct NearMiss {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t offset = 0;  // |a - b|, in [1, n_t - 1]
  friend bool operator==(const NearMiss&, const NearMiss&) = default;
};

struct BoundaryComparison {
  std::vector<std::size_t> matches;
  std::vector<NearMiss> near_misses;
  std::vector<std::size_t> misses_a_only;
  std::vector<std::size_t> misses_b_only;
  std::size_t n_t = 9;

  std::size_t miss_count() const { return misses_a_only.size() + misses_b_only.size(); }
  std::size_t observation_count() const {
    return matches.size() + near_misses.size() + miss_count();
  }
  std::size_t total_transposition_distance() const;
};

/// Exact matches are paired first; the rest are paired by a non-crossing
/// matching that minimizes the number of unpaired boundaries, then the total
/// offset. Pairs at distance >= n_t are not allowed.
BoundaryComparison compare_boundaries(const BoundarySet& a, const BoundarySet& b, std::size_t n_t);

/// Credit for a near miss at offset d: 1 - d / n_t.
double near_miss_credit(std::size_t offset, std::size_t n_t);
inline constexpr const char* kNearMissScaling = "linear: 1 - d/n_t";

/// Mean credit over all observations; 1 when neither side has boundaries.
double boundary_similarity(const BoundaryComparison& cmp);

/// Per-observation scores: 1 per match, 1 - d/n_t per near miss, 0 per miss.
std::vector<double> observation_scores(const BoundaryComparison& cmp);

struct MicroAverage {
  double mean = 0;
  double ci95_half_width = 0;  // 1.96 * sample stddev / sqrt(n)
  std::size_t n = 0;
};

MicroAverage micro_average(const std::vector<double>& observations);
/// Pools every observation of every comparison. Throws MetricError on zero pairs.
MicroAverage micro_average_pairs(const std::vector<BoundaryComparison>& comparisons);

enum class ExpectedAgreement {
  kPooled,        // p^2 with one pooled placement rate
  kPerAnnotator,  // mean over annotator pairs of p_i * p_j
};

struct AgreementReport {
  MicroAverage actual;
  double pi_star = 0;
  double actual_agreement = 0;    // A_a
  double expected_agreement = 0;  // A_e
  std::size_t annotator_count = 0;
  std::size_t transcript_count = 0;
  std::size_t n_t = 9;
  ExpectedAgreement expected_mode = ExpectedAgreement::kPooled;
};

/// Fleiss' pi* over all annotator pairs of every transcript with >= 2
/// annotators. `annotators` restricts the set (all when empty).
AgreementReport fleiss_pi_star(const Corpus& corpus, std::size_t n_t,
                               const std::vector<std::string>& annotators = {},
                               ExpectedAgreement mode = ExpectedAgreement::kPooled);

struct ErrorCounts {
  std::size_t matches = 0;
  std::size_t near_misses = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;

  ErrorCounts& operator+=(const ErrorCounts& o);
  friend bool operator==(const ErrorCounts&, const ErrorCounts&) = default;
};

ErrorCounts error_type_counts(const BoundarySet& hypothesis, const std::vector<BoundarySet>& references,
                              std::size_t n_t);

/// One pooled boundary-pair observation.
struct PairObservation {
  std::string algorithm;
  std::string annotator;
  std::string transcript;
  std::string category;  // "match", "near_miss", "miss_hypothesis", "miss_reference"
  std::size_t offset = 0;
  double score = 0;
};

struct CellScore {
  std::string algorithm;
  std::string annotator;
  std::string transcript;
  MicroAverage score;
  ErrorCounts errors;
};

struct GroupSummary {
  MicroAverage pooled;
  ErrorCounts errors;
  std::map<std::string, MicroAverage> per_annotator;
  std::map<std::string, MicroAverage> per_transcript;
};

struct EvalReport {
  std::size_t n_t = 9;
  std::vector<PairObservation> observations;
  std::vector<CellScore> cells;
  std::map<std::string, GroupSummary> groups;  // keyed by algorithm
};

/// Compares each hypothesis segmentation against every reference
/// segmentation of the same transcript. Hypotheses are grouped by their
/// annotator field. Throws MetricError listing transcripts that have
/// references but no hypothesis from a given algorithm.
EvalReport evaluate_segmenters(const std::vector<Segmentation>& hypotheses,
                               const std::vector<Segmentation>& references, std::size_t n_t);

}  // namespace ohseg
