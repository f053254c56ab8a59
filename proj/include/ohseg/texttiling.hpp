// TextTiling: lexical-cohesion segmentation over fixed-size token-sequences.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ohseg/segcore.hpp"

namespace ohseg::texttiling {

struct TokenSequence {
  std::vector<std::string> tokens;
  std::size_t first_token = 0;  // offset in the aligned stream
};

/// Non-overlapping windows of exactly w tokens; a trailing partial window is
/// dropped. Throws SegmenterError if fewer than two windows fit.
std::vector<TokenSequence> build_token_sequences(const AlignedTokens& stream, std::size_t w);

/// Cosine similarity for each internal gap g (1..S-1) between the summed
/// term counts of up to k sequences before and after it. Entry i is gap i+1.
std::vector<double> gap_similarities(const std::vector<TokenSequence>& sequences, std::size_t k);

/// Truncated moving average of window 2*width+1, applied `rounds` times.
std::vector<double> smooth(std::vector<double> scores, std::size_t width, std::size_t rounds);

/// (left peak - s) + (right peak - s); peaks found by climbing while the
/// series does not decrease.
std::vector<double> depth_scores(const std::vector<double>& scores);

struct GapScoreSeries {
  std::vector<double> similarity;  // raw
  std::vector<double> smoothed;
  std::vector<double> depth;
  std::vector<std::size_t> token_offset;   // per gap
  std::vector<std::size_t> sentence_gap;   // per gap, nearest sentence gap
};

/// Cutoff for a depth series: mean - stddev (liberal) or the custom value.
double depth_cutoff(const std::vector<double>& depths, const TextTilingParams& params);

/// Selected token-sequence gaps (indices into `depths`, ascending). A gap is a
/// candidate if it is a valley of `smoothed` and its depth exceeds the cutoff;
/// candidates within one sequence of a deeper one are dropped.
std::vector<std::size_t> select_gaps(const std::vector<double>& smoothed,
                                     const std::vector<double>& depths, double cutoff);

/// Nearest sentence gap in [1, n-1] to a token offset; ties go left.
std::size_t snap_to_sentence_gap(const AlignedTokens& stream, std::size_t token_offset);

struct Result {
  std::vector<std::size_t> boundaries;
  GapScoreSeries series;
  double cutoff = 0;
};

/// Full pipeline over an already preprocessed stream.
Result segment(const AlignedTokens& stream, const TextTilingParams& params);

}  // namespace ohseg::texttiling
