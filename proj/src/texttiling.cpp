#include "ohseg/texttiling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace ohseg::texttiling {

namespace {

using Counts = std::unordered_map<std::string, double>;

void add(Counts& counts, const TokenSequence& seq, double sign) {
  for (const auto& t : seq.tokens) counts[t] += sign;
}

double cosine(const Counts& left, const Counts& right) {
  double dot = 0, nl = 0, nr = 0;
  for (const auto& [word, c] : left) {
    nl += c * c;
    if (auto it = right.find(word); it != right.end()) dot += c * it->second;
  }
  for (const auto& [word, c] : right) nr += c * c;
  if (nl == 0 || nr == 0) return 0.0;
  return std::clamp(dot / std::sqrt(nl * nr), 0.0, 1.0);
}

}  // namespace

std::vector<TokenSequence> build_token_sequences(const AlignedTokens& stream, std::size_t w) {
  if (w == 0) throw ParamError("token-sequence size must be >= 1");
  const std::size_t count = stream.tokens.size() / w;
  if (count < 2) {
    throw SegmenterError("transcript too short to tile: " + std::to_string(stream.tokens.size()) +
                         " tokens, need at least " + std::to_string(2 * w));
  }
  std::vector<TokenSequence> out(count);
  for (std::size_t s = 0; s < count; ++s) {
    out[s].first_token = s * w;
    out[s].tokens.assign(stream.tokens.begin() + static_cast<std::ptrdiff_t>(s * w),
                         stream.tokens.begin() + static_cast<std::ptrdiff_t>((s + 1) * w));
  }
  return out;
}

std::vector<double> gap_similarities(const std::vector<TokenSequence>& sequences, std::size_t k) {
  if (k == 0) throw ParamError("block size must be >= 1");
  if (sequences.size() < 2) throw SegmenterError("need at least two token-sequences");
  const std::size_t n = sequences.size();
  std::vector<double> out;
  out.reserve(n - 1);
  // Sliding blocks: left = [g-k, g), right = [g, g+k), clipped to [0, n).
  Counts left, right;
  for (std::size_t i = 0; i < std::min(k, n); ++i) add(right, sequences[i], 1);
  for (std::size_t g = 1; g < n; ++g) {
    add(left, sequences[g - 1], 1);
    if (g > k) add(left, sequences[g - 1 - k], -1);
    add(right, sequences[g - 1], -1);
    if (g + k - 1 < n) add(right, sequences[g + k - 1], 1);
    out.push_back(cosine(left, right));
  }
  return out;
}

std::vector<double> smooth(std::vector<double> scores, std::size_t width, std::size_t rounds) {
  const std::size_t n = scores.size();
  std::vector<double> next(n);
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= width ? i - width : 0;
      const std::size_t hi = std::min(n - 1, i + width);
      double sum = 0;
      for (std::size_t j = lo; j <= hi; ++j) sum += scores[j];
      next[i] = sum / static_cast<double>(hi - lo + 1);
    }
    scores.swap(next);
  }
  return scores;
}

std::vector<double> depth_scores(const std::vector<double>& scores) {
  const std::size_t n = scores.size();
  std::vector<double> depth(n, 0.0);
  for (std::size_t g = 0; g < n; ++g) {
    double left_peak = scores[g];
    for (std::size_t i = g; i > 0 && scores[i - 1] >= scores[i]; --i) left_peak = scores[i - 1];
    double right_peak = scores[g];
    for (std::size_t i = g; i + 1 < n && scores[i + 1] >= scores[i]; ++i) right_peak = scores[i + 1];
    depth[g] = (left_peak - scores[g]) + (right_peak - scores[g]);
  }
  return depth;
}

double depth_cutoff(const std::vector<double>& depths, const TextTilingParams& params) {
  if (params.threshold == ThresholdPolicy::kCustom) return params.custom_cutoff;
  if (depths.empty()) return 0.0;
  const double n = static_cast<double>(depths.size());
  const double mean = std::accumulate(depths.begin(), depths.end(), 0.0) / n;
  double ss = 0;
  for (double d : depths) ss += (d - mean) * (d - mean);
  return mean - std::sqrt(ss / n);
}

std::vector<std::size_t> select_gaps(const std::vector<double>& smoothed,
                                     const std::vector<double>& depths, double cutoff) {
  const std::size_t n = depths.size();
  std::vector<std::size_t> candidates;
  for (std::size_t g = 0; g < n; ++g) {
    const bool valley = (g == 0 || smoothed[g] <= smoothed[g - 1]) &&
                        (g + 1 == n || smoothed[g] <= smoothed[g + 1]);
    // Rounding in the mean must not let equal depths clear their own cutoff.
    const double margin = 1e-12 * std::max(1.0, std::abs(cutoff));
    if (valley && depths[g] > 0 && depths[g] > cutoff + margin) candidates.push_back(g);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return depths[a] > depths[b]; });
  std::vector<std::size_t> accepted;
  for (std::size_t g : candidates) {
    const bool near_deeper = std::any_of(accepted.begin(), accepted.end(), [&](std::size_t a) {
      return (a > g ? a - g : g - a) <= 1;
    });
    if (!near_deeper) accepted.push_back(g);
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

std::size_t snap_to_sentence_gap(const AlignedTokens& stream, std::size_t token_offset) {
  if (stream.sentence_count < 2) throw SegmenterError("no sentence gaps to snap to");
  // Sentence gap b sits at token offset first_token[b], b in [1, n-1].
  const auto begin = stream.first_token.begin() + 1;
  const auto end = stream.first_token.begin() + static_cast<std::ptrdiff_t>(stream.sentence_count);
  auto right = std::lower_bound(begin, end, token_offset);
  std::size_t best;
  if (right == end) {
    best = stream.sentence_count - 1;
  } else if (right == begin) {
    best = 1;
  } else {
    const std::size_t right_offset = *right;
    const std::size_t left_offset = *(right - 1);
    const std::size_t chosen = (token_offset - left_offset <= right_offset - token_offset)
                                   ? left_offset
                                   : right_offset;
    best = static_cast<std::size_t>(std::lower_bound(begin, end, chosen) - stream.first_token.begin());
    return best;
  }
  // Several sentence gaps can share an offset (sentences with no tokens).
  const std::size_t offset = stream.first_token[best];
  return static_cast<std::size_t>(std::lower_bound(begin, end, offset) - stream.first_token.begin());
}

Result segment(const AlignedTokens& stream, const TextTilingParams& params) {
  params.validate();
  Result result;
  const auto sequences = build_token_sequences(stream, params.w);
  GapScoreSeries& s = result.series;
  s.similarity = gap_similarities(sequences, params.k);
  s.smoothed = smooth(s.similarity, params.smoothing_width, params.smoothing_rounds);
  s.depth = depth_scores(s.smoothed);
  for (std::size_t g = 0; g < s.similarity.size(); ++g) {
    s.token_offset.push_back(sequences[g + 1].first_token);
    s.sentence_gap.push_back(stream.sentence_count >= 2
                                 ? snap_to_sentence_gap(stream, s.token_offset.back())
                                 : 0);
  }
  result.cutoff = depth_cutoff(s.depth, params);
  if (stream.sentence_count < 2) return result;
  for (std::size_t g : select_gaps(s.smoothed, s.depth, result.cutoff)) {
    result.boundaries.push_back(s.sentence_gap[g]);
  }
  std::sort(result.boundaries.begin(), result.boundaries.end());
  result.boundaries.erase(std::unique(result.boundaries.begin(), result.boundaries.end()),
                          result.boundaries.end());
  return result;
}

}  // namespace ohseg::texttiling
