#include "ohseg/bayesseg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace ohseg::bayesseg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Ties within this relative margin keep the earlier split point.
bool strictly_better(double candidate, double incumbent) {
  if (incumbent == kNegInf) return candidate != kNegInf;
  return candidate > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

void check_alpha(double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw ParamError("alpha must be a positive finite number");
  }
}

// Incrementally maintained DCM likelihood of a growing segment.
class SegmentAccumulator {
 public:
  SegmentAccumulator(std::size_t vocabulary_size, double alpha)
      : counts_(vocabulary_size, 0),
        alpha_(alpha),
        total_alpha_(alpha * static_cast<double>(vocabulary_size)),
        lgamma_total_alpha_(std::lgamma(total_alpha_)) {}

  void reset() {
    for (WordId w : touched_) counts_[w] = 0;
    touched_.clear();
    tokens_ = 0;
    word_terms_ = 0;
  }

  void add(const std::vector<std::pair<WordId, std::uint32_t>>& bag) {
    for (const auto& [w, c] : bag) {
      std::uint32_t& n = counts_[w];
      if (n == 0) touched_.push_back(w);
      word_terms_ += std::lgamma(alpha_ + n + c) - std::lgamma(alpha_ + n);
      n += c;
      tokens_ += c;
    }
  }

  double value() const {
    return lgamma_total_alpha_ - std::lgamma(total_alpha_ + static_cast<double>(tokens_)) + word_terms_;
  }

 private:
  std::vector<std::uint32_t> counts_;
  std::vector<WordId> touched_;
  double alpha_;
  double total_alpha_;
  double lgamma_total_alpha_;
  std::size_t tokens_ = 0;
  double word_terms_ = 0;
};

}  // namespace

SentenceBags SentenceBags::from_tokens(const std::vector<std::vector<std::string>>& sentences) {
  std::unordered_map<std::string, WordId> vocab;
  std::vector<std::vector<WordId>> ids(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    for (const auto& tok : sentences[s]) {
      auto [it, inserted] = vocab.emplace(tok, static_cast<WordId>(vocab.size()));
      ids[s].push_back(it->second);
    }
  }
  return from_ids(std::move(ids), vocab.size());
}

SentenceBags SentenceBags::from_ids(std::vector<std::vector<WordId>> sentences,
                                    std::size_t vocabulary_size) {
  SentenceBags bags;
  bags.vocabulary_size_ = vocabulary_size;
  bags.sentences_.resize(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    std::map<WordId, std::uint32_t> counts;
    for (WordId w : sentences[s]) {
      if (w >= vocabulary_size) throw std::out_of_range("word id outside vocabulary");
      ++counts[w];
    }
    bags.sentences_[s].assign(counts.begin(), counts.end());
    bags.total_tokens_ += sentences[s].size();
  }
  return bags;
}

std::vector<std::uint32_t> SentenceBags::segment_counts(std::size_t begin, std::size_t end) const {
  std::vector<std::uint32_t> counts(vocabulary_size_, 0);
  for (std::size_t s = begin; s < end; ++s) {
    for (const auto& [w, c] : sentences_[s]) counts[w] += c;
  }
  return counts;
}

double dcm_log_likelihood(const std::vector<std::uint32_t>& counts, double alpha,
                          std::size_t vocabulary_size) {
  check_alpha(alpha);
  if (vocabulary_size == 0) throw ParamError("vocabulary size must be >= 1");
  const double total_alpha = alpha * static_cast<double>(vocabulary_size);
  double n = 0;
  double words = 0;
  const double lgamma_alpha = std::lgamma(alpha);
  for (std::uint32_t c : counts) {
    if (c == 0) continue;
    n += c;
    words += std::lgamma(alpha + c) - lgamma_alpha;
  }
  if (n == 0) return 0.0;
  return std::lgamma(total_alpha) - std::lgamma(total_alpha + n) + words;
}

MapResult map_segmentation(const SentenceBags& bags, std::size_t k, double alpha) {
  check_alpha(alpha);
  const std::size_t n = bags.sentence_count();
  if (k == 0) throw ParamError("segment count K must be >= 1");
  if (k > n) {
    throw SegmenterError("K=" + std::to_string(k) + " exceeds sentence count " + std::to_string(n));
  }
  if (bags.token_count() == 0 || bags.vocabulary_size() == 0) {
    throw SegmenterError("no tokens survived preprocessing; check stopwords, stemming and POS tags");
  }

  // best[j][t]: best score of j segments covering sentences [0, t).
  std::vector<std::vector<double>> best(k + 1, std::vector<double>(n + 1, kNegInf));
  std::vector<std::vector<std::size_t>> back(k + 1, std::vector<std::size_t>(n + 1, 0));
  best[0][0] = 0;
  SegmentAccumulator acc(bags.vocabulary_size(), alpha);
  std::vector<double> segment_score(n + 1);
  // Split points are visited in increasing order, so the first optimum found
  // for a cell is the one with the earliest split.
  for (std::size_t s = 0; s < n; ++s) {
    acc.reset();
    for (std::size_t t = s + 1; t <= n; ++t) {
      acc.add(bags.bag(t - 1));
      segment_score[t] = acc.value();
    }
    for (std::size_t j = 1; j <= k; ++j) {
      const double prefix = best[j - 1][s];
      if (prefix == kNegInf) continue;
      // Leave room for the remaining k - j segments.
      const std::size_t last_t = n - (k - j);
      for (std::size_t t = s + 1; t <= last_t; ++t) {
        const double candidate = prefix + segment_score[t];
        if (strictly_better(candidate, best[j][t])) {
          best[j][t] = candidate;
          back[j][t] = s;
        }
      }
    }
  }

  MapResult result;
  result.log_likelihood = best[k][n];
  std::size_t t = n;
  for (std::size_t j = k; j > 1; --j) {
    t = back[j][t];
    result.boundaries.push_back(t);
  }
  std::reverse(result.boundaries.begin(), result.boundaries.end());
  return result;
}

double segmentation_log_likelihood(const SentenceBags& bags, const std::vector<std::size_t>& boundaries,
                                   double alpha) {
  double total = 0;
  std::size_t begin = 0;
  for (std::size_t b = 0; b <= boundaries.size(); ++b) {
    const std::size_t end = b < boundaries.size() ? boundaries[b] : bags.sentence_count();
    total += dcm_log_likelihood(bags.segment_counts(begin, end), alpha, bags.vocabulary_size());
    begin = end;
  }
  return total;
}

namespace {

// Maximizes f over [lo, hi] by golden-section search.
template <typename F>
double golden_section_max(F f, double lo, double hi, double tolerance) {
  const double inv_phi = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace

AlphaEstimate estimate_alpha(const SentenceBags& bags, std::size_t k, double initial_alpha,
                             const AlphaSearch& search) {
  check_alpha(initial_alpha);
  if (!(search.lower > 0) || !(search.upper > search.lower)) {
    throw ParamError("alpha search range must satisfy 0 < lower < upper");
  }
  AlphaEstimate est;
  est.alpha = initial_alpha;
  est.segmentation = map_segmentation(bags, k, initial_alpha);
  est.initial_log_likelihood = est.segmentation.log_likelihood;

  double alpha = initial_alpha;
  MapResult current = est.segmentation;
  for (std::size_t it = 0; it < search.max_iterations; ++it) {
    est.iterations = it + 1;
    auto objective = [&](double log_alpha) {
      return segmentation_log_likelihood(bags, current.boundaries, std::exp(log_alpha));
    };
    double next_alpha = std::exp(golden_section_max(objective, std::log(search.lower),
                                                    std::log(search.upper), 1e-6));
    // Keep the current alpha if the search landed somewhere worse.
    if (segmentation_log_likelihood(bags, current.boundaries, next_alpha) <
        segmentation_log_likelihood(bags, current.boundaries, alpha)) {
      next_alpha = alpha;
    }
    MapResult next = map_segmentation(bags, k, next_alpha);
    if (next.log_likelihood > est.segmentation.log_likelihood) {
      est.alpha = next_alpha;
      est.segmentation = next;
    }
    const bool settled = std::abs(next_alpha - alpha) < search.relative_tolerance * alpha;
    alpha = next_alpha;
    current = std::move(next);
    if (settled) {
      est.converged = true;
      break;
    }
  }
  return est;
}

}  // namespace ohseg::bayesseg
