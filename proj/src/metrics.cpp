#include "ohseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

namespace ohseg {

namespace {

void check_sorted(const BoundarySet& s, const char* side) {
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] <= s[i - 1]) {
      throw MetricError(std::string("boundary set ") + side + " is not strictly increasing");
    }
  }
}

std::size_t distance(std::size_t x, std::size_t y) { return x > y ? x - y : y - x; }

// Lexicographic cost: unpaired boundaries first, then total offset.
struct Cost {
  std::size_t unpaired = 0;
  std::size_t offset = 0;
  bool operator<(const Cost& o) const {
    return unpaired != o.unpaired ? unpaired < o.unpaired : offset < o.offset;
  }
  bool operator<=(const Cost& o) const { return !(o < *this); }
};

}  // namespace

std::size_t BoundaryComparison::total_transposition_distance() const {
  std::size_t total = 0;
  for (const auto& nm : near_misses) total += nm.offset;
  return total;
}

BoundaryComparison compare_boundaries(const BoundarySet& a, const BoundarySet& b, std::size_t n_t) {
  if (n_t < 1) throw MetricError("n_t must be >= 1");
  check_sorted(a, "a");
  check_sorted(b, "b");
  BoundaryComparison cmp;
  cmp.n_t = n_t;

  std::vector<std::size_t> ra, rb;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(cmp.matches));
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(ra));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(rb));

  const std::size_t m = ra.size(), n = rb.size();
  std::vector<std::vector<Cost>> dp(m + 1, std::vector<Cost>(n + 1));
  for (std::size_t i = 1; i <= m; ++i) dp[i][0] = {i, 0};
  for (std::size_t j = 1; j <= n; ++j) dp[0][j] = {j, 0};
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      Cost best{dp[i - 1][j].unpaired + 1, dp[i - 1][j].offset};
      Cost skip_b{dp[i][j - 1].unpaired + 1, dp[i][j - 1].offset};
      if (skip_b < best) best = skip_b;
      const std::size_t d = distance(ra[i - 1], rb[j - 1]);
      if (d < n_t) {
        Cost pair{dp[i - 1][j - 1].unpaired, dp[i - 1][j - 1].offset + d};
        if (pair < best) best = pair;
      }
      dp[i][j] = best;
    }
  }

  // Backtrace, preferring a pair, then leaving ra[i-1] unpaired.
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const std::size_t d = distance(ra[i - 1], rb[j - 1]);
      if (d < n_t) {
        Cost pair{dp[i - 1][j - 1].unpaired, dp[i - 1][j - 1].offset + d};
        if (pair <= dp[i][j] && dp[i][j] <= pair) {
          cmp.near_misses.push_back({ra[i - 1], rb[j - 1], d});
          --i;
          --j;
          continue;
        }
      }
    }
    if (i > 0) {
      Cost skip_a{dp[i - 1][j].unpaired + 1, dp[i - 1][j].offset};
      if (skip_a <= dp[i][j] && dp[i][j] <= skip_a) {
        cmp.misses_a_only.push_back(ra[i - 1]);
        --i;
        continue;
      }
    }
    cmp.misses_b_only.push_back(rb[j - 1]);
    --j;
  }
  std::reverse(cmp.near_misses.begin(), cmp.near_misses.end());
  std::reverse(cmp.misses_a_only.begin(), cmp.misses_a_only.end());
  std::reverse(cmp.misses_b_only.begin(), cmp.misses_b_only.end());
  return cmp;
}

double near_miss_credit(std::size_t offset, std::size_t n_t) {
  return 1.0 - static_cast<double>(offset) / static_cast<double>(n_t);
}

std::vector<double> observation_scores(const BoundaryComparison& cmp) {
  std::vector<double> out;
  out.reserve(cmp.observation_count());
  out.insert(out.end(), cmp.matches.size(), 1.0);
  for (const auto& nm : cmp.near_misses) out.push_back(near_miss_credit(nm.offset, cmp.n_t));
  out.insert(out.end(), cmp.miss_count(), 0.0);
  return out;
}

double boundary_similarity(const BoundaryComparison& cmp) {
  const std::size_t n = cmp.observation_count();
  if (n == 0) return 1.0;
  double credit = static_cast<double>(cmp.matches.size());
  for (const auto& nm : cmp.near_misses) credit += near_miss_credit(nm.offset, cmp.n_t);
  return credit / static_cast<double>(n);
}

MicroAverage micro_average(const std::vector<double>& observations) {
  if (observations.empty()) throw MetricError("no boundary pairs to average");
  MicroAverage out;
  out.n = observations.size();
  const double n = static_cast<double>(out.n);
  out.mean = std::accumulate(observations.begin(), observations.end(), 0.0) / n;
  if (out.n > 1) {
    double ss = 0;
    for (double x : observations) ss += (x - out.mean) * (x - out.mean);
    out.ci95_half_width = 1.96 * std::sqrt(ss / (n - 1)) / std::sqrt(n);
  }
  return out;
}

MicroAverage micro_average_pairs(const std::vector<BoundaryComparison>& comparisons) {
  std::vector<double> pooled;
  for (const auto& c : comparisons) {
    auto s = observation_scores(c);
    pooled.insert(pooled.end(), s.begin(), s.end());
  }
  return micro_average(pooled);
}

AgreementReport fleiss_pi_star(const Corpus& corpus, std::size_t n_t,
                               const std::vector<std::string>& annotators, ExpectedAgreement mode) {
  auto wanted = [&](const std::string& a) {
    return annotators.empty() || std::find(annotators.begin(), annotators.end(), a) != annotators.end();
  };
  std::map<std::string, std::vector<const Segmentation*>> by_transcript;
  for (const auto& s : corpus.segmentations) {
    if (wanted(s.annotator)) by_transcript[s.transcript_id].push_back(&s);
  }

  AgreementReport report;
  report.n_t = n_t;
  report.expected_mode = mode;
  std::vector<BoundaryComparison> comparisons;
  std::set<std::string> seen_annotators;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_annotator;  // placed, potential
  std::size_t placed = 0, potential = 0;
  for (auto& [tid, segs] : by_transcript) {
    if (segs.size() < 2) continue;
    const Transcript* t = corpus.find_transcript(tid);
    if (!t) throw MetricError("unknown transcript " + tid);
    std::sort(segs.begin(), segs.end(),
              [](const Segmentation* x, const Segmentation* y) { return x->annotator < y->annotator; });
    ++report.transcript_count;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      seen_annotators.insert(segs[i]->annotator);
      placed += segs[i]->boundaries.size();
      potential += t->sentence_count() - 1;
      auto& pa = per_annotator[segs[i]->annotator];
      pa.first += segs[i]->boundaries.size();
      pa.second += t->sentence_count() - 1;
      for (std::size_t j = i + 1; j < segs.size(); ++j) {
        comparisons.push_back(compare_boundaries(segs[i]->boundaries, segs[j]->boundaries, n_t));
      }
    }
  }
  if (seen_annotators.size() < 2) {
    throw MetricError("agreement needs at least two annotators on a shared transcript");
  }
  report.annotator_count = seen_annotators.size();
  report.actual = micro_average_pairs(comparisons);
  report.actual_agreement = report.actual.mean;

  if (mode == ExpectedAgreement::kPooled) {
    const double p = potential ? static_cast<double>(placed) / static_cast<double>(potential) : 0.0;
    report.expected_agreement = p * p;
  } else {
    std::vector<double> rates;
    for (const auto& [name, pp] : per_annotator) {
      rates.push_back(pp.second ? static_cast<double>(pp.first) / static_cast<double>(pp.second) : 0.0);
    }
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
      for (std::size_t j = i + 1; j < rates.size(); ++j, ++pairs) sum += rates[i] * rates[j];
    }
    report.expected_agreement = sum / static_cast<double>(pairs);
  }
  if (report.expected_agreement >= 1.0) {
    throw MetricError("expected agreement is 1 (boundary at every gap); pi* is undefined");
  }
  report.pi_star = (report.actual_agreement - report.expected_agreement) / (1.0 - report.expected_agreement);
  return report;
}

ErrorCounts& ErrorCounts::operator+=(const ErrorCounts& o) {
  matches += o.matches;
  near_misses += o.near_misses;
  false_positives += o.false_positives;
  false_negatives += o.false_negatives;
  return *this;
}

ErrorCounts error_type_counts(const BoundarySet& hypothesis, const std::vector<BoundarySet>& references,
                              std::size_t n_t) {
  ErrorCounts total;
  for (const auto& ref : references) {
    const auto cmp = compare_boundaries(hypothesis, ref, n_t);
    total.matches += cmp.matches.size();
    total.near_misses += cmp.near_misses.size();
    total.false_positives += cmp.misses_a_only.size();
    total.false_negatives += cmp.misses_b_only.size();
  }
  return total;
}

EvalReport evaluate_segmenters(const std::vector<Segmentation>& hypotheses,
                               const std::vector<Segmentation>& references, std::size_t n_t) {
  EvalReport report;
  report.n_t = n_t;

  std::map<std::string, std::vector<const Segmentation*>> refs_by_transcript;
  for (const auto& r : references) refs_by_transcript[r.transcript_id].push_back(&r);
  for (auto& [tid, refs] : refs_by_transcript) {
    std::sort(refs.begin(), refs.end(),
              [](const Segmentation* x, const Segmentation* y) { return x->annotator < y->annotator; });
  }
  std::map<std::string, std::map<std::string, const Segmentation*>> hyps;  // algorithm -> transcript
  for (const auto& h : hypotheses) hyps[h.annotator][h.transcript_id] = &h;

  std::vector<std::string> missing;
  for (const auto& [algorithm, by_transcript] : hyps) {
    for (const auto& [tid, refs] : refs_by_transcript) {
      if (!by_transcript.count(tid)) missing.push_back(algorithm + "/" + tid);
    }
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << "missing hypotheses for:";
    for (const auto& m : missing) os << " " << m;
    throw MetricError(os.str());
  }

  for (const auto& [algorithm, by_transcript] : hyps) {
    GroupSummary& group = report.groups[algorithm];
    std::vector<double> pooled;
    std::map<std::string, std::vector<double>> per_annotator, per_transcript;
    for (const auto& [tid, hyp] : by_transcript) {
      auto rit = refs_by_transcript.find(tid);
      if (rit == refs_by_transcript.end()) continue;
      for (const Segmentation* ref : rit->second) {
        const auto cmp = compare_boundaries(hyp->boundaries, ref->boundaries, n_t);
        auto emit = [&](const char* category, std::size_t offset, double score) {
          report.observations.push_back({algorithm, ref->annotator, tid, category, offset, score});
          pooled.push_back(score);
          per_annotator[ref->annotator].push_back(score);
          per_transcript[tid].push_back(score);
        };
        for (std::size_t k = 0; k < cmp.matches.size(); ++k) emit("match", 0, 1.0);
        for (const auto& nm : cmp.near_misses) emit("near_miss", nm.offset, near_miss_credit(nm.offset, n_t));
        for (std::size_t k = 0; k < cmp.misses_a_only.size(); ++k) emit("miss_hypothesis", 0, 0.0);
        for (std::size_t k = 0; k < cmp.misses_b_only.size(); ++k) emit("miss_reference", 0, 0.0);

        CellScore cell{algorithm, ref->annotator, tid, {}, {}};
        const auto scores = observation_scores(cmp);
        if (scores.empty()) {
          cell.score = {1.0, 0.0, 0};
        } else {
          cell.score = micro_average(scores);
        }
        cell.errors = {cmp.matches.size(), cmp.near_misses.size(), cmp.misses_a_only.size(),
                       cmp.misses_b_only.size()};
        group.errors += cell.errors;
        report.cells.push_back(std::move(cell));
      }
    }
    if (!pooled.empty()) group.pooled = micro_average(pooled);
    for (const auto& [name, v] : per_annotator) group.per_annotator[name] = micro_average(v);
    for (const auto& [name, v] : per_transcript) group.per_transcript[name] = micro_average(v);
  }
  return report;
}

}  // namespace ohseg
