#include "ohseg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>

namespace ohseg::stats {

namespace {

void check_groups(const GroupedScores& groups) {
  if (groups.size() < 2) throw StatsError("need at least two groups");
  for (const auto& g : groups) {
    if (g.values.empty()) throw StatsError("group '" + g.name + "' is empty");
    for (double v : g.values) {
      if (!std::isfinite(v)) throw StatsError("group '" + g.name + "' has a non-finite value");
    }
  }
}

// SplitMix64, used to derive independent per-chunk seeds.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Table {
  double alpha;
  double q[9];  // k = 2..10
};

// Studentized range upper quantiles q(alpha; k, df = infinity).
constexpr Table kStudentizedRange[] = {
    {0.05, {2.772, 3.314, 3.633, 3.858, 4.030, 4.170, 4.286, 4.387, 4.474}},
    {0.01, {3.643, 4.120, 4.403, 4.603, 4.757, 4.882, 4.987, 5.078, 5.157}},
};

}  // namespace

std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share rank ((i+1) + (j+1)) / 2.
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double tie_sum(const std::vector<double>& values) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    sum += t * t * t - t;
    i = j + 1;
  }
  return sum;
}

double chi_square_upper_tail(double x, std::size_t df) {
  if (df == 0) throw StatsError("chi-square needs df >= 1");
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(static_cast<double>(df) / 2.0, x / 2.0);
}

KruskalWallisResult kruskal_wallis(const GroupedScores& groups) {
  check_groups(groups);
  std::vector<double> pooled;
  for (const auto& g : groups) pooled.insert(pooled.end(), g.values.begin(), g.values.end());
  const double n = static_cast<double>(pooled.size());
  if (pooled.size() < 3) throw StatsError("Kruskal-Wallis needs at least 3 observations");

  const auto ranks = midranks(pooled);
  double sum_term = 0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double rank_sum = 0;
    for (std::size_t i = 0; i < g.values.size(); ++i) rank_sum += ranks[offset + i];
    offset += g.values.size();
    sum_term += rank_sum * rank_sum / static_cast<double>(g.values.size());
  }
  KruskalWallisResult r;
  r.h_uncorrected = 12.0 / (n * (n + 1)) * sum_term - 3.0 * (n + 1);
  r.tie_correction = 1.0 - tie_sum(pooled) / (n * n * n - n);
  if (r.tie_correction <= 0) {
    throw StatsError("all observations are identical; Kruskal-Wallis is undefined");
  }
  r.h = std::max(0.0, r.h_uncorrected / r.tie_correction);
  // Rounding can leave tiny negative values when rank means coincide.
  if (std::abs(r.h) < 1e-12) r.h = 0.0;
  r.df = groups.size() - 1;
  r.p_value = chi_square_upper_tail(r.h, r.df);
  return r;
}

namespace {

// W* is 0 when every pooled value is tied.
PairwiseComparison dscf_statistic_or_zero(const Group& first, const Group& second) {
  const double n1 = static_cast<double>(first.values.size());
  const double n2 = static_cast<double>(second.values.size());
  if (first.values.empty() || second.values.empty()) throw StatsError("empty group in pairwise comparison");
  std::vector<double> pooled = first.values;
  pooled.insert(pooled.end(), second.values.begin(), second.values.end());
  const auto ranks = midranks(pooled);
  PairwiseComparison c;
  c.first = first.name;
  c.second = second.name;
  c.w = std::accumulate(ranks.begin() + static_cast<std::ptrdiff_t>(first.values.size()), ranks.end(), 0.0);
  const double total = n1 + n2;
  c.expected = n2 * (total + 1) / 2.0;
  c.variance = n1 * n2 / 12.0 * ((total + 1) - tie_sum(pooled) / (total * (total - 1)));
  if (c.variance > 0) c.w_star = std::sqrt(2.0) * (c.w - c.expected) / std::sqrt(c.variance);
  return c;
}

}  // namespace

PairwiseComparison dscf_statistic(const Group& first, const Group& second) {
  PairwiseComparison c = dscf_statistic_or_zero(first, second);
  if (!(c.variance > 0)) {
    throw StatsError("all values tied between " + first.name + " and " + second.name);
  }
  return c;
}

double studentized_range_critical(std::size_t k, double alpha) {
  if (k < 2 || k > 10) {
    throw StatsError("studentized range table covers 2..10 groups; use permutation mode for " +
                     std::to_string(k));
  }
  for (const auto& t : kStudentizedRange) {
    if (std::abs(t.alpha - alpha) < 1e-12) return t.q[k - 2];
  }
  throw StatsError("studentized range table covers alpha 0.05 and 0.01; use permutation mode");
}

DscfResult dscf_pairwise(const GroupedScores& groups, double alpha, DscfMode mode,
                         std::size_t permutations, std::uint64_t seed) {
  check_groups(groups);
  if (!(alpha > 0 && alpha < 1)) throw StatsError("alpha must be in (0, 1)");
  DscfResult result;
  result.mode = mode;
  result.alpha = alpha;
  result.seed = seed;
  std::optional<double> q;
  if (mode == DscfMode::kAsymptotic) {
    q = studentized_range_critical(groups.size(), alpha);
  } else {
    if (permutations == 0) throw StatsError("permutation mode needs at least one relabeling");
    result.permutations = permutations;
  }

  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      PairwiseComparison c = dscf_statistic(groups[i], groups[j]);
      if (q) {
        c.critical_value = q;
        c.significant = std::abs(c.w_star) >= *q;
      }
      result.pairs.push_back(std::move(c));
    }
  }
  if (q) return result;

  // Single-step max statistic: each relabeling shuffles the pooled values of
  // all groups and records the largest |W*| over every pair, which is the
  // finite-sample counterpart of the studentized range used asymptotically.
  std::vector<double> pooled;
  std::vector<std::size_t> offsets{0};
  for (const auto& g : groups) {
    pooled.insert(pooled.end(), g.values.begin(), g.values.end());
    offsets.push_back(pooled.size());
  }
  auto max_abs_w_star = [&](const std::vector<double>& values) {
    double best = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      for (std::size_t j = i + 1; j < groups.size(); ++j) {
        const auto at = [&](std::size_t k) { return values.begin() + static_cast<std::ptrdiff_t>(k); };
        const Group a{"", std::vector<double>(at(offsets[i]), at(offsets[i + 1]))};
        const Group b{"", std::vector<double>(at(offsets[j]), at(offsets[j + 1]))};
        const PairwiseComparison c = dscf_statistic_or_zero(a, b);
        best = std::max(best, std::abs(c.w_star));
      }
    }
    return best;
  };

  // Fixed-size chunks with their own seeds keep the draws independent of
  // how many threads run them.
  constexpr std::size_t kChunk = 1000;
  const std::size_t chunks = (permutations + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> maxima(chunks);
  auto run_chunk = [&](std::size_t chunk) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(chunk)));
    std::vector<double> local = pooled;
    const std::size_t count = std::min(kChunk, permutations - chunk * kChunk);
    maxima[chunk].reserve(count);
    for (std::size_t p = 0; p < count; ++p) {
      std::shuffle(local.begin(), local.end(), rng);
      maxima[chunk].push_back(max_abs_w_star(local));
    }
  };
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(chunks, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> futures;
  for (std::size_t w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t chunk = w; chunk < chunks; chunk += workers) run_chunk(chunk);
    }));
  }
  for (auto& f : futures) f.get();

  for (auto& c : result.pairs) {
    const double observed = std::abs(c.w_star);
    // Relative slack absorbs rounding when a relabeling reproduces the observed split.
    const double bar = observed - 1e-9 * std::max(1.0, observed);
    std::size_t extreme = 0;
    for (const auto& chunk : maxima) {
      for (double m : chunk) extreme += m >= bar;
    }
    c.p_value = static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
    c.significant = *c.p_value <= alpha;
  }
  return result;
}

}  // namespace ohseg::stats
