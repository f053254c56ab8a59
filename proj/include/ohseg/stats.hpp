// Distribution-free comparison of score groups: Kruskal-Wallis omnibus test
// and Dwass-Steel-Critchlow-Fligner pairwise comparisons.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ohseg::stats {

class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Group {
  std::string name;
  std::vector<double> values;
};

using GroupedScores = std::vector<Group>;

/// Midranks (1-based) of the pooled values; ties share the average rank.
std::vector<double> midranks(const std::vector<double>& values);

/// Sum of t^3 - t over tie groups of the values.
double tie_sum(const std::vector<double>& values);

struct KruskalWallisResult {
  double h = 0;  // tie-corrected
  double h_uncorrected = 0;
  double tie_correction = 1;  // 1 - sum(t^3 - t) / (N^3 - N)
  std::size_t df = 0;
  double p_value = 1;
};

KruskalWallisResult kruskal_wallis(const GroupedScores& groups);

/// Upper tail of the chi-square distribution.
double chi_square_upper_tail(double x, std::size_t df);

enum class DscfMode { kAsymptotic, kPermutation };

struct PairwiseComparison {
  std::string first;
  std::string second;
  double w_star = 0;  // positive when `second` tends to rank higher
  double w = 0;       // rank sum of `second` in the joint ranking
  double expected = 0;
  double variance = 0;
  std::optional<double> critical_value;  // asymptotic mode
  std::optional<double> p_value;         // permutation mode
  bool significant = false;
};

struct DscfResult {
  DscfMode mode = DscfMode::kAsymptotic;
  double alpha = 0.05;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  std::vector<PairwiseComparison> pairs;
};

/// Standardized two-sample statistic W* for (first, second).
PairwiseComparison dscf_statistic(const Group& first, const Group& second);

/// Upper-alpha quantile of the studentized range for k means and infinite df.
/// Throws StatsError outside the embedded table (k in 2..10, alpha 0.05/0.01).
double studentized_range_critical(std::size_t k, double alpha);

/// All pairs in group order. Asymptotic mode compares |W*| with
/// q(alpha, k, inf). Permutation mode shuffles the pooled values of all
/// groups `permutations` times, records max |W*| over every pair, and reports
/// p = (1 + #{max >= |W*|}) / (1 + permutations); significant when p <= alpha.
DscfResult dscf_pairwise(const GroupedScores& groups, double alpha, DscfMode mode,
                         std::size_t permutations = 10000, std::uint64_t seed = 0);

}  // namespace ohseg::stats
