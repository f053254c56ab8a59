// Independent reference computations used only by tests. None of these call
// into the library code paths they are used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Boundary pairing by exhaustive search over all partial matchings.

struct PairingCounts {
  std::size_t matches = 0;
  std::size_t near_misses = 0;
  std::size_t misses_a = 0;
  std::size_t misses_b = 0;
  std::size_t distance = 0;
};

// Objective, compared lexicographically: most exact pairs, fewest unpaired
// boundaries, smallest total offset. Any pair with offset < n_t is allowed,
// crossing or not.
inline PairingCounts brute_force_pairing(const std::vector<std::size_t>& a,
                                         const std::vector<std::size_t>& b, std::size_t n_t) {
  struct Best {
    std::size_t exact = 0, paired = 0, distance = 0;
    bool set = false;
  } best;
  std::vector<bool> used(b.size(), false);
  std::function<void(std::size_t, std::size_t, std::size_t, std::size_t)> rec =
      [&](std::size_t i, std::size_t exact, std::size_t paired, std::size_t dist) {
        if (i == a.size()) {
          const std::size_t unpaired = a.size() + b.size() - 2 * paired;
          const std::size_t best_unpaired = a.size() + b.size() - 2 * best.paired;
          bool better = !best.set || exact > best.exact ||
                        (exact == best.exact && (unpaired < best_unpaired ||
                                                 (unpaired == best_unpaired && dist < best.distance)));
          if (better) best = {exact, paired, dist, true};
          return;
        }
        rec(i + 1, exact, paired, dist);
        for (std::size_t j = 0; j < b.size(); ++j) {
          if (used[j]) continue;
          const std::size_t d = a[i] > b[j] ? a[i] - b[j] : b[j] - a[i];
          if (d >= n_t) continue;
          used[j] = true;
          rec(i + 1, exact + (d == 0), paired + 1, dist + d);
          used[j] = false;
        }
      };
  rec(0, 0, 0, 0);
  PairingCounts out;
  out.matches = best.exact;
  out.near_misses = best.paired - best.exact;
  out.misses_a = a.size() - best.paired;
  out.misses_b = b.size() - best.paired;
  out.distance = best.distance;
  return out;
}

// ---------------------------------------------------------------------------
// Dirichlet-compound-multinomial likelihood through rising factorials:
// Gamma(x + n) / Gamma(x) = x (x+1) ... (x+n-1).

inline double log_rising(double x, std::uint32_t n) {
  double s = 0;
  for (std::uint32_t i = 0; i < n; ++i) s += std::log(x + i);
  return s;
}

inline double dcm_by_rising_factorials(const std::vector<std::uint32_t>& counts, double alpha,
                                       std::size_t vocabulary) {
  std::uint32_t total = 0;
  double words = 0;
  for (auto c : counts) {
    total += c;
    words += log_rising(alpha, c);
  }
  return words - log_rising(alpha * static_cast<double>(vocabulary), total);
}

// Exhaustive MAP segmentation over all C(n-1, K-1) boundary sets.
// sentences: per-sentence word ids. Among objectives within `tie` of the
// maximum, returns the set that is smallest when compared from the last
// boundary backwards (the earliest-split backtrace rule).
struct Enumerated {
  std::vector<std::size_t> boundaries;
  double objective = -std::numeric_limits<double>::infinity();
};

inline Enumerated enumerate_segmentations(const std::vector<std::vector<std::uint32_t>>& sentences,
                                          std::size_t vocabulary, std::size_t k, double alpha,
                                          double tie = 1e-9) {
  const std::size_t n = sentences.size();
  auto score = [&](const std::vector<std::size_t>& bounds) {
    double total = 0;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= bounds.size(); ++i) {
      const std::size_t end = i < bounds.size() ? bounds[i] : n;
      std::vector<std::uint32_t> counts(vocabulary, 0);
      for (std::size_t s = begin; s < end; ++s) {
        for (auto w : sentences[s]) ++counts[w];
      }
      total += dcm_by_rising_factorials(counts, alpha, vocabulary);
      begin = end;
    }
    return total;
  };
  std::vector<std::pair<double, std::vector<std::size_t>>> all;
  std::vector<std::size_t> current;
  std::function<void(std::size_t)> rec = [&](std::size_t next) {
    if (current.size() == k - 1) {
      all.emplace_back(score(current), current);
      return;
    }
    for (std::size_t b = next; b < n; ++b) {
      current.push_back(b);
      rec(b + 1);
      current.pop_back();
    }
  };
  rec(1);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [v, bounds] : all) best = std::max(best, v);
  Enumerated out;
  bool have = false;
  for (const auto& [v, bounds] : all) {
    if (v < best - tie) continue;
    auto reverse_less = [](const std::vector<std::size_t>& x, const std::vector<std::size_t>& y) {
      return std::lexicographical_compare(x.rbegin(), x.rend(), y.rbegin(), y.rend());
    };
    if (!have || reverse_less(bounds, out.boundaries)) {
      out.boundaries = bounds;
      have = true;
    }
  }
  out.objective = best;
  return out;
}

// ---------------------------------------------------------------------------
// Studentized range with infinite df:
// P(R <= q) = k * int phi(z) [Phi(z) - Phi(z - q)]^(k-1) dz.

inline double studentized_range_cdf(double q, std::size_t k) {
  auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI); };
  auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  const double lo = -10, hi = 10;
  const int steps = 20000;  // composite Simpson
  const double h = (hi - lo) / steps;
  double sum = 0;
  for (int i = 0; i <= steps; ++i) {
    const double z = lo + i * h;
    const double f = phi(z) * std::pow(Phi(z) - Phi(z - q), static_cast<double>(k - 1));
    sum += f * (i == 0 || i == steps ? 1 : (i % 2 ? 4 : 2));
  }
  return static_cast<double>(k) * sum * h / 3;
}

inline double studentized_range_quantile(double p, std::size_t k) {
  double lo = 0, hi = 20;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (studentized_range_cdf(mid, k) < p ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

// Kruskal-Wallis H from its definition over distinct values (no ties):
// H = 12 / (N (N+1)) * sum n_i (mean_rank_i - (N+1)/2)^2.
inline double kruskal_wallis_no_ties(const std::vector<std::vector<double>>& groups) {
  std::vector<double> pooled;
  for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
  std::sort(pooled.begin(), pooled.end());
  const double n = static_cast<double>(pooled.size());
  double h = 0;
  for (const auto& g : groups) {
    double rank_sum = 0;
    for (double v : g) {
      rank_sum += static_cast<double>(std::lower_bound(pooled.begin(), pooled.end(), v) - pooled.begin() + 1);
    }
    const double mean_rank = rank_sum / static_cast<double>(g.size());
    h += static_cast<double>(g.size()) * (mean_rank - (n + 1) / 2) * (mean_rank - (n + 1) / 2);
  }
  return 12.0 / (n * (n + 1)) * h;
}

}  // namespace oracle
