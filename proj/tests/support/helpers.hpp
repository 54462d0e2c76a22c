#pragma once

// shared helpers for the test suite: a deterministic rng, random valid
// schedule generation, and small numeric utilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "shewave/errors.hpp"
#include "shewave/grid.hpp"
#include "shewave/schedule.hpp"

namespace test_support {

// splitmix64: tiny deterministic generator, stable across platforms.
struct rng64 {
  std::uint64_t state;

  explicit rng64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    return next() % n;
  }
};

// random strictly increasing edge cycles in [0, quarter) with a level walk
// that stays within +-level_max and never takes a zero step.  start level is
// random in [-level_max, level_max].
inline shewave::switching_schedule random_schedule(rng64& rng,
                                                   const shewave::timing_grid& grid,
                                                   int max_edges,
                                                   int level_max) {
  const int quarter = grid.quarter_cycles();
  const int n_edges = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_edges) + 1));

  std::vector<int> cycles;
  {
    std::vector<int> pool(static_cast<std::size_t>(quarter));
    for (int k = 0; k < quarter; ++k) pool[static_cast<std::size_t>(k)] = k;
    for (int k = 0; k < n_edges; ++k) {
      const std::size_t remaining = pool.size();
      const std::size_t pick = static_cast<std::size_t>(rng.below(remaining));
      cycles.push_back(pool[pick]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    std::sort(cycles.begin(), cycles.end());
  }

  const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * level_max) + 1)) - level_max;

  std::vector<shewave::switching_edge> edges;
  int level = start;
  for (int k = 0; k < n_edges; ++k) {
    std::vector<int> steps;
    for (int s = -level_max - level; s <= level_max - level; ++s) {
      if (s != 0) steps.push_back(s);
    }
    const int step = steps[static_cast<std::size_t>(rng.below(steps.size()))];
    edges.push_back({cycles[static_cast<std::size_t>(k)], step});
    level += step;
  }

  return shewave::build_schedule(grid, edges, start, level_max);
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

// true iff f() throws shewave::error with exactly the wanted code
template <typename F>
bool throws_errc(F&& f, shewave::errc want) {
  try {
    f();
  } catch (const shewave::error& e) {
    return e.code() == want;
  } catch (...) {
    return false;
  }
  return false;
}

}  // namespace test_support
