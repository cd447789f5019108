#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>

#include "epr/core.hpp"

namespace epr {

// The 4 x 2 counters N_d(E), N_d(U) plus per-configuration totals N_d.
struct Tally {
  struct Cell {
    std::uint64_t total{0};
    std::uint64_t equal{0};
    std::uint64_t unequal{0};
  };
  std::array<Cell, 4> by_config{};

  std::uint64_t n() const {
    std::uint64_t sum = 0;
    for (const auto& c : by_config) sum += c.total;
    return sum;
  }

  void add(const PairRecord& rec) {
    Cell& c = by_config[static_cast<std::size_t>(config_of(rec.setting).d)];
    ++c.total;
    if (rec.alice == rec.bob) ++c.equal; else ++c.unequal;
  }

  // per-cell addition; associative and commutative
  void merge(const Tally& other) {
    for (int d = 0; d < 4; ++d) {
      by_config[d].total += other.by_config[d].total;
      by_config[d].equal += other.by_config[d].equal;
      by_config[d].unequal += other.by_config[d].unequal;
    }
  }
};

inline Tally tally(std::span<const PairRecord> records) {
  Tally t;
  for (const auto& rec : records) t.add(rec);
  return t;
}

// N1(U) <= N2(E) + N3(U); violated means strictly greater.
struct BellResult {
  std::uint64_t n1u{0};
  std::uint64_t n2e{0};
  std::uint64_t n3u{0};
  bool violated{false};
};

inline BellResult bell_test(const Tally& t) {
  BellResult r;
  r.n1u = t.by_config[1].unequal;
  r.n2e = t.by_config[2].equal;
  r.n3u = t.by_config[3].unequal;
  r.violated = r.n1u > r.n2e + r.n3u;
  return r;
}

// Optional second inequality N3(E) <= N1(E) + N2(U), same strict convention.
// Diagnostic only; no figure pins its numbers.
inline BellResult bell_test_dual(const Tally& t) {
  BellResult r;
  r.n1u = t.by_config[3].equal;
  r.n2e = t.by_config[1].equal;
  r.n3u = t.by_config[2].unequal;
  r.violated = r.n1u > r.n2e + r.n3u;
  return r;
}

// Correlations in the equal-outcome convention E_d = 2 N_d(E)/N_d - 1,
// S the maximum of the four absolute sign combinations over the Bell angles.
struct ChshResult {
  std::array<double, 4> e{};
  double s{0.0};
  bool violated{false};
};

// Empty when any N_d = 0 (S undefined for that run).
inline std::optional<ChshResult> chsh(const Tally& t) {
  ChshResult r;
  for (int d = 0; d < 4; ++d) {
    const auto& c = t.by_config[d];
    if (c.total == 0) return std::nullopt;
    r.e[d] = 2.0 * static_cast<double>(c.equal) / static_cast<double>(c.total) - 1.0;
  }
  const auto [e0, e1, e2, e3] = r.e;
  r.s = std::max({std::abs(e0 + e1 + e2 - e3), std::abs(e0 + e1 - e2 + e3),
                  std::abs(e0 - e1 + e2 + e3), std::abs(e1 + e2 + e3 - e0)});
  r.violated = r.s > 2.0;
  return r;
}

struct AntiCorrResult {
  std::uint64_t equal_angle_total{0};  // N_0
  std::uint64_t misses{0};             // N_0(E)
  double percent{0.0};
  bool perfect{false};
};

inline std::optional<AntiCorrResult> anticorr_audit(const Tally& t) {
  const auto& c = t.by_config[0];
  if (c.total == 0) return std::nullopt;
  AntiCorrResult r;
  r.equal_angle_total = c.total;
  r.misses = c.equal;
  r.percent = 100.0 * (1.0 - static_cast<double>(r.misses) /
                                 static_cast<double>(r.equal_angle_total));
  r.perfect = r.misses == 0;
  return r;
}

// The N^i_d bookkeeping: counts per pair class i and configuration d.
// Only meaningful for hidden-variable models where the class is known.
struct ClassConfigMatrix {
  std::array<std::array<std::uint64_t, 4>, 8> counts{};

  void add(int class_idx, int d) { ++counts[class_idx][d]; }

  std::uint64_t class_total(int i) const {
    std::uint64_t sum = 0;
    for (int d = 0; d < 4; ++d) sum += counts[i][d];
    return sum;
  }
};

// Max over (i,d) of |N^i_d - N^i/4| in units of the binomial sigma
// sqrt(N^i * 1/4 * 3/4). Classes with N^i = 0 are skipped.
inline double class_config_check(const ClassConfigMatrix& m) {
  double worst = 0.0;
  for (int i = 0; i < 8; ++i) {
    const auto total = static_cast<double>(m.class_total(i));
    if (total == 0.0) continue;
    const double expected = total / 4.0;
    const double sigma = std::sqrt(total * 0.25 * 0.75);
    for (int d = 0; d < 4; ++d) {
      const double dev = std::abs(static_cast<double>(m.counts[i][d]) - expected) / sigma;
      worst = std::max(worst, dev);
    }
  }
  return worst;
}

}  // namespace epr
