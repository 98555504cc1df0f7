#pragma once

// Clebsch-Gordan blocks <j m1; j M-m1 | l M> for two equal spins j, one dense
// orthogonal matrix per M sector. Sectors are built on first use and are
// read-only afterwards, so concurrent readers need no coordination.

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "so4/amath.hpp"

namespace so4 {

class CouplingTable {
 public:
  /// Block for total projection M: rows l = |M|..2j, columns m1 = m1_min..m1_max.
  struct Block {
    int size = 0;           // 2j + 1 - |M|
    int l_min = 0;          // |M|
    int twice_m1_min = 0;   // twice of the smallest m1 in the sector
    std::vector<double> cg; // row-major size x size

    [[nodiscard]] double operator()(int l_row, int m1_col) const {
      return cg[static_cast<std::size_t>(l_row) * size + m1_col];
    }
  };

  explicit CouplingTable(int twice_j)
      : twice_j_(twice_j), blocks_(static_cast<std::size_t>(2 * twice_j + 1)),
        flags_(static_cast<std::size_t>(2 * twice_j + 1)) {}

  CouplingTable(const CouplingTable&) = delete;
  CouplingTable& operator=(const CouplingTable&) = delete;

  [[nodiscard]] int twice_j() const { return twice_j_; }

  /// M is integral since m1 + m2 for equal j always is; -2j <= M <= 2j.
  [[nodiscard]] const Block& block(int M) const {
    const auto idx = static_cast<std::size_t>(M + twice_j_);
    std::call_once(flags_.at(idx), [&] { blocks_[idx] = build(M); });
    return blocks_[idx];
  }

 private:
  [[nodiscard]] Block build(int M) const {
    const int tj = twice_j_;
    const int absM = M < 0 ? -M : M;
    Block b;
    b.size = tj + 1 - absM;
    b.l_min = absM;
    // m1 ranges over max(-j, M - j) .. min(j, M + j)
    b.twice_m1_min = std::max(-tj, 2 * M - tj);
    b.cg.resize(static_cast<std::size_t>(b.size) * b.size);
    const HalfInt j = HalfInt::from_twice(tj);
    const HalfInt mm = HalfInt::integer(M);
    for (int r = 0; r < b.size; ++r) {
      const HalfInt l = HalfInt::integer(b.l_min + r);
      for (int c = 0; c < b.size; ++c) {
        const HalfInt m1 = HalfInt::from_twice(b.twice_m1_min + 2 * c);
        b.cg[static_cast<std::size_t>(r) * b.size + c] = clebsch_gordan(j, m1, j, mm - m1, l, mm);
      }
    }
    return b;
  }

  int twice_j_;
  mutable std::vector<Block> blocks_;
  mutable std::vector<std::once_flag> flags_;
};

/// Process-wide table for a given j; built lazily, never freed.
inline const CouplingTable& coupling_table(int twice_j) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<CouplingTable>> tables;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = tables[twice_j];
  if (!slot) slot = std::make_unique<CouplingTable>(twice_j);
  return *slot;
}

}  // namespace so4
