#ifndef STEERBIAS_GROUP_HPP
#define STEERBIAS_GROUP_HPP

#include <string>
#include <vector>

#include "steerbias/errors.hpp"

namespace steerbias {

// Groups are capped at this order; everything downstream is dense.
inline constexpr int kMaxGroupOrder = 256;

/// A finite group given by its full multiplication table. Elements are the
/// indices 0..order-1. Construction validates the group axioms; instances
/// are immutable afterwards.
class FiniteGroup {
 public:
  /// Z_n with mul(i,j) = (i+j) mod n.
  static FiniteGroup cyclic(int n) {
    if (n < 1) throw validation_error("cyclic: group order must be >= 1, got " + std::to_string(n));
    std::vector<std::vector<int>> table(n, std::vector<int>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) table[i][j] = (i + j) % n;
    return from_table(table);
  }

  /// Builds a group from a square multiplication table, checking closure,
  /// the Latin-square property, associativity, identity and inverses.
  static FiniteGroup from_table(const std::vector<std::vector<int>>& table) {
    const int n = static_cast<int>(table.size());
    if (n < 1) throw validation_error("from_table: empty multiplication table");
    if (n > kMaxGroupOrder)
      throw validation_error("from_table: order " + std::to_string(n) + " exceeds cap " +
                             std::to_string(kMaxGroupOrder));
    FiniteGroup g;
    g.order_ = n;
    g.mul_.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(table[i].size()) != n)
        throw validation_error("from_table: row " + std::to_string(i) + " is not length " +
                               std::to_string(n));
      for (int j = 0; j < n; ++j) {
        const int v = table[i][j];
        if (v < 0 || v >= n)
          throw validation_error("from_table: entry (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") = " + std::to_string(v) +
                                 " is out of range");
        g.mul_[static_cast<std::size_t>(i) * n + j] = v;
      }
    }

    // Latin square: each row and column is a permutation.
    std::vector<char> seen(n);
    for (int i = 0; i < n; ++i) {
      std::fill(seen.begin(), seen.end(), 0);
      for (int j = 0; j < n; ++j) seen[g.mul(i, j)] = 1;
      for (int v = 0; v < n; ++v)
        if (!seen[v])
          throw validation_error("from_table: row " + std::to_string(i) +
                                 " is not a permutation (misses " + std::to_string(v) + ")");
    }
    for (int j = 0; j < n; ++j) {
      std::fill(seen.begin(), seen.end(), 0);
      for (int i = 0; i < n; ++i) seen[g.mul(i, j)] = 1;
      for (int v = 0; v < n; ++v)
        if (!seen[v])
          throw validation_error("from_table: column " + std::to_string(j) +
                                 " is not a permutation (misses " + std::to_string(v) + ")");
    }

    // Identity.
    g.identity_ = -1;
    for (int e = 0; e < n; ++e) {
      bool ok = true;
      for (int x = 0; x < n; ++x)
        if (g.mul(e, x) != x || g.mul(x, e) != x) { ok = false; break; }
      if (ok) { g.identity_ = e; break; }
    }
    if (g.identity_ < 0) throw validation_error("from_table: no identity element");

    // Inverses.
    g.inv_.assign(n, -1);
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        if (g.mul(x, y) == g.identity_ && g.mul(y, x) == g.identity_) { g.inv_[x] = y; break; }
      }
      if (g.inv_[x] < 0)
        throw validation_error("from_table: element " + std::to_string(x) + " has no inverse");
    }

    // Associativity over all triples.
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c)))
            throw validation_error("from_table: associativity fails on triple (" +
                                   std::to_string(a) + "," + std::to_string(b) + "," +
                                   std::to_string(c) + ")");
    return g;
  }

  int order() const { return order_; }
  int identity() const { return identity_; }
  int mul(int g, int h) const { return mul_[static_cast<std::size_t>(g) * order_ + h]; }
  int inverse(int g) const { return inv_[g]; }

  bool operator==(const FiniteGroup& o) const {
    return order_ == o.order_ && mul_ == o.mul_;
  }

 private:
  FiniteGroup() = default;
  int order_ = 0;
  int identity_ = 0;
  std::vector<int> mul_;  // row-major order x order
  std::vector<int> inv_;
};

}  // namespace steerbias

#endif  // STEERBIAS_GROUP_HPP
