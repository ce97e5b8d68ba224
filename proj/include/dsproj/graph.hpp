#pragma once

// Connectivity of 0/1 patterns viewed as bipartite graphs: pattern rows and
// columns are the two node classes and M(i,j) == 1 is an edge.  Isolated rows
// or columns form their own (one-sided) components.

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "dsproj/core_model.hpp"

namespace dsproj {

class UnionFind {
 public:
  explicit UnionFind(Index n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }

  Index find(Index a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];  // path halving
      a = parent_[a];
    }
    return a;
  }

  // Returns true when a and b were in different sets.
  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<Index> parent_;
  std::vector<Index> size_;
};

// Connected components of a pattern's bipartite graph.  Groups are paired by
// position: component k owns rows row_groups[k] and columns col_groups[k],
// each sorted ascending and possibly empty (never both).  Components are
// ordered by smallest contained row, then smallest column, except that the
// component containing the last row is always placed last.
struct BlockPartition {
  Index K = 0;
  std::vector<std::vector<Index>> row_groups;
  std::vector<std::vector<Index>> col_groups;
  bool last_has_row_n = false;
};

inline BlockPartition components(const PatternMatrix& M) {
  const Index n = M.rows();
  // Nodes 0..n-1 are rows, n..2n-1 are columns.
  UnionFind uf(2 * n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (M(i, j)) uf.unite(i, n + j);
    }
  }

  std::vector<Index> root_of(2 * n);
  std::vector<Index> roots;
  for (Index v = 0; v < 2 * n; ++v) {
    root_of[v] = uf.find(v);
    if (root_of[v] == v) roots.push_back(v);
  }

  std::vector<Index> slot(2 * n, -1);
  for (Index k = 0; k < static_cast<Index>(roots.size()); ++k) slot[roots[k]] = k;

  BlockPartition part;
  part.K = static_cast<Index>(roots.size());
  part.row_groups.resize(part.K);
  part.col_groups.resize(part.K);
  for (Index i = 0; i < n; ++i) part.row_groups[slot[root_of[i]]].push_back(i);
  for (Index j = 0; j < n; ++j) part.col_groups[slot[root_of[n + j]]].push_back(j);

  // Scanning order already yields sorted groups; order the components.
  std::vector<Index> order(part.K);
  std::iota(order.begin(), order.end(), Index{0});
  const Index last_row_slot = slot[root_of[n - 1]];
  constexpr Index kNone = std::numeric_limits<Index>::max();
  auto key = [&](Index k) {
    const Index r = part.row_groups[k].empty() ? kNone : part.row_groups[k].front();
    const Index c = part.col_groups[k].empty() ? kNone : part.col_groups[k].front();
    return std::make_pair(r, c);
  };
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const bool a_last = (a == last_row_slot), b_last = (b == last_row_slot);
    if (a_last != b_last) return b_last;  // the last row's component sinks to the end
    return key(a) < key(b);
  });

  BlockPartition out;
  out.K = part.K;
  out.row_groups.reserve(part.K);
  out.col_groups.reserve(part.K);
  for (Index k : order) {
    out.row_groups.push_back(std::move(part.row_groups[k]));
    out.col_groups.push_back(std::move(part.col_groups[k]));
  }
  out.last_has_row_n =
      !out.row_groups.back().empty() && out.row_groups.back().back() == n - 1;
  return out;
}

// A pattern is connected when its bipartite graph is a single component;
// a zero row or column is an isolated node and makes the graph disconnected.
inline bool is_connected(const PatternMatrix& M) {
  return components(M).K == 1;
}

}  // namespace dsproj
