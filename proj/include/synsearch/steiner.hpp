#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "synsearch/error.hpp"

namespace synsearch {

/// Smallest connected node set of a rooted tree containing every marked node.
///
/// `heads[i]` is the parent of node i, or -1 for the root. In a tree the
/// answer is unique: the union of the paths between all marked pairs. A node
/// belongs to it iff its subtree holds some but not all marked nodes, or it is
/// the deepest node whose subtree holds all of them (their common ancestor).
/// Returns the nodes in ascending order.
template <typename Index>
std::vector<Index> minimal_connecting_subgraph(std::span<const Index> heads,
                                               std::span<const Index> marked) {
  const auto n = static_cast<Index>(heads.size());
  if (marked.empty())
    throw Error(ErrorCode::kInvalidArgument, "marked set is empty");

  std::vector<int> count(heads.size(), 0);
  for (Index m : marked) {
    if (m < 0 || m >= n)
      throw Error(ErrorCode::kInvalidArgument,
                  "marked index " + std::to_string(m) + " out of range");
    count[m] = 1;  // duplicates in `marked` collapse
  }
  const int total =
      static_cast<int>(std::count(count.begin(), count.end(), 1));

  // Children-before-parents order via depth; the tree is small so a
  // depth sort is simpler than an explicit post-order walk.
  std::vector<int> depth(heads.size(), -1);
  for (Index v = 0; v < n; ++v) {
    std::vector<Index> path;
    Index u = v;
    while (u != -1 && depth[u] < 0) {
      if (static_cast<int>(path.size()) > n)
        throw Error(ErrorCode::kInvalidTree, "head array contains a cycle");
      path.push_back(u);
      u = heads[u];
      if (u < -1 || u >= n)
        throw Error(ErrorCode::kInvalidTree, "head out of range");
    }
    int d = u == -1 ? -1 : depth[u];
    for (auto it = path.rbegin(); it != path.rend(); ++it) depth[*it] = ++d;
  }
  std::vector<Index> order(heads.size());
  for (Index v = 0; v < n; ++v) order[v] = v;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return depth[a] > depth[b]; });
  for (Index v : order) {
    if (heads[v] != -1) count[heads[v]] += count[v];
  }

  Index top = -1;
  for (Index v : order) {
    if (count[v] == total) {
      top = v;
      break;
    }
  }
  if (top == -1)
    throw Error(ErrorCode::kInvalidTree, "marked nodes lie in different trees");
  std::vector<Index> out;
  for (Index v = 0; v < n; ++v) {
    if ((count[v] > 0 && count[v] < total) || v == top) out.push_back(v);
  }
  return out;
}

template <typename Index>
std::vector<Index> minimal_connecting_subgraph(
    const std::vector<Index>& heads, const std::vector<Index>& marked) {
  return minimal_connecting_subgraph<Index>(std::span<const Index>(heads),
                                            std::span<const Index>(marked));
}

}  // namespace synsearch
