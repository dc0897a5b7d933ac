#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <numeric>
#include <random>
#include <vector>

namespace synsearch {

/// `k` distinct positions out of [0, n), ascending, uniform over all
/// k-subsets. Selection sampling over a seeded mt19937_64 so the result
/// depends only on (n, k, seed).
inline std::vector<std::size_t> sample_positions(std::size_t n, std::size_t k,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (k >= n) return all;
  std::vector<std::size_t> picked;
  picked.reserve(k);
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), k, rng);
  return picked;
}

template <typename T>
std::vector<T> sample_without_replacement(const std::vector<T>& items,
                                          std::size_t k, std::uint64_t seed) {
  std::vector<T> out;
  for (std::size_t i : sample_positions(items.size(), k, seed)) out.push_back(items[i]);
  return out;
}

}  // namespace synsearch
