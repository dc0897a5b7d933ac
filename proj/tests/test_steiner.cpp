#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "synsearch/error.hpp"
#include "synsearch/steiner.hpp"

using namespace synsearch;

TEST(Steiner, PathBetweenTwoLeaves) {
  //      0
  //    1   2
  //   3     4
  std::vector<int> heads{-1, 0, 0, 1, 2};
  EXPECT_EQ(minimal_connecting_subgraph(heads, std::vector<int>{3, 4}),
            (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_EQ(minimal_connecting_subgraph(heads, std::vector<int>{3, 1}), (std::vector<int>{1, 3}));
  EXPECT_EQ(minimal_connecting_subgraph(heads, std::vector<int>{4}), (std::vector<int>{4}));
}

TEST(Steiner, DuplicatesCollapse) {
  std::vector<int> heads{-1, 0, 0};
  EXPECT_EQ(minimal_connecting_subgraph(heads, std::vector<int>{1, 1, 2}),
            (std::vector<int>{0, 1, 2}));
}

TEST(Steiner, RejectsBadInput) {
  std::vector<int> heads{-1, 0};
  EXPECT_THROW(minimal_connecting_subgraph(heads, std::vector<int>{}), Error);
  EXPECT_THROW(minimal_connecting_subgraph(heads, std::vector<int>{2}), Error);
  std::vector<int> cyclic{1, 0};
  EXPECT_THROW(minimal_connecting_subgraph(cyclic, std::vector<int>{0}), Error);
  std::vector<int> forest{-1, -1};
  EXPECT_THROW(minimal_connecting_subgraph(forest, std::vector<int>{0, 1}), Error);
}

TEST(Steiner, AgreesWithBruteForce) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 10)(rng);
    auto heads = testkit::random_heads(rng, n);
    std::vector<int> marked;
    const int k = std::uniform_int_distribution<int>(1, n)(rng);
    for (int i = 0; i < k; ++i) marked.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
    EXPECT_EQ(minimal_connecting_subgraph(heads, marked), testkit::brute_force_steiner(heads, marked))
        << "trial " << trial;
  }
}
