#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qacme/suggestion.hpp"

namespace qacme {

// Character-keyed prefix tree with a non-negative weight on each stored
// string. Every node caches the largest weight in its subtree, so top_k() is a
// best-first search that only expands subtrees able to beat the current k-th
// result.
class WeightedTrie {
 public:
  WeightedTrie();
  ~WeightedTrie();
  WeightedTrie(WeightedTrie&&) noexcept;
  WeightedTrie& operator=(WeightedTrie&&) noexcept;
  WeightedTrie(const WeightedTrie&) = delete;
  WeightedTrie& operator=(const WeightedTrie&) = delete;

  // Adds `weight_delta` to the weight of `text`, creating it at 0 first.
  // Throws InvalidInput for an empty text or a non-finite delta. A result
  // below zero is clamped to 0 and counted in clamped_updates().
  void insert(std::string_view text, double weight_delta);

  std::optional<double> weight(std::string_view text) const;

  // Up to k stored strings starting with `prefix`, ordered by weight
  // descending then text ascending.
  std::vector<Suggestion> top_k(std::string_view prefix, std::size_t k) const;

  // Every stored string with its weight, in lexicographic order.
  std::vector<Suggestion> entries() const;

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::size_t clamped_updates() const { return clamped_; }

 private:
  struct Node;

  std::unique_ptr<Node> root_;
  std::size_t size_ = 0;
  std::size_t clamped_ = 0;
};

}  // namespace qacme
