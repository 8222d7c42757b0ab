#include "qacme/trie.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>

#include "qacme/errors.hpp"

namespace qacme {

namespace {

unsigned char byte(char c) { return static_cast<unsigned char>(c); }

}  // namespace

struct WeightedTrie::Node {
  // Sorted by unsigned byte value, matching std::string ordering.
  std::vector<std::pair<char, std::unique_ptr<Node>>> children;
  double weight = 0.0;
  bool terminal = false;
  // Max weight of any terminal in this subtree, -1 when there is none.
  double best = -1.0;

  Node* child(char c) const {
    auto it = std::lower_bound(children.begin(), children.end(), c,
                               [](const auto& p, char key) { return byte(p.first) < byte(key); });
    return (it != children.end() && it->first == c) ? it->second.get() : nullptr;
  }

  Node& child_or_create(char c) {
    auto it = std::lower_bound(children.begin(), children.end(), c,
                               [](const auto& p, char key) { return byte(p.first) < byte(key); });
    if (it == children.end() || it->first != c) {
      it = children.emplace(it, c, std::make_unique<Node>());
    }
    return *it->second;
  }

  void refresh_best() {
    best = terminal ? weight : -1.0;
    for (const auto& [c, n] : children) best = std::max(best, n->best);
  }
};

WeightedTrie::WeightedTrie() : root_(std::make_unique<Node>()) {}
WeightedTrie::~WeightedTrie() = default;
WeightedTrie::WeightedTrie(WeightedTrie&&) noexcept = default;
WeightedTrie& WeightedTrie::operator=(WeightedTrie&&) noexcept = default;

void WeightedTrie::insert(std::string_view text, double weight_delta) {
  if (text.empty()) throw InvalidInput("cannot insert an empty string into the trie");
  if (!std::isfinite(weight_delta)) throw InvalidInput("trie weight delta must be finite");

  std::vector<Node*> path;
  path.reserve(text.size() + 1);
  Node* node = root_.get();
  path.push_back(node);
  for (char c : text) {
    node = &node->child_or_create(c);
    path.push_back(node);
  }
  if (!node->terminal) {
    node->terminal = true;
    node->weight = 0.0;
    ++size_;
  }
  node->weight += weight_delta;
  if (node->weight < 0.0) {
    node->weight = 0.0;
    ++clamped_;
  }
  for (auto it = path.rbegin(); it != path.rend(); ++it) (*it)->refresh_best();
}

std::optional<double> WeightedTrie::weight(std::string_view text) const {
  const Node* node = root_.get();
  for (char c : text) {
    node = node->child(c);
    if (!node) return std::nullopt;
  }
  if (!node->terminal) return std::nullopt;
  return node->weight;
}

namespace {

// Frontier entry of the best-first search: either an expandable subtree
// (node != nullptr, key = subtree max) or a finished result (key = weight).
struct Frontier {
  double key;
  std::string text;
  const void* node;
};

// Pops highest key first, then smallest text, and a finished result before a
// subtree with the same text. Every string under a subtree with path s is
// >= s, so once a result pops nothing left in the queue can precede it.
struct FrontierAfter {
  bool operator()(const Frontier& a, const Frontier& b) const {
    if (a.key != b.key) return a.key < b.key;
    if (a.text != b.text) return a.text > b.text;
    return a.node != nullptr && b.node == nullptr;
  }
};

}  // namespace

std::vector<Suggestion> WeightedTrie::top_k(std::string_view prefix, std::size_t k) const {
  std::vector<Suggestion> out;
  if (k == 0) return out;
  const Node* start = root_.get();
  for (char c : prefix) {
    start = start->child(c);
    if (!start) return out;
  }
  if (start->best < 0.0) return out;

  std::priority_queue<Frontier, std::vector<Frontier>, FrontierAfter> queue;
  queue.push({start->best, std::string(prefix), start});
  while (!queue.empty() && out.size() < k) {
    Frontier top = queue.top();
    queue.pop();
    if (top.node == nullptr) {
      out.push_back({std::move(top.text), top.key});
      continue;
    }
    const auto* node = static_cast<const Node*>(top.node);
    if (node->terminal) queue.push({node->weight, top.text, nullptr});
    for (const auto& [c, child] : node->children) {
      if (child->best < 0.0) continue;
      std::string text = top.text;
      text.push_back(c);
      queue.push({child->best, std::move(text), child.get()});
    }
  }
  return out;
}

std::vector<Suggestion> WeightedTrie::entries() const {
  std::vector<Suggestion> out;
  out.reserve(size_);
  std::string path;
  struct Walk {
    std::vector<Suggestion>& out;
    std::string& path;
    void operator()(const Node& node) {
      if (node.terminal) out.push_back({path, node.weight});
      for (const auto& [c, child] : node.children) {
        path.push_back(c);
        (*this)(*child);
        path.pop_back();
      }
    }
  };
  Walk{out, path}(*root_);
  return out;
}

}  // namespace qacme
