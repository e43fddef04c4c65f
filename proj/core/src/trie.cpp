#include "alctrie/trie.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace alctrie {

IndistinguishableKeysError::IndistinguishableKeysError(std::uint32_t exhausted_key,
                                                       std::uint32_t other_key, std::size_t level)
    : Error("keys " + std::to_string(exhausted_key) + " and " + std::to_string(other_key) +
            " cannot be separated: key " + std::to_string(exhausted_key) + " ends at bit " +
            std::to_string(level)),
      exhausted_(exhausted_key), other_(other_key), level_(level) {}

DepthCapError::DepthCapError(std::size_t cap)
    : Error("trie depth cap of " + std::to_string(cap) + " levels exceeded") {}

double LevelProfile::fraction(std::size_t k) const noexcept {
  return std::ldexp(static_cast<double>(count(k)), -static_cast<int>(std::min<std::size_t>(k, 100000)));
}

void LevelProfile::write_csv(std::ostream& out) const {
  out << "level,count,fraction\n";
  for (std::size_t k = 0; k < counts.size(); ++k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", fraction(k));
    out << k << ',' << counts[k] << ',' << buf << '\n';
  }
}

Trie Trie::build(const KeySet& keys, BuildOptions options) {
  std::vector<std::uint32_t> ids(keys.size());
  std::iota(ids.begin(), ids.end(), 0U);
  return build(keys, ids, 0, options);
}

Trie Trie::build(const KeySet& keys, std::span<const std::uint32_t> ids, std::size_t bit_offset,
                 BuildOptions options) {
  Trie t;
  t.key_count_ = ids.size();
  t.depth_by_key_.assign(keys.size(), kAbsent);
  if (ids.empty()) return t;

  auto make_external = [&](std::uint32_t key, std::uint32_t level) {
    TrieNode n;
    n.kind = TrieNode::Kind::external;
    n.level = level;
    n.key = key;
    t.nodes_.push_back(n);
    t.depth_by_key_.at(key) = level;
    return static_cast<std::int32_t>(t.nodes_.size() - 1);
  };

  if (ids.size() == 1) {
    make_external(ids[0], 0);
    return t;
  }

  // Groups of >= 2 keys sharing a prefix, processed one level at a time.
  struct Group {
    std::int32_t node;
    std::size_t begin, end;
  };
  std::vector<std::uint32_t> order(ids.begin(), ids.end());
  std::vector<std::uint32_t> scratch(order.size());
  std::vector<Group> current, next;

  t.nodes_.push_back(TrieNode{});
  current.push_back({0, 0, order.size()});

  for (std::size_t level = 0; !current.empty(); ++level) {
    t.profile_.counts.push_back(current.size());
    if (level + 1 > options.depth_cap) throw DepthCapError(options.depth_cap);
    next.clear();
    const std::size_t bit_pos = bit_offset + level;
    for (const Group& g : current) {
      // Stable split by the next bit: zeros to the front, ones after.
      std::size_t zeros = g.begin, ones_end = g.end;
      for (std::size_t i = g.begin; i < g.end; ++i) {
        const std::uint32_t id = order[i];
        const Key& key = keys[id];
        if (!key.has_bit(bit_pos)) {
          const std::uint32_t other = order[i == g.begin ? i + 1 : g.begin];
          throw IndistinguishableKeysError(id, other, bit_pos);
        }
        if (key.bit(bit_pos)) {
          scratch[--ones_end] = id;
        } else {
          order[zeros++] = id;
        }
      }
      // ones were written back-to-front
      for (std::size_t i = zeros, j = g.end; i < g.end; ++i) order[i] = scratch[--j];

      const std::size_t bounds[3] = {g.begin, zeros, g.end};
      for (int side = 0; side < 2; ++side) {
        const std::size_t b = bounds[side], e = bounds[side + 1];
        std::int32_t child = TrieNode::kEmpty;
        if (e - b == 1) {
          child = make_external(order[b], static_cast<std::uint32_t>(level + 1));
        } else if (e - b >= 2) {
          TrieNode n;
          n.level = static_cast<std::uint32_t>(level + 1);
          t.nodes_.push_back(n);
          child = static_cast<std::int32_t>(t.nodes_.size() - 1);
          next.push_back({child, b, e});
        }
        t.nodes_[g.node].child[side] = child;
      }
    }
    std::swap(current, next);
  }
  return t;
}

std::uint32_t Trie::external_depth(std::uint32_t key) const {
  if (key >= depth_by_key_.size() || depth_by_key_[key] == kAbsent)
    throw std::out_of_range("key " + std::to_string(key) + " is not stored in the trie");
  return depth_by_key_[key];
}

std::uint64_t count_filled_oracle(const KeySet& keys, std::size_t k) {
  std::unordered_map<std::string, std::uint32_t> tally;
  for (const Key& key : keys) {
    if (k > 0 && !key.has_bit(k - 1))
      throw std::invalid_argument("key " + std::to_string(key.id()) + " is shorter than " +
                                  std::to_string(k) + " bits");
    ++tally[key.prefix_string(k)];
  }
  std::uint64_t filled = 0;
  for (const auto& [prefix, count] : tally) filled += count >= 2;
  return filled;
}

std::size_t alpha_fillup_level(const LevelProfile& profile, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must lie in (0,1]");
  if (profile.counts.empty() || profile.fraction(0) < alpha)
    throw std::domain_error("alpha-fillup level is undefined for fewer than two keys");
  std::size_t k = 0;
  while (k + 1 < profile.counts.size() && profile.fraction(k + 1) >= alpha) ++k;
  return k;
}

}  // namespace alctrie
