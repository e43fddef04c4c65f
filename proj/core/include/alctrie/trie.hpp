#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "alctrie/source.hpp"

namespace alctrie {

/// Two or more keys agree on every available bit (one is a prefix of
/// another), so no finite trie can separate them.
class IndistinguishableKeysError : public Error {
 public:
  IndistinguishableKeysError(std::uint32_t exhausted_key, std::uint32_t other_key,
                             std::size_t level);
  std::uint32_t exhausted_key() const noexcept { return exhausted_; }
  std::uint32_t other_key() const noexcept { return other_; }
  std::size_t level() const noexcept { return level_; }

 private:
  std::uint32_t exhausted_;
  std::uint32_t other_;
  std::size_t level_;
};

class DepthCapError : public Error {
 public:
  explicit DepthCapError(std::size_t cap);
};

/// Number X_k of filled nodes per level, and X_k / 2^k.
struct LevelProfile {
  /// counts[k] = number of length-k prefixes shared by at least two keys.
  /// Length is height + 1; empty when fewer than two keys were inserted.
  std::vector<std::uint64_t> counts;

  std::size_t levels() const noexcept { return counts.size(); }
  std::uint64_t count(std::size_t k) const noexcept { return k < counts.size() ? counts[k] : 0; }
  /// X_k / 2^k; zero beyond the height.
  double fraction(std::size_t k) const noexcept;

  /// Rows "level,count,fraction" with a header line.
  void write_csv(std::ostream& out) const;
};

struct TrieNode {
  enum class Kind : std::uint8_t { internal, external };
  static constexpr std::int32_t kEmpty = -1;

  Kind kind = Kind::internal;
  std::uint32_t level = 0;
  /// Child node indices; kEmpty for a missing child (unary internal nodes).
  std::int32_t child[2] = {kEmpty, kEmpty};
  /// Valid for external nodes.
  std::uint32_t key = 0;
};

struct BuildOptions {
  std::size_t depth_cap = 4096;
};

/// Uncompressed binary trie. Unary internal nodes are kept so that the
/// per-level internal node count is exactly the number of shared prefixes.
class Trie {
 public:
  static Trie build(const KeySet& keys, BuildOptions options = {});
  /// Trie over a subset of keys, reading bits from position `bit_offset` on.
  /// Node levels are relative to the offset.
  static Trie build(const KeySet& keys, std::span<const std::uint32_t> ids,
                    std::size_t bit_offset, BuildOptions options = {});

  const std::vector<TrieNode>& nodes() const noexcept { return nodes_; }
  /// Root index, or TrieNode::kEmpty for an empty key set.
  std::int32_t root() const noexcept { return nodes_.empty() ? TrieNode::kEmpty : 0; }
  std::size_t key_count() const noexcept { return key_count_; }
  /// Deepest level holding an internal node; zero for fewer than two keys.
  std::size_t height() const noexcept { return profile_.counts.empty() ? 0 : profile_.counts.size() - 1; }

  const LevelProfile& level_profile() const noexcept { return profile_; }

  /// Level of the external node holding `key`. Throws std::out_of_range.
  std::uint32_t external_depth(std::uint32_t key) const;

 private:
  static constexpr std::uint32_t kAbsent = 0xffffffffU;

  std::vector<TrieNode> nodes_;
  std::vector<std::uint32_t> depth_by_key_;
  std::size_t key_count_ = 0;
  LevelProfile profile_;
};

inline LevelProfile level_profile(const Trie& trie) { return trie.level_profile(); }

/// X_k by direct prefix tabulation, without building a trie.
std::uint64_t count_filled_oracle(const KeySet& keys, std::size_t k);

/// F(alpha) = max{k : X_k / 2^k >= alpha}. Requires 0 < alpha <= 1 and at
/// least two keys; throws std::domain_error otherwise.
std::size_t alpha_fillup_level(const LevelProfile& profile, double alpha);

}  // namespace alctrie
