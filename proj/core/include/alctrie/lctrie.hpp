#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "alctrie/source.hpp"
#include "alctrie/trie.hpp"

namespace alctrie {

/// A key ran out of bits while being dispatched through a compressed
/// node's window (it is unique, but shorter than the window).
class WindowExhaustedError : public Error {
 public:
  WindowExhaustedError(std::uint32_t key, std::size_t bit, std::size_t window_end);
};

/// One node of an alpha-LC trie. `consumed == 0` marks an external node.
struct AlcNode {
  static constexpr std::int32_t kEmpty = -1;

  /// Number of trie levels collapsed into this node; children = 2^consumed.
  std::uint32_t consumed = 0;
  /// Bit position at which this node's window starts.
  std::uint32_t offset = 0;
  /// Index of the first child slot in AlcTrie::slots().
  std::uint32_t first_slot = 0;
  /// Stored key for external nodes.
  std::uint32_t key = 0;
  /// Smallest key id in the subtree.
  std::uint32_t min_key = 0;

  bool is_external() const noexcept { return consumed == 0; }
  std::size_t slot_count() const noexcept { return is_external() ? 0 : std::size_t{1} << consumed; }
};

struct DepthSample {
  std::uint32_t key = 0;
  /// Number of compressed nodes on the root-to-key path.
  std::uint32_t depth = 0;
  /// Sum of `consumed` along that path.
  std::uint32_t consumed_total = 0;
};

struct PrefixMatch {
  std::uint32_t key = 0;
  std::size_t prefix_length = 0;

  friend bool operator==(const PrefixMatch&, const PrefixMatch&) = default;
};

struct AlcStats {
  std::size_t compressed_nodes = 0;
  std::size_t external_nodes = 0;
  std::size_t total_slots = 0;
  std::size_t empty_slots = 0;
  double empty_slot_fraction = 0.0;
  /// consumed value -> number of compressed nodes.
  std::map<std::uint32_t, std::size_t> consumed_histogram;
  double mean_consumed = 0.0;
  /// Mean number of nonempty child slots per compressed node.
  double mean_degree = 0.0;
  std::uint32_t max_depth = 0;
  double mean_depth = 0.0;
};

struct CompressOptions {
  std::size_t depth_cap = 4096;
  /// Upper bound on a single node's window, keeping 2^consumed allocatable.
  std::uint32_t max_consumed = 30;
};

/// Level-compressed trie with partial fillup. Each node collapses the trie
/// of its key group down to its alpha-fillup level F and branches on the
/// next F + 1 bits; groups of one key become external nodes. alpha = 1
/// gives the classic LC trie.
class AlcTrie {
 public:
  /// Takes ownership of the keys; LPM compares against their bits.
  static AlcTrie compress(KeySet keys, double alpha, CompressOptions options = {});

  double alpha() const noexcept { return alpha_; }
  const KeySet& keys() const noexcept { return keys_; }
  const std::vector<AlcNode>& nodes() const noexcept { return nodes_; }
  /// Child node index per slot, AlcNode::kEmpty when no key falls there.
  const std::vector<std::int32_t>& slots() const noexcept { return slots_; }
  std::int32_t root() const noexcept { return nodes_.empty() ? AlcNode::kEmpty : 0; }

  /// Throws std::out_of_range for an unknown key id.
  DepthSample depth(std::uint32_t key) const;

  /// Stored key sharing the longest common prefix with `query`, ties broken
  /// by the smallest key id. nullopt only for an empty key set.
  std::optional<PrefixMatch> longest_prefix_match(const BitString& query) const;

  AlcStats structure_stats() const;

 private:
  double alpha_ = 1.0;
  KeySet keys_;
  std::vector<AlcNode> nodes_;
  std::vector<std::int32_t> slots_;
  std::vector<std::uint32_t> slot_min_;
  std::vector<DepthSample> depth_by_key_;
};

/// Length of the common prefix of `query` and `key`.
std::size_t common_prefix_length(const BitString& query, const Key& key);

}  // namespace alctrie
