#include "alctrie/lctrie.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace alctrie {

WindowExhaustedError::WindowExhaustedError(std::uint32_t key, std::size_t bit,
                                           std::size_t window_end)
    : Error("key " + std::to_string(key) + " ends at bit " + std::to_string(bit) +
            " inside a compressed node spanning bits up to " + std::to_string(window_end)) {}

namespace {

constexpr std::uint32_t kNoKey = std::numeric_limits<std::uint32_t>::max();

struct Work {
  std::int64_t slot;  // -1 for the root
  std::size_t begin, end;
  std::uint32_t offset;
  std::uint32_t depth;
  std::uint32_t consumed_total;
};

struct Segment {
  std::size_t begin, end;
};

}  // namespace

AlcTrie AlcTrie::compress(KeySet keys, double alpha, CompressOptions options) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must lie in (0,1]");
  if (options.max_consumed == 0 || options.max_consumed > 62)
    throw std::invalid_argument("max_consumed must lie in [1,62]");

  AlcTrie t;
  t.alpha_ = alpha;
  t.keys_ = std::move(keys);
  const KeySet& ks = t.keys_;
  const std::uint32_t n = ks.size();
  t.depth_by_key_.assign(n, DepthSample{kNoKey, 0, 0});
  if (n == 0) return t;

  std::vector<std::uint32_t> order(n);
  for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
  std::vector<std::uint32_t> scratch(n);
  // Window bits read so far for each key of the group being compressed.
  std::vector<std::uint64_t> window(n, 0);
  std::vector<std::uint32_t> window_len(n, 0);
  std::vector<Segment> active, next_active;

  auto attach = [&](std::int64_t slot) {
    const auto idx = static_cast<std::int32_t>(t.nodes_.size() - 1);
    if (slot >= 0) t.slots_[static_cast<std::size_t>(slot)] = idx;
  };

  std::vector<Work> stack{{-1, 0, n, 0, 0, 0}};
  while (!stack.empty()) {
    const Work w = stack.back();
    stack.pop_back();

    if (w.end - w.begin == 1) {
      const std::uint32_t key = order[w.begin];
      AlcNode leaf;
      leaf.key = key;
      leaf.min_key = key;
      leaf.offset = w.offset;
      t.nodes_.push_back(leaf);
      attach(w.slot);
      t.depth_by_key_[key] = {key, w.depth, w.consumed_total};
      continue;
    }

    for (std::size_t i = w.begin; i < w.end; ++i) {
      window[order[i]] = 0;
      window_len[order[i]] = 0;
    }

    // Scan the group's subtrie level by level until a level is filled
    // less than alpha; that level is F + 1 and becomes the window width.
    active.assign(1, {w.begin, w.end});
    std::uint32_t width = 0;
    while (true) {
      if (static_cast<std::size_t>(w.offset) + width + 1 > options.depth_cap)
        throw DepthCapError(options.depth_cap);
      ++width;
      const std::size_t bit_pos = w.offset + width - 1;
      next_active.clear();
      for (const Segment& seg : active) {
        std::size_t zeros = seg.begin, ones_end = seg.end;
        for (std::size_t i = seg.begin; i < seg.end; ++i) {
          const std::uint32_t id = order[i];
          const Key& key = ks[id];
          if (!key.has_bit(bit_pos))
            throw IndistinguishableKeysError(id, order[i == seg.begin ? i + 1 : seg.begin],
                                             bit_pos);
          const bool b = key.bit(bit_pos);
          window[id] = (window[id] << 1) | static_cast<std::uint64_t>(b);
          window_len[id] = width;
          if (b) {
            scratch[--ones_end] = id;
          } else {
            order[zeros++] = id;
          }
        }
        for (std::size_t i = zeros, j = seg.end; i < seg.end; ++i) order[i] = scratch[--j];
        if (zeros - seg.begin >= 2) next_active.push_back({seg.begin, zeros});
        if (seg.end - zeros >= 2) next_active.push_back({zeros, seg.end});
      }
      const double filled = static_cast<double>(next_active.size());
      if (filled < std::ldexp(alpha, static_cast<int>(width))) break;
      if (width >= options.max_consumed)
        throw Error("alpha-fillup window exceeds " + std::to_string(options.max_consumed) +
                    " bits; raise alpha or max_consumed");
      std::swap(active, next_active);
    }

    // Keys that became unique above the window still need its full width.
    const std::size_t window_end = static_cast<std::size_t>(w.offset) + width;
    for (std::size_t i = w.begin; i < w.end; ++i) {
      const std::uint32_t id = order[i];
      const Key& key = ks[id];
      for (std::uint32_t b = window_len[id]; b < width; ++b) {
        const std::size_t pos = w.offset + b;
        if (!key.has_bit(pos)) throw WindowExhaustedError(id, pos, window_end);
        window[id] = (window[id] << 1) | static_cast<std::uint64_t>(key.bit(pos));
      }
      window_len[id] = width;
    }
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(w.begin),
              order.begin() + static_cast<std::ptrdiff_t>(w.end),
              [&](std::uint32_t a, std::uint32_t b) {
                return window[a] != window[b] ? window[a] < window[b] : a < b;
              });

    AlcNode node;
    node.consumed = width;
    node.offset = w.offset;
    node.first_slot = static_cast<std::uint32_t>(t.slots_.size());
    t.nodes_.push_back(node);
    attach(w.slot);
    t.slots_.resize(t.slots_.size() + (std::size_t{1} << width), AlcNode::kEmpty);

    // Push runs in reverse so children are created in slot order.
    std::size_t run_end = w.end;
    while (run_end > w.begin) {
      const std::uint64_t s = window[order[run_end - 1]];
      std::size_t run_begin = run_end - 1;
      while (run_begin > w.begin && window[order[run_begin - 1]] == s) --run_begin;
      stack.push_back({static_cast<std::int64_t>(node.first_slot + s), run_begin, run_end,
                       static_cast<std::uint32_t>(window_end), w.depth + 1,
                       w.consumed_total + width});
      run_end = run_begin;
    }
  }

  // Children always follow their parent in `nodes_`. Each compressed node
  // also gets an implicit binary tree over its slots (root at 1, slot s at
  // slot_count + s) holding the smallest key id below, for LPM fallbacks.
  t.slot_min_.assign(2 * t.slots_.size(), kNoKey);
  for (std::size_t i = t.nodes_.size(); i-- > 0;) {
    AlcNode& node = t.nodes_[i];
    if (node.is_external()) continue;
    std::uint32_t* tree = t.slot_min_.data() + 2 * std::size_t{node.first_slot};
    const std::size_t count = node.slot_count();
    for (std::size_t s = 0; s < count; ++s) {
      const std::int32_t c = t.slots_[node.first_slot + s];
      if (c != AlcNode::kEmpty) tree[count + s] = t.nodes_[static_cast<std::size_t>(c)].min_key;
    }
    for (std::size_t h = count; h-- > 1;) tree[h] = std::min(tree[2 * h], tree[2 * h + 1]);
    node.min_key = tree[1];
  }
  return t;
}

DepthSample AlcTrie::depth(std::uint32_t key) const {
  if (key >= depth_by_key_.size() || depth_by_key_[key].key == kNoKey)
    throw std::out_of_range("key " + std::to_string(key) + " is not stored in the trie");
  return depth_by_key_[key];
}

std::size_t common_prefix_length(const BitString& query, const Key& key) {
  std::size_t i = 0;
  while (i < query.size() && key.has_bit(i) && key.bit(i) == query[i]) ++i;
  return i;
}

std::optional<PrefixMatch> AlcTrie::longest_prefix_match(const BitString& query) const {
  if (nodes_.empty()) return std::nullopt;
  std::size_t idx = 0;
  while (true) {
    const AlcNode& node = nodes_[idx];
    if (node.is_external()) return PrefixMatch{node.key, common_prefix_length(query, keys_[node.key])};

    const std::size_t avail = query.size() > node.offset ? query.size() - node.offset : 0;
    const std::uint32_t usable = static_cast<std::uint32_t>(std::min<std::size_t>(avail, node.consumed));
    std::uint64_t w = 0;
    for (std::uint32_t b = 0; b < usable; ++b) w = (w << 1) | query[node.offset + b];

    if (usable == node.consumed) {
      const std::int32_t child = slots_[node.first_slot + w];
      if (child != AlcNode::kEmpty) {
        idx = static_cast<std::size_t>(child);
        continue;
      }
    }

    // The query leaves the stored keys inside this window. Follow its bits
    // down the slot tree while some key still agrees; the smallest id in the
    // last nonempty subtree is the answer.
    const std::uint32_t* tree = slot_min_.data() + 2 * std::size_t{node.first_slot};
    std::size_t h = 1;
    std::uint32_t len = 0;
    for (; len < usable; ++len) {
      const std::size_t next = 2 * h + ((w >> (usable - 1 - len)) & 1U);
      if (tree[next] == kNoKey) break;
      h = next;
    }
    return PrefixMatch{tree[h], node.offset + std::size_t{len}};
  }
}

AlcStats AlcTrie::structure_stats() const {
  AlcStats st;
  std::size_t degree_sum = 0, consumed_sum = 0;
  for (const AlcNode& node : nodes_) {
    if (node.is_external()) {
      ++st.external_nodes;
      continue;
    }
    ++st.compressed_nodes;
    ++st.consumed_histogram[node.consumed];
    consumed_sum += node.consumed;
    st.total_slots += node.slot_count();
    for (std::size_t s = 0; s < node.slot_count(); ++s) {
      if (slots_[node.first_slot + s] == AlcNode::kEmpty)
        ++st.empty_slots;
      else
        ++degree_sum;
    }
  }
  if (st.total_slots > 0)
    st.empty_slot_fraction = static_cast<double>(st.empty_slots) / static_cast<double>(st.total_slots);
  if (st.compressed_nodes > 0) {
    st.mean_consumed = static_cast<double>(consumed_sum) / static_cast<double>(st.compressed_nodes);
    st.mean_degree = static_cast<double>(degree_sum) / static_cast<double>(st.compressed_nodes);
  }
  double depth_sum = 0.0;
  for (const DepthSample& d : depth_by_key_) {
    st.max_depth = std::max(st.max_depth, d.depth);
    depth_sum += d.depth;
  }
  if (!depth_by_key_.empty()) st.mean_depth = depth_sum / static_cast<double>(depth_by_key_.size());
  return st;
}

}  // namespace alctrie
