#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "alctrie/error.hpp"

namespace alctrie {

/// Malformed line in a key or query file.
class KeyParseError : public Error {
 public:
  KeyParseError(std::string source, std::size_t line, const std::string& what);
  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

class DuplicateKeyError : public Error {
 public:
  DuplicateKeyError(std::string source, std::size_t line, std::size_t first_line);
  std::size_t line() const noexcept { return line_; }
  std::size_t first_line() const noexcept { return first_line_; }

 private:
  std::size_t line_;
  std::size_t first_line_;
};

/// A finite key was asked for a bit past its end.
class KeyExhaustedError : public Error {
 public:
  KeyExhaustedError(std::uint32_t key, std::size_t bit);
  std::uint32_t key() const noexcept { return key_; }
  std::size_t bit() const noexcept { return bit_; }

 private:
  std::uint32_t key_;
  std::size_t bit_;
};

/// Packed MSB-first bit string.
class BitString {
 public:
  BitString() = default;

  /// Parses a string of '0'/'1' characters. Throws std::invalid_argument.
  static BitString parse(std::string_view text);
  /// The top `length` bits of a 32-bit big-endian value (IPv4 addresses).
  static BitString from_u32_prefix(std::uint32_t value, std::size_t length);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  bool operator[](std::size_t i) const noexcept {
    return (words_[i >> 6] >> (63 - (i & 63))) & 1U;
  }
  void push_back(bool bit);
  std::string to_string() const;

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

/// Memoryless binary source: P(1) = p, bits are independent.
struct SourceParams {
  double p = 0.5;
  std::uint64_t seed = 0;

  double q() const noexcept { return 1.0 - p; }
  /// Throws std::invalid_argument unless 0 < p < 1.
  void validate() const;
};

/// splitmix64 finalizer; the keyed hash behind every random bit.
std::uint64_t mix64(std::uint64_t x) noexcept;
/// Combines a seed with a stream index into an independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// A binary string that is either finite (user supplied) or an unbounded
/// random stream. Random bits are a pure function of (seed, id, bit index),
/// so reading a bit never mutates the key and concurrent reads are safe.
class Key {
 public:
  static Key random(const SourceParams& params, std::uint32_t id);
  static Key finite(BitString bits, std::uint32_t id);

  std::uint32_t id() const noexcept { return id_; }
  bool is_finite() const noexcept { return finite_; }
  /// Number of available bits; nullopt for random keys.
  std::optional<std::size_t> length() const noexcept;
  bool has_bit(std::size_t i) const noexcept { return !finite_ || i < bits_.size(); }

  /// Bit i of the key. Throws KeyExhaustedError past the end of a finite key.
  bool bit(std::size_t i) const {
    if (finite_) {
      if (i >= bits_.size()) throw KeyExhaustedError(id_, i);
      return bits_[i];
    }
    return (mix64(stream_ + (static_cast<std::uint64_t>(i) + 1) * kGolden) >> 11) < threshold_;
  }

  /// First `count` bits rendered as a '0'/'1' string.
  std::string prefix_string(std::size_t count) const;

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  Key() = default;

  std::uint32_t id_ = 0;
  bool finite_ = false;
  BitString bits_;
  std::uint64_t stream_ = 0;
  std::uint64_t threshold_ = 0;
};

enum class KeyOrigin { random, file };

class KeySet {
 public:
  KeySet() = default;

  const Key& operator[](std::uint32_t id) const { return keys_[id]; }
  std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(keys_.size()); }
  bool empty() const noexcept { return keys_.empty(); }
  KeyOrigin origin() const noexcept { return origin_; }
  /// Present for random key sets.
  const std::optional<SourceParams>& params() const noexcept { return params_; }

  auto begin() const noexcept { return keys_.begin(); }
  auto end() const noexcept { return keys_.end(); }

  bool bit(std::uint32_t id, std::size_t i) const { return keys_[id].bit(i); }

  friend KeySet generate_keys(const SourceParams& params, std::uint32_t n);
  friend KeySet make_keys(std::vector<BitString> bits);

 private:
  std::vector<Key> keys_;
  KeyOrigin origin_ = KeyOrigin::file;
  std::optional<SourceParams> params_;
};

/// n independent random keys from the memoryless source.
KeySet generate_keys(const SourceParams& params, std::uint32_t n);

/// Finite keys in the given order; ids are the positions. No duplicate check.
KeySet make_keys(std::vector<BitString> bits);

struct ParseOptions {
  bool allow_duplicates = false;
};

/// Parses key-file lines: '0'/'1' strings or IPv4 "a.b.c.d/len" (a bare
/// dotted quad is a /32). Blank lines and lines starting with '#' are skipped.
std::vector<BitString> parse_key_lines(std::istream& in, const std::string& source_name,
                                       ParseOptions options = {});

/// Loads finite keys from a file; duplicate keys are rejected.
KeySet load_keys(const std::filesystem::path& path);

/// Loads query strings; duplicates allowed.
std::vector<BitString> load_queries(const std::filesystem::path& path);

/// Probability that a random string starts with `prefix`: p^ones q^zeros.
double prefix_probability(const SourceParams& params, const BitString& prefix);
/// Natural log of prefix_probability, safe for long prefixes.
double log_prefix_probability(const SourceParams& params, const BitString& prefix);

}  // namespace alctrie
