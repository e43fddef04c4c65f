#include "alctrie/source.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <unordered_map>

namespace alctrie {

KeyParseError::KeyParseError(std::string source, std::size_t line, const std::string& what)
    : Error(source + ":" + std::to_string(line) + ": " + what), source_(std::move(source)),
      line_(line) {}

DuplicateKeyError::DuplicateKeyError(std::string source, std::size_t line,
                                     std::size_t first_line)
    : Error(source + ":" + std::to_string(line) + ": duplicate key (first seen on line " +
            std::to_string(first_line) + ")"),
      line_(line), first_line_(first_line) {}

KeyExhaustedError::KeyExhaustedError(std::uint32_t key, std::size_t bit)
    : Error("key " + std::to_string(key) + " has no bit " + std::to_string(bit)), key_(key),
      bit_(bit) {}

BitString BitString::parse(std::string_view text) {
  BitString out;
  for (char c : text) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("expected only '0'/'1' characters, got '" + std::string(1, c) +
                                  "'");
    out.push_back(c == '1');
  }
  return out;
}

BitString BitString::from_u32_prefix(std::uint32_t value, std::size_t length) {
  if (length > 32) throw std::invalid_argument("prefix length exceeds 32");
  BitString out;
  for (std::size_t i = 0; i < length; ++i) out.push_back((value >> (31 - i)) & 1U);
  return out;
}

void BitString::push_back(bool bit) {
  if ((size_ & 63) == 0) words_.push_back(0);
  if (bit) words_.back() |= std::uint64_t{1} << (63 - (size_ & 63));
  ++size_;
}

std::string BitString::to_string() const {
  std::string s;
  s.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) s.push_back((*this)[i] ? '1' : '0');
  return s;
}

void SourceParams::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("source probability p must lie in (0,1)");
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(seed ^ mix64(stream + 0x9e3779b97f4a7c15ULL));
}

Key Key::random(const SourceParams& params, std::uint32_t id) {
  params.validate();
  Key k;
  k.id_ = id;
  k.finite_ = false;
  k.stream_ = derive_seed(params.seed, id);
  // bit = 1 iff u < p, with u the top 53 hash bits scaled to [0,1).
  k.threshold_ = static_cast<std::uint64_t>(std::ceil(std::ldexp(params.p, 53)));
  return k;
}

Key Key::finite(BitString bits, std::uint32_t id) {
  Key k;
  k.id_ = id;
  k.finite_ = true;
  k.bits_ = std::move(bits);
  return k;
}

std::optional<std::size_t> Key::length() const noexcept {
  if (finite_) return bits_.size();
  return std::nullopt;
}

std::string Key::prefix_string(std::size_t count) const {
  std::string s;
  s.reserve(count);
  for (std::size_t i = 0; i < count; ++i) s.push_back(bit(i) ? '1' : '0');
  return s;
}

KeySet generate_keys(const SourceParams& params, std::uint32_t n) {
  params.validate();
  KeySet set;
  set.origin_ = KeyOrigin::random;
  set.params_ = params;
  set.keys_.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) set.keys_.push_back(Key::random(params, i));
  return set;
}

KeySet make_keys(std::vector<BitString> bits) {
  KeySet set;
  set.origin_ = KeyOrigin::file;
  set.keys_.reserve(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    set.keys_.push_back(Key::finite(std::move(bits[i]), static_cast<std::uint32_t>(i)));
  return set;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool parse_uint(std::string_view s, unsigned max, unsigned& out) {
  if (s.empty() || s.size() > 3) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && out <= max;
}

BitString parse_cidr(std::string_view text, const std::string& source, std::size_t line) {
  std::string_view addr = text;
  unsigned length = 32;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    addr = text.substr(0, slash);
    if (!parse_uint(text.substr(slash + 1), 32, length))
      throw KeyParseError(source, line, "bad prefix length in '" + std::string(text) + "'");
  }
  std::uint32_t value = 0;
  int octets = 0;
  while (true) {
    auto dot = addr.find('.');
    unsigned octet = 0;
    if (!parse_uint(addr.substr(0, dot), 255, octet))
      throw KeyParseError(source, line, "bad IPv4 address in '" + std::string(text) + "'");
    value = (value << 8) | octet;
    ++octets;
    if (dot == std::string_view::npos) break;
    addr.remove_prefix(dot + 1);
  }
  if (octets != 4)
    throw KeyParseError(source, line, "IPv4 address needs 4 octets in '" + std::string(text) + "'");
  return BitString::from_u32_prefix(value, length);
}

}  // namespace

std::vector<BitString> parse_key_lines(std::istream& in, const std::string& source_name,
                                       ParseOptions options) {
  std::vector<BitString> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto text = trim(raw);
    if (line == 1 && text.starts_with("\xEF\xBB\xBF")) text = trim(text.substr(3));
    if (text.empty() || text.front() == '#') continue;

    BitString bits;
    if (text.find_first_of("./") != std::string_view::npos) {
      bits = parse_cidr(text, source_name, line);
    } else {
      try {
        bits = BitString::parse(text);
      } catch (const std::invalid_argument& e) {
        throw KeyParseError(source_name, line, e.what());
      }
    }
    if (!options.allow_duplicates) {
      auto [it, inserted] = seen.emplace(bits.to_string(), line);
      if (!inserted) throw DuplicateKeyError(source_name, line, it->second);
    }
    out.push_back(std::move(bits));
  }
  return out;
}

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

KeySet load_keys(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return make_keys(parse_key_lines(in, path.string()));
}

std::vector<BitString> load_queries(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_key_lines(in, path.string(), {.allow_duplicates = true});
}

double log_prefix_probability(const SourceParams& params, const BitString& prefix) {
  params.validate();
  std::size_t ones = 0;
  for (std::size_t i = 0; i < prefix.size(); ++i) ones += prefix[i];
  const auto zeros = prefix.size() - ones;
  return static_cast<double>(ones) * std::log(params.p) +
         static_cast<double>(zeros) * std::log1p(-params.p);
}

double prefix_probability(const SourceParams& params, const BitString& prefix) {
  params.validate();
  std::size_t ones = 0;
  for (std::size_t i = 0; i < prefix.size(); ++i) ones += prefix[i];
  return std::pow(params.p, static_cast<double>(ones)) *
         std::pow(params.q(), static_cast<double>(prefix.size() - ones));
}

}  // namespace alctrie
