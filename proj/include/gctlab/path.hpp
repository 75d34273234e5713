#ifndef GCTLAB_PATH_HPP
#define GCTLAB_PATH_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gctlab {

/// Finite binary outcome history. Bit positions are 1-based to match the
/// period indexing used throughout.
class History {
 public:
  History() = default;
  explicit History(std::vector<uint8_t> bits) : bits_(std::move(bits)) {
    check_cap(bits_.size());
    for (uint8_t b : bits_)
      if (b > 1) throw std::invalid_argument("History: bits must be 0/1");
  }

  static History from_string(const std::string& s) {
    std::vector<uint8_t> bits;
    bits.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1') throw std::invalid_argument("History: bad bit char");
      bits.push_back(static_cast<uint8_t>(c - '0'));
    }
    return History(std::move(bits));
  }

  static uint64_t horizon_cap() { return 1ull << 24; }

  size_t length() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }

  /// t-th outcome, 1-based.
  int bit(size_t t) const { return bits_.at(t - 1); }

  History prefix(size_t n) const {
    return History(std::vector<uint8_t>(bits_.begin(), bits_.begin() + std::min(n, bits_.size())));
  }

  void push_back(int b) {
    if (b != 0 && b != 1) throw std::invalid_argument("History: bad bit");
    check_cap(bits_.size() + 1);
    bits_.push_back(static_cast<uint8_t>(b));
  }

  History extended(int b) const {
    History h = *this;
    h.push_back(b);
    return h;
  }

  const std::vector<uint8_t>& bits() const { return bits_; }

  std::string str() const {
    std::string s;
    s.reserve(bits_.size());
    for (uint8_t b : bits_) s.push_back(static_cast<char>('0' + b));
    return s;
  }

  friend bool operator==(const History& a, const History& b) { return a.bits_ == b.bits_; }
  friend bool operator!=(const History& a, const History& b) { return !(a == b); }
  friend bool operator<(const History& a, const History& b) {
    if (a.length() != b.length()) return a.length() < b.length();
    return a.bits_ < b.bits_;
  }

 private:
  static void check_cap(size_t n) {
    if (n > horizon_cap()) throw std::length_error("History: horizon cap exceeded");
  }
  std::vector<uint8_t> bits_;
};

/// true iff h is an extension of base, i.e. C(h) is contained in C(base).
inline bool extends(const History& h, const History& base) {
  if (h.length() < base.length()) return false;
  return std::equal(base.bits().begin(), base.bits().end(), h.bits().begin());
}

/// Eventually-periodic infinite bit sequence in canonical form: the period is
/// primitive (not a repetition of a shorter block) and the prefix is shortest
/// possible (its last bit differs from the bit the period would place there).
class PathSpec {
 public:
  PathSpec(std::vector<uint8_t> prefix, std::vector<uint8_t> period)
      : prefix_(std::move(prefix)), period_(std::move(period)) {
    if (period_.empty()) throw std::invalid_argument("PathSpec: empty period");
    for (uint8_t b : prefix_)
      if (b > 1) throw std::invalid_argument("PathSpec: bad prefix bit");
    for (uint8_t b : period_)
      if (b > 1) throw std::invalid_argument("PathSpec: bad period bit");
    canonicalize();
  }

  /// "prefix|period" serialization, e.g. "1|0" for 1000..., "|01" for 0101...
  static PathSpec from_string(const std::string& s) {
    auto bar = s.find('|');
    if (bar == std::string::npos) throw std::invalid_argument("PathSpec: missing '|'");
    auto to_bits = [](const std::string& part) {
      std::vector<uint8_t> bits;
      for (char c : part) {
        if (c != '0' && c != '1') throw std::invalid_argument("PathSpec: bad bit char");
        bits.push_back(static_cast<uint8_t>(c - '0'));
      }
      return bits;
    };
    return PathSpec(to_bits(s.substr(0, bar)), to_bits(s.substr(bar + 1)));
  }

  static PathSpec constant(int bit) {
    return PathSpec({}, {static_cast<uint8_t>(bit)});
  }

  /// History h followed by all zeros.
  static PathSpec zero_tail(const History& h) { return PathSpec(h.bits(), {0}); }

  /// t-th bit of the infinite sequence, 1-based.
  int bit_at(uint64_t t) const {
    if (t == 0) throw std::invalid_argument("PathSpec: t must be >= 1");
    if (t <= prefix_.size()) return prefix_[t - 1];
    return period_[(t - 1 - prefix_.size()) % period_.size()];
  }

  History truncated(size_t n) const {
    std::vector<uint8_t> bits(n);
    for (size_t t = 1; t <= n; ++t) bits[t - 1] = static_cast<uint8_t>(bit_at(t));
    return History(std::move(bits));
  }

  const std::vector<uint8_t>& prefix() const { return prefix_; }
  const std::vector<uint8_t>& period() const { return period_; }

  std::string str() const {
    std::string s;
    for (uint8_t b : prefix_) s.push_back(static_cast<char>('0' + b));
    s.push_back('|');
    for (uint8_t b : period_) s.push_back(static_cast<char>('0' + b));
    return s;
  }

  friend bool operator==(const PathSpec& a, const PathSpec& b) {
    return a.prefix_ == b.prefix_ && a.period_ == b.period_;
  }
  friend bool operator!=(const PathSpec& a, const PathSpec& b) { return !(a == b); }

 private:
  void canonicalize() {
    // Reduce the period to its primitive block.
    size_t n = period_.size();
    for (size_t d = 1; d < n; ++d) {
      if (n % d != 0) continue;
      bool rep = true;
      for (size_t t = d; t < n && rep; ++t) rep = period_[t] == period_[t % d];
      if (rep) {
        period_.resize(d);
        break;
      }
    }
    // Shrink the prefix while its last bit matches the bit the period would
    // place there (rotating the period right keeps the sequence unchanged).
    while (!prefix_.empty() && prefix_.back() == period_.back()) {
      prefix_.pop_back();
      std::rotate(period_.rbegin(), period_.rbegin() + 1, period_.rend());
    }
  }

  std::vector<uint8_t> prefix_;
  std::vector<uint8_t> period_;
};

/// true iff s lies in the cylinder C(h), i.e. s extends h.
inline bool path_in_cylinder(const PathSpec& s, const History& h) {
  for (size_t t = 1; t <= h.length(); ++t)
    if (s.bit_at(t) != h.bit(t)) return false;
  return true;
}

/// Smallest index where a and b disagree; nullopt when the infinite sequences
/// coincide. Decidable: agreement up to max prefix length + lcm of period
/// lengths implies equality.
inline std::optional<uint64_t> first_disagreement(const PathSpec& a, const PathSpec& b) {
  uint64_t bound = std::max(a.prefix().size(), b.prefix().size()) +
                   std::lcm(a.period().size(), b.period().size());
  for (uint64_t t = 1; t <= bound; ++t)
    if (a.bit_at(t) != b.bit_at(t)) return t;
  return std::nullopt;
}

/// Cylinder with finite base: the set of all infinite extensions of base.
struct Cylinder {
  History base;
  /// C(a) contains C(b) iff b extends a.
  bool contains(const Cylinder& other) const { return extends(other.base, base); }
  bool contains_path(const PathSpec& s) const { return path_in_cylinder(s, base); }
};

}  // namespace gctlab

#endif  // GCTLAB_PATH_HPP
