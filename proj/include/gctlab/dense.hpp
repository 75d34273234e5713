#ifndef GCTLAB_DENSE_HPP
#define GCTLAB_DENSE_HPP

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "gctlab/path.hpp"

namespace gctlab {

/// Countable dense subset of path space: an enumeration s^1, s^2, ... with a
/// density witness B(L) such that every history of length L is extended by
/// some s^i with i <= B(L).
class DenseEnum {
 public:
  virtual ~DenseEnum() = default;
  /// i-th path, 1-based.
  virtual PathSpec path(uint64_t i) const = 0;
  virtual uint64_t density_bound(uint64_t history_length) const = 0;
  virtual std::string config() const = 0;
};

namespace detail {

/// Default enumeration: eventually-zero paths. s^1 = 0^inf; for i >= 2,
/// s^i = b * 0^inf where b ranges over bit strings ending in 1, ordered by
/// length then lexicographically.
class EventuallyZeroEnum final : public DenseEnum {
 public:
  PathSpec path(uint64_t i) const override {
    if (i < 1) throw std::invalid_argument("dense: index must be >= 1");
    if (i == 1) return PathSpec::constant(0);
    uint64_t r = i - 1;  // rank among strings ending in 1
    // Strings of length l ending in 1: 2^(l-1) of them; cumulative 2^l - 1.
    uint64_t l = 1;
    while ((uint64_t(1) << l) - 1 < r) ++l;
    uint64_t offset = r - (uint64_t(1) << (l - 1));  // lex rank within length l
    std::vector<uint8_t> bits(l);
    for (uint64_t t = 0; t + 1 < l; ++t)
      bits[t] = static_cast<uint8_t>((offset >> (l - 2 - t)) & 1);
    bits[l - 1] = 1;
    return PathSpec(std::move(bits), {0});
  }

  uint64_t density_bound(uint64_t L) const override {
    return L >= 63 ? UINT64_MAX : (uint64_t(1) << L);
  }

  std::string config() const override { return "default"; }
};

/// Enumeration of all paths that coincide with theta in all but finitely many
/// periods, in stage order: stage t contributes the paths with t-1 free bits
/// followed by theta's tail from period t; each path is listed at its first
/// stage, new members in lexicographic order of their free prefix.
class ThetaTailEnum final : public DenseEnum {
 public:
  explicit ThetaTailEnum(PathSpec theta) : theta_(std::move(theta)) {}

  PathSpec path(uint64_t i) const override {
    if (i < 1) throw std::invalid_argument("dense: index must be >= 1");
    if (i == 1) return theta_;
    // Stage t >= 2 adds 2^(t-2) new paths: free bits b_1..b_{t-2}, then the
    // forced bit 1 - theta_{t-1}, then theta's tail from period t.
    uint64_t t = 2;
    while ((uint64_t(1) << (t - 1)) < i) ++t;
    uint64_t offset = i - (uint64_t(1) << (t - 2)) - 1;
    std::vector<uint8_t> head(t - 1);
    for (uint64_t j = 0; j + 1 < t - 1; ++j)
      head[j] = static_cast<uint8_t>((offset >> (t - 3 - j)) & 1);
    head[t - 2] = static_cast<uint8_t>(1 - theta_.bit_at(t - 1));
    return override_head(head);
  }

  uint64_t density_bound(uint64_t L) const override {
    return L >= 63 ? UINT64_MAX : (uint64_t(1) << L);
  }

  std::string config() const override { return "theta:" + theta_.str(); }

  const PathSpec& theta() const { return theta_; }

 private:
  /// theta with its first |head| bits replaced by head.
  PathSpec override_head(const std::vector<uint8_t>& head) const {
    size_t n = head.size();
    std::vector<uint8_t> prefix = head;
    if (theta_.prefix().size() > n) {
      prefix.insert(prefix.end(), theta_.prefix().begin() + static_cast<long>(n),
                    theta_.prefix().end());
      return PathSpec(std::move(prefix), theta_.period());
    }
    // Rotate the period to the phase it occupies at position n+1.
    size_t plen = theta_.period().size();
    size_t phase = (n - theta_.prefix().size()) % plen;
    std::vector<uint8_t> period(plen);
    for (size_t j = 0; j < plen; ++j) period[j] = theta_.period()[(phase + j) % plen];
    return PathSpec(std::move(prefix), std::move(period));
  }

  PathSpec theta_;
};

}  // namespace detail

inline std::shared_ptr<const DenseEnum> default_dense() {
  static auto inst = std::make_shared<detail::EventuallyZeroEnum>();
  return inst;
}

inline std::shared_ptr<const DenseEnum> stheta_enum(PathSpec theta) {
  return std::make_shared<detail::ThetaTailEnum>(std::move(theta));
}

inline PathSpec nth_dense_path(const DenseEnum& S, uint64_t i) { return S.path(i); }

}  // namespace gctlab

#endif  // GCTLAB_DENSE_HPP
