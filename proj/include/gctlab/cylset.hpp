#ifndef GCTLAB_CYLSET_HPP
#define GCTLAB_CYLSET_HPP

#include <algorithm>
#include <optional>
#include <vector>

#include "gctlab/path.hpp"
#include "gctlab/theory.hpp"

namespace gctlab {

/// Finite union of cylinders, kept as a canonical antichain of bases: no base
/// extends another, so distinct cylinders are pairwise disjoint and the
/// measure is a plain sum.
class CylinderSet {
 public:
  CylinderSet() = default;
  explicit CylinderSet(std::vector<History> bases) : bases_(std::move(bases)) { normalize(); }

  static CylinderSet everything() { return CylinderSet({History()}); }

  bool empty() const { return bases_.empty(); }
  const std::vector<History>& bases() const { return bases_; }

  void add(const History& base) {
    bases_.push_back(base);
    normalize();
  }

  /// First prefix length n such that C(h|n) is contained in the set, i.e. the
  /// shortest base that h extends; nullopt if h never enters the set.
  std::optional<uint64_t> entry_period(const History& h) const {
    std::optional<uint64_t> best;
    for (const History& b : bases_)
      if (extends(h, b) && (!best || b.length() < *best)) best = b.length();
    return best;
  }

  /// Intersection with a single cylinder C(h).
  CylinderSet intersect_cylinder(const History& h) const {
    std::vector<History> out;
    for (const History& b : bases_) {
      if (extends(b, h)) {
        out.push_back(b);  // C(b) inside C(h)
      } else if (extends(h, b)) {
        return CylinderSet({h});  // C(h) inside C(b); disjointness ends it
      }
    }
    return CylinderSet(std::move(out));
  }

  CylinderSet intersect(const CylinderSet& other) const {
    std::vector<History> out;
    for (const History& a : bases_) {
      for (const History& b : other.bases_) {
        if (extends(a, b)) out.push_back(a);
        else if (extends(b, a)) out.push_back(b);
      }
    }
    return CylinderSet(std::move(out));
  }

  CylinderSet unite(const CylinderSet& other) const {
    std::vector<History> out = bases_;
    out.insert(out.end(), other.bases_.begin(), other.bases_.end());
    return CylinderSet(std::move(out));
  }

  /// P-measure of the union (bases are pairwise disjoint).
  Prob measure(const Theory& P) const {
    Prob m = Prob::zero();
    for (const History& b : bases_) m += P.cylinder_prob(b);
    return m;
  }

  /// true iff C(h) is covered by the union (possibly by several bases).
  bool covers(const History& h) const {
    for (const History& b : bases_)
      if (extends(h, b)) return true;
    size_t deepest = 0;
    for (const History& b : bases_) deepest = std::max(deepest, b.length());
    if (h.length() >= deepest) return false;
    return covers(h.extended(0)) && covers(h.extended(1));
  }

 private:
  void normalize() {
    std::sort(bases_.begin(), bases_.end());
    std::vector<History> keep;
    for (const History& b : bases_) {
      bool redundant = false;
      for (const History& k : keep)
        if (extends(b, k)) {
          redundant = true;
          break;
        }
      if (!redundant) keep.push_back(b);
    }
    bases_ = std::move(keep);
  }

  std::vector<History> bases_;
};

}  // namespace gctlab

#endif  // GCTLAB_CYLSET_HPP
