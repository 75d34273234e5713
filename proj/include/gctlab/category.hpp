#ifndef GCTLAB_CATEGORY_HPP
#define GCTLAB_CATEGORY_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gctlab/dense.hpp"
#include "gctlab/tests.hpp"
#include "gctlab/theory.hpp"

namespace gctlab {

/// Truncation parameters of the finite global category test.
struct GctParams {
  int layers = 7;       // K
  int path_count = 12;  // I
  int depth = 64;       // D
  enum class AtomMode { kConservative, kDeclared };
  AtomMode atom_mode = AtomMode::kConservative;
  std::shared_ptr<const DenseEnum> dense = default_dense();

  void validate() const {
    if (layers < 0) throw std::invalid_argument("gct: K must be >= 0");
    if (path_count < 1 || depth < 1) throw std::invalid_argument("gct: I, D must be >= 1");
    if (depth < layers + path_count)
      throw std::invalid_argument("gct: D must be >= K + I");
    if (!dense) throw std::invalid_argument("gct: missing dense enumeration");
  }

  std::string config() const {
    return "gct:K=" + std::to_string(layers) + ",I=" + std::to_string(path_count) +
           ",D=" + std::to_string(depth) +
           ",atoms=" + (atom_mode == AtomMode::kConservative ? "conservative" : "declared") +
           ",S=" + dense->config();
  }
};

/// Finite global category test bound to one theory: memoizes the shrinking
/// cylinder depths t(i,k) and answers verdicts, the certified type-I bound,
/// and the explicit rejection region.
class GctEvaluator {
 public:
  GctEvaluator(Theory P, GctParams params) : P_(std::move(P)), params_(std::move(params)) {
    params_.validate();
    int K = params_.layers, I = params_.path_count;
    t_.assign(static_cast<size_t>(K) * static_cast<size_t>(I), std::nullopt);
    // Cylinder measures along each dense path, minus the declared atom mass
    // when running in declared mode.
    for (int i = 1; i <= I; ++i) {
      PathSpec s = params_.dense->path(static_cast<uint64_t>(i));
      paths_.push_back(s);
      Prob atom = params_.atom_mode == GctParams::AtomMode::kDeclared ? atom_lower(P_, s)
                                                                      : Prob::zero();
      Prob cyl = Prob::one();
      History g;
      // For each k, t(i,k) is the smallest t <= D with
      // P(C(s^i|t)) - atom <= 2^-(k+i); the sequence of measures is
      // nonincreasing in t so a single walk serves every k.
      std::vector<int> pending;
      for (int k = 1; k <= K; ++k) pending.push_back(k);
      for (int t = 0; t <= params_.depth && !pending.empty(); ++t) {
        if (t > 0) {
          int b = s.bit_at(static_cast<uint64_t>(t));
          cyl *= P_.step_prob(g, b);
          g.push_back(b);
        }
        Prob excess = atom > cyl ? Prob::zero() : cyl - atom;
        for (auto it = pending.begin(); it != pending.end();) {
          if (excess <= Prob::pow2(-(*it + i))) {
            at(i, *it) = t;
            it = pending.erase(it);
          } else {
            ++it;
          }
        }
      }
    }
  }

  const Theory& theory() const { return P_; }
  const GctParams& params() const { return params_; }
  const PathSpec& dense_path(int i) const { return paths_.at(static_cast<size_t>(i - 1)); }

  /// t(i,k); nullopt signals DepthExceeded (acceptance-leaning).
  std::optional<int> t_index(int i, int k) const {
    if (i < 1 || i > params_.path_count || k < 1 || k > params_.layers)
      throw std::invalid_argument("gct: (i,k) out of range");
    return t_.at(static_cast<size_t>(k - 1) * static_cast<size_t>(params_.path_count) +
                 static_cast<size_t>(i - 1));
  }

  /// Reject at the first prefix length where, for every layer k, the history
  /// lies in some layer-k cylinder C(s^i | t(i,k)).
  Verdict verdict(const History& h) const {
    int K = params_.layers, I = params_.path_count;
    if (K == 0) return Verdict::accept();
    // Agreement depth of h with each dense path.
    std::vector<size_t> agree(static_cast<size_t>(I) + 1, 0);
    for (int i = 1; i <= I; ++i) {
      const PathSpec& s = paths_[static_cast<size_t>(i - 1)];
      size_t a = 0;
      while (a < h.length() && s.bit_at(a + 1) == h.bit(a + 1)) ++a;
      agree[static_cast<size_t>(i)] = a;
    }
    uint64_t period = 0;
    for (int k = 1; k <= K; ++k) {
      std::optional<uint64_t> entry;
      for (int i = 1; i <= I; ++i) {
        auto t = t_index(i, k);
        if (!t) continue;
        auto tu = static_cast<uint64_t>(*t);
        if (tu <= agree[static_cast<size_t>(i)] && (!entry || tu < *entry)) entry = tu;
      }
      if (!entry) return Verdict::accept();
      period = std::max(period, *entry);
    }
    return Verdict::reject_at(period);
  }

  /// Certified type-I bound: 2^-K plus the atom slack for the finitely many
  /// dense paths the truncated test can reject outright.
  Prob type1_bound() const {
    Prob b = Prob::pow2(-params_.layers);
    for (int i = 1; i <= params_.path_count; ++i)
      b += atom_upper(P_, paths_[static_cast<size_t>(i - 1)], params_.depth);
    return b;
  }

 private:
  std::optional<int>& at(int i, int k) {
    return t_[static_cast<size_t>(k - 1) * static_cast<size_t>(params_.path_count) +
              static_cast<size_t>(i - 1)];
  }

  Theory P_;
  GctParams params_;
  std::vector<PathSpec> paths_;
  std::vector<std::optional<int>> t_;
};

inline std::optional<int> t_index(const Theory& P, int i, int k, const GctParams& params) {
  return GctEvaluator(P, params).t_index(i, k);
}

inline Verdict gct_verdict(const Theory& P, const History& h, const GctParams& params) {
  return GctEvaluator(P, params).verdict(h);
}

inline Prob type1_bound(const Theory& P, const GctParams& params) {
  return GctEvaluator(P, params).type1_bound();
}

/// TestInstance wrapper with a shared per-theory evaluator cache.
inline TestInstance make_gct_test(const GctParams& params) {
  params.validate();
  auto cache = std::make_shared<std::map<const TheoryImpl*, std::shared_ptr<GctEvaluator>>>();
  auto mutex = std::make_shared<std::mutex>();
  auto cfg = params.config();
  auto name_split = cfg.find(':');
  return TestInstance(
      "gct", cfg.substr(name_split + 1), /*prequential=*/false,
      [params, cache, mutex](const Theory& P, const History& h) {
        std::shared_ptr<GctEvaluator> ev;
        {
          std::lock_guard<std::mutex> lock(*mutex);
          auto it = cache->find(P.id());
          if (it != cache->end()) {
            ev = it->second;
          } else {
            ev = std::make_shared<GctEvaluator>(P, params);
            (*cache)[P.id()] = ev;
          }
        }
        return ev->verdict(h);
      },
      std::pow(2.0, -params.layers));
}

}  // namespace gctlab

#endif  // GCTLAB_CATEGORY_HPP
