#ifndef GCTLAB_REVEAL_HPP
#define GCTLAB_REVEAL_HPP

#include <optional>
#include <string>
#include <vector>

#include "gctlab/advlik.hpp"
#include "gctlab/category.hpp"
#include "gctlab/errors.hpp"
#include "gctlab/theory.hpp"

namespace gctlab {

/// One greedy step of the revelation construction: at layer k the chosen
/// dense-path index, the per-theory shrinking depths and their maximum.
struct RevelationStep {
  int k = 0;
  uint64_t i = 0;
  int t_star = 0;
  std::vector<std::optional<int>> per_theory_t;
};

struct RevelationResult {
  History history;
  std::vector<std::optional<uint64_t>> reject_period;  // per support theory
  Prob failure_probability;                            // lottery mass rejected on history
  std::vector<RevelationStep> trace;
  std::vector<std::string> diagnostics;                // DepthExceeded records
};

/// Constructs a history on which every support theory of the lottery is
/// rejected by the finite category test: layer by layer, extend the history
/// along the first dense path that still extends it, deep enough that every
/// support theory's layer-k cylinder contains the result.
inline RevelationResult revelation_path(const TheoryLottery& zeta, const GctParams& params) {
  params.validate();
  std::vector<GctEvaluator> evals;
  evals.reserve(zeta.size());
  for (const auto& [th, w] : zeta.support()) evals.emplace_back(th, params);

  RevelationResult result;
  History h;
  for (int k = 1; k <= params.layers; ++k) {
    std::optional<uint64_t> pick;
    for (uint64_t i = 1; i <= static_cast<uint64_t>(params.path_count); ++i) {
      if (path_in_cylinder(params.dense->path(i), h)) {
        pick = i;
        break;
      }
    }
    if (!pick)
      throw DensityExhausted("no dense path with index <= I extends the current history");

    RevelationStep step;
    step.k = k;
    step.i = *pick;
    int t_star = static_cast<int>(h.length());
    for (size_t j = 0; j < evals.size(); ++j) {
      auto t = evals[j].t_index(static_cast<int>(*pick), k);
      step.per_theory_t.push_back(t);
      if (t) {
        t_star = std::max(t_star, *t);
      } else {
        result.diagnostics.push_back("depth exceeded: theory " +
                                     zeta.support()[j].first.label() + " at (i=" +
                                     std::to_string(*pick) + ",k=" + std::to_string(k) + ")");
      }
    }
    step.t_star = t_star;
    result.trace.push_back(step);
    h = params.dense->path(*pick).truncated(static_cast<size_t>(t_star));
  }

  result.history = h;
  result.failure_probability = Prob::zero();
  for (size_t j = 0; j < evals.size(); ++j) {
    Verdict v = evals[j].verdict(h);
    if (v.rejected()) {
      result.reject_period.push_back(v.period);
      result.failure_probability += zeta.support()[j].second;
    } else {
      result.reject_period.push_back(std::nullopt);
    }
  }
  return result;
}

/// Independent re-evaluation of the lottery mass rejected on h: fresh
/// evaluators, no reuse of revelation bookkeeping.
inline Prob verify_failure(const TheoryLottery& zeta, const History& h, const GctParams& params) {
  Prob failed = Prob::zero();
  for (const auto& [th, w] : zeta.support())
    if (gct_verdict(th, h, params).rejected()) failed += w;
  return failed;
}

struct Prop3Row {
  PathSpec theta = PathSpec::constant(0);
  History revelation;
  size_t rejected = 0;
  size_t support = 0;
  bool all_rejected = false;
};

struct Prop3Report {
  std::vector<Prop3Row> rows;
  double fraction_full = 0.0;  // fraction of theta draws rejecting the whole support
};

/// Draws theta as fair-coin bits truncated at the depth cap, builds the
/// revelation history for the category test over S_theta, and checks that the
/// likelihood test against Q^{S_theta} rejects every support theory on it.
inline Prop3Report prop3_check(const TheoryLottery& zeta, int theta_draws, uint64_t seed,
                               const GctParams& params, uint64_t N, const Rational& c) {
  for (const auto& [th, w] : zeta.support())
    if (th.atoms().kind != AtomDecl::Kind::kNonatomic)
      throw std::invalid_argument("prop3_check: support theories must be nonatomic");

  Prop3Report report;
  size_t full = 0;
  for (int d = 0; d < theta_draws; ++d) {
    auto rng = make_rng(seed, static_cast<uint64_t>(d));
    std::vector<uint8_t> bits(static_cast<size_t>(params.depth));
    for (auto& b : bits) b = uniform01(rng) < 0.5 ? 1 : 0;
    PathSpec theta(std::move(bits), {0});

    GctParams p = params;
    p.dense = stheta_enum(theta);
    RevelationResult rev = revelation_path(zeta, p);

    Prop3Row row;
    row.theta = theta;
    row.revelation = rev.history;
    row.support = zeta.size();
    for (const auto& [th, w] : zeta.support())
      if (randomized_lr_verdict(theta, th, rev.history, N, c).rejected()) ++row.rejected;
    row.all_rejected = row.rejected == row.support;
    if (row.all_rejected) ++full;
    report.rows.push_back(std::move(row));
  }
  report.fraction_full = theta_draws == 0 ? 0.0 : static_cast<double>(full) / theta_draws;
  return report;
}

}  // namespace gctlab

#endif  // GCTLAB_REVEAL_HPP
