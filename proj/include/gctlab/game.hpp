#ifndef GCTLAB_GAME_HPP
#define GCTLAB_GAME_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gctlab/errors.hpp"
#include "gctlab/tests.hpp"
#include "gctlab/theory.hpp"

namespace gctlab {

struct GameBudget {
  uint64_t max_columns = uint64_t(1) << 12;
  uint64_t max_cells = uint64_t(1) << 22;
};

inline std::vector<History> all_histories(size_t horizon) {
  std::vector<History> out;
  out.reserve(size_t(1) << horizon);
  std::vector<uint8_t> bits(horizon, 0);
  for (uint64_t v = 0; v < (uint64_t(1) << horizon); ++v) {
    for (size_t t = 0; t < horizon; ++t)
      bits[t] = static_cast<uint8_t>((v >> (horizon - 1 - t)) & 1);
    out.emplace_back(bits);
  }
  return out;
}

/// Tester-vs-expert payoff matrix: rows are candidate theories, columns are
/// horizon-length histories, entries are 1 when the test does not reject.
class GameMatrix {
 public:
  static GameMatrix build(const TestInstance& test, const std::vector<Theory>& menu,
                          size_t horizon, GameBudget budget = {}) {
    if (menu.empty()) throw std::invalid_argument("game: empty menu");
    if (horizon < 1 || (uint64_t(1) << horizon) > budget.max_columns)
      throw BudgetExceeded("game: 2^horizon exceeds the column budget");
    if ((uint64_t(1) << horizon) * menu.size() > budget.max_cells)
      throw BudgetExceeded("game: cell budget exceeded");
    GameMatrix g;
    g.rows_ = menu;
    g.cols_ = all_histories(horizon);
    g.accept_.assign(menu.size(), std::vector<uint8_t>(g.cols_.size(), 0));
    for (size_t r = 0; r < menu.size(); ++r)
      for (size_t c = 0; c < g.cols_.size(); ++c)
        g.accept_[r][c] = test(menu[r], g.cols_[c]).rejected() ? 0 : 1;
    return g;
  }

  static GameMatrix from_entries(std::vector<std::vector<uint8_t>> entries) {
    if (entries.empty() || entries[0].empty())
      throw std::invalid_argument("game: empty matrix");
    GameMatrix g;
    g.accept_ = std::move(entries);
    return g;
  }

  size_t num_rows() const { return accept_.size(); }
  size_t num_cols() const { return accept_[0].size(); }
  uint8_t entry(size_t r, size_t c) const { return accept_[r][c]; }
  const std::vector<Theory>& rows() const { return rows_; }
  const std::vector<History>& cols() const { return cols_; }

  /// Worst-column payoff of a fixed row: min over histories.
  double row_worst_case(size_t r) const {
    double worst = 1.0;
    for (size_t c = 0; c < num_cols(); ++c) worst = std::min(worst, double(accept_[r][c]));
    return worst;
  }

 private:
  std::vector<Theory> rows_;
  std::vector<History> cols_;
  std::vector<std::vector<uint8_t>> accept_;
};

/// Solver output with an exhaustively verified certificate: certified_lower
/// is the true worst-column payoff of the returned row mixture, so
/// certified_lower >= value - gap always holds and does not depend on solver
/// quality.
struct Equilibrium {
  std::vector<double> row_weights;
  std::vector<double> col_weights;
  double value = 0.0;            // upper certificate (best response to col mix)
  double certified_lower = 0.0;  // exact min over columns of the row mixture
  double gap = 0.0;              // value - certified_lower
  bool hit_iteration_limit = false;
};

/// Multiplicative-weights self-play on both players, with the certificate
/// computed by exhaustive column/row best responses on the averaged
/// strategies.
inline Equilibrium solve_zero_sum(const GameMatrix& M, double target_gap,
                                  uint64_t max_iters = 2000000) {
  if (target_gap <= 0) throw std::invalid_argument("solve: target_gap must be > 0");
  size_t nr = M.num_rows(), nc = M.num_cols();
  std::vector<double> row_cum(nr, 0.0), col_cum(nc, 0.0);
  std::vector<double> x(nr, 1.0 / double(nr)), y(nc, 1.0 / double(nc));
  std::vector<double> x_avg(nr, 0.0), y_avg(nc, 0.0);
  std::vector<double> row_payoff(nr), col_payoff(nc);

  auto certify = [&](const std::vector<double>& xs, const std::vector<double>& ys, Equilibrium& e) {
    double lower = 1.0;
    for (size_t c = 0; c < nc; ++c) {
      double v = 0.0;
      for (size_t r = 0; r < nr; ++r) v += xs[r] * M.entry(r, c);
      lower = std::min(lower, v);
    }
    double upper = 0.0;
    for (size_t r = 0; r < nr; ++r) {
      double v = 0.0;
      for (size_t c = 0; c < nc; ++c) v += ys[c] * M.entry(r, c);
      upper = std::max(upper, v);
    }
    e.row_weights = xs;
    e.col_weights = ys;
    e.value = upper;
    e.certified_lower = lower;
    e.gap = upper - lower;
  };

  Equilibrium best;
  certify(x, y, best);
  uint64_t iters = 0;
  double logn = std::log(std::max<double>(2, std::max(nr, nc)));
  while (best.gap > target_gap && iters < max_iters) {
    uint64_t block = std::min<uint64_t>(256, max_iters - iters);
    for (uint64_t b = 0; b < block; ++b) {
      ++iters;
      double eta = std::sqrt(logn / double(iters));
      for (size_t r = 0; r < nr; ++r) {
        double v = 0.0;
        for (size_t c = 0; c < nc; ++c) v += y[c] * M.entry(r, c);
        row_payoff[r] = v;
      }
      for (size_t c = 0; c < nc; ++c) {
        double v = 0.0;
        for (size_t r = 0; r < nr; ++r) v += x[r] * M.entry(r, c);
        col_payoff[c] = v;
      }
      for (size_t r = 0; r < nr; ++r) row_cum[r] += row_payoff[r];
      for (size_t c = 0; c < nc; ++c) col_cum[c] += col_payoff[c];
      // Softmax with max-shift; the row player maximizes, the column player
      // minimizes.
      double mx = *std::max_element(row_cum.begin(), row_cum.end());
      double sum = 0.0;
      for (size_t r = 0; r < nr; ++r) sum += (x[r] = std::exp(eta * (row_cum[r] - mx)));
      for (size_t r = 0; r < nr; ++r) x[r] /= sum;
      double mn = *std::min_element(col_cum.begin(), col_cum.end());
      sum = 0.0;
      for (size_t c = 0; c < nc; ++c) sum += (y[c] = std::exp(-eta * (col_cum[c] - mn)));
      for (size_t c = 0; c < nc; ++c) y[c] /= sum;
      for (size_t r = 0; r < nr; ++r) x_avg[r] += x[r];
      for (size_t c = 0; c < nc; ++c) y_avg[c] += y[c];
    }
    std::vector<double> xs(nr), ys(nc);
    for (size_t r = 0; r < nr; ++r) xs[r] = x_avg[r] / double(iters);
    for (size_t c = 0; c < nc; ++c) ys[c] = y_avg[c] / double(iters);
    Equilibrium cand;
    certify(xs, ys, cand);
    if (cand.gap < best.gap) best = cand;
    // The last iterates sometimes certify tighter than the averages.
    certify(x, y, cand);
    if (cand.gap < best.gap) best = cand;
  }
  best.hit_iteration_limit = best.gap > target_gap;
  return best;
}

/// Converts solver row weights into a lottery over the matrix's theories.
/// In exact mode the weights are rationalized and the last one adjusted so
/// they sum to one exactly.
inline TheoryLottery equilibrium_lottery(const GameMatrix& M, const std::vector<double>& weights,
                                         double drop_below = 1e-9) {
  if (M.rows().empty()) throw std::invalid_argument("lottery: matrix has no theory rows");
  std::vector<std::pair<Theory, double>> kept;
  double total = 0.0;
  for (size_t r = 0; r < weights.size(); ++r) {
    if (weights[r] > drop_below) {
      kept.emplace_back(M.rows()[r], weights[r]);
      total += weights[r];
    }
  }
  std::vector<std::pair<Theory, Prob>> support;
  if (Prob::exact_mode()) {
    // Floor onto a millionths grid, then hand the (nonnegative) deficit to
    // the largest weight so the total is exactly 1.
    std::vector<Rational> ws(kept.size());
    Rational acc = 0;
    size_t largest = 0;
    for (size_t j = 0; j < kept.size(); ++j) {
      auto num = static_cast<int64_t>(std::floor(kept[j].second / total * 1000000.0));
      ws[j] = Rational(std::max<int64_t>(num, 1), 1000000);
      acc += ws[j];
      if (kept[j].second > kept[largest].second) largest = j;
    }
    ws[largest] += 1 - acc;
    if (ws[largest] <= 0) throw std::invalid_argument("lottery: rounding failed");
    for (size_t j = 0; j < kept.size(); ++j)
      support.emplace_back(kept[j].first, Prob::from_rational(ws[j]));
  } else {
    for (auto& [th, w] : kept) support.emplace_back(th, Prob::from_double(w / total));
  }
  return TheoryLottery(std::move(support));
}

/// Exact worst-case pass probability of a lottery: min over all
/// horizon-length histories of the accepted lottery mass.
inline Prob manipulation_certificate(const TestInstance& test, const TheoryLottery& zeta,
                                     size_t horizon, GameBudget budget = {}) {
  if (horizon < 1 || (uint64_t(1) << horizon) > budget.max_columns ||
      (uint64_t(1) << horizon) * zeta.size() > budget.max_cells)
    throw BudgetExceeded("certificate: horizon exceeds the cell budget");
  std::optional<Prob> worst;
  for (const History& s : all_histories(horizon)) {
    Prob pass = Prob::zero();
    for (const auto& [th, w] : zeta.support())
      if (!test(th, s).rejected()) pass += w;
    if (!worst || pass < *worst) worst = pass;
  }
  return *worst;
}

// ---------------------------------------------------------------------------
// Expert menus and the double-oracle loop for the average-match game.

/// Expected-acceptance best response to a column distribution for the
/// average-match test: dynamic program over history nodes carrying the
/// running deviation sum, exact in units of 1/g.
class AvgMatchBestResponse {
 public:
  AvgMatchBestResponse(Rational tol, uint64_t n_min, size_t horizon, int grid)
      : tol_(std::move(tol)), n_min_(n_min), horizon_(horizon), g_(grid) {
    if (grid < 1) throw std::invalid_argument("best_response: grid must be >= 1");
  }

  /// col_weights indexed like all_histories(horizon).
  Theory solve(const std::vector<double>& col_weights) const {
    weights_ = &col_weights;
    memo_.clear();
    choice_.clear();
    best_value_ = recurse(0, 0, 0);
    // Collect chosen forecasts into behavioral node order.
    std::vector<Rational> nodes((size_t(1) << horizon_) - 1, Rational(1, 2));
    fill_nodes(0, 0, 0, nodes);
    return make_behavioral(horizon_, std::move(nodes));
  }

  double best_value() const { return best_value_; }

 private:
  using Key = std::pair<uint64_t, int64_t>;  // (node id, sum in 1/g units)

  // node id: histories in heap order; depth d, value v -> 2^d - 1 + v.
  double recurse(size_t depth, uint64_t value, int64_t sum_units) const {
    if (depth == horizon_) return (*weights_)[value];
    Key key{(uint64_t(1) << depth) - 1 + value, sum_units};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    double best = -1.0;
    int best_f = 0;
    for (int f = 0; f <= g_; ++f) {
      double total = 0.0;
      for (int b = 0; b <= 1; ++b) {
        int64_t s = sum_units + f - static_cast<int64_t>(b) * g_;
        uint64_t n = depth + 1;
        if (n >= n_min_ && deviation_exceeds(s, n)) continue;  // rejected branch
        total += recurse(depth + 1, (value << 1) | static_cast<uint64_t>(b), s);
      }
      if (total > best) {
        best = total;
        best_f = f;
      }
    }
    memo_[key] = best;
    choice_[key] = best_f;
    return best;
  }

  void fill_nodes(size_t depth, uint64_t value, int64_t sum_units,
                  std::vector<Rational>& nodes) const {
    if (depth == horizon_) return;
    Key key{(uint64_t(1) << depth) - 1 + value, sum_units};
    auto it = choice_.find(key);
    if (it == choice_.end()) return;  // unreachable node, keep default
    int f = it->second;
    nodes[key.first] = Rational(f, g_);
    for (int b = 0; b <= 1; ++b) {
      int64_t s = sum_units + f - static_cast<int64_t>(b) * g_;
      uint64_t n = depth + 1;
      if (n >= n_min_ && deviation_exceeds(s, n)) continue;
      fill_nodes(depth + 1, (value << 1) | static_cast<uint64_t>(b), s, nodes);
    }
  }

  /// |sum/g| > tol * n, all in exact integer arithmetic.
  bool deviation_exceeds(int64_t sum_units, uint64_t n) const {
    BigInt lhs = sum_units < 0 ? BigInt(-sum_units) : BigInt(sum_units);
    // |sum_units|/g > tol*n  <=>  |sum_units| * den(tol) > num(tol) * n * g
    return lhs * denominator(tol_) > numerator(tol_) * BigInt(n) * g_;
  }

  Rational tol_;
  uint64_t n_min_;
  size_t horizon_;
  int g_;
  mutable const std::vector<double>* weights_ = nullptr;
  mutable std::map<Key, double> memo_;
  mutable std::map<Key, int> choice_;
  mutable double best_value_ = 0.0;
};

struct DoubleOracleResult {
  Equilibrium equilibrium;
  std::vector<Theory> menu;
  GameMatrix game;
  int expansions = 0;
  double best_single_worst_case = 0.0;

  DoubleOracleResult(Equilibrium eq, std::vector<Theory> m, GameMatrix g)
      : equilibrium(std::move(eq)), menu(std::move(m)), game(std::move(g)) {}
};

/// Double-oracle equilibrium search for the average-match game: columns are
/// enumerated exhaustively (small horizon) and the expert menu grows by
/// best-response expansion against the solver's column distribution.
inline DoubleOracleResult double_oracle_avg_match(Rational tol, uint64_t n_min, size_t horizon,
                                                  int grid, double target_gap,
                                                  int max_expansions = 32,
                                                  GameBudget budget = {}) {
  TestInstance test = make_avg_match(tol, n_min);
  std::vector<Theory> menu;
  for (int f = 0; f <= grid; ++f) menu.push_back(make_bernoulli(Rational(f, grid)));

  AvgMatchBestResponse br(tol, n_min, horizon, grid);
  GameMatrix game = GameMatrix::build(test, menu, horizon, budget);
  Equilibrium eq = solve_zero_sum(game, target_gap);
  int expansions = 0;
  for (; expansions < max_expansions; ++expansions) {
    Theory response = br.solve(eq.col_weights);
    if (br.best_value() <= eq.value + target_gap * 0.25) break;  // no profitable row
    menu.push_back(response);
    game = GameMatrix::build(test, menu, horizon, budget);
    eq = solve_zero_sum(game, target_gap);
  }

  DoubleOracleResult result(std::move(eq), menu, std::move(game));
  result.expansions = expansions;
  result.best_single_worst_case = 0.0;
  for (size_t r = 0; r < result.game.num_rows(); ++r)
    result.best_single_worst_case =
        std::max(result.best_single_worst_case, result.game.row_worst_case(r));
  return result;
}

}  // namespace gctlab

#endif  // GCTLAB_GAME_HPP
