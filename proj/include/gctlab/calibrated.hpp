#ifndef GCTLAB_CALIBRATED_HPP
#define GCTLAB_CALIBRATED_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gctlab/rng.hpp"

namespace gctlab {

/// Online randomized forecaster over the grid {0, 1/g, ..., 1}. Each round it
/// plays the mixture (supported on at most two grid points) that solves the
/// approachability condition for the per-bin discrepancy vector
/// d_i = sum over rounds played i of (outcome - p_i), which drives the
/// weighted calibration error to zero against any adaptive outcome sequence
/// that does not observe the current draw.
class CalibratedForecaster {
 public:
  CalibratedForecaster(int grid_bins, uint64_t seed)
      : g_(grid_bins), rng_(make_rng(seed)) {
    if (g_ < 2) throw std::invalid_argument("forecaster: grid must be >= 2");
    int n = g_ + 1;
    grid_.resize(n);
    for (int i = 0; i < n; ++i) grid_[i] = double(i) / double(g_);
    discrepancy_.assign(n, 0.0);
    strategy_.assign(n, 0.0);
    count_.assign(n, 0);
    outcome_sum_.assign(n, 0);
    recompute_strategy();
  }

  int grid_size() const { return g_ + 1; }
  double grid_value(int i) const { return grid_[i]; }

  /// Current round's mixed strategy (visible to the adversary).
  const std::vector<double>& strategy() const { return strategy_; }

  double mean_forecast() const {
    double m = 0.0;
    for (int i = 0; i <= g_; ++i) m += strategy_[i] * grid_[i];
    return m;
  }

  /// Realizes this round's forecast; call observe() with the outcome next.
  double draw() {
    double u = uniform01(rng_);
    double cum = 0.0;
    last_ = g_;
    for (int i = 0; i <= g_; ++i) {
      cum += strategy_[i];
      if (u < cum) {
        last_ = i;
        break;
      }
    }
    return grid_[last_];
  }

  void observe(int outcome) {
    if (outcome != 0 && outcome != 1) throw std::invalid_argument("forecaster: outcome not 0/1");
    discrepancy_[last_] += double(outcome) - grid_[last_];
    count_[last_] += 1;
    outcome_sum_[last_] += outcome;
    ++rounds_;
    recompute_strategy();
  }

  uint64_t rounds() const { return rounds_; }

  /// Occupancy-weighted L1 calibration error: sum over bins of
  /// (n_i / n) |empirical frequency - bin value|.
  double weighted_calibration_error() const {
    if (rounds_ == 0) return 0.0;
    double err = 0.0;
    for (int i = 0; i <= g_; ++i) {
      if (count_[i] == 0) continue;
      double freq = double(outcome_sum_[i]) / double(count_[i]);
      err += double(count_[i]) / double(rounds_) * std::abs(freq - grid_[i]);
    }
    return err;
  }

 private:
  /// Picks q minimizing max over outcomes y of <d, expected increment>,
  /// searching singletons and pairs; an optimal q needs support at most two.
  /// <d, inc(y,q)> = y * sum(q d) - sum(q d p), so with a_i = d_i p_i and
  /// b_i = d_i (1 - p_i) the objective is max(-sum(q a), sum(q b)).
  void recompute_strategy() {
    int n = g_ + 1;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = discrepancy_[i] * grid_[i];
      b[i] = discrepancy_[i] * (1.0 - grid_[i]);
    }
    double best_val = std::numeric_limits<double>::infinity();
    int bi = 0, bj = 0;
    double bw = 1.0;
    auto consider = [&](int i, int j, double w) {
      double av = w * a[i] + (1 - w) * a[j];
      double bv = w * b[i] + (1 - w) * b[j];
      double v = std::max(-av, bv);
      if (v < best_val) {
        best_val = v;
        bi = i;
        bj = j;
        bw = w;
      }
    };
    for (int i = 0; i < n; ++i) consider(i, i, 1.0);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        consider(i, j, 0.0);
        consider(i, j, 1.0);
        double den = (b[i] - b[j]) + (a[i] - a[j]);
        if (std::abs(den) > 1e-300) {
          double w = -(a[j] + b[j]) / den;
          if (w >= 0.0 && w <= 1.0) consider(i, j, w);
        }
      }
    }
    std::fill(strategy_.begin(), strategy_.end(), 0.0);
    strategy_[bi] += bw;
    strategy_[bj] += 1.0 - bw;
  }

  int g_;
  std::mt19937_64 rng_;
  std::vector<double> grid_;
  std::vector<double> discrepancy_;
  std::vector<double> strategy_;
  std::vector<uint64_t> count_;
  std::vector<uint64_t> outcome_sum_;
  int last_ = 0;
  uint64_t rounds_ = 0;
};

/// Adversaries for the calibration experiments. Each sees the round index,
/// the forecaster's mixed strategy summary, and the outcome history, but not
/// the current draw.
struct CalibrationAdversary {
  std::string name;
  /// (round t, mean forecast, rng) -> outcome
  std::function<int(uint64_t, double, std::mt19937_64&)> next;
};

inline std::vector<CalibrationAdversary> calibration_adversaries() {
  return {
      {"ones", [](uint64_t, double, std::mt19937_64&) { return 1; }},
      {"zeros", [](uint64_t, double, std::mt19937_64&) { return 0; }},
      {"alternating", [](uint64_t t, double, std::mt19937_64&) { return int(t % 2); }},
      // Defeats every deterministic forecaster; reads the round's expected
      // forecast (flipping on the realized draw would defeat all forecasters).
      {"flip", [](uint64_t, double mean, std::mt19937_64&) { return mean < 0.5 ? 1 : 0; }},
      {"bernoulli", [](uint64_t, double, std::mt19937_64& rng) {
         return uniform01(rng) < 0.5 ? 1 : 0;
       }},
  };
}

/// Runs the forecaster for the given number of rounds and returns the final
/// weighted calibration error.
inline double run_calibration_duel(const CalibrationAdversary& adversary, int grid_bins,
                                   uint64_t rounds, uint64_t seed) {
  CalibratedForecaster fc(grid_bins, seed);
  auto adv_rng = make_rng(seed, 0x9e3779b9u);
  for (uint64_t t = 0; t < rounds; ++t) {
    double mean = fc.mean_forecast();
    int y = adversary.next(t, mean, adv_rng);
    fc.draw();
    fc.observe(y);
  }
  return fc.weighted_calibration_error();
}

}  // namespace gctlab

#endif  // GCTLAB_CALIBRATED_HPP
