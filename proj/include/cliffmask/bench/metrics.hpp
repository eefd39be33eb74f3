//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_BENCH_METRICS_HPP
#define CLIFFMASK_BENCH_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cliffmask/core/error.hpp"
#include "cliffmask/core/log.hpp"

namespace cliffmask::bench {

namespace detail {

inline void check_lengths(const std::vector<double>& pred,
                          const std::vector<double>& truth) {
  if (pred.size() != truth.size()) {
    raise(Errc::kLengthMismatch, "pred/truth length mismatch");
  }
  if (pred.empty()) raise(Errc::kEmptyInput, "empty evaluation set");
}

}  // namespace detail

inline double rmse(const std::vector<double>& pred,
                   const std::vector<double>& truth) {
  detail::check_lengths(pred, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

inline double mae(const std::vector<double>& pred,
                  const std::vector<double>& truth) {
  detail::check_lengths(pred, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    acc += std::abs(pred[i] - truth[i]);
  }
  return acc / static_cast<double>(pred.size());
}

// RMSE restricted to cliff-flagged compounds. When nothing is flagged the
// metric is undefined and callers must report null, never zero.
inline double rmse_cliff(const std::vector<double>& pred,
                         const std::vector<double>& truth,
                         const std::vector<char>& flags) {
  detail::check_lengths(pred, truth);
  if (flags.size() != pred.size()) {
    raise(Errc::kLengthMismatch, "cliff flags length mismatch");
  }
  std::vector<double> p, t;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (flags[i]) {
      p.push_back(pred[i]);
      t.push_back(truth[i]);
    }
  }
  if (p.empty()) {
    raise(Errc::kNoCliffCompounds, "no cliff compounds in evaluation set");
  }
  return rmse(p, t);
}

struct KldConfig {
  int grid_points = 512;
  double grid_margin_bandwidths = 3.0;
  double epsilon = 1e-12;
  double degenerate_bandwidth = 1e-3;
};

namespace detail {

inline double sample_sd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

inline double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  double h = p * static_cast<double>(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = h - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace detail

// Silverman's rule of thumb; a degenerate (constant) sample falls back to a
// tiny fixed bandwidth instead of failing.
inline double silverman_bandwidth(const std::vector<double>& sample,
                                  const KldConfig& cfg = {}) {
  if (sample.size() < 2) {
    raise(Errc::kEmptyInput, "bandwidth needs at least two values");
  }
  auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
  if (*mn == *mx) {
    log_debug("degenerate sample, bandwidth fallback");
    return cfg.degenerate_bandwidth;
  }
  double sd = detail::sample_sd(sample);
  double iqr =
      detail::quantile(sample, 0.75) - detail::quantile(sample, 0.25);
  double a = sd;
  if (iqr > 0.0) a = std::min(sd, iqr / 1.34);
  if (a <= 0.0) a = sd;
  return 0.9 * a *
         std::pow(static_cast<double>(sample.size()), -0.2);
}

namespace detail {

inline std::vector<double> kde_on_grid(const std::vector<double>& sample,
                                       double bw,
                                       const std::vector<double>& grid) {
  const double norm =
      1.0 / (static_cast<double>(sample.size()) * bw *
             std::sqrt(2.0 * 3.14159265358979323846));
  std::vector<double> dens(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double acc = 0.0;
    for (double x : sample) {
      double z = (grid[k] - x) / bw;
      acc += std::exp(-0.5 * z * z);
    }
    dens[k] = acc * norm;
  }
  return dens;
}

}  // namespace detail

// Discrete KL(truth || pred) in nats over a shared KDE grid.
inline double kld(const std::vector<double>& pred,
                  const std::vector<double>& truth,
                  const KldConfig& cfg = {}) {
  if (pred.size() < 2 || truth.size() < 2) {
    raise(Errc::kEmptyInput, "kld needs at least two values per sample");
  }
  double bw_p = silverman_bandwidth(pred, cfg);
  double bw_t = silverman_bandwidth(truth, cfg);
  double margin = cfg.grid_margin_bandwidths * std::max(bw_p, bw_t);
  double lo = std::min(*std::min_element(pred.begin(), pred.end()),
                       *std::min_element(truth.begin(), truth.end())) -
              margin;
  double hi = std::max(*std::max_element(pred.begin(), pred.end()),
                       *std::max_element(truth.begin(), truth.end())) +
              margin;
  int m = std::max(cfg.grid_points, 2);
  std::vector<double> grid(static_cast<std::size_t>(m));
  double step = (hi - lo) / static_cast<double>(m - 1);
  for (int k = 0; k < m; ++k) {
    grid[static_cast<std::size_t>(k)] = lo + step * static_cast<double>(k);
  }
  std::vector<double> dp = detail::kde_on_grid(pred, bw_p, grid);
  std::vector<double> dt = detail::kde_on_grid(truth, bw_t, grid);
  double sum_p = 0.0, sum_t = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    sum_p += dp[k];
    sum_t += dt[k];
  }
  double kl = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double pt = dt[k] / sum_t;
    if (pt <= 0.0) continue;
    double pp = std::max(dp[k] / sum_p, cfg.epsilon);
    kl += pt * std::log(pt / pp);
  }
  return kl;
}

struct EvalMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> rmse_cliff;  // null when no cliff compounds
  std::optional<double> kld;
  int n = 0;
  int n_cliff = 0;
};

inline EvalMetrics evaluate(const std::vector<double>& pred,
                            const std::vector<double>& truth,
                            const std::vector<char>& cliff_flags) {
  EvalMetrics m;
  m.rmse = rmse(pred, truth);
  m.mae = mae(pred, truth);
  m.n = static_cast<int>(pred.size());
  for (char f : cliff_flags) m.n_cliff += f ? 1 : 0;
  try {
    m.rmse_cliff = rmse_cliff(pred, truth, cliff_flags);
  } catch (const Error& e) {
    if (e.code() != Errc::kNoCliffCompounds) throw;
  }
  try {
    m.kld = kld(pred, truth);
  } catch (const Error& e) {
    if (e.code() != Errc::kEmptyInput) throw;
  }
  return m;
}

inline void write_metrics_json(const std::string& path,
                               const EvalMetrics& m) {
  nlohmann::json j;
  j["rmse"] = m.rmse;
  j["mae"] = m.mae;
  if (m.rmse_cliff) {
    j["rmse_cliff"] = *m.rmse_cliff;
  } else {
    j["rmse_cliff"] = nullptr;
  }
  if (m.kld) {
    j["kld"] = *m.kld;
  } else {
    j["kld"] = nullptr;
  }
  j["n"] = m.n;
  j["n_c"] = m.n_cliff;
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::kIoError, "cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace cliffmask::bench

#endif  // CLIFFMASK_BENCH_METRICS_HPP
