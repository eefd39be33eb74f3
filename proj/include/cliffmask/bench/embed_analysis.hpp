//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_BENCH_EMBED_ANALYSIS_HPP
#define CLIFFMASK_BENCH_EMBED_ANALYSIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cliffmask/core/error.hpp"

namespace cliffmask::bench {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double euclidean(const Point2& a, const Point2& b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

namespace detail {

// Cyclic Jacobi for a symmetric matrix; small d, deterministic sweeps.
inline void jacobi_eigen(std::vector<std::vector<double>>& a,
                         std::vector<std::vector<double>>& v) {
  std::size_t d = a.size();
  v.assign(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
}

}  // namespace detail

struct Pca2d {
  std::vector<Point2> points;
  std::array<double, 2> eigenvalues = {0.0, 0.0};
  std::vector<std::array<double, 2>> loadings;  // d rows, 2 components
};

// Deterministic 2D PCA: covariance eigenvectors, components ordered by
// eigenvalue descending, each component's largest-magnitude loading forced
// positive so reruns never flip signs.
inline Pca2d pca_2d(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) raise(Errc::kEmptyInput, "pca over empty table");
  std::size_t n = rows.size();
  std::size_t d = rows[0].size();
  if (d == 0) raise(Errc::kEmptyInput, "pca over zero-width features");
  for (const auto& r : rows) {
    if (r.size() != d) {
      raise(Errc::kDimensionMismatch, "ragged feature table");
    }
  }
  Pca2d out;
  out.loadings.assign(d, {0.0, 0.0});
  out.points.assign(n, Point2{});
  if (n < 2) return out;  // no variance: everything at the origin

  std::vector<double> mean(d, 0.0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += r[k];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < d; ++i) {
      double ci = r[i] - mean[i];
      for (std::size_t j = i; j < d; ++j) {
        cov[i][j] += ci * (r[j] - mean[j]);
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov[i][j] /= static_cast<double>(n - 1);
      cov[j][i] = cov[i][j];
    }
  }

  std::vector<std::vector<double>> vecs;
  detail::jacobi_eigen(cov, vecs);
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t k = 0; k < d; ++k) order.emplace_back(cov[k][k], k);
  std::stable_sort(order.begin(), order.end(), [](const auto& a,
                                                  const auto& b) {
    return a.first > b.first;
  });

  for (int comp = 0; comp < 2 && comp < static_cast<int>(d); ++comp) {
    std::size_t col = order[static_cast<std::size_t>(comp)].second;
    out.eigenvalues[static_cast<std::size_t>(comp)] =
        std::max(order[static_cast<std::size_t>(comp)].first, 0.0);
    std::size_t pivot = 0;
    for (std::size_t k = 1; k < d; ++k) {
      if (std::abs(vecs[k][col]) > std::abs(vecs[pivot][col])) pivot = k;
    }
    double sign = vecs[pivot][col] < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      out.loadings[k][static_cast<std::size_t>(comp)] = sign * vecs[k][col];
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    double px = 0.0, py = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      double c = rows[i][k] - mean[k];
      px += c * out.loadings[k][0];
      py += c * out.loadings[k][1];
    }
    out.points[i] = Point2{px, py};
  }
  return out;
}

// Mean Euclidean distance between cliff-pair members in a 2D projection.
inline double cliff_distance(
    const std::map<std::string, Point2>& embedding,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  if (pairs.empty()) raise(Errc::kEmptyInput, "no cliff pairs");
  auto lookup = [&](const std::string& id) -> const Point2& {
    auto it = embedding.find(id);
    if (it == embedding.end()) {
      raise(Errc::kMissingEmbedding, "missing embedding for '" + id + "'");
    }
    return it->second;
  };
  double acc = 0.0;
  for (const auto& [a, b] : pairs) {
    acc += euclidean(lookup(a), lookup(b));
  }
  return acc / static_cast<double>(pairs.size());
}

struct CollapseBin {
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;
  double mean_distance = 0.0;
  int count = 0;
};

// Pairs binned by fingerprint similarity into ten fixed bins over [0,1];
// a similarity of exactly 1.0 lands in the top bin. Empty bins are omitted.
inline std::vector<CollapseBin> collapse_curve(
    const std::vector<double>& similarities,
    const std::vector<double>& distances) {
  if (similarities.size() != distances.size()) {
    raise(Errc::kLengthMismatch, "similarity/distance length mismatch");
  }
  constexpr int kBins = 10;
  double sums[kBins] = {0.0};
  int counts[kBins] = {0};
  for (std::size_t i = 0; i < similarities.size(); ++i) {
    double t = std::clamp(similarities[i], 0.0, 1.0);
    int b = std::min(static_cast<int>(std::floor(t * 10.0)), kBins - 1);
    sums[b] += distances[i];
    counts[b] += 1;
  }
  std::vector<CollapseBin> out;
  for (int b = 0; b < kBins; ++b) {
    if (counts[b] == 0) continue;
    CollapseBin bin;
    bin.lo = 0.1 * b;
    bin.hi = 0.1 * (b + 1);
    bin.center = 0.05 + 0.1 * b;
    bin.mean_distance = sums[b] / counts[b];
    bin.count = counts[b];
    out.push_back(bin);
  }
  return out;
}

}  // namespace cliffmask::bench

#endif  // CLIFFMASK_BENCH_EMBED_ANALYSIS_HPP
