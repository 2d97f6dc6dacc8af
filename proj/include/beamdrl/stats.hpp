// Copyright 2026 The beamdrl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Series statistics used for reporting: trailing moving averages, quantiles
// and empirical distribution functions.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "beamdrl/errors.hpp"

namespace beamdrl {

// y(t) = mean of the last min(window, t + 1) values.
inline std::vector<double> moving_average(std::span<const double> x, std::size_t window = 500) {
  if (window == 0) throw DomainError("moving_average: window must be >= 1");
  std::vector<double> y(x.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    sum += x[t];
    if (t >= window) sum -= x[t - window];
    // Recompute exactly every window steps to stop rounding drift.
    if (t % window == window - 1) {
      sum = 0.0;
      for (std::size_t i = t + 1 - window; i <= t; ++i) sum += x[i];
    }
    y[t] = sum / static_cast<double>(std::min(window, t + 1));
  }
  return y;
}

// Moving average that restarts at each boundary index (e.g. a reschedule).
inline std::vector<double> segmented_moving_average(std::span<const double> x, std::size_t window,
                                                    std::span<const std::size_t> boundaries) {
  std::vector<std::size_t> cuts{0};
  for (std::size_t b : boundaries) {
    if (b > 0 && b < x.size()) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(x.size());
  std::vector<double> y;
  y.reserve(x.size());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto part = moving_average(x.subspan(cuts[i], cuts[i + 1] - cuts[i]), window);
    y.insert(y.end(), part.begin(), part.end());
  }
  return y;
}

// Linear-interpolation quantile of sorted data: position p (n - 1).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile: empty series");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: p outside [0, 1]");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct DistributionStats {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;  // whiskers span the full range
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::vector<double> grid;  // uniform points from min to max
  std::vector<double> cdf;   // fraction of values <= grid point
};

inline DistributionStats distribution_stats(std::span<const double> x, std::size_t grid_points = 101) {
  if (x.empty()) throw DomainError("distribution_stats: empty series");
  if (grid_points == 0) throw DomainError("distribution_stats: need at least one grid point");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  DistributionStats d;
  d.count = s.size();
  double sum = 0.0;
  for (double v : s) sum += v;
  d.mean = sum / static_cast<double>(s.size());
  d.min = s.front();
  d.max = s.back();
  d.q1 = quantile_sorted(s, 0.25);
  d.median = quantile_sorted(s, 0.5);
  d.q3 = quantile_sorted(s, 0.75);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double g = grid_points == 1 ? d.min
                                      : d.min + (d.max - d.min) * static_cast<double>(i) /
                                                    static_cast<double>(grid_points - 1);
    d.grid.push_back(g);
    const auto n = std::upper_bound(s.begin(), s.end(), g) - s.begin();
    d.cdf.push_back(static_cast<double>(n) / static_cast<double>(s.size()));
  }
  // The last grid point is the maximum, whatever rounding did to it.
  d.grid.back() = d.max;
  d.cdf.back() = 1.0;
  return d;
}

}  // namespace beamdrl
