#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "flowguard/image.hpp"

namespace flowguard {

// Detected corner. Score is the sum of |I(circle) - I(center)| - t over the
// longest qualifying arc, so it is always positive for a real detection.
struct Corner {
  int x = 0;
  int y = 0;
  double score = 0.0;
};

struct FastParams {
  double threshold = 0.08;  // intensity threshold t, in (0, 1)
  int arcLength = 9;        // contiguous circle pixels required, 9..16
  bool nonmax = true;       // keep only strict score maxima over 8-neighborhoods
  int maxCorners = 400;     // cap after sorting by descending score
};

// The 16-pixel Bresenham circle of radius 3, clockwise from 12 o'clock.
inline constexpr std::array<std::array<int, 2>, 16> kFastCircle = {{
    {0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0}, {3, 1}, {2, 2}, {1, 3},
    {0, 3}, {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3},
}};

namespace detail {

// Longest circular run of set flags; returns {length, start index}.
inline std::pair<int, int> longestCircularRun(const std::array<bool, 16>& flags) {
  int total = 0;
  for (bool f : flags) total += f;
  if (total == 16) return {16, 0};
  if (total == 0) return {0, 0};
  int best = 0, bestStart = 0, run = 0, runStart = 0;
  for (int i = 0; i < 32; ++i) {
    if (flags[i % 16]) {
      if (run == 0) runStart = i;
      ++run;
      if (run > best) {
        best = run;
        bestStart = runStart % 16;
      }
    } else {
      run = 0;
    }
  }
  return {std::min(best, 16), bestStart};
}

}  // namespace detail

// Segment-test corner detection. A pixel is a corner iff at least
// params.arcLength contiguous circle pixels are all brighter than
// center + t or all darker than center - t. Results are sorted by
// descending score (ties by y then x) and capped at maxCorners.
template <class Scalar>
std::vector<Corner> fastDetect(const Image<Scalar>& img, const FastParams& params = {}) {
  if (!(params.threshold > 0.0) || !(params.threshold < 1.0))
    throw InvalidParameter("fastDetect: threshold must lie in (0, 1)");
  if (params.arcLength < 9 || params.arcLength > 16)
    throw InvalidParameter("fastDetect: arc length must lie in [9, 16]");

  const Index h = img.rows();
  const Index w = img.cols();
  std::vector<Corner> candidates;
  if (h < 7 || w < 7) return candidates;

  const double t = params.threshold;
  Image<double> scores;
  if (params.nonmax) {
    scores.resize(h, w);
    scores.setZero();
  }

  std::array<double, 16> ring;
  std::array<bool, 16> brighter;
  std::array<bool, 16> darker;
  for (Index y = 3; y < h - 3; ++y) {
    for (Index x = 3; x < w - 3; ++x) {
      const double center = img(y, x);
      // Compass prefilter: any qualifying arc of >= 9 pixels covers at
      // least two of the four cardinal circle pixels.
      int compassBright = 0, compassDark = 0;
      for (int k : {0, 4, 8, 12}) {
        const double v = img(y + kFastCircle[k][1], x + kFastCircle[k][0]);
        compassBright += v > center + t;
        compassDark += v < center - t;
      }
      if (compassBright < 2 && compassDark < 2) continue;

      for (int k = 0; k < 16; ++k) {
        ring[k] = img(y + kFastCircle[k][1], x + kFastCircle[k][0]);
        brighter[k] = ring[k] > center + t;
        darker[k] = ring[k] < center - t;
      }
      double score = 0.0;
      for (const auto& flags : {brighter, darker}) {
        const auto [len, start] = detail::longestCircularRun(flags);
        if (len < params.arcLength) continue;
        double s = 0.0;
        for (int k = 0; k < len; ++k)
          s += std::abs(ring[(start + k) % 16] - center) - t;
        score = std::max(score, s);
      }
      if (score <= 0.0) continue;
      candidates.push_back({static_cast<int>(x), static_cast<int>(y), score});
      if (params.nonmax) scores(y, x) = score;
    }
  }

  if (params.nonmax) {
    std::vector<Corner> kept;
    kept.reserve(candidates.size());
    for (const Corner& c : candidates) {
      bool maximal = true;
      for (int dy = -1; dy <= 1 && maximal; ++dy)
        for (int dx = -1; dx <= 1 && maximal; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const Index nx = c.x + dx;
          const Index ny = c.y + dy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          if (scores(ny, nx) >= c.score) maximal = false;
        }
      if (maximal) kept.push_back(c);
    }
    candidates.swap(kept);
  }

  std::sort(candidates.begin(), candidates.end(), [](const Corner& a, const Corner& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if (params.maxCorners > 0 && candidates.size() > static_cast<std::size_t>(params.maxCorners))
    candidates.resize(params.maxCorners);
  return candidates;
}

struct RefreshPolicy {
  int period = 50;      // re-detect every Nth iteration
  int minTracked = 20;  // also re-detect when tracking falls below this;
                        // 0 restores the pure periodic policy
};

// True on every period-th iteration (including iteration 0) or whenever the
// tracker has starved below the minimum corner count.
inline bool shouldRefresh(long iteration, int trackedCount, const RefreshPolicy& policy = {}) {
  if (iteration < 0) throw InvalidParameter("shouldRefresh: iteration must be >= 0");
  if (policy.period < 1) throw InvalidParameter("shouldRefresh: period must be >= 1");
  return iteration % policy.period == 0 || trackedCount < policy.minTracked;
}

}  // namespace flowguard
