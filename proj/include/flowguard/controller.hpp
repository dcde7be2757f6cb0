#pragma once

#include <cmath>
#include <span>
#include <string_view>

#include "flowguard/foe_ttc.hpp"

namespace flowguard {

enum class Decision { Forward, TurnLeft, TurnRight };

inline std::string_view decisionName(Decision d) {
  switch (d) {
    case Decision::TurnLeft: return "turn_left";
    case Decision::TurnRight: return "turn_right";
    default: return "forward";
  }
}

// Left/right collision-time budget and the steering decision derived from
// it. delta stays in [-1, 1] whenever any TTC mass is present.
struct BalanceReading {
  double sumLeft = 0.0;
  double sumRight = 0.0;
  double delta = 0.0;
  Decision decision = Decision::Forward;
};

// Sums the defined cell means per image half: columns 0..7 left, 8..15
// right. Each half accumulates from the center column outward so a mirrored
// grid produces exactly swapped sums.
inline std::pair<double, double> balanceSums(
    const Eigen::Matrix<double, TtcGrid::kCells, TtcGrid::kCells>& means) {
  constexpr int kHalf = TtcGrid::kCells / 2;
  double left = 0.0, right = 0.0;
  for (int r = 0; r < TtcGrid::kCells; ++r) {
    for (int k = 0; k < kHalf; ++k) {
      const double ml = means(r, kHalf - 1 - k);
      const double mr = means(r, kHalf + k);
      if (std::isfinite(ml)) left += std::abs(ml);
      if (std::isfinite(mr)) right += std::abs(mr);
    }
  }
  return {left, right};
}

// Alternative balance source: raw per-vector TTCs split at the vertical
// midline instead of cell means.
inline std::pair<double, double> balanceSumsRaw(std::span<const FlowVector> vectors,
                                                std::span<const double> ttcs, Index width) {
  if (vectors.size() != ttcs.size())
    throw InvalidInput("balanceSumsRaw: vector and TTC counts differ");
  const double mid = width / 2.0;
  double left = 0.0, right = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    (vectors[i].p.x() < mid ? left : right) += std::abs(ttcs[i]);
  }
  return {left, right};
}

// Normalized left/right difference. No TTC mass on either side means no
// evidence, which reads as zero.
inline double computeDelta(double sumLeft, double sumRight) {
  const double total = sumLeft + sumRight;
  if (total == 0.0) return 0.0;
  return (sumLeft - sumRight) / total;
}

// Steer away from the side that is closer to collision (the smaller TTC
// sum) once the imbalance exceeds the threshold.
inline Decision decide(double sumLeft, double sumRight, double delta, double threshold = 0.5) {
  if (std::abs(delta) <= threshold) return Decision::Forward;
  return sumLeft < sumRight ? Decision::TurnRight : Decision::TurnLeft;
}

inline BalanceReading readBalance(
    const Eigen::Matrix<double, TtcGrid::kCells, TtcGrid::kCells>& means,
    double threshold = 0.5) {
  BalanceReading reading;
  std::tie(reading.sumLeft, reading.sumRight) = balanceSums(means);
  reading.delta = computeDelta(reading.sumLeft, reading.sumRight);
  reading.decision = decide(reading.sumLeft, reading.sumRight, reading.delta, threshold);
  return reading;
}

}  // namespace flowguard
