#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "flowguard/errors.hpp"
#include "flowguard/flow.hpp"

namespace flowguard {

// Stacked constraints "the FOE lies on every flow line": for a flow vector
// with previous point (x, y) and displacement (u, v), row i is (v, -u) and
// b_i = x*v - y*u, so A*foe = b holds exactly for a clean radial field.
struct FoeSystem {
  Eigen::Matrix<double, Eigen::Dynamic, 2> A;
  Eigen::VectorXd b;
};

struct FocusOfExpansion {
  Eigen::Vector2d foe = Eigen::Vector2d::Zero();
  double residualRms = 0.0;  // ||A*foe - b|| / sqrt(N), pixels
  int nVectors = 0;
};

inline FoeSystem buildFoeSystem(std::span<const FlowVector> vectors) {
  if (vectors.size() < 2)
    throw InsufficientData("buildFoeSystem: at least two flow vectors required, got " +
                           std::to_string(vectors.size()));
  FoeSystem sys;
  const Eigen::Index n = static_cast<Eigen::Index>(vectors.size());
  sys.A.resize(n, 2);
  sys.b.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = vectors[i].p.x();
    const double y = vectors[i].p.y();
    const double u = vectors[i].v.x();
    const double v = vectors[i].v.y();
    sys.A(i, 0) = v;
    sys.A(i, 1) = -u;
    sys.b(i) = x * v - y * u;
  }
  return sys;
}

// Least-squares FOE via QR factorization of A. Never forms (A^T A)^-1;
// equivalent to the normal-equations solution in exact arithmetic.
inline FocusOfExpansion solveFoe(const FoeSystem& system) {
  const Eigen::Index n = system.A.rows();
  if (n < 2 || system.b.size() != n)
    throw InsufficientData("solveFoe: system must stack at least two vectors");
  Eigen::ColPivHouseholderQR<Eigen::Matrix<double, Eigen::Dynamic, 2>> qr(system.A);
  if (qr.rank() < 2)
    throw DegenerateGeometry("solveFoe: flow directions are parallel, FOE is not unique");
  FocusOfExpansion out;
  out.foe = qr.solve(system.b);
  out.residualRms = (system.A * out.foe - system.b).norm() / std::sqrt(static_cast<double>(n));
  out.nVectors = static_cast<int>(n);
  return out;
}

// Time to collision of one flow sample, in frames: image distance to the
// FOE over flow magnitude per frame.
inline double ttcOfVector(const Eigen::Vector2d& p, const Eigen::Vector2d& v,
                          const Eigen::Vector2d& foe) {
  const double speedSq = v.squaredNorm();
  if (!(speedSq > 0.0))
    throw DegenerateGeometry("ttcOfVector: zero displacement has no collision time");
  return std::sqrt((p - foe).squaredNorm() / speedSq);
}

// 16x16 accumulation of per-vector TTCs over the image plane. Cells without
// samples keep a NaN mean and are excluded from every downstream sum.
struct TtcGrid {
  static constexpr int kCells = 16;

  Eigen::Matrix<double, kCells, kCells> sums = Eigen::Matrix<double, kCells, kCells>::Zero();
  Eigen::Matrix<int, kCells, kCells> counts = Eigen::Matrix<int, kCells, kCells>::Zero();
  Eigen::Matrix<double, kCells, kCells> means =
      Eigen::Matrix<double, kCells, kCells>::Constant(std::numeric_limits<double>::quiet_NaN());

  int totalCount() const { return counts.sum(); }
};

namespace detail {

// Nearest grid-center index along one axis; centers sit at (c+0.5)*cellSize.
// A point exactly on a cell boundary is equidistant to two centers and goes
// to the smaller index.
inline int nearestCell(double coord, double cellSize) {
  int c = static_cast<int>(std::floor(coord / cellSize));
  if (c >= 1 && coord == c * cellSize) --c;
  return std::clamp(c, 0, TtcGrid::kCells - 1);
}

}  // namespace detail

// Each TTC is added at the grid point nearest its vector's previous
// position (ties toward the smaller row, then smaller column).
inline TtcGrid accumulateGrid(std::span<const FlowVector> vectors, std::span<const double> ttcs,
                              Index width, Index height) {
  if (vectors.size() != ttcs.size())
    throw InvalidInput("accumulateGrid: vector and TTC counts differ");
  if (width < TtcGrid::kCells || height < TtcGrid::kCells)
    throw InvalidInput("accumulateGrid: image must be at least 16x16");
  TtcGrid grid;
  const double cellW = static_cast<double>(width) / TtcGrid::kCells;
  const double cellH = static_cast<double>(height) / TtcGrid::kCells;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const int row = detail::nearestCell(vectors[i].p.y(), cellH);
    const int col = detail::nearestCell(vectors[i].p.x(), cellW);
    grid.sums(row, col) += ttcs[i];
    grid.counts(row, col) += 1;
  }
  return grid;
}

// Fills the per-cell averages; cells with no samples stay NaN.
inline TtcGrid gridMeans(TtcGrid grid) {
  for (int r = 0; r < TtcGrid::kCells; ++r)
    for (int c = 0; c < TtcGrid::kCells; ++c)
      grid.means(r, c) = grid.counts(r, c) > 0
                             ? grid.sums(r, c) / grid.counts(r, c)
                             : std::numeric_limits<double>::quiet_NaN();
  return grid;
}

}  // namespace flowguard
