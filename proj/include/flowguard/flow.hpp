#pragma once

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <vector>

#include "flowguard/image.hpp"
#include "flowguard/imageops.hpp"

namespace flowguard {

// One sparse motion sample: previous position p and per-frame displacement v.
// Vectors below the motion floor are filtered out before FOE/TTC use.
struct FlowVector {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
};

// Per-point tracking outcome. found is false when the iteration diverged,
// the point left the image, or the residual exceeded the acceptance bound.
struct TrackResult {
  bool found = false;
  Eigen::Vector2d next = Eigen::Vector2d::Zero();
  double residual = 0.0;  // mean absolute window difference at the solution
};

struct LkParams {
  int window = 10;            // half-size; the full window is (2w+1)^2
  int maxIter = 30;
  double eps = 0.01;          // stop once the update is below this many pixels
  double maxResidual = 0.08;  // reject matches with larger mean |difference|
  double minEigenvalue = 1e-6;  // structure-tensor singularity floor
};

namespace detail {

template <class Scalar>
struct LevelGradients {
  Image<Scalar> gx;
  Image<Scalar> gy;
};

// Central-difference spatial gradients, clamp-to-edge.
template <class Scalar>
LevelGradients<Scalar> centralGradients(const Image<Scalar>& img) {
  const Index h = img.rows();
  const Index w = img.cols();
  LevelGradients<Scalar> g{Image<Scalar>(h, w), Image<Scalar>(h, w)};
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      g.gx(y, x) = static_cast<Scalar>(
          0.5 * (pixelClamped(img, x + 1, y) - pixelClamped(img, x - 1, y)));
      g.gy(y, x) = static_cast<Scalar>(
          0.5 * (pixelClamped(img, x, y + 1) - pixelClamped(img, x, y - 1)));
    }
  }
  return g;
}

}  // namespace detail

// Pyramidal Lucas-Kanade. For each point the 2x2 normal equations
// G d = e are iterated over the window, coarse to fine, with the guess
// doubled between levels and bilinear sampling for subpixel reads.
// Per-point failure is reported through found=false, never an exception.
template <class Scalar>
std::vector<TrackResult> lucasKanadeTrack(const ImagePyramid<Scalar>& prev,
                                          const ImagePyramid<Scalar>& next,
                                          std::span<const Eigen::Vector2d> points,
                                          const LkParams& params = {}) {
  if (prev.levelCount() == 0 || prev.levelCount() != next.levelCount())
    throw InvalidInput("lucasKanadeTrack: pyramids must have equal, nonzero level counts");
  for (int l = 0; l < prev.levelCount(); ++l) {
    if (prev.levels[l].rows() != next.levels[l].rows() ||
        prev.levels[l].cols() != next.levels[l].cols())
      throw InvalidInput("lucasKanadeTrack: pyramid level dimensions differ");
  }
  if (params.window < 2) throw InvalidParameter("lucasKanadeTrack: window must be >= 2");

  const int nLevels = prev.levelCount();
  std::vector<detail::LevelGradients<Scalar>> grads;
  grads.reserve(nLevels);
  for (int l = 0; l < nLevels; ++l) grads.push_back(detail::centralGradients(prev.levels[l]));

  const Index width = prev.width();
  const Index height = prev.height();
  const double divergedBound = 2.0 * (width + height);
  const int win = params.window;
  const int winArea = (2 * win + 1) * (2 * win + 1);
  std::vector<double> wGx(winArea), wGy(winArea), wPrev(winArea);

  std::vector<TrackResult> results(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector2d& pt = points[i];
    Eigen::Vector2d disp = Eigen::Vector2d::Zero();
    bool diverged = false;
    bool lostAtBase = false;
    bool baseConverged = false;

    for (int level = nLevels - 1; level >= 0 && !diverged; --level) {
      const double scale = static_cast<double>(1 << level);
      const Eigen::Vector2d pl = pt / scale;
      const Image<Scalar>& prevImg = prev.levels[level];
      const Image<Scalar>& nextImg = next.levels[level];
      const auto& grad = grads[level];

      // Clamp-to-edge stripes under a window that hangs off the raster can
      // make the iteration slide. At the base level such a window cannot
      // anchor a trustworthy match, so the point is dropped; coarse levels
      // still run and rely on the convergence check below to discard drift.
      if (level == 0) {
        const bool windowInside = pl.x() - win >= 0.0 && pl.x() + win <= prevImg.cols() - 1 &&
                                  pl.y() - win >= 0.0 && pl.y() + win <= prevImg.rows() - 1;
        if (!windowInside) {
          lostAtBase = true;
          continue;
        }
      }

      double gxx = 0.0, gxy = 0.0, gyy = 0.0;
      int k = 0;
      for (int wy = -win; wy <= win; ++wy) {
        for (int wx = -win; wx <= win; ++wx, ++k) {
          const double sx = pl.x() + wx;
          const double sy = pl.y() + wy;
          const double gx = sampleBilinear(grad.gx, sx, sy);
          const double gy = sampleBilinear(grad.gy, sx, sy);
          wGx[k] = gx;
          wGy[k] = gy;
          wPrev[k] = sampleBilinear(prevImg, sx, sy);
          gxx += gx * gx;
          gxy += gx * gy;
          gyy += gy * gy;
        }
      }
      const double trace = gxx + gyy;
      const double det = gxx * gyy - gxy * gxy;
      const double minEig = 0.5 * (trace - std::sqrt(std::max(0.0, trace * trace - 4.0 * det)));
      if (minEig < params.minEigenvalue || det <= 0.0) {
        if (level == 0) {
          lostAtBase = true;
        } else {
          disp *= 2.0;  // carry the coarse guess unrefined
        }
        continue;
      }
      const double invDet = 1.0 / det;

      const Eigen::Vector2d levelEntry = disp;
      bool converged = false;
      for (int iter = 0; iter < params.maxIter; ++iter) {
        double ex = 0.0, ey = 0.0;
        k = 0;
        for (int wy = -win; wy <= win; ++wy) {
          for (int wx = -win; wx <= win; ++wx, ++k) {
            const double diff = wPrev[k] - sampleBilinear(nextImg, pl.x() + wx + disp.x(),
                                                          pl.y() + wy + disp.y());
            ex += diff * wGx[k];
            ey += diff * wGy[k];
          }
        }
        const double dx = invDet * (gyy * ex - gxy * ey);
        const double dy = invDet * (gxx * ey - gxy * ex);
        if (!std::isfinite(dx) || !std::isfinite(dy)) {
          diverged = true;
          break;
        }
        disp.x() += dx;
        disp.y() += dy;
        if (disp.norm() > divergedBound) {
          diverged = true;
          break;
        }
        if (std::sqrt(dx * dx + dy * dy) < params.eps) {
          converged = true;
          break;
        }
      }
      // A level that never settled is typically a border-clamped window
      // sliding along replicated stripes. Coarse levels then contribute
      // nothing (the incoming guess is more trustworthy than the drift);
      // an unsettled base level fails the point outright.
      if (level > 0) {
        if (!converged) disp = levelEntry;
        disp *= 2.0;
      } else {
        baseConverged = converged;
      }
    }

    TrackResult& res = results[i];
    res.next = pt + disp;
    if (diverged || lostAtBase || !baseConverged) continue;
    if (res.next.x() < 0.0 || res.next.x() > width - 1 || res.next.y() < 0.0 ||
        res.next.y() > height - 1)
      continue;

    // Final fit quality on the base level.
    const Image<Scalar>& prevImg = prev.levels[0];
    const Image<Scalar>& nextImg = next.levels[0];
    double sumAbs = 0.0;
    for (int wy = -win; wy <= win; ++wy) {
      for (int wx = -win; wx <= win; ++wx) {
        const double a = sampleBilinear(prevImg, pt.x() + wx, pt.y() + wy);
        const double b = sampleBilinear(nextImg, res.next.x() + wx, res.next.y() + wy);
        sumAbs += std::abs(a - b);
      }
    }
    res.residual = sumAbs / winArea;
    res.found = res.residual <= params.maxResidual;
  }
  return results;
}

// Pairs each tracked point with its displacement, keeping only found points
// whose squared displacement reaches the motion floor.
inline std::vector<FlowVector> makeFlowVectors(std::span<const Eigen::Vector2d> points,
                                               std::span<const TrackResult> track,
                                               double minFlowSq = 0.01) {
  if (points.size() != track.size())
    throw InvalidInput("makeFlowVectors: point and track counts differ");
  std::vector<FlowVector> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!track[i].found) continue;
    const Eigen::Vector2d v = track[i].next - points[i];
    if (v.squaredNorm() < minFlowSq) continue;
    out.push_back({points[i], v});
  }
  return out;
}

// Arrowhead endpoint for flow annotation, kept exactly as the drawing code
// defines it: angle = atan2(dx, dy) and a 3.14/180 additive term. Used only
// for overlays; no estimation consumes this geometry.
inline Eigen::Vector2d arrowEndpoint(double x1, double y1, double x2, double y2, double len) {
  if (x1 == x2 && y1 == y2)
    throw InvalidInput("arrowEndpoint: motion must be nonzero");
  const double angle = std::atan2(x2 - x1, y2 - y1);
  return {x2 + len * std::cos(angle + 3.14 / 180.0),
          y2 + len * std::sin(angle + 3.14 / 180.0)};
}

}  // namespace flowguard
