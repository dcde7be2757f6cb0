#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowguard/image.hpp"

namespace flowguard {

// A fronto-parallel textured rectangle at fixed world depth. Every point of
// it shares one closed-form time to collision, which is what makes the
// scene a usable oracle.
struct Obstacle {
  Eigen::Vector3d center = {0.0, 0.0, 100.0};  // (X, Y, Z0), world units
  Eigen::Vector2d extent = {20.0, 20.0};       // (W, H), world units
  int dots = 80;                               // random-dot texture density, >= 50
  std::uint32_t seed = 1;
};

// Pinhole camera flying forward through dot-textured rectangles. All
// randomness is derived from the stored seeds with a fixed generator, so a
// scene renders byte-identically everywhere.
struct SyntheticScene {
  double focal = 120.0;                       // pixels
  Eigen::Vector2d principal = {64.0, 64.0};   // (cx, cy), pixels
  Index width = 128;
  Index height = 128;
  Eigen::Vector3d velocity = {0.0, 0.0, 1.0};  // world units per frame, Vz > 0
  double backgroundDepth = 400.0;              // far plane Z_bg
  int backgroundDots = 0;                      // optional texture on the far plane
  double noiseSigma = 0.0;                     // optional Gaussian pixel noise
  std::uint32_t seed = 7;
  std::vector<Obstacle> obstacles;
};

// One textured point with its owner (-1 marks the background plane).
struct WorldDot {
  Eigen::Vector3d pos;
  int obstacle;
};

inline constexpr double kMinDepth = 0.1;  // focal-plane epsilon, world units

// Throws InvalidParameter describing the first violated scene invariant.
void validateScene(const SyntheticScene& scene);

// Deterministic dot layout for the whole scene (obstacles then background).
std::vector<WorldDot> sceneDots(const SyntheticScene& scene);

// Perspective projection of a world point at frame t.
// Throws SceneExpired once the point's depth falls to the focal plane.
Eigen::Vector2d projectPoint(const SyntheticScene& scene, const Eigen::Vector3d& world, int t);

// Image point the flow field diverges from; depends only on velocity and
// intrinsics.
Eigen::Vector2d groundTruthFoe(const SyntheticScene& scene);

// Frames until contact with the given obstacle: (Z0 - t*Vz) / Vz.
double groundTruthTtc(const SyntheticScene& scene, int t, int obstacleIndex);

// True while every obstacle (and the far plane) stays in front of the
// camera at frame t.
bool sceneValidAt(const SyntheticScene& scene, int t);

ImageF renderFrame(const SyntheticScene& scene, int t);

// Writes frame_00000.pgm .. plus manifest.json with the scene parameters
// and per-frame ground truth. Returns the manifest path.
std::filesystem::path generateSequence(const SyntheticScene& scene, int nFrames,
                                       const std::filesystem::path& outDir);

// Scene description from the JSON text used by the CLI `synth` subcommand.
// Unknown or missing required fields raise InvalidParameter naming the key.
SyntheticScene sceneFromJsonText(const std::string& text);

}  // namespace flowguard
