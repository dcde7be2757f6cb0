#include "flowguard/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "flowguard/netpbm.hpp"

namespace flowguard {

namespace {

// std::mt19937 has a pinned sequence; scaling its output ourselves avoids
// the implementation-defined distributions.
double uniform01(std::mt19937& rng) { return rng() * (1.0 / 4294967296.0); }

double gaussian(std::mt19937& rng) {
  const double u1 = std::max(uniform01(rng), 1e-12);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

double depthAt(const SyntheticScene& scene, double z0, int t) {
  return z0 - t * scene.velocity.z();
}

// Splats one dot as a 2x2-pixel bright square with analytic box coverage,
// so the rendered pattern translates smoothly at subpixel scale.
void splatDot(ImageF& img, double u, double v) {
  const double x0 = u - 1.0, x1 = u + 1.0;
  const double y0 = v - 1.0, y1 = v + 1.0;
  const Index ixBegin = static_cast<Index>(std::floor(x0 - 0.5));
  const Index iyBegin = static_cast<Index>(std::floor(y0 - 0.5));
  for (Index iy = iyBegin; iy <= iyBegin + 3; ++iy) {
    if (iy < 0 || iy >= img.rows()) continue;
    const double oy = std::max(0.0, std::min(y1, iy + 0.5) - std::max(y0, iy - 0.5));
    if (oy <= 0.0) continue;
    for (Index ix = ixBegin; ix <= ixBegin + 3; ++ix) {
      if (ix < 0 || ix >= img.cols()) continue;
      const double ox = std::max(0.0, std::min(x1, ix + 0.5) - std::max(x0, ix - 0.5));
      if (ox <= 0.0) continue;
      const double cover = 0.25 * ox * oy;  // fraction of the 2x2 square
      img(iy, ix) = std::min(1.0f, img(iy, ix) + static_cast<float>(cover * 0.5));
    }
  }
}

std::vector<WorldDot> obstacleDots(const Obstacle& ob, int index) {
  std::mt19937 rng(ob.seed);
  std::vector<WorldDot> dots;
  dots.reserve(ob.dots);
  for (int i = 0; i < ob.dots; ++i) {
    const double x = ob.center.x() + (uniform01(rng) - 0.5) * ob.extent.x();
    const double y = ob.center.y() + (uniform01(rng) - 0.5) * ob.extent.y();
    dots.push_back({{x, y, ob.center.z()}, index});
  }
  return dots;
}

}  // namespace

void validateScene(const SyntheticScene& scene) {
  if (scene.width < 16 || scene.height < 16)
    throw InvalidParameter("scene: image size must be at least 16x16");
  if (!(scene.focal > 0.0)) throw InvalidParameter("scene: focal must be > 0");
  if (!(scene.velocity.z() > 0.0))
    throw InvalidParameter("scene: velocity[2] (Vz) must be > 0 (forward motion)");
  double maxZ = 0.0;
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    const Obstacle& ob = scene.obstacles[i];
    if (!(ob.center.z() > 0.0))
      throw InvalidParameter("scene: obstacle " + std::to_string(i) + " must start in front (Z0 > 0)");
    if (!(ob.extent.x() > 0.0) || !(ob.extent.y() > 0.0))
      throw InvalidParameter("scene: obstacle " + std::to_string(i) + " extent must be positive");
    if (ob.dots < 50)
      throw InvalidParameter("scene: obstacle " + std::to_string(i) +
                             " needs at least 50 texture dots");
    maxZ = std::max(maxZ, ob.center.z());
  }
  if (scene.backgroundDepth <= maxZ)
    throw InvalidParameter("scene: background depth must exceed every obstacle depth");
  if (scene.noiseSigma < 0.0) throw InvalidParameter("scene: noise sigma must be >= 0");
  if (scene.backgroundDots < 0) throw InvalidParameter("scene: background dot count must be >= 0");
}

std::vector<WorldDot> sceneDots(const SyntheticScene& scene) {
  std::vector<WorldDot> dots;
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    auto obDots = obstacleDots(scene.obstacles[i], static_cast<int>(i));
    dots.insert(dots.end(), obDots.begin(), obDots.end());
  }
  if (scene.backgroundDots > 0) {
    // Cover the field of view at the far plane as seen from the start pose.
    std::mt19937 rng(scene.seed ^ 0x9e3779b9u);
    const double halfW = 0.55 * scene.width * scene.backgroundDepth / scene.focal;
    const double halfH = 0.55 * scene.height * scene.backgroundDepth / scene.focal;
    for (int i = 0; i < scene.backgroundDots; ++i) {
      const double x = (uniform01(rng) * 2.0 - 1.0) * halfW;
      const double y = (uniform01(rng) * 2.0 - 1.0) * halfH;
      dots.push_back({{x, y, scene.backgroundDepth}, -1});
    }
  }
  return dots;
}

Eigen::Vector2d projectPoint(const SyntheticScene& scene, const Eigen::Vector3d& world, int t) {
  const double z = depthAt(scene, world.z(), t);
  if (z <= kMinDepth)
    throw SceneExpired("projectPoint: point reached the focal plane at frame " + std::to_string(t));
  return {scene.principal.x() + scene.focal * (world.x() - t * scene.velocity.x()) / z,
          scene.principal.y() + scene.focal * (world.y() - t * scene.velocity.y()) / z};
}

Eigen::Vector2d groundTruthFoe(const SyntheticScene& scene) {
  return {scene.principal.x() + scene.focal * scene.velocity.x() / scene.velocity.z(),
          scene.principal.y() + scene.focal * scene.velocity.y() / scene.velocity.z()};
}

double groundTruthTtc(const SyntheticScene& scene, int t, int obstacleIndex) {
  if (obstacleIndex < 0 || obstacleIndex >= static_cast<int>(scene.obstacles.size()))
    throw InvalidInput("groundTruthTtc: no obstacle " + std::to_string(obstacleIndex));
  const double z = depthAt(scene, scene.obstacles[obstacleIndex].center.z(), t);
  if (z <= kMinDepth)
    throw SceneExpired("groundTruthTtc: obstacle " + std::to_string(obstacleIndex) +
                       " expired before frame " + std::to_string(t));
  return z / scene.velocity.z();
}

bool sceneValidAt(const SyntheticScene& scene, int t) {
  for (const Obstacle& ob : scene.obstacles)
    if (depthAt(scene, ob.center.z(), t) <= kMinDepth) return false;
  return depthAt(scene, scene.backgroundDepth, t) > kMinDepth;
}

ImageF renderFrame(const SyntheticScene& scene, int t) {
  validateScene(scene);
  if (!sceneValidAt(scene, t))
    throw SceneExpired("renderFrame: camera passed through an obstacle by frame " +
                       std::to_string(t));

  ImageF img(scene.height, scene.width);
  img.setConstant(0.5f);

  const std::vector<WorldDot> dots = sceneDots(scene);

  // Painter's order: far obstacles first so nearer fills occlude them.
  // Stable so equal depths draw in declaration order.
  std::vector<int> order(scene.obstacles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scene.obstacles[a].center.z() > scene.obstacles[b].center.z();
  });

  // Background dots live behind everything.
  for (const WorldDot& d : dots)
    if (d.obstacle < 0) {
      const Eigen::Vector2d uv = projectPoint(scene, d.pos, t);
      splatDot(img, uv.x(), uv.y());
    }

  for (int idx : order) {
    const Obstacle& ob = scene.obstacles[idx];
    const Eigen::Vector3d c0(ob.center.x() - ob.extent.x() / 2, ob.center.y() - ob.extent.y() / 2,
                             ob.center.z());
    const Eigen::Vector3d c1(ob.center.x() + ob.extent.x() / 2, ob.center.y() + ob.extent.y() / 2,
                             ob.center.z());
    const Eigen::Vector2d p0 = projectPoint(scene, c0, t);
    const Eigen::Vector2d p1 = projectPoint(scene, c1, t);
    const Index xa = std::max<Index>(0, static_cast<Index>(std::ceil(p0.x())));
    const Index xb = std::min<Index>(scene.width - 1, static_cast<Index>(std::floor(p1.x())));
    const Index ya = std::max<Index>(0, static_cast<Index>(std::ceil(p0.y())));
    const Index yb = std::min<Index>(scene.height - 1, static_cast<Index>(std::floor(p1.y())));
    for (Index y = ya; y <= yb; ++y)
      for (Index x = xa; x <= xb; ++x) img(y, x) = 0.5f;

    for (const WorldDot& d : dots)
      if (d.obstacle == idx) {
        const Eigen::Vector2d uv = projectPoint(scene, d.pos, t);
        splatDot(img, uv.x(), uv.y());
      }
  }

  if (scene.noiseSigma > 0.0) {
    std::mt19937 rng(scene.seed ^ (0x85ebca6bu + static_cast<std::uint32_t>(t)));
    for (Index i = 0; i < img.size(); ++i)
      img.data()[i] = static_cast<float>(
          std::clamp(img.data()[i] + scene.noiseSigma * gaussian(rng), 0.0, 1.0));
  }
  return img;
}

namespace {

nlohmann::ordered_json sceneToJson(const SyntheticScene& scene) {
  nlohmann::ordered_json j;
  j["focal"] = scene.focal;
  j["principal"] = {scene.principal.x(), scene.principal.y()};
  j["size"] = {scene.width, scene.height};
  j["velocity"] = {scene.velocity.x(), scene.velocity.y(), scene.velocity.z()};
  j["background_depth"] = scene.backgroundDepth;
  j["background_dots"] = scene.backgroundDots;
  j["noise_sigma"] = scene.noiseSigma;
  j["seed"] = scene.seed;
  j["obstacles"] = nlohmann::ordered_json::array();
  for (const Obstacle& ob : scene.obstacles) {
    nlohmann::ordered_json o;
    o["center"] = {ob.center.x(), ob.center.y(), ob.center.z()};
    o["extent"] = {ob.extent.x(), ob.extent.y()};
    o["dots"] = ob.dots;
    o["seed"] = ob.seed;
    j["obstacles"].push_back(o);
  }
  return j;
}

}  // namespace

std::filesystem::path generateSequence(const SyntheticScene& scene, int nFrames,
                                       const std::filesystem::path& outDir) {
  validateScene(scene);
  if (nFrames < 1) throw InvalidParameter("generateSequence: need at least one frame");
  if (!sceneValidAt(scene, nFrames - 1))
    throw SceneExpired("generateSequence: scene expires before frame " +
                       std::to_string(nFrames - 1));

  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (!std::filesystem::is_directory(outDir))
    throw IoError("cannot create output directory " + outDir.string());

  nlohmann::ordered_json manifest;
  manifest["scene"] = sceneToJson(scene);
  manifest["frames"] = nlohmann::ordered_json::array();
  const Eigen::Vector2d foe = groundTruthFoe(scene);

  for (int t = 0; t < nFrames; ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05d.pgm", t);
    savePgm(renderFrame(scene, t), outDir / name);

    nlohmann::ordered_json rec;
    rec["index"] = t;
    rec["foe"] = {foe.x(), foe.y()};
    rec["obstacles"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
      const Obstacle& ob = scene.obstacles[i];
      const Eigen::Vector2d p0 = projectPoint(
          scene, {ob.center.x() - ob.extent.x() / 2, ob.center.y() - ob.extent.y() / 2, ob.center.z()}, t);
      const Eigen::Vector2d p1 = projectPoint(
          scene, {ob.center.x() + ob.extent.x() / 2, ob.center.y() + ob.extent.y() / 2, ob.center.z()}, t);
      nlohmann::ordered_json o;
      o["id"] = i;
      o["ttc_frames"] = groundTruthTtc(scene, t, static_cast<int>(i));
      o["bbox_px"] = {p0.x(), p0.y(), p1.x(), p1.y()};
      rec["obstacles"].push_back(o);
    }
    manifest["frames"].push_back(rec);
  }

  const std::filesystem::path manifestPath = outDir / "manifest.json";
  std::ofstream out(manifestPath);
  if (!out) throw IoError("cannot write " + manifestPath.string());
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("short write to " + manifestPath.string());
  return manifestPath;
}

namespace {

using nlohmann::json;

void rejectUnknown(const json& j, std::initializer_list<const char*> known,
                   const std::string& scope) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end())
      throw InvalidParameter("scene: unknown key \"" + scope + key + "\"");
  }
}

template <int N>
Eigen::Matrix<double, N, 1> vecField(const json& j, const char* key, const std::string& scope) {
  if (!j.contains(key))
    throw InvalidParameter("scene: missing required field \"" + scope + key + "\"");
  const json& arr = j.at(key);
  if (!arr.is_array() || arr.size() != N)
    throw InvalidParameter("scene: field \"" + scope + key + "\" must be an array of " +
                           std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    if (!arr[i].is_number())
      throw InvalidParameter("scene: field \"" + scope + key + "\" must be numeric");
    out[i] = arr[i].get<double>();
  }
  return out;
}

}  // namespace

SyntheticScene sceneFromJsonText(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidParameter(std::string("scene: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidParameter("scene: top level must be an object");
  rejectUnknown(j,
                {"focal", "principal", "size", "velocity", "background_depth", "background_dots",
                 "noise_sigma", "seed", "obstacles"},
                "");

  SyntheticScene scene;
  const Eigen::Vector3d vel = vecField<3>(j, "velocity", "");
  scene.velocity = vel;
  if (!(vel.z() > 0.0))
    throw InvalidParameter("scene: field \"velocity\" needs Vz > 0 (third component)");
  if (j.contains("focal")) scene.focal = j.at("focal").get<double>();
  if (j.contains("principal")) scene.principal = vecField<2>(j, "principal", "");
  if (j.contains("size")) {
    const auto size = vecField<2>(j, "size", "");
    scene.width = static_cast<Index>(size.x());
    scene.height = static_cast<Index>(size.y());
  }
  if (j.contains("background_depth")) scene.backgroundDepth = j.at("background_depth").get<double>();
  if (j.contains("background_dots")) scene.backgroundDots = j.at("background_dots").get<int>();
  if (j.contains("noise_sigma")) scene.noiseSigma = j.at("noise_sigma").get<double>();
  if (j.contains("seed")) scene.seed = j.at("seed").get<std::uint32_t>();
  if (j.contains("obstacles")) {
    if (!j.at("obstacles").is_array())
      throw InvalidParameter("scene: field \"obstacles\" must be an array");
    int k = 0;
    for (const json& o : j.at("obstacles")) {
      const std::string scope = "obstacles[" + std::to_string(k) + "].";
      rejectUnknown(o, {"center", "extent", "dots", "seed"}, scope);
      Obstacle ob;
      ob.center = vecField<3>(o, "center", scope);
      ob.extent = vecField<2>(o, "extent", scope);
      if (o.contains("dots")) ob.dots = o.at("dots").get<int>();
      if (o.contains("seed")) ob.seed = o.at("seed").get<std::uint32_t>();
      scene.obstacles.push_back(ob);
      ++k;
    }
  }
  validateScene(scene);
  return scene;
}

}  // namespace flowguard
