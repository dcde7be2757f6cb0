#include "flowguard/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace flowguard {

namespace {

using nlohmann::json;

void rejectUnknown(const json& j, std::initializer_list<const char*> known,
                   const std::string& scope) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end())
      throw InvalidParameter("config: unknown key \"" + scope + key + "\"");
  }
}

template <class T>
void readField(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidParameter(std::string("config: key \"") + key + "\" has the wrong type");
  }
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(fast.threshold > 0.0) || !(fast.threshold < 1.0))
    throw InvalidParameter("config: fast.threshold must lie in (0, 1)");
  if (fast.arcLength < 9 || fast.arcLength > 16)
    throw InvalidParameter("config: fast.arc_length must lie in [9, 16]");
  if (fast.maxCorners < 1) throw InvalidParameter("config: fast.max_corners must be >= 1");
  if (refresh.period < 1) throw InvalidParameter("config: refresh.period must be >= 1");
  if (refresh.minTracked < 0) throw InvalidParameter("config: refresh.min_tracked must be >= 0");
  if (lk.window < 2) throw InvalidParameter("config: lk.window must be >= 2");
  if (lkLevels < 1) throw InvalidParameter("config: lk.levels must be >= 1");
  if (lk.maxIter < 1) throw InvalidParameter("config: lk.max_iter must be >= 1");
  if (!(lk.eps > 0.0)) throw InvalidParameter("config: lk.eps must be > 0");
  if (!(lk.maxResidual > 0.0)) throw InvalidParameter("config: lk.max_residual must be > 0");
  if (!(minFlowSq > 0.0)) throw InvalidParameter("config: min_flow_sq must be > 0");
  if (!(threshold > 0.0) || threshold > 1.0)
    throw InvalidParameter("config: threshold must lie in (0, 1]");
  if (!(cannyLow > 0.0) || !(cannyLow < cannyHigh))
    throw InvalidParameter("config: canny thresholds must satisfy 0 < low < high");
  if (!(cannySigma > 0.0)) throw InvalidParameter("config: canny.sigma must be > 0");
  if (fps && !(*fps > 0.0)) throw InvalidParameter("config: fps must be > 0");
}

PipelineConfig configFromJsonText(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidParameter(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidParameter("config: top level must be an object");
  rejectUnknown(j, {"fast", "refresh", "lk", "canny", "min_flow_sq", "balance_source",
                    "threshold", "fps"},
                "");

  PipelineConfig cfg;
  if (j.contains("fast")) {
    const json& f = j.at("fast");
    rejectUnknown(f, {"threshold", "arc_length", "max_corners", "nonmax"}, "fast.");
    readField(f, "threshold", cfg.fast.threshold);
    readField(f, "arc_length", cfg.fast.arcLength);
    readField(f, "max_corners", cfg.fast.maxCorners);
    readField(f, "nonmax", cfg.fast.nonmax);
  }
  if (j.contains("refresh")) {
    const json& r = j.at("refresh");
    rejectUnknown(r, {"period", "min_tracked"}, "refresh.");
    readField(r, "period", cfg.refresh.period);
    readField(r, "min_tracked", cfg.refresh.minTracked);
  }
  if (j.contains("lk")) {
    const json& l = j.at("lk");
    rejectUnknown(l, {"window", "levels", "max_iter", "eps", "max_residual"}, "lk.");
    readField(l, "window", cfg.lk.window);
    readField(l, "levels", cfg.lkLevels);
    readField(l, "max_iter", cfg.lk.maxIter);
    readField(l, "eps", cfg.lk.eps);
    readField(l, "max_residual", cfg.lk.maxResidual);
  }
  if (j.contains("canny")) {
    const json& c = j.at("canny");
    rejectUnknown(c, {"low", "high", "sigma"}, "canny.");
    readField(c, "low", cfg.cannyLow);
    readField(c, "high", cfg.cannyHigh);
    readField(c, "sigma", cfg.cannySigma);
  }
  readField(j, "min_flow_sq", cfg.minFlowSq);
  if (j.contains("balance_source")) {
    const std::string src = j.at("balance_source").get<std::string>();
    if (src == "mean") {
      cfg.balanceSource = BalanceSource::Mean;
    } else if (src == "raw") {
      cfg.balanceSource = BalanceSource::Raw;
    } else {
      throw InvalidParameter("config: balance_source must be \"mean\" or \"raw\"");
    }
  }
  readField(j, "threshold", cfg.threshold);
  if (j.contains("fps")) {
    double fps = 0.0;
    readField(j, "fps", fps);
    cfg.fps = fps;
  }
  cfg.validate();
  return cfg;
}

PipelineConfig loadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return configFromJsonText(buf.str());
}

}  // namespace flowguard
