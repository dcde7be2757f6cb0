#include "flowguard/pipeline.hpp"

#include <chrono>
#include <cmath>

#include <json.hpp>

#include "flowguard/log.hpp"

namespace flowguard {

namespace {

using Clock = std::chrono::steady_clock;

double msSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

nlohmann::ordered_json gridToJson(const Eigen::Matrix<double, 16, 16>& m) {
  auto rows = nlohmann::ordered_json::array();
  for (int r = 0; r < 16; ++r) {
    auto row = nlohmann::ordered_json::array();
    for (int c = 0; c < 16; ++c) {
      if (std::isfinite(m(r, c))) {
        row.push_back(m(r, c));
      } else {
        row.push_back(nullptr);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string recordToJsonLine(const FrameRecord& rec, std::optional<double> fps) {
  nlohmann::ordered_json j;
  j["frame"] = rec.frame;
  j["corners"] = rec.corners;
  j["flow_count"] = rec.flowCount;
  if (rec.foe) {
    j["foe"] = {rec.foe->x(), rec.foe->y()};
    j["residual_rms"] = rec.residualRms;
  } else {
    j["foe"] = nullptr;
    j["foe_reason"] = rec.foeReason;
    j["residual_rms"] = nullptr;
  }
  j["ttc_sums"] = gridToJson(rec.grid.sums);
  {
    auto rows = nlohmann::ordered_json::array();
    for (int r = 0; r < 16; ++r) {
      auto row = nlohmann::ordered_json::array();
      for (int c = 0; c < 16; ++c) row.push_back(rec.grid.counts(r, c));
      rows.push_back(std::move(row));
    }
    j["ttc_counts"] = rows;
  }
  j["ttc_means"] = gridToJson(rec.grid.means);
  if (fps) j["ttc_means_s"] = gridToJson((rec.grid.means / *fps).eval());
  j["sum_left"] = rec.sumLeft;
  j["sum_right"] = rec.sumRight;
  j["delta"] = rec.delta;
  j["decision"] = std::string(decisionName(rec.decision));
  {
    auto flows = nlohmann::ordered_json::array();
    for (const FlowVector& f : rec.flows)
      flows.push_back({f.p.x(), f.p.y(), f.v.x(), f.v.y()});
    j["flow_vectors"] = std::move(flows);
  }
  if (rec.timings) {
    nlohmann::ordered_json t;
    t["detect"] = rec.timings->detect;
    t["flow"] = rec.timings->flow;
    t["foe"] = rec.timings->foe;
    t["ttc"] = rec.timings->ttc;
    t["balance"] = rec.timings->balance;
    t["decision"] = rec.timings->decision;
    j["timing_ms"] = std::move(t);
  }
  return j.dump();
}

FrameRecord recordFromJsonLine(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("record: invalid JSON line: ") + e.what());
  }
  FrameRecord rec;
  try {
    rec.frame = j.at("frame").get<long>();
    rec.corners = j.at("corners").get<int>();
    rec.flowCount = j.at("flow_count").get<int>();
    if (!j.at("foe").is_null()) {
      rec.foe = Eigen::Vector2d(j.at("foe")[0].get<double>(), j.at("foe")[1].get<double>());
      rec.residualRms = j.at("residual_rms").get<double>();
    } else if (j.contains("foe_reason")) {
      rec.foeReason = j.at("foe_reason").get<std::string>();
    }
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 16; ++c) {
        const auto& sums = j.at("ttc_sums")[r][c];
        rec.grid.sums(r, c) = sums.is_null() ? 0.0 : sums.get<double>();
        rec.grid.counts(r, c) = j.at("ttc_counts")[r][c].get<int>();
        const auto& mean = j.at("ttc_means")[r][c];
        rec.grid.means(r, c) =
            mean.is_null() ? std::numeric_limits<double>::quiet_NaN() : mean.get<double>();
      }
    }
    rec.sumLeft = j.at("sum_left").get<double>();
    rec.sumRight = j.at("sum_right").get<double>();
    rec.delta = j.at("delta").get<double>();
    const std::string d = j.at("decision").get<std::string>();
    rec.decision = d == "turn_left"    ? Decision::TurnLeft
                   : d == "turn_right" ? Decision::TurnRight
                                       : Decision::Forward;
    for (const auto& f : j.at("flow_vectors")) {
      FlowVector v;
      v.p = {f[0].get<double>(), f[1].get<double>()};
      v.v = {f[2].get<double>(), f[3].get<double>()};
      rec.flows.push_back(v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("record: missing or malformed field: ") + e.what());
  }
  return rec;
}

PipelineRunner::PipelineRunner(const PipelineConfig& cfg, bool collectTimings)
    : cfg_(cfg), collectTimings_(collectTimings) {
  cfg_.validate();
}

void PipelineRunner::start(const ImageF& firstFrame) {
  prevPyramid_ = buildPyramid(firstFrame, cfg_.lkLevels);
  points_.clear();
  pairIndex_ = 0;
  started_ = true;
}

FrameRecord PipelineRunner::advance(const ImageF& nextFrame, long frameIndex) {
  if (!started_) throw InvalidInput("PipelineRunner: advance() before start()");
  if (nextFrame.rows() != prevPyramid_.height() || nextFrame.cols() != prevPyramid_.width())
    throw InvalidInput("PipelineRunner: frame size changed mid-sequence");

  FrameRecord rec;
  rec.frame = frameIndex;
  StageTimings timings;

  auto t0 = Clock::now();
  if (shouldRefresh(pairIndex_, static_cast<int>(points_.size()), cfg_.refresh)) {
    const std::vector<Corner> corners = fastDetect(prevPyramid_.levels[0], cfg_.fast);
    points_.clear();
    points_.reserve(corners.size());
    for (const Corner& c : corners) points_.emplace_back(c.x, c.y);
    FG_LOG_DEBUG("frame " << frameIndex << ": refreshed corners, " << points_.size() << " found");
  }
  timings.detect = msSince(t0);
  rec.corners = static_cast<int>(points_.size());

  t0 = Clock::now();
  const ImagePyramid<float> nextPyramid = buildPyramid(nextFrame, cfg_.lkLevels);
  const std::vector<TrackResult> track =
      lucasKanadeTrack<float>(prevPyramid_, nextPyramid, points_, cfg_.lk);
  rec.flows = makeFlowVectors(points_, track, cfg_.minFlowSq);
  rec.flowCount = static_cast<int>(rec.flows.size());
  timings.flow = msSince(t0);

  t0 = Clock::now();
  if (rec.flows.size() < 2) {
    rec.foeReason = "insufficient vectors";
  } else {
    try {
      const FocusOfExpansion foe = solveFoe(buildFoeSystem(rec.flows));
      rec.foe = foe.foe;
      rec.residualRms = foe.residualRms;
    } catch (const DegenerateGeometry&) {
      rec.foeReason = "degenerate geometry";
    }
  }
  timings.foe = msSince(t0);

  t0 = Clock::now();
  std::vector<double> ttcs;
  if (rec.foe) {
    ttcs.reserve(rec.flows.size());
    for (const FlowVector& f : rec.flows) ttcs.push_back(ttcOfVector(f.p, f.v, *rec.foe));
    rec.grid = gridMeans(
        accumulateGrid(rec.flows, ttcs, prevPyramid_.width(), prevPyramid_.height()));
  } else {
    rec.grid = gridMeans(TtcGrid{});
    FG_LOG_INFO("frame " << frameIndex << ": no FOE (" << rec.foeReason
                         << "), falling back to forward");
  }
  timings.ttc = msSince(t0);

  t0 = Clock::now();
  if (cfg_.balanceSource == BalanceSource::Raw && rec.foe) {
    std::tie(rec.sumLeft, rec.sumRight) = balanceSumsRaw(rec.flows, ttcs, prevPyramid_.width());
  } else {
    std::tie(rec.sumLeft, rec.sumRight) = balanceSums(rec.grid.means);
  }
  rec.delta = computeDelta(rec.sumLeft, rec.sumRight);
  timings.balance = msSince(t0);

  t0 = Clock::now();
  rec.decision = decide(rec.sumLeft, rec.sumRight, rec.delta, cfg_.threshold);
  timings.decision = msSince(t0);

  if (collectTimings_) rec.timings = timings;

  // Surviving tracks seed the next pair regardless of the motion floor.
  std::vector<Eigen::Vector2d> carried;
  carried.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (track[i].found) carried.push_back(track[i].next);
  points_ = std::move(carried);
  prevPyramid_ = nextPyramid;
  ++pairIndex_;
  return rec;
}

}  // namespace flowguard
