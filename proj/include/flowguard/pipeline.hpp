#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowguard/config.hpp"
#include "flowguard/controller.hpp"
#include "flowguard/foe_ttc.hpp"
#include "flowguard/imageops.hpp"

namespace flowguard {

// Wall-clock milliseconds per stage, in pipeline order.
struct StageTimings {
  double detect = 0.0;
  double flow = 0.0;
  double foe = 0.0;
  double ttc = 0.0;
  double balance = 0.0;
  double decision = 0.0;
};

// Everything the pipeline produced for one consecutive frame pair. The
// frame index refers to the later frame of the pair.
struct FrameRecord {
  long frame = 0;
  int corners = 0;
  int flowCount = 0;
  std::optional<Eigen::Vector2d> foe;
  std::string foeReason;     // set when foe is empty
  double residualRms = 0.0;  // valid only when foe is set
  TtcGrid grid;
  double sumLeft = 0.0;
  double sumRight = 0.0;
  double delta = 0.0;
  Decision decision = Decision::Forward;
  std::vector<FlowVector> flows;  // kept so overlays can be re-rendered
  std::optional<StageTimings> timings;
};

// JSONL serialization. Field order is fixed; NaN means serialize as null.
std::string recordToJsonLine(const FrameRecord& rec, std::optional<double> fps);
FrameRecord recordFromJsonLine(const std::string& line);

// Stateful runner over a frame sequence: tracks corners between consecutive
// frames, refreshing them per the configured policy, and derives
// FOE / TTC grid / balance / decision per pair.
class PipelineRunner {
 public:
  explicit PipelineRunner(const PipelineConfig& cfg, bool collectTimings = false);

  // Supplies the first frame of the sequence.
  void start(const ImageF& firstFrame);

  // Processes the pair (previous frame, nextFrame); frameIndex labels the
  // later frame. Must be called after start().
  FrameRecord advance(const ImageF& nextFrame, long frameIndex);

  bool started() const { return started_; }

 private:
  PipelineConfig cfg_;
  bool collectTimings_;
  bool started_ = false;
  long pairIndex_ = 0;
  ImagePyramid<float> prevPyramid_;
  std::vector<Eigen::Vector2d> points_;
};

}  // namespace flowguard
