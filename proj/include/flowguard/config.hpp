#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "flowguard/features.hpp"
#include "flowguard/flow.hpp"

namespace flowguard {

enum class BalanceSource { Mean, Raw };

// Every tunable of the pipeline in one place. Defaults reproduce the
// on-vehicle constants (50-iteration refresh, 16x16 grid, 0.5 threshold);
// the rest are conventional tracker values.
struct PipelineConfig {
  FastParams fast;
  RefreshPolicy refresh;
  LkParams lk;
  int lkLevels = 3;

  double minFlowSq = 0.01;  // squared pixels; floors out degenerate TTC inputs
  BalanceSource balanceSource = BalanceSource::Mean;
  double threshold = 0.5;  // decision threshold on |delta|

  double cannyLow = 0.1;
  double cannyHigh = 0.2;
  double cannySigma = 1.4;

  std::optional<double> fps;  // set to also report TTC in seconds

  // Throws InvalidParameter naming the first out-of-range value.
  void validate() const;
};

// Strict parse: unknown keys anywhere are rejected by name.
PipelineConfig configFromJsonText(const std::string& text);
PipelineConfig loadConfig(const std::filesystem::path& path);

}  // namespace flowguard
