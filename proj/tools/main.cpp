#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowguard/annotate.hpp"
#include "flowguard/config.hpp"
#include "flowguard/log.hpp"
#include "flowguard/netpbm.hpp"
#include "flowguard/pipeline.hpp"
#include "flowguard/simulator.hpp"

namespace fs = std::filesystem;
using namespace flowguard;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 2;
constexpr int kExitIoFailure = 3;
constexpr int kExitBadFrame = 4;

// Minimal glob: '*' matches any run, '?' one character.
bool matchPattern(const std::string& pattern, const std::string& name, std::size_t p = 0,
                  std::size_t n = 0) {
  while (p < pattern.size()) {
    if (pattern[p] == '*') {
      for (std::size_t skip = 0; skip + n <= name.size(); ++skip)
        if (matchPattern(pattern, name, p + 1, n + skip)) return true;
      return false;
    }
    if (n >= name.size()) return false;
    if (pattern[p] != '?' && pattern[p] != name[n]) return false;
    ++p;
    ++n;
  }
  return n == name.size();
}

bool looksLikeFrame(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".pgm" || ext == ".ppm";
}

// Frames come from a directory (every .pgm/.ppm) or a glob pattern;
// lexicographic filename order is the temporal order.
std::vector<fs::path> listFrames(const std::string& arg) {
  std::vector<fs::path> frames;
  if (fs::is_directory(arg)) {
    for (const auto& entry : fs::directory_iterator(arg))
      if (entry.is_regular_file() && looksLikeFrame(entry.path())) frames.push_back(entry.path());
  } else if (arg.find('*') != std::string::npos || arg.find('?') != std::string::npos) {
    const fs::path pattern(arg);
    const fs::path dir = pattern.parent_path().empty() ? fs::path(".") : pattern.parent_path();
    if (!fs::is_directory(dir)) throw InvalidInput("no such directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() &&
          matchPattern(pattern.filename().string(), entry.path().filename().string()))
        frames.push_back(entry.path());
  } else {
    throw InvalidInput("frames argument must be a directory or a glob: " + arg);
  }
  std::sort(frames.begin(), frames.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return frames;
}

std::string readFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmdSynth(const fs::path& configPath, int frames, const fs::path& outDir,
             std::optional<std::uint32_t> seed) {
  SyntheticScene scene;
  try {
    scene = sceneFromJsonText(readFile(configPath));
    if (seed) scene.seed = *seed;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIoFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }
  try {
    const fs::path manifest = generateSequence(scene, frames, outDir);
    std::cout << manifest.string() << '\n';
  } catch (const SceneExpired& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIoFailure;
  }
  return kExitOk;
}

int cmdRun(const std::string& framesArg, const std::string& configPath, const std::string& outPath,
           const std::string& annotateDir, std::optional<double> fps, bool timings) {
  PipelineConfig cfg;
  std::vector<fs::path> frames;
  try {
    if (!configPath.empty()) cfg = loadConfig(configPath);
    if (fps) {
      cfg.fps = fps;
      cfg.validate();
    }
    frames = listFrames(framesArg);
    if (frames.size() < 2)
      throw InvalidInput("need at least 2 frames, found " + std::to_string(frames.size()));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }

  std::ofstream outFile;
  std::ostream* out = &std::cout;
  if (!outPath.empty()) {
    outFile.open(outPath, std::ios::trunc);
    if (!outFile) {
      std::cerr << "error: cannot write " << outPath << '\n';
      return kExitIoFailure;
    }
    out = &outFile;
  }
  if (!annotateDir.empty()) {
    std::error_code ec;
    fs::create_directories(annotateDir, ec);
    if (!fs::is_directory(annotateDir)) {
      std::cerr << "error: cannot create " << annotateDir << '\n';
      return kExitIoFailure;
    }
  }

  PipelineRunner runner(cfg, timings);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    ImageF frame;
    try {
      frame = loadImage(frames[i]);
    } catch (const Error& e) {
      std::cerr << "error: unreadable frame " << frames[i].string() << ": " << e.what() << '\n';
      return kExitBadFrame;
    }
    if (i == 0) {
      runner.start(frame);
      continue;
    }
    try {
      const FrameRecord rec = runner.advance(frame, static_cast<long>(i));
      (*out) << recordToJsonLine(rec, cfg.fps) << '\n';
      if (!annotateDir.empty()) writeOverlay(frame, rec, annotateDir);
    } catch (const IoError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitIoFailure;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitBadConfig;
    }
  }
  out->flush();
  if (!*out) {
    std::cerr << "error: short write to " << (outPath.empty() ? "stdout" : outPath) << '\n';
    return kExitIoFailure;
  }
  return kExitOk;
}

int cmdAnnotate(const fs::path& jsonlPath, const std::string& framesArg, const fs::path& outDir) {
  std::vector<FrameRecord> records;
  std::vector<fs::path> frames;
  try {
    std::ifstream in(jsonlPath);
    if (!in) throw IoError("cannot open " + jsonlPath.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      records.push_back(recordFromJsonLine(line));
    }
    if (records.empty()) throw InvalidInput("empty JSONL: " + jsonlPath.string());
    frames = listFrames(framesArg);
    if (records.size() != frames.size() - 1)
      throw InvalidInput("record/frame count mismatch: " + std::to_string(records.size()) +
                         " records vs " + std::to_string(frames.size()) + " frames");
    for (const FrameRecord& rec : records)
      if (rec.frame < 1 || rec.frame >= static_cast<long>(frames.size()))
        throw InvalidInput("record frame index " + std::to_string(rec.frame) + " out of range");
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIoFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }

  std::error_code ec;
  fs::create_directories(outDir, ec);
  if (!fs::is_directory(outDir)) {
    std::cerr << "error: cannot create " << outDir.string() << '\n';
    return kExitIoFailure;
  }
  for (const FrameRecord& rec : records) {
    ImageF frame;
    try {
      frame = loadImage(frames[rec.frame]);
    } catch (const Error& e) {
      std::cerr << "error: unreadable frame " << frames[rec.frame].string() << ": " << e.what()
                << '\n';
      return kExitBadFrame;
    }
    try {
      writeOverlay(frame, rec, outDir);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitIoFailure;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowguard: monocular obstacle-avoidance pipeline over frame sequences"};
  app.require_subcommand(1);

  // synth
  std::string synthConfig, synthOut;
  int synthFrames = 0;
  std::optional<std::uint32_t> synthSeed;
  auto* synth = app.add_subcommand("synth", "generate a synthetic pinhole scene sequence");
  synth->add_option("--config", synthConfig, "scene JSON")->required();
  synth->add_option("-n,--frames", synthFrames, "number of frames")->required();
  synth->add_option("--out", synthOut, "output directory")->required();
  synth->add_option("--seed", synthSeed, "override the scene seed");

  // run
  std::string runFrames, runConfig, runOut, runAnnotate;
  std::optional<double> runFps;
  bool runTimings = false;
  auto* run = app.add_subcommand("run", "run the pipeline over a frame sequence");
  run->add_option("frames", runFrames, "frame directory or glob")->required();
  run->add_option("--config", runConfig, "pipeline config JSON");
  run->add_option("--out", runOut, "output JSONL path (default stdout)");
  run->add_option("--annotate", runAnnotate, "also write PPM overlays into this directory");
  run->add_option("--fps", runFps, "report TTC in seconds at this frame rate");
  run->add_flag("--timing", runTimings, "include per-stage timings (breaks byte determinism)");

  // annotate
  std::string annJsonl, annFrames, annOut;
  auto* ann = app.add_subcommand("annotate", "re-render overlays from a stored JSONL run");
  ann->add_option("jsonl", annJsonl, "JSONL produced by run")->required();
  ann->add_option("frames", annFrames, "frame directory or glob")->required();
  ann->add_option("out", annOut, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadConfig;
  }

  try {
    if (synth->parsed()) return cmdSynth(synthConfig, synthFrames, synthOut, synthSeed);
    if (run->parsed()) return cmdRun(runFrames, runConfig, runOut, runAnnotate, runFps, runTimings);
    if (ann->parsed()) return cmdAnnotate(annJsonl, annFrames, annOut);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }
  return kExitOk;
}
