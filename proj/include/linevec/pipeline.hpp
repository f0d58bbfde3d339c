#pragma once

#include <string>
#include <vector>

#include "linevec/embedding.hpp"
#include "linevec/polyvector.hpp"

namespace linevec {

struct PipelineConfig {
  std::string input;
  std::string output;
  double thetaNoise = kDefaultThetaNoise;
  double lambda = 50.0;
  double mu = 0.1;
  double eta = kDefaultEta;
  int nHole = kDefaultNHole;
  double step = kDefaultStep;
  int lbfgsHistory = 6;
  double simplifyTol = kDefaultSimplifyTol;
  std::string maskPath;
  bool equalize = false;
  std::string dumpField;
  std::string dumpCurves;
  std::string dumpGraph;
  bool quiet = false;  // suppress progress/timing prints (used by tests)
};

struct StageTiming {
  std::string name;
  double ms = 0.0;
};

struct PipelineResult {
  int width = 0;
  int height = 0;
  size_t darkPixels = 0;
  size_t singularPixels = 0;
  size_t graphVertices = 0;
  size_t graphEdges = 0;
  size_t strokes = 0;
  std::vector<StageTiming> timings;
  VectorDrawing drawing;

  /// `name,width,height,dark_pixels,time_ms_per_stage...` CSV line.
  std::string statsCsv(const std::string& name) const;
};

/// Thrown by pipeline stages; what() is prefixed with the stage name.
struct PipelineError : std::runtime_error {
  explicit PipelineError(const std::string& stage, const std::string& msg)
      : std::runtime_error("[" + stage + "] " + msg), stage(stage) {}
  std::string stage;
};

/// Full pipeline: load -> narrow band -> field optimization -> tracing ->
/// topology -> embedding -> SVG. Returns statistics and the final drawing.
PipelineResult runPipeline(const PipelineConfig& config);

}  // namespace linevec
