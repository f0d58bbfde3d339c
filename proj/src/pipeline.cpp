#include "linevec/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "linevec/svg.hpp"
#include "linevec/tracer.hpp"

namespace linevec {

namespace {

class StageClock {
 public:
  explicit StageClock(PipelineResult& result) : result_(result) {}

  template <typename F>
  auto run(const std::string& stage, bool quiet, F&& f) {
    auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        finish(stage, start, quiet);
      } else {
        auto value = f();
        finish(stage, start, quiet);
        return value;
      }
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(stage, e.what());
    }
  }

 private:
  void finish(const std::string& stage,
              std::chrono::steady_clock::time_point start, bool quiet) {
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          start)
                    .count();
    result_.timings.push_back(StageTiming{stage, ms});
    if (!quiet) std::fprintf(stderr, "%-10s %10.1f ms\n", stage.c_str(), ms);
  }

  PipelineResult& result_;
};

}  // namespace

std::string PipelineResult::statsCsv(const std::string& name) const {
  std::ostringstream os;
  os << name << ',' << width << ',' << height << ',' << darkPixels;
  for (const auto& t : timings) os << ',' << t.ms;
  return os.str();
}

PipelineResult runPipeline(const PipelineConfig& config) {
  PipelineResult result;
  StageClock clock(result);
  const bool quiet = config.quiet;

  IntensityGrid image = clock.run("input", quiet, [&] {
    IntensityGrid img = loadGrayscale(config.input);
    if (config.equalize) img = equalizeContrast(img);
    return img;
  });
  result.width = image.width;
  result.height = image.height;

  NarrowBand band = clock.run("band", quiet, [&] {
    NarrowBand b = extractNarrowBand(image, config.thetaNoise);
    if (!config.maskPath.empty()) b = applyMaskEdit(b, loadGrayscale(config.maskPath));
    return b;
  });
  result.darkPixels = band.pixels.size();

  if (band.empty()) {
    if (!quiet) std::fprintf(stderr, "warning: no dark pixels; writing empty drawing\n");
    if (!config.output.empty())
      writeSvg(result.drawing, result.width, result.height, config.output);
    return result;
  }

  SolverParams params;
  params.lambda = config.lambda;
  params.mu = config.mu;
  params.lbfgsHistory = config.lbfgsHistory;

  RelaxResult relaxed = clock.run("field", quiet, [&] { return relaxSingularities(band, params); });
  result.singularPixels = relaxed.relaxedPixels;
  if (!config.dumpField.empty()) dumpFieldCsv(relaxed.field, relaxed.band, config.dumpField);

  TraceResult traced = clock.run("trace", quiet, [&] {
    return traceAll(relaxed.band, relaxed.field, relaxed.singular, config.step);
  });
  if (!config.dumpCurves.empty())
    dumpCurvesSvg(traced.curves, result.width, result.height, config.dumpCurves);

  FieldSampler sampler(relaxed.band, relaxed.field, relaxed.singular);
  TopologyGraph graph = clock.run("topology", quiet, [&] {
    std::vector<Bundle> bundles = buildBundles(traced, sampler);
    TopologyGraph g = buildGraph(std::move(bundles));
    g = contractSmallLoops(std::move(g), relaxed.band, config.nHole);
    g = pruneBranches(std::move(g));
    g = unzipParallel(std::move(g));
    g = repairSingularityGaps(std::move(g), relaxed.band, relaxed.singular);
    return g;
  });
  result.graphVertices = graph.vertices.size();
  result.graphEdges = graph.edges.size();
  if (!config.dumpGraph.empty()) dumpGraphJson(graph, config.dumpGraph);

  result.drawing = clock.run("extract", quiet, [&] {
    VectorDrawing d = embedGraph(graph, traced.curves, config.eta, true);
    d = pruneOvershoot(std::move(d));
    d = simplifySmooth(std::move(d), config.simplifyTol);
    return d;
  });
  result.strokes = result.drawing.strokes.size();

  if (!config.output.empty()) {
    clock.run("svg", quiet,
              [&] { writeSvg(result.drawing, result.width, result.height, config.output); });
  }
  if (!quiet) {
    std::fprintf(stderr,
                 "dark=%zu singular=%zu vertices=%zu edges=%zu strokes=%zu\n",
                 result.darkPixels, result.singularPixels, result.graphVertices,
                 result.graphEdges, result.strokes);
  }
  return result;
}

}  // namespace linevec
