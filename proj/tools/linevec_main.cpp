#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "linevec/pipeline.hpp"

namespace {

/// key=value config file; keys match the long flag names.
bool applyConfigFile(const std::string& path, linevec::PipelineConfig& cfg,
                     std::string& error) {
  std::ifstream in(path);
  if (!in) {
    error = "cannot open config file: " + path;
    return false;
  }
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto notSpace = [](unsigned char c) { return !std::isspace(c); };
    line.erase(line.begin(), std::find_if(line.begin(), line.end(), notSpace));
    line.erase(std::find_if(line.rbegin(), line.rend(), notSpace).base(), line.end());
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      error = "config line " + std::to_string(lineNo) + ": expected key=value";
      return false;
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    try {
      if (key == "threshold")
        cfg.thetaNoise = std::stod(value);
      else if (key == "lambda")
        cfg.lambda = std::stod(value);
      else if (key == "mu")
        cfg.mu = std::stod(value);
      else if (key == "eta")
        cfg.eta = std::stod(value);
      else if (key == "nhole")
        cfg.nHole = std::stoi(value);
      else if (key == "step")
        cfg.step = std::stod(value);
      else if (key == "history")
        cfg.lbfgsHistory = std::stoi(value);
      else if (key == "simplify-tol")
        cfg.simplifyTol = std::stod(value);
      else if (key == "mask")
        cfg.maskPath = value;
      else if (key == "equalize")
        cfg.equalize = value == "1" || value == "true";
      else if (key == "output")
        cfg.output = value;
      else if (key == "dump-field")
        cfg.dumpField = value;
      else if (key == "dump-curves")
        cfg.dumpCurves = value;
      else if (key == "dump-graph")
        cfg.dumpGraph = value;
      else {
        error = "config line " + std::to_string(lineNo) + ": unknown key '" + key + "'";
        return false;
      }
    } catch (const std::exception&) {
      error = "config line " + std::to_string(lineNo) + ": bad value for '" + key + "'";
      return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  linevec::PipelineConfig cfg;
  std::string configPath;
  bool stats = false;

  CLI::App app{"Vectorizes a grayscale line drawing (PNG/PGM) into an SVG curve network."};
  app.add_option("input", cfg.input, "Input image (PNG or PGM)")->required();
  app.add_option("-o,--output", cfg.output, "Output SVG path");
  app.add_option("--threshold", cfg.thetaNoise, "Dark-pixel threshold fraction of max intensity")
      ->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "Smoothness weight")->capture_default_str();
  app.add_option("--mu", cfg.mu, "Regularization weight")->capture_default_str();
  app.add_option("--eta", cfg.eta, "Centering weight for path embedding")->capture_default_str();
  app.add_option("--nhole", cfg.nHole, "Minimum enclosed white pixels to keep a loop")
      ->capture_default_str();
  app.add_option("--step", cfg.step, "Curve tracing step size (px)")->capture_default_str();
  app.add_option("--simplify-tol", cfg.simplifyTol, "Polyline simplification tolerance (px)")
      ->capture_default_str();
  app.add_option("--mask", cfg.maskPath, "Mask image: 0 removes a pixel, max value adds one");
  app.add_flag("--equalize", cfg.equalize, "Histogram-equalize the input first");
  app.add_option("--dump-field", cfg.dumpField, "Write the optimized field as CSV");
  app.add_option("--dump-curves", cfg.dumpCurves, "Write traced curves as SVG");
  app.add_option("--dump-graph", cfg.dumpGraph, "Write the topology graph as JSON");
  app.add_option("--config", configPath, "key=value config file (flags override)");
  app.add_flag("--stats", stats, "Print a name,width,height,dark_pixels,time_ms... CSV line");
  app.add_flag("--quiet", cfg.quiet, "Suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (!configPath.empty()) {
    linevec::PipelineConfig fromFile = cfg;
    std::string error;
    if (!applyConfigFile(configPath, fromFile, error)) {
      std::fprintf(stderr, "error: %s\n", error.c_str());
      return 1;
    }
    // Re-apply explicit command-line values on top of the file.
    linevec::PipelineConfig merged = fromFile;
    auto keepCli = [&](auto member) {
      if (!(cfg.*member == linevec::PipelineConfig{}.*member)) merged.*member = cfg.*member;
    };
    keepCli(&linevec::PipelineConfig::thetaNoise);
    keepCli(&linevec::PipelineConfig::lambda);
    keepCli(&linevec::PipelineConfig::mu);
    keepCli(&linevec::PipelineConfig::eta);
    keepCli(&linevec::PipelineConfig::nHole);
    keepCli(&linevec::PipelineConfig::step);
    keepCli(&linevec::PipelineConfig::simplifyTol);
    keepCli(&linevec::PipelineConfig::maskPath);
    keepCli(&linevec::PipelineConfig::equalize);
    keepCli(&linevec::PipelineConfig::output);
    keepCli(&linevec::PipelineConfig::dumpField);
    keepCli(&linevec::PipelineConfig::dumpCurves);
    keepCli(&linevec::PipelineConfig::dumpGraph);
    merged.input = cfg.input;
    merged.quiet = cfg.quiet;
    cfg = merged;
  }

  try {
    linevec::PipelineResult result = linevec::runPipeline(cfg);
    if (stats) {
      std::string name = cfg.input;
      auto slash = name.find_last_of('/');
      if (slash != std::string::npos) name = name.substr(slash + 1);
      std::printf("%s\n", result.statsCsv(name).c_str());
    }
    return 0;
  } catch (const linevec::PipelineError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
