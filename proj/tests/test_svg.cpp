#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "linevec/svg.hpp"

using namespace linevec;

namespace {

Stroke makeStroke(std::vector<Vec2> pts, bool closed = false) {
  Stroke s;
  s.points = std::move(pts);
  s.closed = closed;
  return s;
}

/// Minimal parser for the documents this writer produces: extracts every
/// path's "d" attribute and decodes "M x y L x y ... [Z]" back into points.
struct ParsedPath {
  std::vector<Vec2> points;
  bool closed = false;
};

std::vector<ParsedPath> parsePaths(const std::string& doc) {
  std::vector<ParsedPath> out;
  size_t pos = 0;
  while ((pos = doc.find("<path", pos)) != std::string::npos) {
    size_t dStart = doc.find("d=\"", pos);
    REQUIRE(dStart != std::string::npos);
    dStart += 3;
    size_t dEnd = doc.find('"', dStart);
    REQUIRE(dEnd != std::string::npos);
    std::istringstream is(doc.substr(dStart, dEnd - dStart));
    ParsedPath p;
    std::string tok;
    double x, y;
    while (is >> tok) {
      if (tok == "Z") {
        p.closed = true;
      } else {
        REQUIRE((tok == "M" || tok == "L"));
        REQUIRE(static_cast<bool>(is >> x >> y));
        p.points.push_back(Vec2(x, y));
      }
    }
    out.push_back(std::move(p));
    pos = dEnd;
  }
  return out;
}

}  // namespace

TEST_CASE("one path element per stroke, in stroke order") {
  VectorDrawing d;
  d.strokes.push_back(makeStroke({Vec2(1, 2), Vec2(3, 4)}));
  d.strokes.push_back(makeStroke({Vec2(5, 6), Vec2(7, 8), Vec2(9, 10)}));
  std::string doc = svgDocument(d, 64, 48);
  auto paths = parsePaths(doc);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].points.size() == 2);
  CHECK(paths[1].points.size() == 3);
  CHECK(paths[0].points[0].x == 1.0);
  CHECK(paths[1].points[2].y == 10.0);
}

TEST_CASE("path data uses M then L commands") {
  VectorDrawing d;
  d.strokes.push_back(makeStroke({Vec2(0.5, 1.5), Vec2(2.5, 3.5)}));
  std::string doc = svgDocument(d, 8, 8);
  CHECK(doc.find("M 0.5 1.5 L 2.5 3.5") != std::string::npos);
}

TEST_CASE("closed strokes end with Z") {
  VectorDrawing d;
  d.strokes.push_back(makeStroke({Vec2(0, 0), Vec2(4, 0), Vec2(2, 3)}, true));
  d.strokes.push_back(makeStroke({Vec2(0, 0), Vec2(1, 1)}, false));
  auto paths = parsePaths(svgDocument(d, 8, 8));
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].closed);
  CHECK(!paths[1].closed);
}

TEST_CASE("viewBox and size match the raster dimensions") {
  VectorDrawing d;
  std::string doc = svgDocument(d, 123, 77);
  CHECK(doc.find("viewBox=\"0 0 123 77\"") != std::string::npos);
  CHECK(doc.find("width=\"123\"") != std::string::npos);
  CHECK(doc.find("height=\"77\"") != std::string::npos);
}

TEST_CASE("empty drawing yields a valid document with zero paths") {
  VectorDrawing d;
  std::string doc = svgDocument(d, 10, 10);
  CHECK(doc.find("<svg") != std::string::npos);
  CHECK(doc.find("</svg>") != std::string::npos);
  CHECK(doc.find("<path") == std::string::npos);
}

TEST_CASE("parse-back round-trips points exactly") {
  VectorDrawing d;
  // Deliberately awkward coordinates: round-trip must be bit-exact.
  d.strokes.push_back(makeStroke({Vec2(1.0 / 3.0, 2.0 / 7.0), Vec2(1e-9, 123.456789012345),
                                  Vec2(-0.25, 63.999999999999993)}));
  d.strokes.push_back(makeStroke({Vec2(std::nextafter(5.0, 6.0), 0.1), Vec2(0.2, 0.3)}, true));
  auto paths = parsePaths(svgDocument(d, 64, 64));
  REQUIRE(paths.size() == d.strokes.size());
  for (size_t i = 0; i < paths.size(); ++i) {
    REQUIRE(paths[i].points.size() == d.strokes[i].points.size());
    CHECK(paths[i].closed == d.strokes[i].closed);
    for (size_t j = 0; j < paths[i].points.size(); ++j) {
      CHECK(paths[i].points[j].x == d.strokes[i].points[j].x);
      CHECK(paths[i].points[j].y == d.strokes[i].points[j].y);
    }
  }
}

TEST_CASE("uniform unit stroke width and no fill") {
  VectorDrawing d;
  d.strokes.push_back(makeStroke({Vec2(0, 0), Vec2(1, 1)}));
  std::string doc = svgDocument(d, 4, 4);
  CHECK(doc.find("stroke-width=\"1\"") != std::string::npos);
  CHECK(doc.find("fill=\"none\"") != std::string::npos);
}

TEST_CASE("writeSvg writes the same document to disk") {
  VectorDrawing d;
  d.strokes.push_back(makeStroke({Vec2(1, 1), Vec2(2, 2)}));
  auto path = std::filesystem::temp_directory_path() / "linevec_svg_test.svg";
  writeSvg(d, 16, 16, path.string());
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == svgDocument(d, 16, 16));
  std::filesystem::remove(path);
}

TEST_CASE("writing to an unwritable location throws") {
  VectorDrawing d;
  CHECK_THROWS(writeSvg(d, 4, 4, "/nonexistent-dir/out.svg"));
}
