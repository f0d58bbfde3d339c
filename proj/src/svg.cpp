#include "linevec/svg.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace linevec {

namespace {

void appendNumber(std::ostringstream& os, double v) {
  std::ostringstream tmp;
  tmp.precision(17);
  tmp << v;
  os << tmp.str();
}

}  // namespace

std::string svgDocument(const VectorDrawing& drawing, int width, int height) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 " << width
     << ' ' << height << "\" width=\"" << width << "\" height=\"" << height << "\">\n";
  for (const auto& s : drawing.strokes) {
    if (s.points.empty()) continue;
    os << "  <path d=\"M ";
    appendNumber(os, s.points[0].x);
    os << ' ';
    appendNumber(os, s.points[0].y);
    for (size_t i = 1; i < s.points.size(); ++i) {
      os << " L ";
      appendNumber(os, s.points[i].x);
      os << ' ';
      appendNumber(os, s.points[i].y);
    }
    if (s.closed) os << " Z";
    os << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void writeSvg(const VectorDrawing& drawing, int width, int height, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write SVG file: " + path);
  out << svgDocument(drawing, width, height);
  if (!out) throw std::runtime_error("failed writing SVG file: " + path);
}

}  // namespace linevec
