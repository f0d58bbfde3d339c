#pragma once

#include <string>

#include "linevec/embedding.hpp"

namespace linevec {

/// SVG 1.1 document: one path per stroke (deterministic stroke-id order),
/// polyline data, stroke width 1, viewBox matching the raster dimensions.
std::string svgDocument(const VectorDrawing& drawing, int width, int height);

void writeSvg(const VectorDrawing& drawing, int width, int height, const std::string& path);

}  // namespace linevec
