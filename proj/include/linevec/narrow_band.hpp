#pragma once

#include <vector>

#include "linevec/geometry.hpp"
#include "linevec/image.hpp"

namespace linevec {

constexpr double kDefaultThetaNoise = 0.35;

/// The set I of dark pixels with per-pixel tangent, gradient and weights.
///
/// tangent is the Sobel gradient rotated by pi/2 and normalized (zero where
/// the Sobel response vanishes). alignWeight/smoothWeight come from the
/// tangent-coherence weight w normalized by its global maximum over I.
struct NarrowBand {
  struct Pixel {
    int x = 0;
    int y = 0;
    Complex tangent;   // unit, or 0 when the Sobel response is zero
    Complex gradient;  // unnormalized Sobel response
    double w = 0.0;
    double alignWeight = 0.0;
    double smoothWeight = 0.0;
  };

  int width = 0;
  int height = 0;
  double thetaNoise = kDefaultThetaNoise;
  std::vector<Pixel> pixels;        // row-major order of band pixels
  std::vector<int> pixelIndex;      // width*height, -1 outside the band
  std::vector<Complex> sobelField;  // width*height, full-image Sobel response

  bool empty() const { return pixels.empty(); }
  bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  int indexOf(int x, int y) const {
    return inside(x, y) ? pixelIndex[size_t(y) * width + x] : -1;
  }
  bool inBand(int x, int y) const { return indexOf(x, y) >= 0; }
  /// Band pixel containing a continuous position (pixel centers at integers).
  int indexAt(const Vec2& p) const {
    return indexOf(int(std::lround(p.x)), int(std::lround(p.y)));
  }
};

/// Thresholds the grid at thetaNoise * imax and computes tangents and weights.
/// Returns a band with empty pixel set when no pixel is dark.
NarrowBand extractNarrowBand(const IntensityGrid& grid, double thetaNoise = kDefaultThetaNoise);

/// Applies a same-size mask image: value 0 force-removes a pixel, value imax
/// force-adds one, anything else is a no-op. Weights are recomputed from the
/// original Sobel responses over the edited pixel set.
NarrowBand applyMaskEdit(const NarrowBand& band, const IntensityGrid& mask);

}  // namespace linevec
