#include "linevec/narrow_band.hpp"

#include <cmath>
#include <stdexcept>

namespace linevec {

namespace {

constexpr double kDegenerateNeighborhood = 1e-8;

std::vector<Complex> sobelResponses(const IntensityGrid& grid) {
  const int w = grid.width, h = grid.height;
  std::vector<Complex> out(size_t(w) * h);
  auto clampedAt = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return grid.at(x, y);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double gx = -clampedAt(x - 1, y - 1) + clampedAt(x + 1, y - 1) -
                  2 * clampedAt(x - 1, y) + 2 * clampedAt(x + 1, y) -
                  clampedAt(x - 1, y + 1) + clampedAt(x + 1, y + 1);
      double gy = -clampedAt(x - 1, y - 1) - 2 * clampedAt(x, y - 1) -
                  clampedAt(x + 1, y - 1) + clampedAt(x - 1, y + 1) +
                  2 * clampedAt(x, y + 1) + clampedAt(x + 1, y + 1);
      out[size_t(y) * w + x] = Complex(gx, gy);
    }
  }
  return out;
}

/// Fills tangents/weights for the given pixel set from the stored Sobel field.
void computeWeights(NarrowBand& band) {
  const int w = band.width, h = band.height;
  auto tangentAt = [&](int x, int y) -> Complex {
    Complex g = band.sobelField[size_t(y) * w + x];
    double n = std::abs(g);
    if (n <= 0.0) return Complex(0, 0);
    // Rotate by pi/2; the rotation sense is immaterial since only tau^2 is used.
    return Complex(0, 1) * g / n;
  };

  for (auto& px : band.pixels) {
    px.gradient = band.sobelField[size_t(px.y) * w + px.x];
    px.tangent = tangentAt(px.x, px.y);
  }

  // w(x) = | <tau^2>/||<tau^2>|| - tau^2(x) |, with <tau^2> averaged over the
  // 8 neighbors that have a defined tangent.
  std::vector<char> degenerate(band.pixels.size(), 0);
  for (size_t i = 0; i < band.pixels.size(); ++i) {
    auto& px = band.pixels[i];
    if (std::abs(px.tangent) == 0.0) {
      degenerate[i] = 1;  // no directional evidence at all
      continue;
    }
    Complex avg(0, 0);
    int count = 0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        int nx = px.x + dx, ny = px.y + dy;
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        Complex t = tangentAt(nx, ny);
        if (std::abs(t) == 0.0) continue;
        avg += t * t;
        ++count;
      }
    }
    if (count > 0) avg /= double(count);
    double n = std::abs(avg);
    if (n < kDegenerateNeighborhood) {
      degenerate[i] = 1;  // symmetric crossing: tangent maximally unreliable
    } else {
      px.w = std::abs(avg / n - px.tangent * px.tangent);
    }
  }

  double maxW = 0.0;
  for (size_t i = 0; i < band.pixels.size(); ++i) {
    if (!degenerate[i]) maxW = std::max(maxW, band.pixels[i].w);
  }
  for (size_t i = 0; i < band.pixels.size(); ++i) {
    auto& px = band.pixels[i];
    if (degenerate[i]) px.w = maxW;
    double r = maxW > 0.0 ? px.w / maxW : 0.0;
    if (degenerate[i]) r = 1.0;
    px.alignWeight = 1.0 - r;
    px.smoothWeight = r;
  }
}

void rebuildIndex(NarrowBand& band) {
  band.pixelIndex.assign(size_t(band.width) * band.height, -1);
  for (size_t i = 0; i < band.pixels.size(); ++i) {
    band.pixelIndex[size_t(band.pixels[i].y) * band.width + band.pixels[i].x] = int(i);
  }
}

}  // namespace

NarrowBand extractNarrowBand(const IntensityGrid& grid, double thetaNoise) {
  if (thetaNoise <= 0.0 || thetaNoise >= 1.0) {
    throw std::invalid_argument("thetaNoise must be in (0, 1)");
  }
  NarrowBand band;
  band.width = grid.width;
  band.height = grid.height;
  band.thetaNoise = thetaNoise;
  band.sobelField = sobelResponses(grid);
  double threshold = thetaNoise * grid.imax;
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (grid.at(x, y) < threshold) {
        NarrowBand::Pixel px;
        px.x = x;
        px.y = y;
        band.pixels.push_back(px);
      }
    }
  }
  rebuildIndex(band);
  computeWeights(band);
  return band;
}

NarrowBand applyMaskEdit(const NarrowBand& band, const IntensityGrid& mask) {
  if (mask.width != band.width || mask.height != band.height) {
    throw std::invalid_argument("mask dimensions do not match the image");
  }
  NarrowBand out;
  out.width = band.width;
  out.height = band.height;
  out.thetaNoise = band.thetaNoise;
  out.sobelField = band.sobelField;
  for (int y = 0; y < band.height; ++y) {
    for (int x = 0; x < band.width; ++x) {
      double m = mask.at(x, y);
      bool keep;
      if (m <= 0.0) {
        keep = false;
      } else if (m >= mask.imax) {
        keep = true;
      } else {
        keep = band.inBand(x, y);
      }
      if (keep) {
        NarrowBand::Pixel px;
        px.x = x;
        px.y = y;
        out.pixels.push_back(px);
      }
    }
  }
  rebuildIndex(out);
  computeWeights(out);
  return out;
}

}  // namespace linevec
