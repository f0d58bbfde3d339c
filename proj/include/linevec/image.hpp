#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace linevec {

struct ImageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Grayscale raster with intensities in [0, imax].
struct IntensityGrid {
  int width = 0;
  int height = 0;
  double imax = 255.0;
  std::vector<double> values;  // row-major, values[y * width + x]

  IntensityGrid() = default;
  IntensityGrid(int w, int h, double imax_ = 255.0, double fill = 0.0)
      : width(w), height(h), imax(imax_), values(size_t(w) * h, fill) {}

  double at(int x, int y) const { return values[size_t(y) * width + x]; }
  double& at(int x, int y) { return values[size_t(y) * width + x]; }
  bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  size_t size() const { return values.size(); }
};

/// Loads a PGM (P2/P5) or PNG image as luminance. Multi-channel input is
/// converted with Rec. 601 weights; imax is the format's maximum code value.
IntensityGrid loadGrayscale(const std::string& path);

/// Histogram equalization: monotone remap spanning [0, imax]. A constant
/// image is returned unchanged.
IntensityGrid equalizeContrast(const IntensityGrid& grid);

void savePgm(const IntensityGrid& grid, const std::string& path);
void savePng(const IntensityGrid& grid, const std::string& path);

/// Writes an 8-bit RGB PNG from interleaved rows (used by tests).
void saveRgbPng(int width, int height, const std::vector<unsigned char>& rgb,
                const std::string& path);

}  // namespace linevec
