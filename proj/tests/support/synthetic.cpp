#include "support/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace synth {

IntensityGrid blank(int width, int height) { return IntensityGrid(width, height, 255.0, 255.0); }

namespace {

/// Darkens pixels by distance to a point set: full dark inside halfWidth-0.5,
/// white outside halfWidth+0.5, linear ramp between.
void darkenByDistance(IntensityGrid& grid, double halfWidth,
                      const std::function<double(const Vec2&)>& dist) {
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      double d = dist(Vec2(x, y));
      double t = std::clamp(d - (halfWidth - 0.5), 0.0, 1.0);
      grid.at(x, y) = std::min(grid.at(x, y), t * grid.imax);
    }
  }
}

}  // namespace

void drawStroke(IntensityGrid& grid, const Vec2& a, const Vec2& b, double width) {
  darkenByDistance(grid, width * 0.5,
                   [&](const Vec2& p) { return linevec::pointSegmentDistance(p, a, b); });
}

void drawCircle(IntensityGrid& grid, const Vec2& center, double radius, double width) {
  darkenByDistance(grid, width * 0.5, [&](const Vec2& p) {
    return std::abs(linevec::distance(p, center) - radius);
  });
}

IntensityGrid makeBar(int size, double width, bool horizontal) {
  IntensityGrid g = blank(size, size);
  double c = size / 2.0;
  double m = 8.0;
  if (horizontal)
    drawStroke(g, Vec2(m, c), Vec2(size - 1 - m, c), width);
  else
    drawStroke(g, Vec2(c, m), Vec2(c, size - 1 - m), width);
  return g;
}

IntensityGrid makeX(int size, double width) {
  IntensityGrid g = blank(size, size);
  double c = size / 2.0;
  double m = 8.0;
  drawStroke(g, Vec2(m, c), Vec2(size - 1 - m, c), width);
  drawStroke(g, Vec2(c, m), Vec2(c, size - 1 - m), width);
  return g;
}

IntensityGrid makeT(int size, double width) {
  IntensityGrid g = blank(size, size);
  double c = size / 2.0;
  double m = 8.0;
  drawStroke(g, Vec2(m, 16.0), Vec2(size - 1 - m, 16.0), width);  // bar
  drawStroke(g, Vec2(c, 16.0), Vec2(c, size - 1 - m), width);     // stem
  return g;
}

IntensityGrid makeY(int size, double width) {
  IntensityGrid g = blank(size, size);
  Vec2 c(size / 2.0, size / 2.0);
  double len = size / 2.0 - 8.0;
  for (int k = 0; k < 3; ++k) {
    double ang = M_PI / 2.0 + k * 2.0 * M_PI / 3.0;  // 90, 210, 330 degrees
    drawStroke(g, c, c + Vec2(std::cos(ang), std::sin(ang)) * len, width);
  }
  return g;
}

IntensityGrid makeCircleImage(double radius, double width) {
  int size = static_cast<int>(std::ceil(2.0 * radius + 2.0 * width + 16.0));
  IntensityGrid g = blank(size, size);
  drawCircle(g, Vec2(size / 2.0, size / 2.0), radius, width);
  return g;
}

IntensityGrid makeParallel(int size, double width, double gap) {
  IntensityGrid g = blank(size, size);
  double c = size / 2.0;
  double m = 8.0;
  // Integer centerline rows rasterize symmetrically (full-dark center row).
  double y1 = std::round(c - (width + gap) / 2.0);
  double y2 = y1 + width + gap;
  drawStroke(g, Vec2(m, y1), Vec2(size - 1 - m, y1), width);
  drawStroke(g, Vec2(m, y2), Vec2(size - 1 - m, y2), width);
  return g;
}

IntensityGrid makeTouchingParallel(int size, double width) {
  IntensityGrid g = blank(size, size);
  double c = size / 2.0;
  double m = 6.0;
  double split = 5.0;  // vertical separation at the ends
  double third = (size - 2.0 * m) / 3.0;
  // Two strokes that bend together in the middle third and touch there.
  double touch = width / 2.0;  // center offset while touching
  for (int s = -1; s <= 1; s += 2) {
    Vec2 e0(m, c + s * (touch + split));
    Vec2 e1(size - 1 - m, c + s * (touch + split));
    Vec2 m0(m + third, c + s * touch);
    Vec2 m1(size - 1 - m - third, c + s * touch);
    drawStroke(g, e0, m0, width);
    drawStroke(g, m0, m1, width);
    drawStroke(g, m1, e1, width);
  }
  return g;
}

void addGaussianNoise(IntensityGrid& grid, double sigmaFrac, uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, sigmaFrac * grid.imax);
  for (double& v : grid.values) v = std::clamp(v + noise(rng), 0.0, grid.imax);
}

}  // namespace synth
