#pragma once

#include <cstdint>
#include <vector>

#include "linevec/image.hpp"
#include "linevec/geometry.hpp"

namespace synth {

using linevec::IntensityGrid;
using linevec::Vec2;

/// White canvas (intensity imax everywhere).
IntensityGrid blank(int width, int height);

/// Dark stroke along [a, b] with ~1 px anti-aliased edges.
void drawStroke(IntensityGrid& grid, const Vec2& a, const Vec2& b, double width);

/// Dark circle outline of the given radius and stroke width.
void drawCircle(IntensityGrid& grid, const Vec2& center, double radius, double width);

// Canonical test images (64x64 unless noted).
IntensityGrid makeBar(int size = 64, double width = 3.0, bool horizontal = true);
IntensityGrid makeX(int size = 64, double width = 3.0);
IntensityGrid makeT(int size = 64, double width = 3.0);
IntensityGrid makeY(int size = 64, double width = 3.0);  // arms at 120 degrees
IntensityGrid makeCircleImage(double radius = 20.0, double width = 3.0);
/// Two horizontal strokes; gap measured between inner edges. gap <= 0 makes
/// them touch along the middle run while the ends bend apart.
IntensityGrid makeParallel(int size = 64, double width = 3.0, double gap = 2.0);
IntensityGrid makeTouchingParallel(int size = 64, double width = 3.0);

/// Additive Gaussian pixel noise, sigma as a fraction of imax, clamped.
void addGaussianNoise(IntensityGrid& grid, double sigmaFrac, uint32_t seed);

}  // namespace synth
