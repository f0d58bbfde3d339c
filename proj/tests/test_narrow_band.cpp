#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <linevec/narrow_band.hpp>

#include "support/synthetic.hpp"

#include <cmath>

using namespace linevec;

TEST_CASE("band contains exactly the dark pixels") {
  IntensityGrid img = synth::makeBar(32, 3.0);
  NarrowBand band = extractNarrowBand(img, 0.35);
  for (const auto& p : band.pixels) CHECK(img.at(p.x, p.y) < 0.35 * img.imax);
  size_t dark = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y) < 0.35 * img.imax) {
        ++dark;
        CHECK(band.inBand(x, y));
      }
  CHECK(band.pixels.size() == dark);
}

TEST_CASE("empty band on all-white image") {
  IntensityGrid img(16, 16, 255.0, 255.0);
  NarrowBand band = extractNarrowBand(img, 0.35);
  CHECK(band.empty());
}

TEST_CASE("tangent on a straight bar is parallel to it") {
  IntensityGrid img = synth::makeBar(48, 3.0, /*horizontal=*/true);
  NarrowBand band = extractNarrowBand(img, 0.35);
  REQUIRE_FALSE(band.empty());
  int checked = 0;
  for (const auto& p : band.pixels) {
    if (p.x < 12 || p.x > 36) continue;  // skip stroke ends
    if (std::abs(p.tangent) == 0.0) continue;
    CHECK(std::abs(p.tangent) == doctest::Approx(1.0));
    // Horizontal stroke: tangent line within 5 degrees of horizontal.
    CHECK(lineAngle(p.tangent, Complex(1.0, 0.0)) < 5.0 * M_PI / 180.0);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("weights: normalized split and sign invariance") {
  IntensityGrid img = synth::makeX(64, 3.0);
  NarrowBand band = extractNarrowBand(img, 0.35);
  REQUIRE_FALSE(band.empty());
  double maxW = 0.0;
  for (const auto& p : band.pixels) maxW = std::max(maxW, p.w);
  for (const auto& p : band.pixels) {
    CHECK(p.alignWeight >= 0.0);
    CHECK(p.alignWeight <= 1.0 + 1e-12);
    CHECK(p.smoothWeight >= 0.0);
    CHECK(p.smoothWeight <= 1.0 + 1e-12);
    if (std::abs(p.tangent) > 0.0)
      CHECK(p.alignWeight + p.smoothWeight == doctest::Approx(1.0));
    if (maxW > 0.0) CHECK(p.smoothWeight == doctest::Approx(p.w / maxW).epsilon(1e-9));
  }
}

TEST_CASE("crossing pixels carry higher incoherence weight than straight runs") {
  IntensityGrid img = synth::makeX(64, 3.0);
  NarrowBand band = extractNarrowBand(img, 0.35);
  // Only pixels with directional evidence are comparable: flat interiors and
  // stroke-end caps have no reliable tangent and are assigned the maximum
  // weight by construction. The straight-run annulus stays clear of both the
  // crossing and the arm end caps.
  double crossingMax = 0.0, straightMax = 0.0;
  for (const auto& p : band.pixels) {
    if (std::abs(p.tangent) == 0.0) continue;
    double dc = std::hypot(p.x - 32.0, p.y - 32.0);
    if (dc < 4.0)
      crossingMax = std::max(crossingMax, p.w);
    else if (dc > 8.0 && dc < 16.0)
      straightMax = std::max(straightMax, p.w);
  }
  CHECK(crossingMax > straightMax);
}

TEST_CASE("thresholding the indicator image reproduces the band") {
  IntensityGrid img = synth::makeT(64, 3.0);
  NarrowBand band = extractNarrowBand(img, 0.35);
  IntensityGrid indicator(img.width, img.height, 255.0, 255.0);
  for (const auto& p : band.pixels) indicator.at(p.x, p.y) = 0.0;
  NarrowBand band2 = extractNarrowBand(indicator, 0.35);
  REQUIRE(band2.pixels.size() == band.pixels.size());
  for (const auto& p : band.pixels) CHECK(band2.inBand(p.x, p.y));
}

TEST_CASE("mask edit: no-op, removal, addition") {
  IntensityGrid img = synth::makeBar(32, 3.0);
  NarrowBand band = extractNarrowBand(img, 0.35);
  REQUIRE_FALSE(band.empty());

  IntensityGrid noop(img.width, img.height, 255.0, 128.0);
  NarrowBand same = applyMaskEdit(band, noop);
  CHECK(same.pixels.size() == band.pixels.size());

  // Remove one band pixel.
  IntensityGrid rm = noop;
  const auto& victim = band.pixels.front();
  rm.at(victim.x, victim.y) = 0.0;
  NarrowBand smaller = applyMaskEdit(band, rm);
  CHECK(smaller.pixels.size() == band.pixels.size() - 1);
  CHECK_FALSE(smaller.inBand(victim.x, victim.y));

  // Add one non-band pixel.
  IntensityGrid add = noop;
  int ax = -1, ay = -1;
  for (int y = 0; y < img.height && ax < 0; ++y)
    for (int x = 0; x < img.width && ax < 0; ++x)
      if (!band.inBand(x, y)) {
        ax = x;
        ay = y;
      }
  REQUIRE(ax >= 0);
  add.at(ax, ay) = 255.0;
  NarrowBand bigger = applyMaskEdit(band, add);
  CHECK(bigger.pixels.size() == band.pixels.size() + 1);
  CHECK(bigger.inBand(ax, ay));
}

TEST_CASE("mask edit rejects dimension mismatch") {
  IntensityGrid img = synth::makeBar(32, 3.0);
  NarrowBand band = extractNarrowBand(img, 0.35);
  IntensityGrid wrong(8, 8, 255.0, 128.0);
  CHECK_THROWS(applyMaskEdit(band, wrong));
}
