#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "linevec/polyvector.hpp"

namespace linevec {

constexpr double kDefaultStep = 0.1;
constexpr double kProximityStop = 0.01;
constexpr double kSameTangentAngle = M_PI / 9.0;  // 20 degrees

/// Oriented polyline produced by integrating one frame direction.
struct TracedCurve {
  std::vector<Vec2> points;
  std::vector<double> arclen;  // prefix arc length, same size as points
  int seedPixel = -1;          // band index of the seed
  int directionId = 0;         // root family followed (principal root)
  bool closedLoop = false;     // the trace returned to its seed

  double length() const { return arclen.empty() ? 0.0 : arclen.back(); }
  Vec2 pointAt(double s) const;
  /// Polyline between two arc lengths (either order), endpoints interpolated.
  std::vector<Vec2> subpath(double s0, double s1) const;
  void computeArclen();
};

struct SegRef {
  uint32_t curve;
  uint32_t seg;  // segment [points[seg], points[seg+1]]
  bool operator==(const SegRef& o) const { return curve == o.curve && seg == o.seg; }
};

/// Per-pixel buckets of curve segments; a segment is registered in every
/// pixel bucket it overlaps.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  SpatialIndex(int width, int height) : width_(width), height_(height) {
    buckets_.resize(size_t(width) * height);
  }

  void insert(SegRef ref, const Vec2& a, const Vec2& b);
  /// Candidate segments for a query segment [a, b] (conservative superset of
  /// the segments sharing an overlapped pixel). May contain duplicates.
  std::vector<SegRef> candidates(const Vec2& a, const Vec2& b) const;

  int width() const { return width_; }
  int height() const { return height_; }

 private:
  void addToCell(int x, int y, SegRef ref);
  int width_ = 0;
  int height_ = 0;
  std::vector<std::vector<SegRef>> buckets_;
};

/// Decodes the field once and answers direction queries with least-angle
/// root matching and bilinear interpolation between pixel centers.
class FieldSampler {
 public:
  FieldSampler(const NarrowBand& band, const PolyVectorField& field,
               const std::vector<int>& singularPixels);

  struct Sample {
    bool ok = false;
    Complex matched;  // unit direction of the matched root family
    Complex other;    // unit direction of the other family
  };

  /// Bilinear field sample at pos, matched by least angle to refDir.
  Sample sampleMatched(const Vec2& pos, const Complex& refDir) const;
  /// Root with maximum magnitude; ties broken by smaller angle in [0, pi).
  Complex principalRootAt(int bandIdx) const;
  /// Principal root, except that near-tied magnitudes defer to the pixel's
  /// measured tangent to pick the drawing direction.
  Complex seedRootAt(int bandIdx) const;
  bool isSingular(int bandIdx) const { return singular_[bandIdx] != 0; }
  const NarrowBand& band() const { return band_; }

 private:
  const NarrowBand& band_;
  std::vector<Complex> unitU_, unitV_;  // unit roots per band pixel (0 if degenerate)
  std::vector<Complex> rootU_, rootV_;
  std::vector<char> singular_;
};

struct TraceResult {
  std::vector<TracedCurve> curves;
  SpatialIndex index;
};

/// Traces one curve per dark pixel in row-major seed order. Curves stop on
/// leaving the band, at singular pixels, or within kProximityStop of an
/// already-traced same-tangent curve.
TraceResult traceAll(const NarrowBand& band, const PolyVectorField& field,
                     const std::vector<int>& singularPixels, double h = kDefaultStep);

/// Curve traced across the stroke, perpendicular to the matched root family.
struct TestCurve {
  std::vector<Vec2> points;
  std::vector<Complex> matched;  // matched field direction at each point
  std::vector<double> arclen;
  double seedArclen = 0.0;  // arc length of the seed along the test curve
};

TestCurve traceTestCurve(const FieldSampler& sampler, const Vec2& seed,
                         const Complex& seedTangent, double h = kDefaultStep);

struct IntersectionHit {
  int curve = -1;
  Vec2 pos;
  double arcOnTest = 0.0;
  double arcOnCurve = 0.0;
};

/// Exact segment-segment intersections of a test curve with traced curves of
/// the matching direction family, sorted by arc length along the test curve.
std::vector<IntersectionHit> testCurveIntersections(const TestCurve& test,
                                                    const TraceResult& traced,
                                                    const FieldSampler& sampler);

/// Debug dump of traced curves as SVG polylines.
void dumpCurvesSvg(const std::vector<TracedCurve>& curves, int width, int height,
                   const std::string& path);

}  // namespace linevec
