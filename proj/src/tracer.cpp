#include "linevec/tracer.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

namespace linevec {

namespace {
constexpr double kSelfProximityArcGap = 10.0;  // in units of h
}

void TracedCurve::computeArclen() {
  arclen.resize(points.size());
  double s = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    if (i > 0) s += distance(points[i - 1], points[i]);
    arclen[i] = s;
  }
}

Vec2 TracedCurve::pointAt(double s) const {
  if (points.empty()) return {};
  if (s <= arclen.front()) return points.front();
  if (s >= arclen.back()) return points.back();
  size_t hi = size_t(std::lower_bound(arclen.begin(), arclen.end(), s) - arclen.begin());
  if (hi == 0) return points.front();
  size_t lo = hi - 1;
  double span = arclen[hi] - arclen[lo];
  double t = span > 0.0 ? (s - arclen[lo]) / span : 0.0;
  return points[lo] + (points[hi] - points[lo]) * t;
}

namespace {

std::vector<Vec2> monotoneSubpath(const TracedCurve& c, double s0, double s1) {
  bool reversed = s1 < s0;
  if (reversed) std::swap(s0, s1);
  std::vector<Vec2> out;
  out.push_back(c.pointAt(s0));
  for (size_t i = 0; i < c.points.size(); ++i) {
    if (c.arclen[i] > s0 && c.arclen[i] < s1) out.push_back(c.points[i]);
  }
  Vec2 end = c.pointAt(s1);
  if (out.empty() || distance(out.back(), end) > 1e-12) out.push_back(end);
  if (reversed) std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<Vec2> TracedCurve::subpath(double s0, double s1) const {
  if (closedLoop && arclen.size() >= 2) {
    // On a loop take the shorter way around, stitching across the seam.
    double total = arclen.back();
    double direct = std::abs(s1 - s0);
    if (direct > total - direct) {
      double lo = std::min(s0, s1), hi = std::max(s0, s1);
      std::vector<Vec2> out = monotoneSubpath(*this, hi, total);
      for (const Vec2& p : monotoneSubpath(*this, 0.0, lo))
        if (out.empty() || distance(out.back(), p) > 1e-12) out.push_back(p);
      if (s0 == lo) std::reverse(out.begin(), out.end());
      return out;
    }
  }
  return monotoneSubpath(*this, s0, s1);
}

void SpatialIndex::addToCell(int x, int y, SegRef ref) {
  if (x < 0 || x >= width_ || y < 0 || y >= height_) return;
  auto& bucket = buckets_[size_t(y) * width_ + x];
  if (!bucket.empty() && bucket.back() == ref) return;
  bucket.push_back(ref);
}

void SpatialIndex::insert(SegRef ref, const Vec2& a, const Vec2& b) {
  // Pixel (i, j) spans [i-0.5, i+0.5) x [j-0.5, j+0.5). The cell bounding box
  // of the endpoints is a superset of the cells the segment overlaps; for the
  // short segments produced by tracing it is at most a 2x2 block.
  int ax = int(std::lround(a.x)), ay = int(std::lround(a.y));
  int bx = int(std::lround(b.x)), by = int(std::lround(b.y));
  for (int y = std::min(ay, by); y <= std::max(ay, by); ++y)
    for (int x = std::min(ax, bx); x <= std::max(ax, bx); ++x) addToCell(x, y, ref);
}

std::vector<SegRef> SpatialIndex::candidates(const Vec2& a, const Vec2& b) const {
  std::vector<SegRef> out;
  int ax = int(std::lround(a.x)), ay = int(std::lround(a.y));
  int bx = int(std::lround(b.x)), by = int(std::lround(b.y));
  int x0 = std::max(0, std::min(ax, bx)), x1 = std::min(width_ - 1, std::max(ax, bx));
  int y0 = std::max(0, std::min(ay, by)), y1 = std::min(height_ - 1, std::max(ay, by));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const auto& bucket = buckets_[size_t(y) * width_ + x];
      out.insert(out.end(), bucket.begin(), bucket.end());
    }
  }
  return out;
}

FieldSampler::FieldSampler(const NarrowBand& band, const PolyVectorField& field,
                           const std::vector<int>& singularPixels)
    : band_(band) {
  size_t n = band.pixels.size();
  unitU_.resize(n);
  unitV_.resize(n);
  rootU_.resize(n);
  rootV_.resize(n);
  singular_.assign(n, 0);
  for (int i : singularPixels) singular_[i] = 1;
  for (size_t i = 0; i < n; ++i) {
    Frame f = field.frameAt(i);
    rootU_[i] = f.u;
    rootV_[i] = f.v;
    double nu = std::abs(f.u), nv = std::abs(f.v);
    unitU_[i] = nu > 0.0 ? f.u / nu : Complex(0, 0);
    unitV_[i] = nv > 0.0 ? f.v / nv : Complex(0, 0);
  }
}

Complex FieldSampler::principalRootAt(int bandIdx) const {
  Complex u = rootU_[bandIdx], v = rootV_[bandIdx];
  double nu = std::abs(u), nv = std::abs(v);
  if (std::abs(nu - nv) <= 1e-12 * std::max(1.0, std::max(nu, nv))) {
    return angleModPi(u) <= angleModPi(v) ? u : v;
  }
  return nu >= nv ? u : v;
}

Complex FieldSampler::seedRootAt(int bandIdx) const {
  Complex u = rootU_[bandIdx], v = rootV_[bandIdx];
  double nu = std::abs(u), nv = std::abs(v);
  // Strong gradient regularization pulls both root pairs toward unit length;
  // when the magnitudes are too close to carry a directional signal, the
  // measured tangent disambiguates the drawing direction instead.
  if (std::abs(nu - nv) <= 0.005 * std::max(nu, nv)) {
    Complex t = band_.pixels[bandIdx].tangent;
    if (std::abs(t) == 0.0) {
      // Flat interior pixel: average the neighbours' squared tangents (the
      // squaring makes opposite directions reinforce instead of cancel).
      const auto& px = band_.pixels[bandIdx];
      Complex sum(0, 0);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int j = band_.indexOf(px.x + dx, px.y + dy);
          if (j < 0) continue;
          Complex nt = band_.pixels[j].tangent;
          if (std::abs(nt) > 0.0) sum += nt * nt / std::abs(nt * nt);
        }
      if (std::abs(sum) > 1e-6) t = std::sqrt(sum / std::abs(sum));
    }
    if (std::abs(t) > 0.0) return lineAngle(u, t) <= lineAngle(v, t) ? u : v;
  }
  return principalRootAt(bandIdx);
}

FieldSampler::Sample FieldSampler::sampleMatched(const Vec2& pos, const Complex& refDir) const {
  Sample out;
  int ix = int(std::floor(pos.x)), iy = int(std::floor(pos.y));
  double fx = pos.x - ix, fy = pos.y - iy;
  const double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  const int offs[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  Complex matchedSum(0, 0), otherSum(0, 0), otherRef(0, 0);
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (wts[k] <= 0.0) continue;
    int idx = band_.indexOf(ix + offs[k][0], iy + offs[k][1]);
    if (idx < 0) continue;
    const Complex cand[4] = {unitU_[idx], -unitU_[idx], unitV_[idx], -unitV_[idx]};
    int best = -1;
    double bestDot = -1.0;
    for (int c = 0; c < 4; ++c) {
      double d = cand[c].real() * refDir.real() + cand[c].imag() * refDir.imag();
      if (d > bestDot && std::abs(cand[c]) > 0.0) {
        bestDot = d;
        best = c;
      }
    }
    if (best < 0) continue;
    Complex other = best < 2 ? unitV_[idx] : unitU_[idx];
    if (std::abs(otherRef) == 0.0) {
      otherRef = other;
    } else if (other.real() * otherRef.real() + other.imag() * otherRef.imag() < 0.0) {
      other = -other;
    }
    matchedSum += wts[k] * cand[best];
    otherSum += wts[k] * other;
    total += wts[k];
  }
  if (total <= 0.0 || std::abs(matchedSum) == 0.0) return out;
  out.ok = true;
  out.matched = matchedSum / std::abs(matchedSum);
  out.other = std::abs(otherSum) > 0.0 ? otherSum / std::abs(otherSum) : out.matched;
  return out;
}

namespace {

/// Fine grid over traced points used only for the proximity stopping rule.
/// Cell size 0.1 px; a candidate within kProximityStop of a segment always
/// has one of the segment's endpoints in the 3x3 cell block around it.
class ProximityGrid {
 public:
  explicit ProximityGrid(double h) : h_(h) {}

  struct PointRef {
    uint32_t half;  // curve * 2 + direction
    uint32_t idx;   // point index within the half (arc length = idx * h)
  };

  void insert(const Vec2& p, uint32_t half, uint32_t idx) {
    cells_[key(p)].push_back({half, idx});
  }

  /// True when `cand` must stop: within kProximityStop of a same-tangent
  /// segment (arc-gap rule applied for the candidate's own curve).
  bool shouldStop(const Vec2& cand, const Complex& dir,
                  const std::vector<std::vector<Vec2>>& halves, uint32_t myHalf,
                  uint32_t myIdx) const {
    int cx = cellCoord(cand.x), cy = cellCoord(cand.y);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        auto it = cells_.find(pack(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const PointRef& ref : it->second) {
          const auto& pts = halves[ref.half];
          const Vec2& p = pts[ref.idx];
          if (distance(cand, p) > kProximityStop + h_ + 1e-12) continue;
          if (ref.half >> 1 == myHalf >> 1) {
            double gap = (ref.half == myHalf) ? std::abs(double(myIdx) - double(ref.idx))
                                              : double(myIdx) + double(ref.idx);
            if (gap < kSelfProximityArcGap) continue;
          }
          for (int s = -1; s <= 0; ++s) {
            size_t a = size_t(long(ref.idx) + s);
            if (long(ref.idx) + s < 0 || a + 1 >= pts.size()) continue;
            if (pointSegmentDistance(cand, pts[a], pts[a + 1]) > kProximityStop) continue;
            Complex segDir = toComplex(pts[a + 1] - pts[a]);
            if (std::abs(segDir) == 0.0) continue;
            if (lineAngle(segDir, dir) < kSameTangentAngle) return true;
          }
          if (pts.size() == 1 && distance(cand, p) <= kProximityStop) return true;
        }
      }
    }
    return false;
  }

 private:
  static int cellCoord(double v) { return int(std::floor(v * 10.0)); }
  static int64_t pack(int x, int y) {
    return (int64_t(x) << 32) ^ (int64_t(y) & 0xffffffffLL);
  }
  static int64_t key(const Vec2& p) { return pack(cellCoord(p.x), cellCoord(p.y)); }

  double h_;
  std::unordered_map<int64_t, std::vector<PointRef>> cells_;
};

}  // namespace

TraceResult traceAll(const NarrowBand& band, const PolyVectorField& field,
                     const std::vector<int>& singularPixels, double h) {
  FieldSampler sampler(band, field, singularPixels);
  ProximityGrid grid(h);
  std::vector<std::vector<Vec2>> halves;
  halves.reserve(band.pixels.size() * 2);

  const size_t maxSteps = size_t(20.0 * (band.width + band.height) / h) + 1000;

  TraceResult result;
  result.index = SpatialIndex(band.width, band.height);
  result.curves.reserve(band.pixels.size());

  for (size_t seedIdx = 0; seedIdx < band.pixels.size(); ++seedIdx) {
    const auto& px = band.pixels[seedIdx];
    Vec2 seed(px.x, px.y);
    uint32_t curveId = uint32_t(result.curves.size());
    halves.emplace_back();
    halves.emplace_back();
    auto& h0 = halves[2 * curveId];
    auto& h1 = halves[2 * curveId + 1];
    h0.push_back(seed);
    h1.push_back(seed);
    grid.insert(seed, 2 * curveId, 0);

    Complex root = sampler.seedRootAt(int(seedIdx));
    bool traceable = std::abs(root) > 0.0 && !sampler.isSingular(int(seedIdx));
    bool loopClosed = false;
    if (traceable) {
      for (int dirSign = 0; dirSign < 2 && !loopClosed; ++dirSign) {
        uint32_t half = 2 * curveId + dirSign;
        auto& pts = halves[half];
        Vec2 pos = seed;
        Complex dir = (dirSign == 0 ? root : -root) / std::abs(root);
        uint32_t idx = 0;
        while (idx < maxSteps) {
          auto s = sampler.sampleMatched(pos, dir);
          if (!s.ok) break;
          Complex d = s.matched;
          Vec2 step = toVec(d) * h;
          Vec2 cand = pos + step;
          Vec2 mid = pos + step * 0.5;
          int midPix = band.indexAt(mid);
          if (midPix < 0) break;  // leaves the narrow band
          int candPix = band.indexAt(cand);
          if (candPix >= 0 && sampler.isSingular(candPix)) break;
          if (grid.shouldStop(cand, d, halves, half, idx + 1)) break;
          pts.push_back(cand);
          ++idx;
          grid.insert(cand, half, idx);
          pos = cand;
          dir = d;
        }
        // A half that returns next to its own seed closed a loop; the other
        // half would only duplicate it.
        if (dirSign == 0 && pts.size() > 2.0 * kSelfProximityArcGap &&
            distance(pts.back(), seed) <= 2.0 * h)
          loopClosed = true;
      }
    }

    TracedCurve curve;
    curve.closedLoop = loopClosed;
    curve.seedPixel = int(seedIdx);
    curve.points.reserve(h0.size() + h1.size() - 1);
    for (size_t i = h0.size(); i-- > 0;) curve.points.push_back(h0[i]);
    for (size_t i = 1; i < h1.size(); ++i) curve.points.push_back(h1[i]);
    curve.computeArclen();
    result.curves.push_back(std::move(curve));
  }

  for (size_t c = 0; c < result.curves.size(); ++c) {
    const auto& pts = result.curves[c].points;
    for (size_t s = 0; s + 1 < pts.size(); ++s) {
      result.index.insert({uint32_t(c), uint32_t(s)}, pts[s], pts[s + 1]);
    }
  }
  return result;
}

TestCurve traceTestCurve(const FieldSampler& sampler, const Vec2& seed,
                         const Complex& seedTangent, double h) {
  TestCurve out;
  auto seedSample = sampler.sampleMatched(seed, seedTangent);
  if (!seedSample.ok) return out;
  const NarrowBand& band = sampler.band();
  const size_t maxSteps = size_t(4.0 * (band.width + band.height) / h) + 100;

  // Trace both normal directions, propagating the matched field direction
  // pixel to pixel so the curve stays perpendicular to one root family.
  std::vector<Vec2> sides[2];
  std::vector<Complex> sideMatched[2];
  for (int side = 0; side < 2; ++side) {
    Complex ref = seedSample.matched;
    double rot = side == 0 ? 1.0 : -1.0;
    Vec2 pos = seed;
    for (size_t step = 0; step < maxSteps; ++step) {
      auto s = sampler.sampleMatched(pos, ref);
      if (!s.ok) break;
      ref = s.matched;
      Complex normal = Complex(0, rot) * ref;
      Vec2 cand = pos + toVec(normal) * h;
      Vec2 mid = pos + toVec(normal) * (0.5 * h);
      if (band.indexAt(mid) < 0) break;
      sides[side].push_back(cand);
      sideMatched[side].push_back(ref);
      pos = cand;
    }
  }

  for (size_t i = sides[1].size(); i-- > 0;) {
    out.points.push_back(sides[1][i]);
    out.matched.push_back(sideMatched[1][i]);
  }
  out.points.push_back(seed);
  out.matched.push_back(seedSample.matched);
  for (size_t i = 0; i < sides[0].size(); ++i) {
    out.points.push_back(sides[0][i]);
    out.matched.push_back(sideMatched[0][i]);
  }
  out.arclen.resize(out.points.size());
  double s = 0.0;
  for (size_t i = 0; i < out.points.size(); ++i) {
    if (i > 0) s += distance(out.points[i - 1], out.points[i]);
    out.arclen[i] = s;
  }
  out.seedArclen = out.arclen[sides[1].size()];
  return out;
}

std::vector<IntersectionHit> testCurveIntersections(const TestCurve& test,
                                                    const TraceResult& traced,
                                                    const FieldSampler& sampler) {
  std::vector<IntersectionHit> hits;
  for (size_t k = 0; k + 1 < test.points.size(); ++k) {
    const Vec2& a = test.points[k];
    const Vec2& b = test.points[k + 1];
    auto cands = traced.index.candidates(a, b);
    std::unordered_set<uint64_t> seen;
    for (const SegRef& ref : cands) {
      uint64_t packed = (uint64_t(ref.curve) << 32) | ref.seg;
      if (!seen.insert(packed).second) continue;
      const auto& curve = traced.curves[ref.curve];
      const Vec2& c0 = curve.points[ref.seg];
      const Vec2& c1 = curve.points[ref.seg + 1];
      SegmentHit hit = segmentIntersect(a, b, c0, c1);
      if (!hit.hit) continue;
      // Family filter: the crossing segment must match the test curve's
      // root family better than the other family at the hit point.
      Complex segDir = toComplex(c1 - c0);
      Complex matched = test.matched[k];
      auto local = sampler.sampleMatched(hit.pos, matched);
      Complex other = local.ok ? local.other : matched;
      if (lineAngle(segDir, matched) > lineAngle(segDir, other) + 1e-12) continue;
      IntersectionHit rec;
      rec.curve = int(ref.curve);
      rec.pos = hit.pos;
      rec.arcOnTest = test.arclen[k] + hit.t * distance(a, b);
      rec.arcOnCurve = curve.arclen[ref.seg] + hit.u * distance(c0, c1);
      hits.push_back(rec);
    }
  }
  std::sort(hits.begin(), hits.end(), [](const IntersectionHit& x, const IntersectionHit& y) {
    if (x.arcOnTest != y.arcOnTest) return x.arcOnTest < y.arcOnTest;
    if (x.curve != y.curve) return x.curve < y.curve;
    return x.arcOnCurve < y.arcOnCurve;
  });
  // Segment joints can report the same crossing twice.
  std::vector<IntersectionHit> out;
  for (const auto& hit : hits) {
    if (!out.empty() && out.back().curve == hit.curve &&
        std::abs(out.back().arcOnCurve - hit.arcOnCurve) < 1e-9) {
      continue;
    }
    out.push_back(hit);
  }
  return out;
}

void dumpCurvesSvg(const std::vector<TracedCurve>& curves, int width, int height,
                   const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 " << width
    << ' ' << height << "\">\n";
  for (const auto& curve : curves) {
    if (curve.points.empty()) continue;
    f << "<path fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"0.1\" d=\"M ";
    for (size_t i = 0; i < curve.points.size(); ++i) {
      if (i == 1) f << "L ";
      f << curve.points[i].x << ' ' << curve.points[i].y << ' ';
    }
    f << "\"/>\n";
  }
  f << "</svg>\n";
}

}  // namespace linevec
