#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "linevec/topology.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace linevec;

namespace {

struct Stage {
  NarrowBand band;
  PolyVectorField field;
  std::vector<int> singular;
  TraceResult traced;
  std::vector<Bundle> bundles;
  TopologyGraph graph;
};

Stage buildStage(const IntensityGrid& img) {
  Stage s;
  RelaxResult relax = relaxSingularities(extractNarrowBand(img), SolverParams{});
  s.band = relax.band;
  s.field = relax.field;
  s.singular = relax.singular;
  s.traced = traceAll(s.band, s.field, s.singular, kDefaultStep);
  FieldSampler sampler(s.band, s.field, s.singular);
  s.bundles = buildBundles(s.traced, sampler);
  s.graph = buildGraph(s.bundles);
  return s;
}

int componentCount(const TopologyGraph& g) {
  auto adj = g.adjacency();
  std::vector<int> comp(g.vertices.size(), -1);
  int n = 0;
  for (size_t s = 0; s < g.vertices.size(); ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{int(s)};
    comp[s] = n;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int e : adj[v]) {
        int w = g.otherEnd(e, v);
        if (comp[w] < 0) {
          comp[w] = n;
          stack.push_back(w);
        }
      }
    }
    ++n;
  }
  return n;
}

int cycleCount(const TopologyGraph& g) {
  return int(g.edges.size()) - int(g.vertices.size()) + componentCount(g);
}

int leafCount(const TopologyGraph& g) {
  int n = 0;
  for (int d : g.degrees()) n += d == 1;
  return n;
}

int maxDegree(const TopologyGraph& g) {
  int m = 0;
  for (int d : g.degrees()) m = std::max(m, d);
  return m;
}

Bundle pointBundle(double x, double y, int curve = 0, double arc = 0.0) {
  Bundle b;
  b.members.push_back({curve, arc, Vec2(x, y)});
  b.recomputeGeometry();
  return b;
}

std::multiset<int> edgeCurveSupport(const TopologyGraph& g) {
  std::multiset<int> out;
  for (const auto& e : g.edges) {
    std::set<int> uniq(e.curves.begin(), e.curves.end());
    out.insert(uniq.begin(), uniq.end());
  }
  return out;
}

}  // namespace

TEST_CASE("bundle geometry invariants on a straight bar") {
  Stage s = buildStage(synth::makeBar(48, 3.0, true));
  REQUIRE(!s.bundles.empty());
  for (const auto& b : s.bundles) {
    REQUIRE(!b.members.empty());
    // Barycenter is the member mean.
    Vec2 mean(0, 0);
    for (const auto& m : b.members) mean = mean + m.pos;
    mean = mean * (1.0 / double(b.members.size()));
    CHECK(distance(mean, b.barycenter) < 1e-9);
    // Width is the max pairwise member distance.
    double w = 0.0;
    for (size_t i = 0; i < b.members.size(); ++i)
      for (size_t j = i + 1; j < b.members.size(); ++j)
        w = std::max(w, distance(b.members[i].pos, b.members[j].pos));
    CHECK(b.width == doctest::Approx(w).epsilon(1e-12));
  }
  // Interior cross-sections stay within the 3 px stroke and group at least
  // two of the traced rails (rails sit one pixel apart, exactly at the
  // grouping threshold, so a cross-section need not span the full width).
  int audited = 0, multi = 0;
  for (const auto& b : s.bundles) {
    if (b.barycenter.x < 12.0 || b.barycenter.x > 36.0) continue;
    CHECK(b.width <= 4.0);
    if (b.members.size() >= 2) ++multi;
    ++audited;
  }
  CHECK(audited > 0);
  CHECK(multi > 0);
}

TEST_CASE("separated parallel strokes never share a bundle") {
  Stage s = buildStage(synth::makeParallel(64, 3.0, 2.0));
  for (const auto& b : s.bundles) {
    double ymin = 1e9, ymax = -1e9;
    for (const auto& m : b.members) {
      ymin = std::min(ymin, m.pos.y);
      ymax = std::max(ymax, m.pos.y);
    }
    // The two centerlines are 5 px apart; a mixed bundle would span >= 4 px.
    CHECK(ymax - ymin < 4.0);
  }
}

TEST_CASE("crossing-stroke bundles hold a single direction family") {
  Stage s = buildStage(synth::makeX(64, 3.0));
  for (const auto& b : s.bundles) {
    if (distance(b.barycenter, Vec2(32, 32)) > 4.0) continue;
    // All member curves of one bundle run in the same direction locally.
    std::vector<Complex> dirs;
    for (const auto& m : b.members) {
      const TracedCurve& c = s.traced.curves[m.curve];
      Vec2 p0 = c.pointAt(std::max(0.0, m.arcOnCurve - 0.5));
      Vec2 p1 = c.pointAt(std::min(c.length(), m.arcOnCurve + 0.5));
      Complex d = toComplex(p1 - p0);
      if (std::abs(d) > 1e-9) dirs.push_back(d);
    }
    for (size_t i = 1; i < dirs.size(); ++i) CHECK(lineAngle(dirs[0], dirs[i]) < M_PI / 6.0);
  }
}

TEST_CASE("bundles in a row along one curve form a path graph") {
  std::vector<Bundle> bundles = {pointBundle(0, 0, 0, 0.0), pointBundle(1, 0, 0, 1.0),
                                 pointBundle(2, 0, 0, 2.0)};
  TopologyGraph g = buildGraph(bundles);
  REQUIRE(g.vertices.size() == 3);
  REQUIRE(g.edges.size() == 2);
  auto deg = g.degrees();
  CHECK(std::count(deg.begin(), deg.end(), 1) == 2);
  CHECK(std::count(deg.begin(), deg.end(), 2) == 1);
  // No edge skips the middle bundle.
  for (const auto& e : g.edges) CHECK(std::abs(e.a - e.b) == 1);
  for (const auto& e : g.edges) CHECK(!e.curves.empty());
}

TEST_CASE("empty bundle list gives an empty graph") {
  TopologyGraph g = buildGraph({});
  CHECK(g.vertices.empty());
  CHECK(g.edges.empty());
}

TEST_CASE("crossing strokes stay in separate components before repair") {
  Stage s = buildStage(synth::makeX(64, 3.0));
  CHECK(componentCount(s.graph) == 2);
  TopologyGraph g = contractSmallLoops(s.graph, s.band, kDefaultNHole);
  g = pruneBranches(g);
  g = unzipParallel(g);
  CHECK(componentCount(g) == 2);
  CHECK(leafCount(g) == 4);
  CHECK(maxDegree(g) <= 2);
}

TEST_CASE("tight triangle cycle is contracted") {
  Stage s = buildStage(synth::makeBar(32, 5.0, true));
  // Triangle of vertices inside the dark bar: encloses zero white pixels.
  std::vector<Bundle> bundles = {pointBundle(14, 15.6, 0, 0.0), pointBundle(16, 16.4, 1, 0.0),
                                 pointBundle(18, 15.6, 2, 0.0)};
  TopologyGraph g;
  g.vertices = bundles;
  g.edges = {{0, 1, {0}, false}, {1, 2, {1}, false}, {0, 2, {2}, false}};
  REQUIRE(countEnclosedWhitePixels({Vec2(14, 15.6), Vec2(16, 16.4), Vec2(18, 15.6)}, s.band) == 0);
  TopologyGraph out = contractSmallLoops(g, s.band, kDefaultNHole);
  CHECK(out.vertices.size() == 1);
  CHECK(out.edges.empty());
}

TEST_CASE("cycle around a real hole is preserved") {
  IntensityGrid img = synth::makeCircleImage(10.0, 3.0);
  Stage s = buildStage(img);
  // Square loop just inside the ring: encloses the whole white disc.
  double c = img.width / 2.0;
  double r = 10.0 / std::sqrt(2.0);
  std::vector<Vec2> corners = {Vec2(c - r, c - r), Vec2(c + r, c - r), Vec2(c + r, c + r),
                               Vec2(c - r, c + r)};
  REQUIRE(countEnclosedWhitePixels(corners, s.band) >= 10);
  TopologyGraph g;
  for (size_t i = 0; i < 4; ++i) g.vertices.push_back(pointBundle(corners[i].x, corners[i].y, int(i)));
  g.edges = {{0, 1, {0}, false}, {1, 2, {1}, false}, {2, 3, {2}, false}, {0, 3, {3}, false}};
  TopologyGraph out = contractSmallLoops(g, s.band, kDefaultNHole);
  CHECK(out.vertices.size() == 4);
  CHECK(out.edges.size() == 4);
}

TEST_CASE("ring glyph keeps its loop at large radius, loses it when tiny") {
  IntensityGrid big = synth::makeCircleImage(10.0, 3.0);
  IntensityGrid tiny = synth::makeCircleImage(2.0, 3.0);
  REQUIRE(oracle::enclosedWhitePixels(big) >= kDefaultNHole);
  REQUIRE(oracle::enclosedWhitePixels(tiny) < kDefaultNHole);

  Stage sb = buildStage(big);
  TopologyGraph gb = contractSmallLoops(sb.graph, sb.band, kDefaultNHole);
  CHECK(cycleCount(gb) >= 1);

  Stage st = buildStage(tiny);
  TopologyGraph gt = contractSmallLoops(st.graph, st.band, kDefaultNHole);
  CHECK(cycleCount(gt) == 0);
}

TEST_CASE("loop contraction is idempotent") {
  Stage s = buildStage(synth::makeCircleImage(10.0, 3.0));
  TopologyGraph once = contractSmallLoops(s.graph, s.band, kDefaultNHole);
  TopologyGraph twice = contractSmallLoops(once, s.band, kDefaultNHole);
  CHECK(twice.vertices.size() == once.vertices.size());
  CHECK(twice.edges.size() == once.edges.size());
}

TEST_CASE("a short stub buried in another stroke is pruned") {
  // Horizontal chain of wide cross-sections with a 1 px stub hanging off the
  // middle vertex, entirely inside the chain's stroke body.
  TopologyGraph g;
  for (int i = 0; i < 5; ++i) {
    Bundle b;
    b.members.push_back({i, 0.0, Vec2(2.0 * i, -1.0)});
    b.members.push_back({i, 0.1, Vec2(2.0 * i, 0.0)});
    b.members.push_back({i, 0.2, Vec2(2.0 * i, 1.0)});
    b.recomputeGeometry();
    g.vertices.push_back(b);
  }
  g.vertices.push_back(pointBundle(4.0, 1.0, 99));  // stub leaf
  for (int i = 0; i + 1 < 5; ++i) g.edges.push_back({i, i + 1, {i}, false});
  g.edges.push_back({2, 5, {99}, false});
  TopologyGraph out = pruneBranches(g);
  CHECK(out.vertices.size() == 5);
  CHECK(leafCount(out) == 2);
}

TEST_CASE("three long legs of a junction are all retained") {
  TopologyGraph g;
  g.vertices.push_back(pointBundle(0, 0));
  int id = 1;
  for (Vec2 dir : {Vec2(1, 0), Vec2(-0.5, 0.87), Vec2(-0.5, -0.87)}) {
    int prev = 0;
    for (int k = 1; k <= 10; ++k) {
      g.vertices.push_back(pointBundle(dir.x * 2.0 * k, dir.y * 2.0 * k, id));
      g.edges.push_back({prev, id, {id}, false});
      prev = id++;
    }
  }
  TopologyGraph out = pruneBranches(g);
  CHECK(out.vertices.size() == g.vertices.size());
  CHECK(out.edges.size() == g.edges.size());
}

TEST_CASE("touching parallel strokes unzip into two disjoint paths") {
  Stage s = buildStage(synth::makeTouchingParallel(64, 3.0));
  TopologyGraph g = contractSmallLoops(s.graph, s.band, kDefaultNHole);
  g = pruneBranches(g);
  g = unzipParallel(g);
  CHECK(componentCount(g) == 2);
  CHECK(leafCount(g) == 4);
  CHECK(maxDegree(g) <= 2);
}

TEST_CASE("unzipping a plain path is a no-op") {
  TopologyGraph g;
  for (int i = 0; i < 6; ++i) g.vertices.push_back(pointBundle(2.0 * i, 0.0, 0, double(i)));
  for (int i = 0; i + 1 < 6; ++i) g.edges.push_back({i, i + 1, {0}, false});
  TopologyGraph out = unzipParallel(g);
  CHECK(out.vertices.size() == 6);
  CHECK(out.edges.size() == 5);
}

TEST_CASE("unzipping preserves the set of supporting curves") {
  Stage s = buildStage(synth::makeTouchingParallel(64, 3.0));
  TopologyGraph g = contractSmallLoops(s.graph, s.band, kDefaultNHole);
  g = pruneBranches(g);
  std::set<int> before, after;
  for (const auto& e : g.edges) before.insert(e.curves.begin(), e.curves.end());
  TopologyGraph out = unzipParallel(g);
  for (const auto& e : out.edges) after.insert(e.curves.begin(), e.curves.end());
  CHECK(before == after);
}

TEST_CASE("no singular pixels leaves the graph untouched") {
  Stage s = buildStage(synth::makeBar(32, 3.0, true));
  TopologyGraph g = s.graph;
  TopologyGraph out = repairSingularityGaps(g, s.band, {});
  CHECK(out.vertices.size() == g.vertices.size());
  CHECK(out.edges.size() == g.edges.size());
}

TEST_CASE("facing leaves at a singular pixel are bridged") {
  Stage s = buildStage(synth::makeBar(48, 3.0, true));
  // Two collinear half-strokes with a 2 px gap at x = 24 on the centerline.
  TopologyGraph g;
  for (int i = 0; i < 4; ++i) g.vertices.push_back(pointBundle(17.0 + 2.0 * i, 24.0, 0, double(i)));
  for (int i = 0; i < 4; ++i) g.vertices.push_back(pointBundle(25.0 + 2.0 * i, 24.0, 1, double(i)));
  for (int i = 0; i + 1 < 4; ++i) {
    g.edges.push_back({i, i + 1, {0}, false});
    g.edges.push_back({4 + i, 4 + i + 1, {1}, false});
  }
  int singularIdx = s.band.indexOf(24, 24);
  REQUIRE(singularIdx >= 0);
  TopologyGraph out = repairSingularityGaps(g, s.band, {singularIdx});
  CHECK(componentCount(out) == 1);
  REQUIRE(out.edges.size() == g.edges.size() + 1);
  const TopoEdge& bridge = out.edges.back();
  CHECK(bridge.bridge);
  auto key = std::minmax(bridge.a, bridge.b);
  CHECK(key.first == 3);
  CHECK(key.second == 4);
}

TEST_CASE("distant leaves are never bridged") {
  Stage s = buildStage(synth::makeBar(48, 3.0, true));
  TopologyGraph g;
  g.vertices.push_back(pointBundle(10.0, 24.0, 0, 0.0));
  g.vertices.push_back(pointBundle(12.0, 24.0, 0, 1.0));
  g.vertices.push_back(pointBundle(36.0, 24.0, 1, 0.0));
  g.vertices.push_back(pointBundle(38.0, 24.0, 1, 1.0));
  g.edges.push_back({0, 1, {0}, false});
  g.edges.push_back({2, 3, {1}, false});
  int singularIdx = s.band.indexOf(13, 24);
  REQUIRE(singularIdx >= 0);
  // Nearest non-adjacent vertex to leaf (12, 24) is 24 px away: over the cap.
  TopologyGraph out = repairSingularityGaps(g, s.band, {singularIdx});
  CHECK(componentCount(out) == 2);
  CHECK(out.edges.size() == 2);
}

TEST_CASE("pruning terminates and only removes leaf branches") {
  Stage s = buildStage(synth::makeT(64, 3.0));
  TopologyGraph g = contractSmallLoops(s.graph, s.band, kDefaultNHole);
  int beforeComp = componentCount(g);
  TopologyGraph out = pruneBranches(g);
  CHECK(componentCount(out) <= beforeComp);
  CHECK(out.vertices.size() <= g.vertices.size());
}
