#include "linevec/topology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace linevec {

namespace {

constexpr double kBundleGap = 1.0;          // max gap between adjacent members
constexpr double kLeafRepairRadius = 2.0;   // leaf-to-singularity adjacency
constexpr double kRepairCap = 10.0;         // max repair edge length
constexpr int kCycleSearchDepth = 64;
// Rows of one stroke sit one pixel apart while distinct parallel strokes are
// separated by at least a full pixel of background (two pixels center to
// center), so a point within 1.5 px of a bundle's member cloud lies inside
// that stroke's body.
constexpr double kStrokeBodyGap = 1.5;

/// Hash grid over all member points of a graph, for "is some other stroke's
/// body within kStrokeBodyGap of this point" queries without an all-pairs
/// scan. Cells are kStrokeBodyGap wide so the 3x3 neighborhood of the query
/// cell covers the whole search radius.
class MemberGrid {
 public:
  explicit MemberGrid(const TopologyGraph& g) {
    for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v)
      for (const auto& m : g.vertices[v].members) cells_[key(m.pos)].push_back({v, m.pos});
  }

  /// True when a member point of a vertex accepted by `ok` lies strictly
  /// within kStrokeBodyGap of p.
  template <class Pred>
  bool nearAccepted(const Vec2& p, Pred ok) const {
    std::int64_t cx = coord(p.x), cy = coord(p.y);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find(pack(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const auto& e : it->second)
          if (distance(e.pos, p) < kStrokeBodyGap && ok(e.vertex)) return true;
      }
    return false;
  }

 private:
  struct Entry {
    int vertex;
    Vec2 pos;
  };
  static std::int64_t coord(double x) { return static_cast<std::int64_t>(std::floor(x / kStrokeBodyGap)); }
  static std::int64_t pack(std::int64_t cx, std::int64_t cy) { return cx * 0x100000001LL + cy; }
  static std::int64_t key(const Vec2& p) { return pack(coord(p.x), coord(p.y)); }
  std::unordered_map<std::int64_t, std::vector<Entry>> cells_;
};

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

void Bundle::recomputeGeometry() {
  barycenter = Vec2{0.0, 0.0};
  width = 0.0;
  if (members.empty()) return;
  for (const auto& m : members) barycenter = barycenter + m.pos;
  barycenter = barycenter * (1.0 / static_cast<double>(members.size()));
  for (size_t i = 0; i < members.size(); ++i)
    for (size_t j = i + 1; j < members.size(); ++j)
      width = std::max(width, distance(members[i].pos, members[j].pos));
}

std::vector<int> Bundle::curveIds() const {
  std::vector<int> ids;
  ids.reserve(members.size());
  for (const auto& m : members) ids.push_back(m.curve);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<std::vector<int>> TopologyGraph::adjacency() const {
  std::vector<std::vector<int>> adj(vertices.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e].a].push_back(static_cast<int>(e));
    adj[edges[e].b].push_back(static_cast<int>(e));
  }
  return adj;
}

std::vector<int> TopologyGraph::degrees() const {
  std::vector<int> deg(vertices.size(), 0);
  for (const auto& e : edges) {
    ++deg[e.a];
    ++deg[e.b];
  }
  return deg;
}

namespace {

/// Drops vertices flagged dead, remapping edge endpoints; edges touching a
/// dead vertex are removed.
TopologyGraph compact(const TopologyGraph& g, const std::vector<char>& alive) {
  TopologyGraph out;
  std::vector<int> remap(g.vertices.size(), -1);
  for (size_t v = 0; v < g.vertices.size(); ++v) {
    if (!alive[v]) continue;
    remap[v] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(g.vertices[v]);
  }
  for (const auto& e : g.edges) {
    if (remap[e.a] < 0 || remap[e.b] < 0) continue;
    TopoEdge ne = e;
    ne.a = remap[e.a];
    ne.b = remap[e.b];
    out.edges.push_back(std::move(ne));
  }
  return out;
}

uint64_t memberSetHash(const std::vector<BundleMember>& members) {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  for (const auto& m : members) {
    mix(static_cast<uint64_t>(m.curve));
    mix(static_cast<uint64_t>(std::llround(m.arcOnCurve * 1e9)));
  }
  return h;
}

bool sameMembers(const std::vector<BundleMember>& a, const std::vector<BundleMember>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].curve != b[i].curve || std::abs(a[i].arcOnCurve - b[i].arcOnCurve) > 1e-9)
      return false;
  return true;
}

Bundle bundleFromSeed(const TraceResult& traced, const FieldSampler& sampler, int curve,
                      bool atEnd) {
  const TracedCurve& c = traced.curves[curve];
  Bundle out;
  Vec2 seedPos = atEnd ? c.points.back() : c.points.front();
  double seedArc = atEnd ? c.length() : 0.0;
  Vec2 tangent;
  if (c.points.size() >= 2) {
    tangent = atEnd ? c.points.back() - c.points[c.points.size() - 2]
                    : c.points[1] - c.points.front();
  } else {
    Complex r = sampler.principalRootAt(c.seedPixel);
    tangent = Vec2{r.real(), r.imag()};
  }
  if (tangent.norm() < 1e-12) tangent = Vec2{1.0, 0.0};

  TestCurve test = traceTestCurve(sampler, seedPos, Complex{tangent.x, tangent.y});
  std::vector<IntersectionHit> hits;
  if (test.points.size() >= 2) hits = testCurveIntersections(test, traced, sampler);

  auto makeOwn = [&]() {
    IntersectionHit own;
    own.curve = curve;
    own.arcOnCurve = seedArc;
    own.arcOnTest = test.points.empty() ? 0.0 : test.seedArclen;
    own.pos = seedPos;
    return own;
  };

  if (hits.empty()) {
    out.members.push_back(BundleMember{curve, seedArc, seedPos});
    out.recomputeGeometry();
    return out;
  }

  // Locate this curve's own crossing (synthesize it if the intersection test
  // missed the seed itself), then grow the group outward while gaps stay
  // below one pixel.
  int ownIdx = -1;
  double best = std::numeric_limits<double>::max();
  for (size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].curve != curve) continue;
    double d = std::abs(hits[i].arcOnTest - test.seedArclen);
    if (d < best) {
      best = d;
      ownIdx = static_cast<int>(i);
    }
  }
  if (ownIdx < 0 || best > kBundleGap) {
    IntersectionHit own = makeOwn();
    auto it = std::lower_bound(hits.begin(), hits.end(), own.arcOnTest,
                               [](const IntersectionHit& h, double arc) { return h.arcOnTest < arc; });
    ownIdx = static_cast<int>(it - hits.begin());
    hits.insert(it, own);
  }

  int lo = ownIdx;
  int hi = ownIdx;
  while (lo > 0 && distance(hits[lo - 1].pos, hits[lo].pos) < kBundleGap) --lo;
  while (hi + 1 < static_cast<int>(hits.size()) &&
         distance(hits[hi + 1].pos, hits[hi].pos) < kBundleGap)
    ++hi;
  for (int i = lo; i <= hi; ++i)
    out.members.push_back(BundleMember{hits[i].curve, hits[i].arcOnCurve, hits[i].pos});
  std::sort(out.members.begin(), out.members.end(), [](const BundleMember& x, const BundleMember& y) {
    return x.curve != y.curve ? x.curve < y.curve : x.arcOnCurve < y.arcOnCurve;
  });
  out.recomputeGeometry();
  return out;
}

}  // namespace

std::vector<Bundle> buildBundles(const TraceResult& traced, const FieldSampler& sampler) {
  std::vector<Bundle> bundles;
  std::unordered_map<uint64_t, std::vector<int>> seen;
  auto add = [&](Bundle b) {
    uint64_t h = memberSetHash(b.members);
    for (int idx : seen[h])
      if (sameMembers(bundles[idx].members, b.members)) return;
    seen[h].push_back(static_cast<int>(bundles.size()));
    bundles.push_back(std::move(b));
  };
  for (size_t ci = 0; ci < traced.curves.size(); ++ci) {
    const TracedCurve& c = traced.curves[ci];
    if (c.points.empty()) continue;
    add(bundleFromSeed(traced, sampler, static_cast<int>(ci), false));
    if (c.points.size() >= 2)
      add(bundleFromSeed(traced, sampler, static_cast<int>(ci), true));
  }
  return bundles;
}

TopologyGraph buildGraph(std::vector<Bundle> bundles) {
  TopologyGraph g;
  g.vertices = std::move(bundles);

  // Per curve, order its members across all bundles by arc length; each pair
  // of consecutive members in distinct bundles contributes an edge.
  struct Entry {
    double arc;
    int bundle;
  };
  std::unordered_map<int, std::vector<Entry>> perCurve;
  for (size_t v = 0; v < g.vertices.size(); ++v)
    for (const auto& m : g.vertices[v].members)
      perCurve[m.curve].push_back(Entry{m.arcOnCurve, static_cast<int>(v)});

  std::map<std::pair<int, int>, std::vector<int>> edgeCurves;
  std::vector<int> curveIds;
  curveIds.reserve(perCurve.size());
  for (auto& [curve, entries] : perCurve) curveIds.push_back(curve);
  std::sort(curveIds.begin(), curveIds.end());
  for (int curve : curveIds) {
    auto& entries = perCurve[curve];
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.arc != b.arc ? a.arc < b.arc : a.bundle < b.bundle;
    });
    for (size_t i = 0; i + 1 < entries.size(); ++i) {
      int a = entries[i].bundle;
      int b = entries[i + 1].bundle;
      if (a == b) continue;
      auto key = std::minmax(a, b);
      auto& cs = edgeCurves[{key.first, key.second}];
      if (cs.empty() || cs.back() != curve) cs.push_back(curve);
    }
  }
  for (auto& [key, curves] : edgeCurves) {
    TopoEdge e;
    e.a = key.first;
    e.b = key.second;
    std::sort(curves.begin(), curves.end());
    curves.erase(std::unique(curves.begin(), curves.end()), curves.end());
    e.curves = std::move(curves);
    g.edges.push_back(std::move(e));
  }
  return g;
}

int countEnclosedWhitePixels(const std::vector<Vec2>& polygon, const NarrowBand& band) {
  if (polygon.size() < 3) return 0;
  double minX = polygon[0].x, maxX = polygon[0].x, minY = polygon[0].y, maxY = polygon[0].y;
  for (const auto& p : polygon) {
    minX = std::min(minX, p.x);
    maxX = std::max(maxX, p.x);
    minY = std::min(minY, p.y);
    maxY = std::max(maxY, p.y);
  }
  int x0 = std::max(0, static_cast<int>(std::ceil(minX)));
  int x1 = std::min(band.width - 1, static_cast<int>(std::floor(maxX)));
  int y0 = std::max(0, static_cast<int>(std::ceil(minY)));
  int y1 = std::min(band.height - 1, static_cast<int>(std::floor(maxY)));
  int count = 0;
  const size_t n = polygon.size();
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (band.indexAt(Vec2{static_cast<double>(x), static_cast<double>(y)}) >= 0) continue;
      bool inside = false;
      for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = polygon[i];
        const Vec2& b = polygon[j];
        if ((a.y > y) != (b.y > y) &&
            x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x)
          inside = !inside;
      }
      if (inside) ++count;
    }
  }
  return count;
}

namespace {

/// Shortest vertex cycle through edge e (BFS avoiding e itself, hop-capped);
/// empty if none found within the cap.
std::vector<int> cycleThroughEdge(const TopologyGraph& g,
                                  const std::vector<std::vector<int>>& adj, int e) {
  int src = g.edges[e].a;
  int dst = g.edges[e].b;
  std::unordered_map<int, int> prev;  // vertex -> edge used to reach it
  std::deque<std::pair<int, int>> queue{{src, 0}};
  prev[src] = -1;
  while (!queue.empty()) {
    auto [v, depth] = queue.front();
    queue.pop_front();
    if (v == dst) break;
    if (depth >= kCycleSearchDepth) continue;
    for (int ne : adj[v]) {
      if (ne == e) continue;
      int u = g.otherEnd(ne, v);
      if (prev.count(u)) continue;
      prev[u] = ne;
      queue.emplace_back(u, depth + 1);
    }
  }
  if (!prev.count(dst)) return {};
  std::vector<int> cycle;
  int v = dst;
  while (v != src) {
    cycle.push_back(v);
    int pe = prev[v];
    v = g.otherEnd(pe, v);
  }
  cycle.push_back(src);
  return cycle;
}

TopologyGraph mergeGroups(const TopologyGraph& g, UnionFind& uf) {
  TopologyGraph out;
  std::vector<int> remap(g.vertices.size(), -1);
  for (size_t v = 0; v < g.vertices.size(); ++v) {
    int root = uf.find(static_cast<int>(v));
    if (remap[root] < 0) {
      remap[root] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(Bundle{});
      out.vertices.back().fromUnzip = g.vertices[root].fromUnzip;
    }
    Bundle& dst = out.vertices[remap[root]];
    const Bundle& src = g.vertices[v];
    dst.members.insert(dst.members.end(), src.members.begin(), src.members.end());
  }
  for (auto& b : out.vertices) {
    std::sort(b.members.begin(), b.members.end(), [](const BundleMember& x, const BundleMember& y) {
      return x.curve != y.curve ? x.curve < y.curve : x.arcOnCurve < y.arcOnCurve;
    });
    b.members.erase(std::unique(b.members.begin(), b.members.end(),
                                [](const BundleMember& x, const BundleMember& y) {
                                  return x.curve == y.curve &&
                                         std::abs(x.arcOnCurve - y.arcOnCurve) < 1e-9;
                                }),
                    b.members.end());
    b.recomputeGeometry();
  }
  std::map<std::pair<int, int>, int> dedup;  // merged endpoints -> out edge id
  for (const auto& e : g.edges) {
    int a = remap[uf.find(e.a)];
    int b = remap[uf.find(e.b)];
    if (a == b) continue;
    auto key = std::minmax(a, b);
    auto it = dedup.find({key.first, key.second});
    if (it == dedup.end()) {
      TopoEdge ne = e;
      ne.a = key.first;
      ne.b = key.second;
      dedup[{key.first, key.second}] = static_cast<int>(out.edges.size());
      out.edges.push_back(std::move(ne));
    } else {
      TopoEdge& oe = out.edges[it->second];
      oe.bridge = oe.bridge && e.bridge;
      std::vector<int> merged;
      std::set_union(oe.curves.begin(), oe.curves.end(), e.curves.begin(), e.curves.end(),
                     std::back_inserter(merged));
      oe.curves = std::move(merged);
    }
  }
  return out;
}

}  // namespace

TopologyGraph contractSmallLoops(TopologyGraph g, const NarrowBand& band, int nHole) {
  bool changed = true;
  while (changed) {
    changed = false;
    auto adj = g.adjacency();

    // Spanning forest; every non-tree edge closes exactly one candidate cycle.
    UnionFind forest(static_cast<int>(g.vertices.size()));
    std::vector<int> nonTree;
    for (size_t e = 0; e < g.edges.size(); ++e)
      if (!forest.unite(g.edges[e].a, g.edges[e].b)) nonTree.push_back(static_cast<int>(e));

    UnionFind merges(static_cast<int>(g.vertices.size()));
    std::vector<char> touched(g.vertices.size(), 0);
    for (int e : nonTree) {
      std::vector<int> cycle = cycleThroughEdge(g, adj, e);
      if (cycle.empty()) continue;
      bool overlap = false;
      for (int v : cycle) overlap = overlap || touched[v];
      if (overlap) continue;
      std::vector<Vec2> poly;
      poly.reserve(cycle.size());
      for (int v : cycle) poly.push_back(g.vertices[v].barycenter);
      if (countEnclosedWhitePixels(poly, band) >= nHole) continue;
      for (int v : cycle) {
        touched[v] = 1;
        merges.unite(cycle[0], v);
      }
      changed = true;
    }
    if (changed) g = mergeGroups(g, merges);
  }
  return g;
}

TopologyGraph pruneBranches(TopologyGraph g) {
  struct Branch {
    std::vector<int> verts;  // junction excluded, leaf last
    std::vector<int> edges;  // junction-side edge first
    double fullLen = 0.0;
  };

  bool pruned = true;
  while (pruned) {
    pruned = false;
    auto adj = g.adjacency();
    auto deg = g.degrees();
    std::vector<char> alive(g.vertices.size(), 1);
    MemberGrid grid(g);

    for (int j = 0; j < static_cast<int>(g.vertices.size()); ++j) {
      while (alive[j] && deg[j] > 2) {
        // Enumerate leaf branches hanging off junction j.
        std::vector<Branch> branches;
        for (int e0 : adj[j]) {
          Branch br;
          int prev = j;
          int cur = g.otherEnd(e0, j);
          int edge = e0;
          bool isBranch = false;
          while (alive[cur]) {
            br.verts.push_back(cur);
            br.edges.push_back(edge);
            br.fullLen += g.edgeLength(edge);
            if (deg[cur] == 1) {
              isBranch = true;
              break;
            }
            if (deg[cur] != 2 || cur == j) break;
            int next = -1;
            for (int ne : adj[cur])
              if (ne != edge && alive[g.otherEnd(ne, cur)]) next = ne;
            if (next < 0) break;
            prev = cur;
            edge = next;
            cur = g.otherEnd(edge, prev);
            if (cur == j) break;
          }
          if (isBranch) branches.push_back(std::move(br));
        }
        if (branches.empty()) break;
        auto it = std::min_element(branches.begin(), branches.end(),
                                   [](const Branch& a, const Branch& b) { return a.fullLen < b.fullLen; });
        const Branch& br = *it;

        // Length attributed to each branch vertex: half of each incident
        // branch edge. A vertex is "inside" when some other stroke's vertex
        // lies within the sum of the two half-widths.
        std::vector<char> inBranch(g.vertices.size(), 0);
        for (int v : br.verts) inBranch[v] = 1;
        double outsideLen = 0.0;
        for (size_t i = 0; i < br.verts.size(); ++i) {
          double attr = 0.5 * g.edgeLength(br.edges[i]);
          if (i + 1 < br.edges.size()) attr += 0.5 * g.edgeLength(br.edges[i + 1]);
          const Bundle& bv = g.vertices[br.verts[i]];
          bool inside = grid.nearAccepted(
              bv.barycenter, [&](int u) { return alive[u] && !inBranch[u]; });
          if (!inside) outsideLen += attr;
        }
        if (outsideLen < std::max(br.fullLen / 4.0, 1.0)) {
          for (int v : br.verts) {
            alive[v] = 0;
            deg[v] = 0;
          }
          // Junction loses the branch edge; its other incident counts stand.
          --deg[j];
          pruned = true;
        } else {
          break;  // shortest surviving branch: junction is settled
        }
      }
    }
    if (pruned) g = compact(g, std::vector<char>(alive.begin(), alive.end()));
  }

  // Whole connected components buried inside other strokes (e.g. short
  // cross-width fragments traced at stroke end caps) are pruned with the same
  // rule as branches. Components with nothing nearby — genuine dots and
  // isolated strokes — are kept.
  {
    auto adj = g.adjacency();
    std::vector<int> comp(g.vertices.size(), -1);
    int ncomp = 0;
    for (size_t s = 0; s < g.vertices.size(); ++s) {
      if (comp[s] >= 0) continue;
      std::vector<int> stack{static_cast<int>(s)};
      comp[s] = ncomp;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int e : adj[v]) {
          int w = g.otherEnd(e, v);
          if (comp[w] < 0) {
            comp[w] = ncomp;
            stack.push_back(w);
          }
        }
      }
      ++ncomp;
    }
    std::vector<double> fullLen(ncomp, 0.0), outsideLen(ncomp, 0.0);
    std::vector<char> anyInside(ncomp, 0);
    for (size_t e = 0; e < g.edges.size(); ++e) fullLen[comp[g.edges[e].a]] += g.edgeLength(e);
    std::vector<double> attr(g.vertices.size(), 0.0);
    for (size_t e = 0; e < g.edges.size(); ++e) {
      attr[g.edges[e].a] += 0.5 * g.edgeLength(e);
      attr[g.edges[e].b] += 0.5 * g.edgeLength(e);
    }
    MemberGrid grid(g);
    for (size_t v = 0; v < g.vertices.size(); ++v) {
      bool inside = grid.nearAccepted(g.vertices[v].barycenter,
                                      [&](int u) { return comp[u] != comp[static_cast<int>(v)]; });
      if (inside)
        anyInside[comp[v]] = 1;
      else
        outsideLen[comp[v]] += attr[v];
    }
    std::vector<char> alive(g.vertices.size(), 1);
    bool any = false;
    for (size_t v = 0; v < g.vertices.size(); ++v) {
      int c = comp[v];
      if (anyInside[c] && outsideLen[c] < std::max(fullLen[c] / 4.0, 1.0)) {
        alive[v] = 0;
        any = true;
      }
    }
    if (any) g = compact(g, alive);
  }
  return g;
}

namespace {

bool curvesOverlap(const std::vector<int>& a, const std::vector<int>& b) {
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j])
      ++i;
    else
      ++j;
  }
  return false;
}

/// Splits every vertex of valence >= 4 into two degree-smaller copies joined
/// by a zero-length edge. Edge grouping: union-find on shared curve ids,
/// falling back to angular alternation around the vertex.
void splitHighValence(TopologyGraph& g) {
  bool again = true;
  while (again) {
    again = false;
    auto adj = g.adjacency();
    for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
      if (adj[v].size() < 4) continue;
      const std::vector<int>& inc = adj[v];
      UnionFind uf(static_cast<int>(inc.size()));
      for (size_t i = 0; i < inc.size(); ++i)
        for (size_t j = i + 1; j < inc.size(); ++j)
          if (curvesOverlap(g.edges[inc[i]].curves, g.edges[inc[j]].curves))
            uf.unite(static_cast<int>(i), static_cast<int>(j));
      std::map<int, std::vector<int>> groups;  // root -> positions in inc
      for (size_t i = 0; i < inc.size(); ++i)
        groups[uf.find(static_cast<int>(i))].push_back(static_cast<int>(i));

      std::vector<int> sideA, sideB;
      if (groups.size() == 2) {
        auto it = groups.begin();
        sideA = it->second;
        sideB = std::next(it)->second;
      } else {
        // Angular alternation around the barycenter.
        std::vector<int> order(inc.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> ang(inc.size());
        for (size_t i = 0; i < inc.size(); ++i) {
          Vec2 d = g.vertices[g.otherEnd(inc[i], v)].barycenter - g.vertices[v].barycenter;
          ang[i] = std::atan2(d.y, d.x);
        }
        std::sort(order.begin(), order.end(), [&](int a, int b) { return ang[a] < ang[b]; });
        for (size_t k = 0; k < order.size(); ++k)
          (k % 2 == 0 ? sideA : sideB).push_back(order[k]);
      }
      if (sideA.empty() || sideB.empty()) continue;

      int v2 = static_cast<int>(g.vertices.size());
      Bundle copy = g.vertices[v];
      copy.fromUnzip = true;
      g.vertices[v].fromUnzip = true;
      g.vertices.push_back(copy);
      for (int pos : sideB) {
        TopoEdge& e = g.edges[inc[pos]];
        (e.a == v ? e.a : e.b) = v2;
      }
      TopoEdge link;
      link.a = v;
      link.b = v2;
      link.curves = g.vertices[v].curveIds();
      g.edges.push_back(std::move(link));
      again = true;
      break;  // adjacency is stale; rebuild
    }
  }
}

struct Chain {
  int a = -1, b = -1;             // degree-3 terminals
  std::vector<int> inner;          // valence-2 vertices between them
  std::vector<int> edges;          // a..b order
};

/// First valence-2 chain connecting two (possibly equal) degree-3 vertices.
bool findChain(const TopologyGraph& g, const std::vector<std::vector<int>>& adj,
               const std::vector<int>& deg, Chain& out) {
  for (int a = 0; a < static_cast<int>(g.vertices.size()); ++a) {
    if (deg[a] != 3) continue;
    for (int e0 : adj[a]) {
      Chain ch;
      ch.a = a;
      int edge = e0;
      int cur = g.otherEnd(edge, a);
      ch.edges.push_back(edge);
      while (deg[cur] == 2) {
        ch.inner.push_back(cur);
        int next = -1;
        for (int ne : adj[cur])
          if (ne != edge) next = ne;
        if (next < 0) break;
        edge = next;
        cur = g.otherEnd(edge, ch.inner.back());
        ch.edges.push_back(edge);
      }
      if (deg[cur] != 3 || cur == a) continue;
      bool loopsBack = false;
      for (int vi : ch.inner) loopsBack = loopsBack || vi == a || vi == cur;
      if (loopsBack) continue;
      ch.b = cur;
      out = std::move(ch);
      return true;
    }
  }
  return false;
}

void remainingEdges(const std::vector<std::vector<int>>& adj, int v, int chainEdge,
                    std::array<int, 2>& out) {
  int n = 0;
  for (int e : adj[v])
    if (e != chainEdge && n < 2) out[n++] = e;
}

}  // namespace

TopologyGraph unzipParallel(TopologyGraph g) {
  splitHighValence(g);

  while (true) {
    auto adj = g.adjacency();
    auto deg = g.degrees();
    Chain ch;
    if (!findChain(g, adj, deg, ch)) break;

    // Remaining (non-chain) edges at the two terminals.
    std::array<int, 2> remA{-1, -1}, remB{-1, -1};
    remainingEdges(adj, ch.a, ch.edges.front(), remA);
    remainingEdges(adj, ch.b, ch.edges.back(), remB);

    // Curve groups carried by the four remaining edges; pair B's edges with
    // A's by maximizing shared-curve agreement along the chain annotations.
    auto curvesOf = [&](int e) { return g.edges[e].curves; };
    std::vector<int> chainCurves;
    for (int e : ch.edges)
      for (int c : g.edges[e].curves) chainCurves.push_back(c);
    std::sort(chainCurves.begin(), chainCurves.end());
    chainCurves.erase(std::unique(chainCurves.begin(), chainCurves.end()), chainCurves.end());

    auto score = [&](int ea, int eb) {
      int s = 0;
      for (int c : curvesOf(ea))
        if (std::binary_search(chainCurves.begin(), chainCurves.end(), c)) ++s;
      for (int c : curvesOf(eb))
        if (std::binary_search(chainCurves.begin(), chainCurves.end(), c)) ++s;
      if (curvesOverlap(curvesOf(ea), curvesOf(eb))) s += 4;
      return s;
    };
    bool straight = score(remA[0], remB[0]) + score(remA[1], remB[1]) >=
                    score(remA[0], remB[1]) + score(remA[1], remB[0]);
    int b0 = straight ? remB[0] : remB[1];
    int b1 = straight ? remB[1] : remB[0];

    // Curve sets defining the two copies.
    auto unite = [](std::vector<int> x, const std::vector<int>& y) {
      x.insert(x.end(), y.begin(), y.end());
      std::sort(x.begin(), x.end());
      x.erase(std::unique(x.begin(), x.end()), x.end());
      return x;
    };
    std::vector<int> s1 = unite(curvesOf(remA[0]), curvesOf(b0));
    std::vector<int> s2 = unite(curvesOf(remA[1]), curvesOf(b1));

    // Duplicate every chain vertex (terminals included) into two copies and
    // partition bundle members by those curve sets.
    std::vector<int> orig;
    orig.push_back(ch.a);
    orig.insert(orig.end(), ch.inner.begin(), ch.inner.end());
    orig.push_back(ch.b);

    std::vector<int> copy1(orig.size()), copy2(orig.size());
    for (size_t i = 0; i < orig.size(); ++i) {
      const Bundle& src = g.vertices[orig[i]];
      Bundle c1, c2;
      c1.fromUnzip = c2.fromUnzip = true;
      std::vector<const BundleMember*> undecided;
      for (const auto& m : src.members) {
        bool in1 = std::binary_search(s1.begin(), s1.end(), m.curve);
        bool in2 = std::binary_search(s2.begin(), s2.end(), m.curve);
        if (in1 && !in2)
          c1.members.push_back(m);
        else if (in2 && !in1)
          c2.members.push_back(m);
        else if (in1 && in2) {
          c1.members.push_back(m);
          c2.members.push_back(m);
        } else {
          undecided.push_back(&m);
        }
      }
      if (c1.members.empty() && c2.members.empty()) {
        c1.members = src.members;
        c2.members = src.members;
        undecided.clear();
      } else if (c1.members.empty()) {
        c1.members = src.members;
      } else if (c2.members.empty()) {
        c2.members = src.members;
      }
      c1.recomputeGeometry();
      c2.recomputeGeometry();
      for (const BundleMember* m : undecided) {
        (distance(m->pos, c1.barycenter) <= distance(m->pos, c2.barycenter) ? c1 : c2)
            .members.push_back(*m);
      }
      c1.recomputeGeometry();
      c2.recomputeGeometry();
      copy1[i] = static_cast<int>(g.vertices.size());
      g.vertices.push_back(std::move(c1));
      copy2[i] = static_cast<int>(g.vertices.size());
      g.vertices.push_back(std::move(c2));
    }

    // Reconnect remaining end edges to the matching copies.
    auto retarget = [&](int edgeId, int from, int to) {
      TopoEdge& e = g.edges[edgeId];
      (e.a == from ? e.a : e.b) = to;
    };
    retarget(remA[0], ch.a, copy1.front());
    retarget(remA[1], ch.a, copy2.front());
    retarget(b0, ch.b, copy1.back());
    retarget(b1, ch.b, copy2.back());

    // Duplicate chain edges, splitting annotations by the copy curve sets.
    for (size_t i = 0; i < ch.edges.size(); ++i) {
      const TopoEdge& src = g.edges[ch.edges[i]];
      auto makeEdge = [&](int va, int vb, const std::vector<int>& keep) {
        TopoEdge ne;
        ne.a = va;
        ne.b = vb;
        ne.bridge = src.bridge;
        for (int c : src.curves)
          if (std::binary_search(keep.begin(), keep.end(), c) ||
              (!std::binary_search(s1.begin(), s1.end(), c) &&
               !std::binary_search(s2.begin(), s2.end(), c)))
            ne.curves.push_back(c);
        if (ne.curves.empty()) ne.curves = src.curves;
        g.edges.push_back(std::move(ne));
      };
      makeEdge(copy1[i], copy1[i + 1], s1);
      makeEdge(copy2[i], copy2[i + 1], s2);
    }

    // Drop originals (their chain edges go with them).
    std::vector<char> alive(g.vertices.size(), 1);
    for (int v : orig) alive[v] = 0;
    std::vector<char> keepEdge(g.edges.size(), 1);
    for (int e : ch.edges) keepEdge[e] = 0;
    TopologyGraph pruned;
    pruned.vertices = g.vertices;
    for (size_t e = 0; e < g.edges.size(); ++e)
      if (keepEdge[e]) pruned.edges.push_back(g.edges[e]);
    g = compact(pruned, alive);
  }
  return g;
}

TopologyGraph repairSingularityGaps(TopologyGraph g, const NarrowBand& band,
                                    const std::vector<int>& singularPixels) {
  auto deg = g.degrees();
  struct Candidate {
    double dist;
    int leaf;
    int target;
  };
  std::vector<Candidate> cands;
  auto adj = g.adjacency();
  for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
    if (deg[v] != 1) continue;
    const Vec2 p = g.vertices[v].barycenter;
    bool nearSingular = false;
    for (int idx : singularPixels) {
      const NarrowBand::Pixel& px = band.pixels[idx];
      Vec2 c(static_cast<double>(px.x), static_cast<double>(px.y));
      if (distance(p, c) <= kLeafRepairRadius) {
        nearSingular = true;
        break;
      }
    }
    if (!nearSingular) continue;
    std::unordered_set<int> adjacent;
    for (int e : adj[v]) adjacent.insert(g.otherEnd(e, v));
    int best = -1;
    double bestD = kRepairCap;
    for (int u = 0; u < static_cast<int>(g.vertices.size()); ++u) {
      if (u == v || adjacent.count(u)) continue;
      double d = distance(p, g.vertices[u].barycenter);
      if (d < bestD || (d == bestD && (best < 0 || u < best))) {
        bestD = d;
        best = u;
      }
    }
    if (best >= 0) cands.push_back(Candidate{bestD, v, best});
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.dist != b.dist ? a.dist < b.dist
                            : (a.leaf != b.leaf ? a.leaf < b.leaf : a.target < b.target);
  });
  for (const auto& c : cands) {
    if (deg[c.leaf] != 1) continue;  // repaired already this round
    TopoEdge e;
    e.a = c.leaf;
    e.b = c.target;
    e.bridge = true;
    std::vector<int> ca = g.vertices[c.leaf].curveIds();
    std::vector<int> cb = g.vertices[c.target].curveIds();
    std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(),
                          std::back_inserter(e.curves));
    g.edges.push_back(std::move(e));
    ++deg[c.leaf];
    ++deg[c.target];
  }
  return g;
}

void dumpGraphJson(const TopologyGraph& g, const std::string& path) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : g.vertices) {
    nlohmann::json jv;
    jv["x"] = v.barycenter.x;
    jv["y"] = v.barycenter.y;
    jv["width"] = v.width;
    jv["curves"] = v.curveIds();
    jv["members"] = v.members.size();
    j["vertices"].push_back(std::move(jv));
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) {
    nlohmann::json je;
    je["a"] = e.a;
    je["b"] = e.b;
    je["curves"] = e.curves;
    je["bridge"] = e.bridge;
    j["edges"].push_back(std::move(je));
  }
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

}  // namespace linevec
