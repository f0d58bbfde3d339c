#include "linevec/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace linevec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMergeEps = 1e-6;
constexpr double kBinSize = 0.25;

double terminalCost(const Vec2& memberPos, const Vec2& terminalPos, double width,
                    double eta) {
  if (width <= 0.0) return 0.0;
  return eta * distance(memberPos, terminalPos) / width;
}

/// Nearest member of b lying on curve c to point p; nullptr if none.
const BundleMember* nearestOnCurve(const Bundle& b, int c, const Vec2& p) {
  const BundleMember* best = nullptr;
  double bestD = kInf;
  for (const auto& m : b.members) {
    if (m.curve != c) continue;
    double d = distance(m.pos, p);
    if (d < bestD) {
      bestD = d;
      best = &m;
    }
  }
  return best;
}

}  // namespace

double Stroke::length() const {
  double len = 0.0;
  for (size_t i = 0; i + 1 < points.size(); ++i) len += distance(points[i], points[i + 1]);
  return len;
}

double auxEdgeWeight(const Bundle& v1, const Bundle& v2, const std::vector<int>& sharedCurves,
                     const Vec2& p, const Vec2& q, double eta, bool bridge,
                     AuxRealization* real) {
  double wsum = v1.width + v2.width;
  double centering =
      wsum > 0.0 ? (distance(p, v1.barycenter) + distance(q, v2.barycenter)) / wsum : 0.0;

  double bestConn = kInf;
  AuxRealization bestReal;
  if (!bridge) {
    for (int c : sharedCurves) {
      const BundleMember* r1 = nearestOnCurve(v1, c, p);
      const BundleMember* r2 = nearestOnCurve(v2, c, q);
      if (!r1 || !r2) continue;
      double conn = distance(r1->pos, p) + distance(r2->pos, q);
      if (conn < bestConn) {
        bestConn = conn;
        bestReal.viaCurve = true;
        bestReal.curve = c;
        bestReal.arc1 = r1->arcOnCurve;
        bestReal.arc2 = r2->arcOnCurve;
        bestReal.r1 = r1->pos;
        bestReal.r2 = r2->pos;
      }
    }
  }
  if (bestConn == kInf) {
    // Repair edge, or annotation lost its members: straight connector.
    bestConn = distance(p, q);
    bestReal = AuxRealization{};
  }
  if (real) *real = bestReal;
  return bestConn + eta * centering;
}

std::vector<GraphChain> enumerateChains(const TopologyGraph& g) {
  auto adj = g.adjacency();
  auto deg = g.degrees();
  std::vector<char> usedEdge(g.edges.size(), 0);
  std::vector<GraphChain> chains;

  auto walk = [&](int start, int firstEdge) {
    GraphChain ch;
    ch.verts.push_back(start);
    int edge = firstEdge;
    int cur = start;
    while (true) {
      usedEdge[edge] = 1;
      ch.edges.push_back(edge);
      cur = g.otherEnd(edge, cur);
      ch.verts.push_back(cur);
      if (deg[cur] != 2 || cur == start) break;
      int next = -1;
      for (int e : adj[cur])
        if (e != edge && !usedEdge[e]) next = e;
      if (next < 0) break;
      edge = next;
    }
    return ch;
  };

  for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
    if (deg[v] == 2 || deg[v] == 0) continue;
    for (int e : adj[v])
      if (!usedEdge[e]) chains.push_back(walk(v, e));
  }
  // Remaining unused edges belong to pure valence-2 cycles.
  for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
    if (deg[v] != 2) continue;
    for (int e : adj[v]) {
      if (usedEdge[e]) continue;
      GraphChain ch = walk(v, e);
      ch.closed = !ch.verts.empty() && ch.verts.front() == ch.verts.back();
      chains.push_back(std::move(ch));
    }
  }
  for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
    if (deg[v] != 0) continue;
    GraphChain ch;
    ch.verts.push_back(v);
    chains.push_back(std::move(ch));
  }
  return chains;
}

AuxGraph buildChainAux(const TopologyGraph& g, const GraphChain& chain, const Vec2& srcPos,
                       const Vec2& dstPos, double eta, int maxMembers) {
  AuxGraph aux;
  aux.nodes.push_back(AuxGraph::Node{-1, -1, srcPos});
  aux.nodes.push_back(AuxGraph::Node{-1, -1, dstPos});

  size_t total = 0;
  for (int v : chain.verts) total += g.vertices[v].members.size();
  const bool bin = total > static_cast<size_t>(maxMembers);

  // Selected member indices per chain position (spatially binned when large).
  std::vector<std::vector<int>> selected(chain.verts.size());
  std::vector<std::vector<int>> nodeAt(chain.verts.size());  // aux node ids
  for (size_t i = 0; i < chain.verts.size(); ++i) {
    const Bundle& b = g.vertices[chain.verts[i]];
    if (!bin) {
      selected[i].resize(b.members.size());
      for (size_t m = 0; m < b.members.size(); ++m) selected[i][m] = static_cast<int>(m);
    } else {
      std::unordered_set<int64_t> cells;
      for (size_t m = 0; m < b.members.size(); ++m) {
        int64_t cx = static_cast<int64_t>(std::floor(b.members[m].pos.x / kBinSize));
        int64_t cy = static_cast<int64_t>(std::floor(b.members[m].pos.y / kBinSize));
        if (cells.insert(cx * 1000003 + cy).second) selected[i].push_back(static_cast<int>(m));
      }
    }
    for (int m : selected[i]) {
      nodeAt[i].push_back(static_cast<int>(aux.nodes.size()));
      aux.nodes.push_back(AuxGraph::Node{static_cast<int>(i), m, b.members[m].pos});
    }
  }

  auto addEdge = [&aux](int a, int b, double w, AuxRealization r) {
    aux.edges.push_back(AuxGraph::Edge{a, b, w});
    aux.realization.push_back(std::move(r));
  };

  // Virtual terminals attach to the first/last bundle's members.
  const Bundle& first = g.vertices[chain.verts.front()];
  for (size_t k = 0; k < nodeAt.front().size(); ++k) {
    const Vec2& mp = aux.nodes[nodeAt.front()[k]].pos;
    addEdge(0, nodeAt.front()[k], terminalCost(mp, srcPos, first.width, eta), AuxRealization{});
  }
  const Bundle& last = g.vertices[chain.verts.back()];
  for (size_t k = 0; k < nodeAt.back().size(); ++k) {
    const Vec2& mp = aux.nodes[nodeAt.back()[k]].pos;
    addEdge(1, nodeAt.back()[k], terminalCost(mp, dstPos, last.width, eta), AuxRealization{});
  }

  // Bipartite edges per chain edge. Per-node nearest-on-curve distances are
  // precomputed so each pair costs O(#shared curves).
  for (size_t i = 0; i + 1 < chain.verts.size(); ++i) {
    const TopoEdge& te = g.edges[chain.edges[i]];
    const Bundle& b1 = g.vertices[chain.verts[i]];
    const Bundle& b2 = g.vertices[chain.verts[i + 1]];
    const auto& curves = te.curves;

    struct Near {
      double d;
      const BundleMember* m;
    };
    auto nearestTable = [&curves](const Bundle& b, const std::vector<int>& nodes,
                                  const AuxGraph& ag) {
      std::vector<std::vector<Near>> t(nodes.size(),
                                       std::vector<Near>(curves.size(), Near{kInf, nullptr}));
      for (size_t k = 0; k < nodes.size(); ++k) {
        const Vec2& p = ag.nodes[nodes[k]].pos;
        for (size_t ci = 0; ci < curves.size(); ++ci) {
          const BundleMember* m = nearestOnCurve(b, curves[ci], p);
          if (m) t[k][ci] = Near{distance(m->pos, p), m};
        }
      }
      return t;
    };
    auto near1 = nearestTable(b1, nodeAt[i], aux);
    auto near2 = nearestTable(b2, nodeAt[i + 1], aux);

    for (size_t k1 = 0; k1 < nodeAt[i].size(); ++k1) {
      const Vec2& p = aux.nodes[nodeAt[i][k1]].pos;
      double cent1 = distance(p, b1.barycenter);
      for (size_t k2 = 0; k2 < nodeAt[i + 1].size(); ++k2) {
        const Vec2& q = aux.nodes[nodeAt[i + 1][k2]].pos;
        double wsum = b1.width + b2.width;
        double centering = wsum > 0.0 ? (cent1 + distance(q, b2.barycenter)) / wsum : 0.0;
        double bestConn = kInf;
        AuxRealization r;
        if (!te.bridge) {
          for (size_t ci = 0; ci < curves.size(); ++ci) {
            if (!near1[k1][ci].m || !near2[k2][ci].m) continue;
            double conn = near1[k1][ci].d + near2[k2][ci].d;
            if (conn < bestConn) {
              bestConn = conn;
              r.viaCurve = true;
              r.curve = curves[ci];
              r.arc1 = near1[k1][ci].m->arcOnCurve;
              r.arc2 = near2[k2][ci].m->arcOnCurve;
              r.r1 = near1[k1][ci].m->pos;
              r.r2 = near2[k2][ci].m->pos;
            }
          }
        }
        if (bestConn == kInf) {
          bestConn = distance(p, q);
          r = AuxRealization{};
        }
        addEdge(nodeAt[i][k1], nodeAt[i + 1][k2], bestConn + eta * centering, std::move(r));
      }
    }
  }
  return aux;
}

namespace {

struct DijkstraResult {
  std::vector<double> dist;
  std::vector<int> predNode;
  std::vector<int> predEdge;
};

DijkstraResult dijkstraAll(const AuxGraph& aux, int src) {
  const int n = static_cast<int>(aux.nodes.size());
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, edge id)
  for (size_t e = 0; e < aux.edges.size(); ++e) {
    adj[aux.edges[e].a].emplace_back(aux.edges[e].b, static_cast<int>(e));
    adj[aux.edges[e].b].emplace_back(aux.edges[e].a, static_cast<int>(e));
  }
  DijkstraResult res;
  res.dist.assign(n, kInf);
  res.predNode.assign(n, -1);
  res.predEdge.assign(n, -1);
  res.dist[src] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  pq.emplace(0.0, src);
  std::vector<char> done(n, 0);
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (done[v]) continue;
    done[v] = 1;
    for (auto [u, e] : adj[v]) {
      if (done[u]) continue;
      double nd = d + aux.edges[e].w;
      // Strict improvement, with a deterministic predecessor on exact ties.
      if (nd < res.dist[u] || (nd == res.dist[u] && v < res.predNode[u])) {
        res.dist[u] = nd;
        res.predNode[u] = v;
        res.predEdge[u] = e;
        pq.emplace(nd, u);
      }
    }
  }
  return res;
}

}  // namespace

ShortestPath shortestPath(const AuxGraph& aux, int src, int dst) {
  ShortestPath out;
  auto res = dijkstraAll(aux, src);
  if (res.dist[dst] == kInf) return out;
  out.ok = true;
  out.cost = res.dist[dst];
  int v = dst;
  while (v != src) {
    out.nodes.push_back(v);
    out.edges.push_back(res.predEdge[v]);
    v = res.predNode[v];
  }
  out.nodes.push_back(src);
  std::reverse(out.nodes.begin(), out.nodes.end());
  std::reverse(out.edges.begin(), out.edges.end());
  return out;
}

namespace {

void appendPoint(Stroke& s, const Vec2& p, uint8_t lig) {
  if (!s.points.empty() && distance(s.points.back(), p) <= 1e-9) return;
  if (!s.points.empty()) s.ligament.push_back(lig);
  s.points.push_back(p);
}

/// Concrete polyline for an aux node path: ligament to each edge's nearest
/// shared-curve point, the traced-curve subpath between them, ligament onward.
/// Removes a doubled-back lead-in: when the terminal anchor lies past the
/// path start, the connector to the anchor backtracks over the first few
/// path points and would self-intersect the incident strokes. Drops the
/// point after the anchor while the next segment passes back within the
/// connector's length of the anchor.
void trimBacktrack(Stroke& s) {
  while (s.points.size() >= 3) {
    const Vec2& anchor = s.points[0];
    double lead = distance(anchor, s.points[1]);
    if (pointSegmentDistance(anchor, s.points[1], s.points[2]) >= lead - 1e-9) break;
    s.points.erase(s.points.begin() + 1);
    s.ligament.erase(s.ligament.begin());
    s.ligament[0] = 1;
  }
}

void reverseStroke(Stroke& s) {
  std::reverse(s.points.begin(), s.points.end());
  std::reverse(s.ligament.begin(), s.ligament.end());
}

void realizePath(Stroke& s, const AuxGraph& aux, const std::vector<int>& nodes,
                 const std::vector<int>& edges, const std::vector<TracedCurve>& curves) {
  for (size_t k = 0; k < edges.size(); ++k) {
    int e = edges[k];
    int to = nodes[k + 1];
    const AuxRealization& r = aux.realization[e];
    if (!r.viaCurve) {
      appendPoint(s, aux.nodes[to].pos, 1);
      continue;
    }
    bool forward = aux.edges[e].a == nodes[k];
    double a1 = forward ? r.arc1 : r.arc2;
    double a2 = forward ? r.arc2 : r.arc1;
    // A curve that retraces part of itself (e.g. around a closed shape) can
    // pair members whose arc positions lie on different passes; the subpath
    // would detour around the whole shape. Use a straight ligament instead.
    double direct = distance(r.r1, r.r2);
    if (std::abs(a2 - a1) > std::max(2.0, 4.0 * direct)) {
      appendPoint(s, aux.nodes[to].pos, 1);
      continue;
    }
    appendPoint(s, forward ? r.r1 : r.r2, 1);
    for (const Vec2& pt : curves[r.curve].subpath(a1, a2)) appendPoint(s, pt, 0);
    appendPoint(s, aux.nodes[to].pos, 1);
  }
}

struct EmbeddedChain {
  GraphChain chain;
  Vec2 endPos[2];        // embedded positions of verts.front() / verts.back()
  bool endFixed[2] = {true, true};  // false: a valence-3 junction still refinable
  Stroke stroke;         // oriented verts.front() -> verts.back()
  std::vector<Vec2> chosenPos;  // selected member position per chain vertex
  int parent = -1;       // original chain index (for re-merging split halves)
};

double meanWidth(const TopologyGraph& g, const std::vector<int>& verts) {
  if (verts.empty()) return 0.0;
  double w = 0.0;
  for (int v : verts) w += g.vertices[v].width;
  return w / static_cast<double>(verts.size());
}

void embedOne(const TopologyGraph& g, const std::vector<TracedCurve>& curves, double eta,
              EmbeddedChain& ec) {
  const GraphChain& ch = ec.chain;
  ec.stroke = Stroke{};
  ec.stroke.width = meanWidth(g, ch.verts);
  ec.stroke.closed = ch.closed;
  ec.chosenPos.resize(ch.verts.size());
  for (size_t i = 0; i < ch.verts.size(); ++i)
    ec.chosenPos[i] = g.vertices[ch.verts[i]].barycenter;

  if (ch.verts.size() == 1 && ch.edges.empty()) {
    ec.stroke.points.push_back(ec.endPos[0]);
    return;
  }
  AuxGraph aux = buildChainAux(g, ch, ec.endPos[0], ec.endPos[1], eta);
  ShortestPath sp = shortestPath(aux, 0, 1);
  appendPoint(ec.stroke, ec.endPos[0], 1);
  if (!sp.ok) {
    for (size_t i = 1; i < ch.verts.size(); ++i)
      appendPoint(ec.stroke, g.vertices[ch.verts[i]].barycenter, 1);
    appendPoint(ec.stroke, ec.endPos[1], 1);
  } else {
    realizePath(ec.stroke, aux, sp.nodes, sp.edges, curves);
    for (int node : sp.nodes)
      if (aux.nodes[node].chainPos >= 0)
        ec.chosenPos[aux.nodes[node].chainPos] = aux.nodes[node].pos;
  }
  if (ch.closed && ec.stroke.points.size() >= 2 &&
      distance(ec.stroke.points.front(), ec.stroke.points.back()) > 1e-9)
    appendPoint(ec.stroke, ec.stroke.points.front(), 1);
  if (!ch.closed) {
    trimBacktrack(ec.stroke);
    reverseStroke(ec.stroke);
    trimBacktrack(ec.stroke);
    reverseStroke(ec.stroke);
  }
}

GraphChain orientedFrom(const GraphChain& ch, bool fromBack) {
  if (!fromBack) return ch;
  GraphChain out = ch;
  std::reverse(out.verts.begin(), out.verts.end());
  std::reverse(out.edges.begin(), out.edges.end());
  return out;
}

void recordEndpointJunctions(VectorDrawing& d) {
  struct Key {
    int64_t x, y;
    bool operator<(const Key& o) const { return x != o.x ? x < o.x : y < o.y; }
  };
  std::map<Key, std::vector<int>> groups;
  for (size_t s = 0; s < d.strokes.size(); ++s) {
    const auto& pts = d.strokes[s].points;
    if (pts.empty() || d.strokes[s].closed) continue;
    for (const Vec2* p : {&pts.front(), &pts.back()}) {
      Key k{static_cast<int64_t>(std::llround(p->x * 1e6)),
            static_cast<int64_t>(std::llround(p->y * 1e6))};
      auto& v = groups[k];
      if (v.empty() || v.back() != static_cast<int>(s)) v.push_back(static_cast<int>(s));
    }
  }
  for (auto& [k, strokes] : groups) {
    if (strokes.size() < 2) continue;
    Junction j;
    j.pos = Vec2{static_cast<double>(k.x) / 1e6, static_cast<double>(k.y) / 1e6};
    j.strokes = strokes;
    d.junctions.push_back(std::move(j));
  }
}

}  // namespace

VectorDrawing embedGraph(const TopologyGraph& g, const std::vector<TracedCurve>& curves,
                         double eta, bool refine) {
  auto chains = enumerateChains(g);
  auto deg = g.degrees();

  std::vector<EmbeddedChain> ecs;
  ecs.reserve(chains.size());
  for (size_t c = 0; c < chains.size(); ++c) {
    EmbeddedChain ec;
    ec.chain = chains[c];
    ec.parent = static_cast<int>(c);
    ec.endPos[0] = g.vertices[ec.chain.verts.front()].barycenter;
    ec.endPos[1] = g.vertices[ec.chain.verts.back()].barycenter;
    embedOne(g, curves, eta, ec);
    ecs.push_back(std::move(ec));
  }

  if (refine) {
    // Split chains joining two valence-3 vertices at a middle anchor (a vertex
    // not created by unzipping when one exists), so each junction can be
    // relocated independently.
    std::vector<EmbeddedChain> work;
    for (auto& ec : ecs) {
      const auto& ch = ec.chain;
      bool frontJ = !ch.closed && deg[ch.verts.front()] == 3;
      bool backJ = !ch.closed && deg[ch.verts.back()] == 3;
      if (frontJ && backJ && ch.verts.size() >= 3) {
        int n = static_cast<int>(ch.verts.size());
        double mid = 0.5 * (n - 1);
        int anchor = -1;
        double best = kInf;
        for (int pass = 0; pass < 2 && anchor < 0; ++pass) {
          for (int i = 1; i + 1 < n; ++i) {
            if (pass == 0 && g.vertices[ch.verts[i]].fromUnzip) continue;
            double d = std::abs(i - mid);
            if (d < best) {
              best = d;
              anchor = i;
            }
          }
        }
        Vec2 anchorPos = ec.chosenPos[anchor];
        EmbeddedChain a, b;
        a.parent = b.parent = ec.parent;
        a.chain.verts.assign(ch.verts.begin(), ch.verts.begin() + anchor + 1);
        a.chain.edges.assign(ch.edges.begin(), ch.edges.begin() + anchor);
        a.endPos[0] = ec.endPos[0];
        a.endPos[1] = anchorPos;
        a.endFixed[0] = false;
        b.chain.verts.assign(ch.verts.begin() + anchor, ch.verts.end());
        b.chain.edges.assign(ch.edges.begin() + anchor, ch.edges.end());
        b.endPos[0] = anchorPos;
        b.endPos[1] = ec.endPos[1];
        b.endFixed[1] = false;
        embedOne(g, curves, eta, a);
        embedOne(g, curves, eta, b);
        work.push_back(std::move(a));
        work.push_back(std::move(b));
      } else {
        if (frontJ) ec.endFixed[0] = false;
        if (backJ) ec.endFixed[1] = false;
        work.push_back(std::move(ec));
      }
    }

    // Relocate each valence-3 junction to the candidate barycenter minimizing
    // the summed auxiliary path distance to its chain anchors, then recompute
    // the incident paths.
    for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
      if (deg[v] != 3) continue;
      struct Incident {
        int ec;
        int side;  // 0: verts.front() == v, 1: verts.back() == v
        AuxGraph aux;
        DijkstraResult fromAnchor;  // Dijkstra from the sink (anchor side)
        std::vector<int> firstNodes;
      };
      std::vector<Incident> inc;
      for (size_t e = 0; e < work.size(); ++e) {
        for (int side = 0; side < 2; ++side) {
          const auto& ch = work[e].chain;
          if (ch.verts.empty() || ch.closed || work[e].endFixed[side]) continue;
          int endVert = side == 0 ? ch.verts.front() : ch.verts.back();
          if (endVert != v) continue;
          Incident in;
          in.ec = static_cast<int>(e);
          in.side = side;
          GraphChain oc = orientedFrom(ch, side == 1);
          Vec2 anchorPos = work[e].endPos[1 - side];
          in.aux = buildChainAux(g, oc, work[e].endPos[side], anchorPos, eta);
          in.fromAnchor = dijkstraAll(in.aux, 1);
          for (size_t nidx = 0; nidx < in.aux.nodes.size(); ++nidx)
            if (in.aux.nodes[nidx].chainPos == 0) in.firstNodes.push_back(static_cast<int>(nidx));
          inc.push_back(std::move(in));
        }
      }
      if (inc.empty()) continue;

      // Candidate positions: barycenters of every vertex along the incident
      // chains (the junction's own barycenter included).
      std::vector<Vec2> candidates;
      auto addCand = [&candidates](const Vec2& p) {
        for (const Vec2& c : candidates)
          if (distance(c, p) <= 1e-9) return;
        candidates.push_back(p);
      };
      addCand(g.vertices[v].barycenter);
      for (const auto& in : inc)
        for (int u : work[in.ec].chain.verts) addCand(g.vertices[u].barycenter);

      double wJ = g.vertices[v].width;
      auto chainCost = [&](const Incident& in, const Vec2& p, int* bestNode) {
        double best = kInf;
        int bn = -1;
        for (int node : in.firstNodes) {
          if (in.fromAnchor.dist[node] == kInf) continue;
          double c = terminalCost(in.aux.nodes[node].pos, p, wJ, eta) + in.fromAnchor.dist[node];
          if (c < best) {
            best = c;
            bn = node;
          }
        }
        if (bestNode) *bestNode = bn;
        return best;
      };

      Vec2 bestPos = candidates.front();
      double bestCost = kInf;
      for (const Vec2& p : candidates) {
        double total = 0.0;
        for (const auto& in : inc) {
          double c = chainCost(in, p, nullptr);
          if (c == kInf) {
            total = kInf;
            break;
          }
          total += c;
        }
        if (total < bestCost) {
          bestCost = total;
          bestPos = p;
        }
      }
      if (bestCost == kInf) continue;

      for (auto& in : inc) {
        int startNode = -1;
        chainCost(in, bestPos, &startNode);
        if (startNode < 0) continue;
        Stroke s;
        s.width = work[in.ec].stroke.width;
        appendPoint(s, bestPos, 1);
        std::vector<int> nodes{startNode};
        std::vector<int> edges;
        int cur = startNode;
        while (cur != 1) {
          edges.push_back(in.fromAnchor.predEdge[cur]);
          cur = in.fromAnchor.predNode[cur];
          nodes.push_back(cur);
        }
        realizePath(s, in.aux, nodes, edges, curves);
        trimBacktrack(s);
        reverseStroke(s);
        trimBacktrack(s);
        reverseStroke(s);
        work[in.ec].endPos[in.side] = bestPos;
        if (in.side == 1) {
          std::reverse(s.points.begin(), s.points.end());
          std::reverse(s.ligament.begin(), s.ligament.end());
        }
        work[in.ec].stroke = std::move(s);
      }
    }

    // Re-merge split halves so the drawing keeps one stroke per chain.
    std::map<int, std::vector<int>> byParent;
    for (size_t e = 0; e < work.size(); ++e) byParent[work[e].parent].push_back(static_cast<int>(e));
    std::vector<EmbeddedChain> merged;
    for (auto& [parent, ids] : byParent) {
      if (ids.size() == 1) {
        merged.push_back(std::move(work[ids[0]]));
        continue;
      }
      EmbeddedChain& a = work[ids[0]];
      EmbeddedChain& b = work[ids[1]];
      Stroke s;
      s.width = 0.5 * (a.stroke.width + b.stroke.width);
      s.points = a.stroke.points;
      s.ligament = a.stroke.ligament;
      for (size_t i = 0; i < b.stroke.points.size(); ++i)
        appendPoint(s, b.stroke.points[i], i == 0 ? 1 : b.stroke.ligament[i - 1]);
      a.stroke = std::move(s);
      merged.push_back(std::move(a));
    }
    ecs = std::move(merged);
  }

  VectorDrawing d;
  for (auto& ec : ecs) d.strokes.push_back(std::move(ec.stroke));
  recordEndpointJunctions(d);
  return d;
}

namespace {

std::vector<double> prefixArclen(const Stroke& s) {
  std::vector<double> arc(s.points.size(), 0.0);
  for (size_t i = 1; i < s.points.size(); ++i)
    arc[i] = arc[i - 1] + distance(s.points[i - 1], s.points[i]);
  return arc;
}

double distToStroke(const Vec2& p, const Stroke& s) {
  double best = kInf;
  for (size_t i = 0; i + 1 < s.points.size(); ++i)
    best = std::min(best, pointSegmentDistance(p, s.points[i], s.points[i + 1]));
  if (s.points.size() == 1) best = distance(p, s.points[0]);
  return best;
}

struct Cut {
  double arc;
  Vec2 pos;
};

/// All stroke-stroke intersections, as cuts per stroke.
std::vector<std::vector<Cut>> strokeIntersections(const VectorDrawing& d) {
  std::vector<std::vector<Cut>> cuts(d.strokes.size());
  double maxX = 1.0, maxY = 1.0;
  for (const auto& s : d.strokes)
    for (const auto& p : s.points) {
      maxX = std::max(maxX, p.x);
      maxY = std::max(maxY, p.y);
    }
  SpatialIndex index(static_cast<int>(std::ceil(maxX)) + 2, static_cast<int>(std::ceil(maxY)) + 2);
  std::vector<std::vector<double>> arcs;
  arcs.reserve(d.strokes.size());
  for (const auto& s : d.strokes) arcs.push_back(prefixArclen(s));

  for (size_t i = 0; i < d.strokes.size(); ++i) {
    const auto& pts = d.strokes[i].points;
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
      for (SegRef ref : index.candidates(pts[k], pts[k + 1])) {
        SegmentHit hit = segmentIntersect(pts[k], pts[k + 1],
                                          d.strokes[ref.curve].points[ref.seg],
                                          d.strokes[ref.curve].points[ref.seg + 1]);
        if (!hit.hit) continue;
        double arcI = arcs[i][k] + hit.t * distance(pts[k], pts[k + 1]);
        const auto& opts = d.strokes[ref.curve].points;
        double arcJ = arcs[ref.curve][ref.seg] + hit.u * distance(opts[ref.seg], opts[ref.seg + 1]);
        cuts[i].push_back(Cut{arcI, hit.pos});
        cuts[ref.curve].push_back(Cut{arcJ, hit.pos});
      }
    }
    for (size_t k = 0; k + 1 < pts.size(); ++k)
      index.insert(SegRef{static_cast<uint32_t>(i), static_cast<uint32_t>(k)}, pts[k], pts[k + 1]);
  }
  for (auto& c : cuts) {
    std::sort(c.begin(), c.end(), [](const Cut& a, const Cut& b) { return a.arc < b.arc; });
    c.erase(std::unique(c.begin(), c.end(),
                        [](const Cut& a, const Cut& b) { return std::abs(a.arc - b.arc) < 1e-6; }),
            c.end());
  }
  return cuts;
}

bool endpointShared(const VectorDrawing& d, size_t stroke, bool back) {
  const Vec2& p = back ? d.strokes[stroke].points.back() : d.strokes[stroke].points.front();
  for (size_t j = 0; j < d.strokes.size(); ++j) {
    if (j == stroke) continue;
    const auto& pts = d.strokes[j].points;
    if (pts.empty()) continue;
    if (distance(p, pts.front()) <= kMergeEps || distance(p, pts.back()) <= kMergeEps)
      return true;
  }
  return false;
}

/// Length of the end fragment lying outside every other stroke (vertex-wise:
/// a sample is inside when within the summed stroke radii of another stroke).
double outsideLength(const VectorDrawing& d, size_t stroke, const std::vector<Vec2>& frag) {
  double outside = 0.0;
  for (size_t k = 0; k + 1 < frag.size(); ++k) {
    Vec2 mid = (frag[k] + frag[k + 1]) * 0.5;
    bool inside = false;
    for (size_t j = 0; j < d.strokes.size() && !inside; ++j) {
      if (j == stroke) continue;
      double r = 0.5 * (d.strokes[stroke].width + d.strokes[j].width);
      inside = distToStroke(mid, d.strokes[j]) < r;
    }
    if (!inside) outside += distance(frag[k], frag[k + 1]);
  }
  return outside;
}

/// Polyline between two arc positions of a stroke.
std::vector<Vec2> strokeSection(const Stroke& s, const std::vector<double>& arc, double a0,
                                double a1) {
  std::vector<Vec2> out;
  for (size_t i = 0; i < s.points.size(); ++i) {
    if (arc[i] <= a0 + 1e-12) {
      if (i + 1 < s.points.size() && arc[i + 1] > a0 + 1e-12) {
        double seg = arc[i + 1] - arc[i];
        double t = seg > 0 ? (a0 - arc[i]) / seg : 0.0;
        out.push_back(s.points[i] + (s.points[i + 1] - s.points[i]) * t);
      }
      continue;
    }
    if (arc[i] >= a1 - 1e-12) {
      size_t prev = i - 1;
      double seg = arc[i] - arc[prev];
      double t = seg > 0 ? (a1 - arc[prev]) / seg : 0.0;
      out.push_back(s.points[prev] + (s.points[i] - s.points[prev]) * t);
      break;
    }
    out.push_back(s.points[i]);
  }
  return out;
}

/// Trims a non-closed stroke to the arc range [a0, a1], keeping ligament
/// flags of surviving segments.
void trimStroke(Stroke& s, double a0, double a1) {
  auto arc = prefixArclen(s);
  Stroke out;
  out.width = s.width;
  auto ligAt = [&](size_t seg) { return seg < s.ligament.size() ? s.ligament[seg] : uint8_t{1}; };
  for (size_t i = 0; i + 1 < s.points.size(); ++i) {
    double lo = arc[i], hi = arc[i + 1];
    if (hi <= a0 + 1e-12 || lo >= a1 - 1e-12) continue;
    double seg = hi - lo;
    Vec2 p0 = s.points[i], p1 = s.points[i + 1];
    Vec2 q0 = lo >= a0 ? p0 : p0 + (p1 - p0) * ((a0 - lo) / seg);
    Vec2 q1 = hi <= a1 ? p1 : p0 + (p1 - p0) * ((a1 - lo) / seg);
    appendPoint(out, q0, ligAt(i));
    appendPoint(out, q1, ligAt(i));
  }
  if (out.points.empty() && !s.points.empty()) out.points.push_back(s.points.front());
  s = std::move(out);
}

void insertVertexAt(Stroke& s, const Vec2& pos) {
  for (const Vec2& p : s.points)
    if (distance(p, pos) <= kMergeEps) return;
  double best = kInf;
  size_t bestSeg = 0;
  for (size_t i = 0; i + 1 < s.points.size(); ++i) {
    double dd = pointSegmentDistance(pos, s.points[i], s.points[i + 1]);
    if (dd < best) {
      best = dd;
      bestSeg = i;
    }
  }
  if (best > 0.5) return;  // not actually on this stroke
  s.points.insert(s.points.begin() + bestSeg + 1, pos);
  uint8_t lig = bestSeg < s.ligament.size() ? s.ligament[bestSeg] : uint8_t{1};
  if (s.ligament.empty())
    s.ligament.push_back(lig);
  else
    s.ligament.insert(s.ligament.begin() + bestSeg, lig);
}

}  // namespace

VectorDrawing pruneOvershoot(VectorDrawing d) {
  for (int iter = 0; iter < 10; ++iter) {
    auto cuts = strokeIntersections(d);
    bool changed = false;
    for (size_t i = 0; i < d.strokes.size(); ++i) {
      Stroke& s = d.strokes[i];
      if (s.closed || s.points.size() < 2 || cuts[i].empty()) continue;
      auto arc = prefixArclen(s);
      double len = arc.back();
      double keepLo = 0.0, keepHi = len;

      auto considerEnd = [&](bool back) {
        double cutArc = back ? cuts[i].back().arc : cuts[i].front().arc;
        double fragLen = back ? len - cutArc : cutArc;
        if (fragLen <= 1e-9 || fragLen >= len - 1e-9) return;
        if (endpointShared(d, i, back)) return;
        std::vector<Vec2> frag =
            back ? strokeSection(s, arc, cutArc, len) : strokeSection(s, arc, 0.0, cutArc);
        if (frag.size() < 2) return;
        double outside = outsideLength(d, i, frag);
        if (outside < std::max(fragLen / 4.0, 1.0)) {
          if (back)
            keepHi = cutArc;
          else
            keepLo = cutArc;
          changed = true;
        }
      };
      considerEnd(false);
      considerEnd(true);
      if (keepLo > 0.0 || keepHi < len) trimStroke(s, keepLo, keepHi);
    }
    if (!changed) break;
  }

  // Record junctions: surviving intersections plus coincident endpoints,
  // clustered within a small tolerance, pinning intersection points as
  // polyline vertices for later smoothing. Where a stroke terminates on
  // another stroke that turns sharply at the contact, the through-stroke is
  // really two strokes meeting at a corner and is split there.
  constexpr double kJunctionTol = 0.25;
  constexpr double kCornerWindow = 3.0;
  constexpr double kCornerSplitCos = 0.8660;  // 30 degrees

  auto recordPass = [&](bool allowSplit) {
    d.junctions.clear();
    auto cuts = strokeIntersections(d);
    for (size_t i = 0; i < d.strokes.size(); ++i)
      for (const Cut& c : cuts[i]) insertVertexAt(d.strokes[i], c.pos);

    struct Cluster {
      Vec2 pos;
      std::vector<int> strokes;
      bool hasTerminal = false;
    };
    std::vector<Cluster> clusters;
    auto addItem = [&](const Vec2& p, int stroke, bool terminal) {
      for (auto& cl : clusters) {
        if (distance(cl.pos, p) <= kJunctionTol) {
          if (std::find(cl.strokes.begin(), cl.strokes.end(), stroke) == cl.strokes.end())
            cl.strokes.push_back(stroke);
          cl.hasTerminal = cl.hasTerminal || terminal;
          return;
        }
      }
      clusters.push_back(Cluster{p, {stroke}, terminal});
    };
    for (size_t i = 0; i < d.strokes.size(); ++i)
      for (const Cut& c : cuts[i]) addItem(c.pos, static_cast<int>(i), false);
    // A stroke endpoint resting on another stroke's body (a trimmed or
    // coincident contact) is a junction even without a crossing.
    for (size_t i = 0; i < d.strokes.size(); ++i) {
      const auto& pts = d.strokes[i].points;
      if (pts.size() < 2 || d.strokes[i].closed) continue;
      for (const Vec2& end : {pts.front(), pts.back()}) {
        for (size_t j = 0; j < d.strokes.size(); ++j) {
          if (j == i) continue;
          if (distToStroke(end, d.strokes[j]) <= kJunctionTol) {
            addItem(end, static_cast<int>(i), true);
            addItem(end, static_cast<int>(j), false);
          }
        }
      }
    }

    bool split = false;
    if (allowSplit) {
      for (const auto& cl : clusters) {
        if (!cl.hasTerminal) continue;
        for (int si : cl.strokes) {
          Stroke& s = d.strokes[si];
          if (s.closed || s.points.size() < 3) continue;
          size_t idx = 0;
          double best = kInf;
          for (size_t k = 1; k + 1 < s.points.size(); ++k) {
            double dd = distance(s.points[k], cl.pos);
            if (dd < best) {
              best = dd;
              idx = k;
            }
          }
          if (best > kJunctionTol) continue;  // terminates here, nothing to split
          auto arc = prefixArclen(s);
          auto pointAtArc = [&](double a) {
            a = std::clamp(a, 0.0, arc.back());
            size_t k = 1;
            while (k + 1 < arc.size() && arc[k] < a) ++k;
            double seg = arc[k] - arc[k - 1];
            double t = seg > 0 ? (a - arc[k - 1]) / seg : 0.0;
            return s.points[k - 1] + (s.points[k] - s.points[k - 1]) * t;
          };
          Vec2 before = pointAtArc(arc[idx] - kCornerWindow);
          Vec2 after = pointAtArc(arc[idx] + kCornerWindow);
          Vec2 d1 = (s.points[idx] - before).normalized();
          Vec2 d2 = (after - s.points[idx]).normalized();
          if (d1.dot(d2) >= kCornerSplitCos) continue;  // no sharp corner
          Stroke tail;
          tail.width = s.width;
          tail.points.assign(s.points.begin() + idx, s.points.end());
          tail.ligament.assign(s.ligament.begin() + std::min(s.ligament.size(), idx),
                               s.ligament.end());
          s.points.resize(idx + 1);
          if (s.ligament.size() > idx) s.ligament.resize(idx);
          d.strokes.push_back(std::move(tail));
          split = true;
          break;  // clusters are stale after a split; redo the pass
        }
        if (split) break;
      }
    }
    if (!split) {
      // Clusters closer than a pixel are below raster resolution: merge them
      // into the one with more incident strokes.
      for (size_t a = 0; a < clusters.size(); ++a)
        for (size_t b = a + 1; b < clusters.size();) {
          if (distance(clusters[a].pos, clusters[b].pos) < 1.0) {
            if (clusters[b].strokes.size() > clusters[a].strokes.size())
              clusters[a].pos = clusters[b].pos;
            for (int sidx : clusters[b].strokes)
              if (std::find(clusters[a].strokes.begin(), clusters[a].strokes.end(), sidx) ==
                  clusters[a].strokes.end())
                clusters[a].strokes.push_back(sidx);
            clusters.erase(clusters.begin() + static_cast<long>(b));
          } else {
            ++b;
          }
        }
      for (const auto& cl : clusters)
        if (cl.strokes.size() >= 2) d.junctions.push_back(Junction{cl.pos, cl.strokes});
    }
    return split;
  };

  while (recordPass(true)) {
  }

  // Two junction vertices less than a pixel apart leave a sub-pixel connector
  // stroke between them (possibly shredded into fragments by the corner
  // splits above). Contract each such connector to a single point and snap
  // the incident stroke endpoints there, so one junction remains.
  constexpr double kTinyStroke = 1.0;
  for (bool again = true; again;) {
    again = false;
    for (size_t i = 0; i < d.strokes.size(); ++i) {
      Stroke& s = d.strokes[i];
      if (s.closed || s.points.size() < 2) continue;
      if (prefixArclen(s).back() > kTinyStroke) continue;
      auto touchesOther = [&](const Vec2& p) {
        for (size_t j = 0; j < d.strokes.size(); ++j)
          if (j != i && distToStroke(p, d.strokes[j]) <= kJunctionTol) return true;
        return false;
      };
      if (!touchesOther(s.points.front()) || !touchesOther(s.points.back())) continue;
      Vec2 target = (s.points.front() + s.points.back()) * 0.5;
      for (size_t j = 0; j < d.strokes.size(); ++j) {
        if (j == i || d.strokes[j].closed || d.strokes[j].points.empty()) continue;
        for (Vec2* end : {&d.strokes[j].points.front(), &d.strokes[j].points.back()})
          if (distance(*end, s.points.front()) <= kJunctionTol ||
              distance(*end, s.points.back()) <= kJunctionTol)
            *end = target;
      }
      d.strokes.erase(d.strokes.begin() + static_cast<long>(i));
      again = true;
      break;
    }
  }
  recordPass(false);
  return d;
}

namespace {

void dpRecurse(const std::vector<Vec2>& pts, size_t lo, size_t hi, double tol,
               std::vector<char>& keep) {
  if (hi <= lo + 1) return;
  double best = -1.0;
  size_t bestIdx = lo;
  for (size_t i = lo + 1; i < hi; ++i) {
    double dd = pointSegmentDistance(pts[i], pts[lo], pts[hi]);
    if (dd > best) {
      best = dd;
      bestIdx = i;
    }
  }
  if (best > tol) {
    keep[bestIdx] = 1;
    dpRecurse(pts, lo, bestIdx, tol, keep);
    dpRecurse(pts, bestIdx, hi, tol, keep);
  }
}

}  // namespace

std::vector<Vec2> douglasPeucker(const std::vector<Vec2>& pts, double tol) {
  if (pts.size() <= 2 || tol <= 0.0) return pts;
  std::vector<char> keep(pts.size(), 0);
  keep.front() = keep.back() = 1;
  dpRecurse(pts, 0, pts.size() - 1, tol, keep);
  std::vector<Vec2> out;
  for (size_t i = 0; i < pts.size(); ++i)
    if (keep[i]) out.push_back(pts[i]);
  return out;
}

VectorDrawing simplifySmooth(VectorDrawing d, double tol, int rounds) {
  for (auto& s : d.strokes) {
    if (s.points.size() < 3) continue;
    // Pin endpoints and any vertex coinciding with a junction.
    auto pinnedIdx = [&](const std::vector<Vec2>& pts) {
      std::vector<char> pin(pts.size(), 0);
      pin.front() = pin.back() = 1;
      for (size_t i = 0; i < pts.size(); ++i)
        for (const auto& j : d.junctions)
          if (distance(pts[i], j.pos) <= kMergeEps) pin[i] = 1;
      return pin;
    };

    if (tol > 0.0) {
      auto pin = pinnedIdx(s.points);
      std::vector<char> keep = pin;
      size_t lo = 0;
      for (size_t i = 1; i < s.points.size(); ++i) {
        if (!pin[i]) continue;
        dpRecurse(s.points, lo, i, tol, keep);
        lo = i;
      }
      std::vector<Vec2> pts;
      std::vector<uint8_t> lig;
      uint8_t pending = 0;
      for (size_t i = 0; i < s.points.size(); ++i) {
        if (i > 0 && i - 1 < s.ligament.size()) pending = std::max(pending, s.ligament[i - 1]);
        if (!keep[i]) continue;
        if (!pts.empty()) {
          lig.push_back(pending);
          pending = 0;
        }
        pts.push_back(s.points[i]);
      }
      s.points = std::move(pts);
      s.ligament = std::move(lig);
    }

    auto pin = pinnedIdx(s.points);
    for (int r = 0; r < rounds; ++r) {
      std::vector<Vec2> next = s.points;
      for (size_t i = 1; i + 1 < s.points.size(); ++i) {
        if (pin[i]) continue;
        Vec2 avg = (s.points[i - 1] + s.points[i + 1]) * 0.5;
        next[i] = s.points[i] + (avg - s.points[i]) * kSmoothFactor;
      }
      s.points = std::move(next);
    }
  }
  return d;
}

}  // namespace linevec
