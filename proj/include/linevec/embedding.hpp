#pragma once

#include <string>
#include <vector>

#include "linevec/topology.hpp"

namespace linevec {

constexpr double kDefaultEta = 0.07;
constexpr double kDefaultSimplifyTol = 0.75;
constexpr int kDefaultSmoothRounds = 3;
constexpr double kSmoothFactor = 0.5;

struct Stroke {
  std::vector<Vec2> points;
  std::vector<uint8_t> ligament;  // per segment: 1 = straight connector, 0 = on a traced curve
  double width = 0.0;             // representative stroke width (px)
  bool closed = false;

  double length() const;
};

struct Junction {
  Vec2 pos;
  std::vector<int> strokes;  // incident stroke ids
};

struct VectorDrawing {
  std::vector<Stroke> strokes;
  std::vector<Junction> junctions;
};

/// How one auxiliary edge is realized geometrically: a subpath of a shared
/// traced curve between its nearest member points, or a straight connector.
struct AuxRealization {
  bool viaCurve = false;
  int curve = -1;
  double arc1 = 0.0, arc2 = 0.0;  // arc positions of r1, r2 on the curve
  Vec2 r1, r2;
};

/// Weight of the auxiliary edge between member point p of bundle v1 and
/// member point q of bundle v2: connection cost (distances to the nearest
/// shared-curve intersection pair) plus eta-scaled centering cost.
double auxEdgeWeight(const Bundle& v1, const Bundle& v2, const std::vector<int>& sharedCurves,
                     const Vec2& p, const Vec2& q, double eta, bool bridge = false,
                     AuxRealization* real = nullptr);

/// Maximal valence-2 path between valence != 2 terminals. Closed valence-2
/// cycles are split at their lowest-id vertex (verts.front() == verts.back());
/// isolated vertices become single-vertex chains.
struct GraphChain {
  std::vector<int> verts;  // topology vertex ids, terminals included
  std::vector<int> edges;  // topology edge ids, size verts.size() - 1
  bool closed = false;
};

std::vector<GraphChain> enumerateChains(const TopologyGraph& g);

/// Auxiliary shortest-path graph for one chain. Node 0 is a virtual source at
/// srcPos, node 1 a virtual sink at dstPos, all others are bundle member
/// points. Terminal edges cost eta * |m - pos| / width.
struct AuxGraph {
  struct Node {
    int chainPos = -1;  // index into chain.verts, -1 for the two virtual nodes
    int member = -1;    // member index within that bundle
    Vec2 pos;
  };
  struct Edge {
    int a = 0, b = 0;
    double w = 0.0;
  };
  std::vector<Node> nodes;
  std::vector<Edge> edges;                 // undirected
  std::vector<AuxRealization> realization;  // parallel to edges
};

/// Members per chain are capped by spatial binning (0.25 px cells) once the
/// total exceeds maxMembers; below that the graph is exact.
AuxGraph buildChainAux(const TopologyGraph& g, const GraphChain& chain, const Vec2& srcPos,
                       const Vec2& dstPos, double eta, int maxMembers = 200);

struct ShortestPath {
  double cost = 0.0;
  bool ok = false;
  std::vector<int> nodes;  // src..dst inclusive
  std::vector<int> edges;  // aux edge ids along the path
};

/// Dijkstra with deterministic tie-breaking (lexicographic on node id).
ShortestPath shortestPath(const AuxGraph& aux, int src, int dst);

/// Embeds every chain of the graph as a concrete polyline via weighted
/// shortest paths over bundle members; terminals snap to barycenters. With
/// refine = true, valence-3 junction positions are then relocated to the
/// candidate barycenter minimizing the summed path distance to their three
/// chain anchors, and the incident paths are recomputed.
VectorDrawing embedGraph(const TopologyGraph& g, const std::vector<TracedCurve>& curves,
                         double eta = kDefaultEta, bool refine = true);

/// Inserts stroke-stroke intersection points, re-runs leaf-branch pruning on
/// the augmented structure (removing overshoot tails), and records junctions.
VectorDrawing pruneOvershoot(VectorDrawing d);

/// Douglas-Peucker simplification followed by endpoint- and junction-pinned
/// Laplacian smoothing.
VectorDrawing simplifySmooth(VectorDrawing d, double tol = kDefaultSimplifyTol,
                             int rounds = kDefaultSmoothRounds);

/// Standalone polyline helpers (shared with tests).
std::vector<Vec2> douglasPeucker(const std::vector<Vec2>& pts, double tol);

}  // namespace linevec
