#pragma once

#include <string>
#include <vector>

#include "linevec/tracer.hpp"

namespace linevec {

constexpr int kDefaultNHole = 4;

/// One stroke cross-section: intersection points between traced curves and
/// an orthogonal test curve, grouped from the seed outward with gaps < 1 px.
struct BundleMember {
  int curve = -1;
  double arcOnCurve = 0.0;
  Vec2 pos;
};

struct Bundle {
  std::vector<BundleMember> members;
  Vec2 barycenter;
  double width = 0.0;  // max pairwise distance among member positions
  bool fromUnzip = false;

  void recomputeGeometry();
  std::vector<int> curveIds() const;  // sorted, unique
};

struct TopoEdge {
  int a = -1;
  int b = -1;
  std::vector<int> curves;  // shared curve ids realizing the edge (sorted)
  bool bridge = false;      // singularity-gap repair edge (straight ligament)
};

struct TopologyGraph {
  std::vector<Bundle> vertices;
  std::vector<TopoEdge> edges;

  std::vector<std::vector<int>> adjacency() const;  // vertex -> incident edge ids
  std::vector<int> degrees() const;
  int otherEnd(int edgeId, int v) const {
    return edges[edgeId].a == v ? edges[edgeId].b : edges[edgeId].a;
  }
  double edgeLength(int edgeId) const {
    return distance(vertices[edges[edgeId].a].barycenter, vertices[edges[edgeId].b].barycenter);
  }
};

/// One bundle per curve endpoint seed; duplicate member sets are removed.
std::vector<Bundle> buildBundles(const TraceResult& traced, const FieldSampler& sampler);

/// Vertices = bundles; edge iff two bundles hold intersection points adjacent
/// along a shared curve, annotated with all such curves.
TopologyGraph buildGraph(std::vector<Bundle> bundles);

/// Contracts every cycle whose barycenter polygon encloses fewer than nHole
/// white (non-band) pixels.
TopologyGraph contractSmallLoops(TopologyGraph g, const NarrowBand& band,
                                 int nHole = kDefaultNHole);

/// Removes spurious leaf branches: at every vertex of valence > 2 repeatedly
/// takes the shortest branch and prunes it when its length outside the other
/// strokes is below max(fullLength/4, 1 px).
TopologyGraph pruneBranches(TopologyGraph g);

/// Splits valence >= 4 vertices into degree-3 pairs joined by a zero-length
/// edge, then duplicates every valence-2 path between degree-3 vertices into
/// two parallel paths, reassigning the remaining end edges by shared curves.
TopologyGraph unzipParallel(TopologyGraph g);

/// Connects leaf vertices within 2 px of a singular pixel to their nearest
/// non-adjacent vertex (cap radius 10 px), greedily by increasing distance.
TopologyGraph repairSingularityGaps(TopologyGraph g, const NarrowBand& band,
                                    const std::vector<int>& singularPixels);

/// Pixels enclosed by a closed polygon (pixel-center even-odd test) that are
/// not in the band. Shared by loop contraction and its tests.
int countEnclosedWhitePixels(const std::vector<Vec2>& polygon, const NarrowBand& band);

/// Debug dump of the graph (vertices with barycenters/widths, edges with
/// shared-curve ids) as JSON.
void dumpGraphJson(const TopologyGraph& g, const std::string& path);

}  // namespace linevec
