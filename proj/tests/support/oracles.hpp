#pragma once

#include <vector>

#include "linevec/embedding.hpp"
#include "linevec/image.hpp"
#include "linevec/polyvector.hpp"

namespace oracle {

using linevec::Complex;
using linevec::Vec2;

/// All roots of the monic polynomial z^n + a_{n-1} z^{n-1} + ... + a_0 via
/// Durand-Kerner iteration. coeffs = {a_0, ..., a_{n-1}}.
std::vector<Complex> durandKerner(const std::vector<Complex>& coeffs);

/// True if the two root multisets match within tol under any pairing.
bool sameRootSet(std::vector<Complex> a, std::vector<Complex> b, double tol);

struct Segment {
  Vec2 a, b;
  int id = 0;
};

struct SegPair {
  int first, second;
  Vec2 pos;
};

/// All-pairs brute-force segment intersections (distinct ids only).
std::vector<SegPair> bruteForceIntersections(const std::vector<Segment>& segs);

/// Bellman-Ford distances over an auxiliary graph (undirected edges).
std::vector<double> bellmanFord(const linevec::AuxGraph& aux, int src);

/// Central finite-difference gradient of the field energy.
Eigen::VectorXd finiteDifferenceGradient(const linevec::FieldEnergy& energy,
                                         const Eigen::VectorXd& x, double h = 1e-5);

/// White pixels not reachable from the image border through white pixels
/// (flood fill); the enclosed-hole count of a drawing.
int enclosedWhitePixels(const linevec::IntensityGrid& grid, double thetaNoise = 0.35);

/// Exhaustive aux edge weight: enumerates every same-curve member pair.
double exhaustiveEdgeWeight(const linevec::Bundle& v1, const linevec::Bundle& v2,
                            const std::vector<int>& sharedCurves, const Vec2& p,
                            const Vec2& q, double eta);

}  // namespace oracle
