#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>

namespace linevec {

using Complex = std::complex<double>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squaredNorm() const { return x * x + y * y; }

  Vec2 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

inline Vec2 toVec(const Complex& c) { return {c.real(), c.imag()}; }
inline Complex toComplex(const Vec2& v) { return {v.x, v.y}; }

/// Angle between the lines spanned by two nonzero complex directions, in [0, pi/2].
inline double lineAngle(const Complex& a, const Complex& b) {
  Complex r = a * std::conj(b);
  // Squaring folds the sign ambiguity: arg(r^2)/2 in (-pi/2, pi/2].
  return std::abs(std::arg(r * r)) * 0.5;
}

/// Direction angle folded to [0, pi).
inline double angleModPi(const Complex& z) {
  double a = std::arg(z);
  if (a < 0.0) a += M_PI;
  if (a >= M_PI) a -= M_PI;
  return a;
}

/// Distance from point p to the segment [a, b].
inline double pointSegmentDistance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return distance(p, a);
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

struct SegmentHit {
  bool hit = false;
  Vec2 pos;
  double t = 0.0;  // parameter on [a0, a1]
  double u = 0.0;  // parameter on [b0, b1]
};

/// Proper segment-segment intersection (closed segments, non-collinear case).
inline SegmentHit segmentIntersect(const Vec2& a0, const Vec2& a1, const Vec2& b0,
                                   const Vec2& b1) {
  SegmentHit out;
  Vec2 r = a1 - a0;
  Vec2 s = b1 - b0;
  double denom = r.cross(s);
  if (denom == 0.0) return out;  // parallel or collinear
  Vec2 qp = b0 - a0;
  double t = qp.cross(s) / denom;
  double u = qp.cross(r) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return out;
  out.hit = true;
  out.t = t;
  out.u = u;
  out.pos = a0 + r * t;
  return out;
}

}  // namespace linevec
