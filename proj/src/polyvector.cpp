#include "linevec/polyvector.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>

namespace linevec {

Frame PolyVectorField::frameAt(size_t i) const { return coeffsToFrame(c0[i], c2[i]); }

std::pair<Complex, Complex> frameToCoeffs(const Complex& u, const Complex& v) {
  Complex u2 = u * u, v2 = v * v;
  return {u2 * v2, -(u2 + v2)};
}

Frame coeffsToFrame(const Complex& c0, const Complex& c2) {
  Complex disc = std::sqrt(c2 * c2 - 4.0 * c0);
  Frame f;
  f.u = std::sqrt(-0.5 * (c2 + disc));
  f.v = std::sqrt(-0.5 * (c2 - disc));
  return f;
}

FieldEnergy::FieldEnergy(const NarrowBand& band, const SolverParams& params)
    : n_(band.pixels.size()), params_(params) {
  align_.resize(n_);
  reg_.resize(n_);
  for (size_t i = 0; i < n_; ++i) {
    const auto& px = band.pixels[i];
    align_[i].weight = 0.0;
    reg_[i].weight = 0.0;
    if (std::abs(px.tangent) > 0.0 && px.alignWeight > 0.0) {
      Complex t = px.tangent / std::abs(px.tangent);
      align_[i] = {px.alignWeight, t * t, t * t * t * t};
    }
    double gn = std::abs(px.gradient);
    if (gn > 0.0 && params.mu > 0.0) {
      Complex g = px.gradient / gn;
      reg_[i] = {params.mu, g * g, g * g * g * g};
    }
  }
  // Forward differences over 4-connected in-band pairs, each counted once;
  // edge weight averages the endpoint smoothness weights.
  for (size_t i = 0; i < n_; ++i) {
    const auto& px = band.pixels[i];
    for (auto [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
      int j = band.indexOf(px.x + dx, px.y + dy);
      if (j < 0) continue;
      double w = 0.5 * (px.smoothWeight + band.pixels[j].smoothWeight);
      if (w > 0.0) edges_.push_back({int(i), j, params.lambda * w});
    }
  }
}

double FieldEnergy::resolvedGradTol() const {
  return params_.gradTol >= 0.0 ? params_.gradTol : 1e-6 * unknowns();
}

namespace {
inline Complex getC(const Eigen::VectorXd& x, size_t base) {
  return {x[base], x[base + 1]};
}
inline void addC(Eigen::VectorXd& g, size_t base, const Complex& v) {
  g[base] += v.real();
  g[base + 1] += v.imag();
}
}  // namespace

double FieldEnergy::energyAndGradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
  grad.setZero(unknowns());
  double e = 0.0;
  for (size_t i = 0; i < n_; ++i) {
    size_t b0 = 4 * i, b2 = 4 * i + 2;
    Complex c0 = getC(x, b0), c2 = getC(x, b2);
    for (const PixelTerm* term : {&align_[i], &reg_[i]}) {
      if (term->weight <= 0.0) continue;
      Complex r = c0 + term->s * c2 + term->q;  // f evaluated at the unit direction
      e += term->weight * std::norm(r);
      addC(grad, b0, 2.0 * term->weight * r);
      addC(grad, b2, 2.0 * term->weight * r * std::conj(term->s));
    }
  }
  for (const auto& edge : edges_) {
    size_t a = 4 * size_t(edge.a), b = 4 * size_t(edge.b);
    for (size_t off : {size_t(0), size_t(2)}) {
      Complex d = getC(x, a + off) - getC(x, b + off);
      e += edge.weight * std::norm(d);
      addC(grad, a + off, 2.0 * edge.weight * d);
      addC(grad, b + off, -2.0 * edge.weight * d);
    }
  }
  return e;
}

double FieldEnergy::energy(const Eigen::VectorXd& x) const {
  Eigen::VectorXd scratch;
  return energyAndGradient(x, scratch);
}

Eigen::VectorXd FieldEnergy::pack(const PolyVectorField& field) {
  Eigen::VectorXd x(4 * field.size());
  for (size_t i = 0; i < field.size(); ++i) {
    x[4 * i] = field.c0[i].real();
    x[4 * i + 1] = field.c0[i].imag();
    x[4 * i + 2] = field.c2[i].real();
    x[4 * i + 3] = field.c2[i].imag();
  }
  return x;
}

PolyVectorField FieldEnergy::unpack(const Eigen::VectorXd& x) {
  PolyVectorField f;
  size_t n = size_t(x.size()) / 4;
  f.c0.resize(n);
  f.c2.resize(n);
  for (size_t i = 0; i < n; ++i) {
    f.c0[i] = {x[4 * i], x[4 * i + 1]};
    f.c2[i] = {x[4 * i + 2], x[4 * i + 3]};
  }
  return f;
}

PolyVectorField FieldEnergy::crossFieldGuess(size_t n) {
  // u = 1, v = i  =>  (c0, c2) = (-1, 0)
  PolyVectorField f;
  f.c0.assign(n, Complex(-1.0, 0.0));
  f.c2.assign(n, Complex(0.0, 0.0));
  return f;
}

namespace {

/// L-BFGS with exact line search along each direction; exact because the
/// energy is quadratic, so one extra gradient evaluation per iteration gives
/// the exact step and the new gradient by linearity.
void minimizeLbfgs(const FieldEnergy& energy, Eigen::VectorXd& x, const SolverParams& params,
                   OptimizeStats* stats) {
  const double tol = energy.resolvedGradTol();
  const int m = std::max(1, params.lbfgsHistory);
  Eigen::VectorXd g(x.size());
  double e = energy.energyAndGradient(x, g);
  if (stats) stats->initialEnergy = e;
  if (!std::isfinite(e)) throw std::runtime_error("non-finite field energy");

  std::deque<Eigen::VectorXd> sHist, yHist;
  std::deque<double> rhoHist;
  Eigen::VectorXd g2(x.size());
  int iter = 0;
  for (; iter < params.maxIters && g.norm() > tol; ++iter) {
    // Two-loop recursion.
    Eigen::VectorXd d = -g;
    std::vector<double> alpha(sHist.size());
    for (int k = int(sHist.size()) - 1; k >= 0; --k) {
      alpha[k] = rhoHist[k] * sHist[k].dot(d);
      d -= alpha[k] * yHist[k];
    }
    if (!sHist.empty()) {
      double gamma = sHist.back().dot(yHist.back()) / yHist.back().squaredNorm();
      d *= gamma;
    }
    for (size_t k = 0; k < sHist.size(); ++k) {
      double beta = rhoHist[k] * yHist[k].dot(d);
      d += (alpha[k] - beta) * sHist[k];
    }
    double gd = g.dot(d);
    if (gd >= 0.0) {  // not a descent direction; restart from steepest descent
      d = -g;
      gd = g.dot(d);
      sHist.clear();
      yHist.clear();
      rhoHist.clear();
    }
    energy.energyAndGradient(x + d, g2);
    Eigen::VectorXd hd = g2 - g;  // = Hessian * d by quadraticity
    double curv = d.dot(hd);
    double step;
    if (curv > 1e-300) {
      step = -gd / curv;
    } else {
      step = 1.0;  // flat direction, any step keeps energy non-increasing
    }
    Eigen::VectorXd s = step * d;
    Eigen::VectorXd y = step * hd;
    x += s;
    g += y;
    e += step * gd + 0.5 * step * step * curv;
    if (!std::isfinite(e)) throw std::runtime_error("non-finite field energy");
    double sy = s.dot(y);
    if (sy > 1e-300) {
      sHist.push_back(std::move(s));
      yHist.push_back(std::move(y));
      rhoHist.push_back(1.0 / sy);
      if (int(sHist.size()) > m) {
        sHist.pop_front();
        yHist.pop_front();
        rhoHist.pop_front();
      }
    }
  }
  if (stats) {
    stats->iterations = iter;
    stats->gradNorm = g.norm();
    stats->finalEnergy = energy.energy(x);
  }
}

/// Conjugate gradient on the normal equations of the quadratic, matrix-free
/// through gradient evaluations: H v = grad(v) - grad(0).
void minimizeLinear(const FieldEnergy& energy, Eigen::VectorXd& x, const SolverParams& params,
                    OptimizeStats* stats) {
  const double tol = energy.resolvedGradTol();
  Eigen::VectorXd g0(x.size());
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(x.size());
  double e0 = energy.energyAndGradient(zero, g0);
  (void)e0;
  if (stats) stats->initialEnergy = energy.energy(x);
  Eigen::VectorXd scratch(x.size());
  auto applyH = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    energy.energyAndGradient(v, scratch);
    return scratch - g0;
  };
  Eigen::VectorXd r = -(applyH(x) + g0);  // b - H x, with b = -g0
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  int iter = 0;
  for (; iter < params.maxIters && std::sqrt(rr) > tol; ++iter) {
    Eigen::VectorXd hp = applyH(p);
    double php = p.dot(hp);
    if (php <= 1e-300) break;
    double a = rr / php;
    x += a * p;
    r -= a * hp;
    double rr2 = r.squaredNorm();
    p = r + (rr2 / rr) * p;
    rr = rr2;
  }
  if (stats) {
    stats->iterations = iter;
    stats->gradNorm = std::sqrt(rr);
    stats->finalEnergy = energy.energy(x);
  }
}

}  // namespace

PolyVectorField optimizeField(const NarrowBand& band, const SolverParams& params,
                              OptimizeStats* stats) {
  if (band.empty()) throw std::invalid_argument("optimizeField: empty narrow band");
  FieldEnergy energy(band, params);
  Eigen::VectorXd x = FieldEnergy::pack(FieldEnergy::crossFieldGuess(band.pixels.size()));
  if (params.solver == SolverKind::LBFGS) {
    minimizeLbfgs(energy, x, params, stats);
  } else {
    minimizeLinear(energy, x, params, stats);
  }
  return FieldEnergy::unpack(x);
}

bool leastAngleMatchSwaps(const Frame& a, const Frame& b) {
  double keep = lineAngle(a.u, b.u) + lineAngle(a.v, b.v);
  double swap = lineAngle(a.u, b.v) + lineAngle(a.v, b.u);
  return swap < keep;
}

std::vector<int> detectSingularities(const PolyVectorField& field, const NarrowBand& band) {
  std::vector<char> flagged(band.pixels.size(), 0);
  for (size_t i = 0; i < band.pixels.size(); ++i) {
    Complex c0 = field.c0[i], c2 = field.c2[i];
    double disc = std::abs(c2 * c2 - 4.0 * c0);
    if (disc < 1e-6 * std::max(1.0, std::norm(c2))) flagged[i] = 1;
  }
  // 2x2 loop consistency: compose least-angle matchings around each fully
  // in-band pixel square; a net family swap flags all four corners.
  std::vector<Frame> frames(band.pixels.size());
  for (size_t i = 0; i < band.pixels.size(); ++i) frames[i] = field.frameAt(i);
  for (size_t i = 0; i < band.pixels.size(); ++i) {
    const auto& px = band.pixels[i];
    int i10 = band.indexOf(px.x + 1, px.y);
    int i01 = band.indexOf(px.x, px.y + 1);
    int i11 = band.indexOf(px.x + 1, px.y + 1);
    if (i10 < 0 || i01 < 0 || i11 < 0) continue;
    bool swap = false;
    int loop[5] = {int(i), i10, i11, i01, int(i)};
    for (int k = 0; k < 4; ++k) {
      if (leastAngleMatchSwaps(frames[loop[k]], frames[loop[k + 1]])) swap = !swap;
    }
    if (swap) {
      flagged[i] = 1;
      flagged[i10] = 1;
      flagged[i01] = 1;
      flagged[i11] = 1;
    }
  }
  std::vector<int> out;
  for (size_t i = 0; i < flagged.size(); ++i) {
    if (flagged[i]) out.push_back(int(i));
  }
  return out;
}

RelaxResult relaxSingularities(const NarrowBand& band, const SolverParams& params) {
  RelaxResult res;
  res.band = band;
  int maxRounds = int(band.pixels.size()) + 1;
  for (int round = 0; round < maxRounds; ++round) {
    res.field = optimizeField(res.band, params);
    res.singular = detectSingularities(res.field, res.band);
    res.rounds = round + 1;
    std::vector<int> active;
    for (int i : res.singular) {
      if (res.band.pixels[i].alignWeight > 0.0) active.push_back(i);
    }
    if (active.empty()) break;
    for (int i : active) res.band.pixels[i].alignWeight = 0.0;
    res.relaxedPixels += active.size();
  }
  return res;
}

void dumpFieldCsv(const PolyVectorField& field, const NarrowBand& band,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "x,y,c0_re,c0_im,c2_re,c2_im,u_re,u_im,v_re,v_im\n";
  for (size_t i = 0; i < band.pixels.size(); ++i) {
    Frame f = field.frameAt(i);
    out << band.pixels[i].x << ',' << band.pixels[i].y << ',' << field.c0[i].real() << ','
        << field.c0[i].imag() << ',' << field.c2[i].real() << ',' << field.c2[i].imag()
        << ',' << f.u.real() << ',' << f.u.imag() << ',' << f.v.real() << ','
        << f.v.imag() << '\n';
  }
}

}  // namespace linevec
