#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "linevec/narrow_band.hpp"

namespace linevec {

/// Direction pair {+-u, +-v}; labeling and signs carry no meaning.
struct Frame {
  Complex u;
  Complex v;
};

/// Coefficients of f(z) = z^4 + c2 z^2 + c0 whose roots are the frame
/// directions; one (c0, c2) pair per narrow-band pixel.
struct PolyVectorField {
  std::vector<Complex> c0;
  std::vector<Complex> c2;

  size_t size() const { return c0.size(); }
  Frame frameAt(size_t i) const;
};

std::pair<Complex, Complex> frameToCoeffs(const Complex& u, const Complex& v);
Frame coeffsToFrame(const Complex& c0, const Complex& c2);

enum class SolverKind { LBFGS, Linear };

struct SolverParams {
  double lambda = 50.0;
  double mu = 0.1;
  int lbfgsHistory = 6;
  double gradTol = -1.0;  // < 0: 1e-6 * number of real unknowns
  int maxIters = 10000;
  SolverKind solver = SolverKind::LBFGS;
};

/// Quadratic energy of the field over a band: alignment + lambda * smoothness
/// + mu * regularization, with Neumann boundary handling (smoothness only on
/// 4-connected pixel pairs that are both in the band).
class FieldEnergy {
 public:
  FieldEnergy(const NarrowBand& band, const SolverParams& params);

  int unknowns() const { return 4 * int(n_); }
  double resolvedGradTol() const;

  /// Returns E(x) and fills grad (both exact; the energy is quadratic).
  double energyAndGradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const;
  double energy(const Eigen::VectorXd& x) const;

  static Eigen::VectorXd pack(const PolyVectorField& field);
  static PolyVectorField unpack(const Eigen::VectorXd& x);
  static PolyVectorField crossFieldGuess(size_t n);

 private:
  struct PixelTerm {
    double weight;
    Complex s;  // direction^2
    Complex q;  // direction^4
  };
  struct Edge {
    int a;
    int b;
    double weight;
  };

  size_t n_;
  SolverParams params_;
  std::vector<PixelTerm> align_;  // one entry per pixel; weight 0 disables
  std::vector<PixelTerm> reg_;
  std::vector<Edge> edges_;
};

struct OptimizeStats {
  int iterations = 0;
  double initialEnergy = 0.0;
  double finalEnergy = 0.0;
  double gradNorm = 0.0;
};

/// Minimizes the field energy starting from the axis-aligned cross field.
PolyVectorField optimizeField(const NarrowBand& band, const SolverParams& params,
                              OptimizeStats* stats = nullptr);

/// Pixels (band indices) where the frame degenerates: near-zero discriminant
/// or inconsistent least-angle root matching around a 2x2 pixel loop.
std::vector<int> detectSingularities(const PolyVectorField& field, const NarrowBand& band);

/// True when matching frame a onto frame b by least angle swaps the root
/// families (a.u pairs with b.v).
bool leastAngleMatchSwaps(const Frame& a, const Frame& b);

struct RelaxResult {
  PolyVectorField field;
  NarrowBand band;           // alignment weights zeroed at relaxed pixels
  std::vector<int> singular;  // unresolved singular pixels (band indices)
  int rounds = 0;
  size_t relaxedPixels = 0;
};

/// Iterates optimize -> detect -> zero alignment weights at singular pixels
/// until the active singular set is empty (terminates; each round strictly
/// reduces the number of nonzero alignment weights).
RelaxResult relaxSingularities(const NarrowBand& band, const SolverParams& params);

/// Per-pixel CSV dump: x,y,c0_re,c0_im,c2_re,c2_im,u_re,u_im,v_re,v_im.
void dumpFieldCsv(const PolyVectorField& field, const NarrowBand& band,
                  const std::string& path);

}  // namespace linevec
