#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "backorbit/ball_geometry.hpp"
#include "backorbit/newton.hpp"

namespace backorbit {

struct KnownBoundaryFixedPoint {
  CVector point;
  Real dilation;
};

/// Holomorphic self-map of B^q with optional Jacobian and catalog metadata.
class SelfMap {
 public:
  SelfMap(int q, std::string kind, std::string description, VectorField f, MatrixField df = {});

  int dimension() const { return q_; }
  const std::string& kind() const { return kind_; }
  const std::string& description() const { return description_; }

  /// Throws DomainError when the image is numerically on the sphere.
  BallPoint operator()(const BallPoint& z) const;
  CVector apply_raw(const CVector& z) const { return f_(z); }

  bool has_jacobian() const { return static_cast<bool>(df_); }
  /// Throws ConfigError when the map has no Jacobian.
  CMatrix jacobian(const CVector& z) const;

  const std::vector<KnownBoundaryFixedPoint>& known_fixed_points() const { return fixed_; }
  /// Set when the map is an automorphism; gives exact inverses.
  const std::optional<Automorphism>& automorphism() const { return automorphism_; }

  SelfMap with_fixed_points(std::vector<KnownBoundaryFixedPoint> points) const;
  SelfMap with_automorphism(Automorphism g) const;

 private:
  int q_;
  std::string kind_;
  std::string description_;
  VectorField f_;
  MatrixField df_;
  std::vector<KnownBoundaryFixedPoint> fixed_;
  std::optional<Automorphism> automorphism_;
};

// ---------------------------------------------------------------- builders

SelfMap make_identity(int q);
/// z -> A z. No admissibility check; see self_map_check.
SelfMap make_linear(const CMatrix& a);
SelfMap make_automorphism(const Automorphism& g, const std::string& description = "automorphism");
/// Disc automorphism e^{i theta} (z - a) / (1 - conj(a) z).
SelfMap make_disc_mobius(const Complex& a, const Real& theta = 0);
/// e^{i theta} prod (z - a_i) / (1 - conj(a_i) z). Boundary fixed points are
/// found from the fixed-point polynomial and recorded with their dilations.
SelfMap make_blaschke(const std::vector<Complex>& zeros, const Real& theta = 0);
/// (z1, z') -> (phi(z1), c z'). Requires |c|^2 <= (1 - |phi(0)|) / (1 + |phi(0)|).
SelfMap make_warped_product(const SelfMap& base, const Complex& c, int q);
/// g o f o g^-1
SelfMap conjugate(const SelfMap& f, const Automorphism& g);
/// outer o inner
SelfMap compose(const SelfMap& outer, const SelfMap& inner);
SelfMap iterate(const SelfMap& f, int count);

// ------------------------------------------------------------------ checks

struct SelfMapCheck {
  bool pass;
  Real worst_margin;  // min over samples of 1 - |f(z)|
  CVector witness;    // sample attaining the worst margin
  int samples;
};

/// Samples uniform in radius plus a shell graded toward the sphere.
SelfMapCheck self_map_check(const SelfMap& f, int samples, std::uint64_t seed = 1);

/// Worst relative deviation of the Jacobian from central differences.
Real jacobian_check(const SelfMap& f, int samples, std::uint64_t seed = 1);

struct BoundaryProbe {
  bool fixed;
  std::vector<Real> residuals;  // |f(z) - zeta| at the deepest probe of each sequence
};

/// Evaluates f along one radial and two tangentially offset sequences inside
/// K(zeta, 2), s = 4..40, and requires |f(z) - zeta| -> 0 along each.
BoundaryProbe probe_boundary_fixed(const SelfMap& f, const BoundaryPoint& zeta, const Real& tol);
bool is_boundary_fixed(const SelfMap& f, const BoundaryPoint& zeta, const Real& tol = Real("1e-8"));

struct DilationEstimate {
  Real lambda;
  Real log_lambda;
  Real tail_infimum;         // min of d(s) over the tail of the grid
  Real extrapolated;         // Aitken value from the last three grid points
  std::optional<Real> jacobian_lambda;  // <Df(gamma(s)) zeta, zeta> at the last grid point
  std::vector<Real> grid;
  std::vector<Real> profile;  // d(s) = s - k(0, f(gamma(s)))
};

/// Throws OutOfScopeError when log lambda <= 1e-9 or d(s) keeps growing.
DilationEstimate estimate_dilation(const SelfMap& f, const BoundaryPoint& zeta,
                                   const Real& s_max = 30);

enum class DynamicsTag { InteriorFixedPoint, DenjoyWolffBoundary };

struct DynamicsClass {
  DynamicsTag tag;
  CVector witness;              // interior fixed point or Denjoy-Wolff point
  std::vector<CVector> cloud;   // forward-iterate accumulation sample
  int iterations;
};

/// Iterates the origin and eight seeded points. Throws NumericalError when
/// neither an interior fixed point nor a common boundary limit shows up.
DynamicsClass classify_dynamics(const SelfMap& f, int max_iterations = 10000,
                                std::uint64_t seed = 7);

struct PoleClearance {
  SelfMap map;              // h o f o h^-1
  Automorphism conjugator;  // h
  Real translation;         // log of the dilation of h at zeta
  Real min_horofunction;    // over the transported witness set
  Real dilation_before;
  Real dilation_after;
};

/// Conjugates by hyperbolic automorphisms fixing +-zeta, doubling the
/// translation from 0.25, until the witness set has horofunction > delta.
PoleClearance ensure_pole_clearance(const SelfMap& f, const BoundaryPoint& zeta,
                                    const Real& delta = Real("0.1"));
PoleClearance ensure_pole_clearance(const SelfMap& f, const BoundaryPoint& zeta,
                                    const DynamicsClass& dynamics, const Real& delta = Real("0.1"));

}  // namespace backorbit
