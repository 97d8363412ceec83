#pragma once

#include <optional>
#include <vector>

#include "backorbit/scalar.hpp"

// Hyperbolic geometry of the unit ball B^q in C^q.
//
// Distances use the normalization k(0, z) = log((1 + |z|) / (1 - |z|)), i.e.
// twice the curvature -1 convention. With it the horofunction
// lim_{w -> zeta} k(z, w) - k(0, w) equals log(|1 - <z, zeta>|^2 / (1 - |z|^2))
// and the radial anchor tanh(k log(lambda) / 2) e_1 sits on the horosphere of
// radius lambda^-k. See docs/conventions.md.

namespace backorbit {

/// A point strictly inside the unit ball.
class BallPoint {
 public:
  /// Throws DomainError when 1 - |z| < kBoundaryGuard or q < 1.
  explicit BallPoint(CVector coords);

  static BallPoint origin(int q);

  int dimension() const { return static_cast<int>(coords_.size()); }
  const CVector& coords() const { return coords_; }
  const Complex& operator[](int i) const { return coords_(i); }

  Real norm() const;
  /// 1 - |z|^2
  Real one_minus_norm2() const;

 private:
  CVector coords_;
};

/// A point of the unit sphere. Stored normalized; construction requires
/// | |z| - 1 | <= 1e-12.
class BoundaryPoint {
 public:
  explicit BoundaryPoint(CVector coords);

  static BoundaryPoint e1(int q);

  int dimension() const { return static_cast<int>(coords_.size()); }
  const CVector& coords() const { return coords_; }
  const Complex& operator[](int i) const { return coords_(i); }

 private:
  CVector coords_;
};

struct BoundaryNormalForm {
  BoundaryPoint fixed_point;
  Real dilation;
};

/// Holomorphic automorphism of B^q, stored as a matrix M in U(q,1) acting
/// projectively: z -> (A z + b) / (c^T z + d) with M = [[A, b], [c^T, d]].
/// Every automorphism factors uniquely as U o phi_a with a = g^-1(0) and U
/// unitary; mobius_center() and unitary() return that factorization.
class Automorphism {
 public:
  static Automorphism identity(int q);
  /// Accepts any nonzero multiple of an element of U(q,1); rescales it.
  /// Throws DomainError when the Hermitian form is not preserved (1e-10).
  static Automorphism from_matrix(const CMatrix& m);
  /// Throws DomainError unless U*U = I within 1e-12.
  static Automorphism from_unitary(const CMatrix& u);

  int dimension() const { return static_cast<int>(matrix_.rows()) - 1; }
  const CMatrix& matrix() const { return matrix_; }

  BallPoint operator()(const BallPoint& z) const;
  BoundaryPoint operator()(const BoundaryPoint& zeta) const;
  /// Evaluates the linear fractional formula without guarding the result.
  CVector apply_raw(const CVector& z) const;
  CMatrix jacobian(const CVector& z) const;

  Automorphism inverse() const;

  BallPoint mobius_center() const;
  CMatrix unitary() const;

  const std::optional<BoundaryNormalForm>& normal_form() const { return normal_form_; }
  Automorphism with_normal_form(BoundaryNormalForm form) const;

  /// Dilation at a boundary fixed point, exp(-horofunction(g^-1(0), zeta)).
  /// Throws DomainError when g does not fix zeta (1e-10).
  Real dilation_at(const BoundaryPoint& zeta) const;

  /// max | M* J M - J | entry, J = diag(1, ..., 1, -1).
  Real form_defect() const;

  friend Automorphism operator*(const Automorphism& g, const Automorphism& h);

 private:
  explicit Automorphism(CMatrix m) : matrix_(std::move(m)) {}

  CMatrix matrix_;
  std::optional<BoundaryNormalForm> normal_form_;
};

Real kob_dist(const BallPoint& z, const BallPoint& w);

/// The involution exchanging a and 0; the identity for a = 0.
Automorphism mobius_involution(const BallPoint& a);

Real horofunction(const BallPoint& z, const BoundaryPoint& zeta);

/// Signed membership: margin > 0 strictly inside, margin < 0 outside.
struct Membership {
  bool inside;
  Real margin;
};

struct Horosphere {
  BoundaryPoint center;
  Real radius;
};

/// E_k = horosphere of radius lambda^-k around zeta.
Horosphere horosphere_level(const BoundaryPoint& zeta, Real lambda, int k);

/// margin = log R - horofunction(z).
Membership horosphere_contains(const BallPoint& z, const Horosphere& h);

struct KoranyiRegion {
  BoundaryPoint vertex;
  Real amplitude;
};

/// k(0, z) + horofunction(z, zeta).
Real koranyi_functional(const BallPoint& z, const BoundaryPoint& zeta);

/// margin = 2 log M - koranyi_functional(z). Throws DomainError if M <= 1.
Membership koranyi_contains(const BallPoint& z, const KoranyiRegion& k);

struct GeodesicTube {
  BoundaryPoint target;
  Real width;
};

/// Point at distance s from the origin on the radius towards zeta.
BallPoint geodesic_point(const BoundaryPoint& zeta, Real s);

struct GeodesicProjection {
  Real distance;
  Real parameter;  // s* with k(z, gamma(s*)) = distance
  int iterations;
};

/// inf over s >= 0 of k(z, gamma(s)) where gamma runs from 0 to zeta.
GeodesicProjection dist_to_geodesic(const BallPoint& z, const BoundaryPoint& zeta);

/// margin = L - dist_to_geodesic(z).
Membership tube_contains(const BallPoint& z, const GeodesicTube& tube);

/// Unitary automorphism U with U(zeta) = e_1.
Automorphism rotation_to_e1(const BoundaryPoint& zeta);

/// Hyperbolic automorphism fixing zeta and -zeta, with dilation lambda at
/// zeta (zeta repelling). It moves the origin to gamma_zeta(-log lambda).
Automorphism hyperbolic_automorphism(const BoundaryPoint& zeta, Real lambda);

/// Heisenberg translation fixing zeta. In Siegel coordinates of the frame
/// zeta = e_1: (w1, w') -> (w1 + t + 2i<w', v> + i|v|^2, w' + v).
Automorphism parabolic_automorphism(const BoundaryPoint& zeta, const CVector& shift, Real t);

struct NormalizingResult {
  Automorphism map;
  Real dilation;  // dilation of map at zeta
};

/// g with g(a) = 0 and g(zeta) = zeta, built as parabolic o hyperbolic o
/// (Householder involution on the complex directions orthogonal to zeta).
/// The reported dilation equals exp(-horofunction(a, zeta)).
NormalizingResult normalizing_automorphism(const BallPoint& a, const BoundaryPoint& zeta);

// Siegel half-space model {Im w1 > |w'|^2}, in the frame where zeta = e_1.
// Im w1 - |w'|^2 = exp(-horofunction).
CVector ball_to_siegel(const BallPoint& z, const BoundaryPoint& zeta);
BallPoint siegel_to_ball(const CVector& w, const BoundaryPoint& zeta);

}  // namespace backorbit
