#pragma once

#include <cstdint>
#include <random>

#include "backorbit/ball_geometry.hpp"

namespace backorbit {

/// Seeded point generator. Every sampled quantity in the library goes
/// through one of these, so a seed fixes all outputs.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  Real uniform(double lo = 0.0, double hi = 1.0);
  Real normal();
  int uniform_int(int lo, int hi);

  /// Uniform direction on the unit sphere of C^q.
  CVector direction(int q);

  /// Radius uniform in [0, max_radius], direction uniform.
  BallPoint ball_point(int q, double max_radius = 0.999);

  /// 1 - |z| = 10^(-u * decades) with u uniform: a shell graded toward the sphere.
  BallPoint shell_point(int q, double decades = 12.0);

  /// Horofunction uniform in [h_lo, h_hi]; position along the horosphere
  /// drawn in Siegel coordinates with a scale that follows the horosphere.
  BallPoint horoball_point(const BoundaryPoint& zeta, double h_lo, double h_hi);

  /// Point at Kobayashi distance `radius` from gamma_zeta(s), random direction.
  BallPoint tube_point(const BoundaryPoint& zeta, const Real& s, const Real& radius);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Automorphism moving the origin to gamma_zeta(s), s >= 0.
Automorphism axial_translation(const BoundaryPoint& zeta, const Real& s);

/// A random automorphism U o phi_a with |a| <= max_radius.
Automorphism random_automorphism(Sampler& sampler, int q, double max_radius = 0.9);

}  // namespace backorbit
