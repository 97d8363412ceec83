#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "backorbit/ball_geometry.hpp"
#include "backorbit/map_catalog.hpp"

namespace backorbit {

/// Finite piece of a backward orbit: f(z_{n+1}) = z_n for consecutive
/// indices. points[0] carries index first_index (negative for bilateral
/// windows, whose negative part is a forward orbit).
struct OrbitSegment {
  std::vector<BallPoint> points;
  BoundaryPoint zeta;
  Real lambda;
  std::string map_id;
  Real tol_chain = 0;
  int first_index = 0;

  int last_index() const { return first_index + static_cast<int>(points.size()) - 1; }
  bool contains(int n) const { return n >= first_index && n <= last_index(); }
  /// Throws DomainError outside the window.
  const BallPoint& at(int n) const;
};

/// max_n |f(z_{n+1}) - z_n| over the segment.
Real backward_residual(const OrbitSegment& orbit, const SelfMap& f);

/// r_k = tanh(k log(lambda) / 2) zeta, on the boundary of E_k.
BallPoint radial_anchor(const BoundaryPoint& zeta, const Real& lambda, int k);

struct StoppingRecord {
  int k;
  int n;                 // first n with f^n(r_k) outside the closed horoball E_0
  BallPoint exit_point;  // f^n(r_k)
  Real exit_margin;      // horofunction at the exit point
  bool capped;
};

/// Horofunction values within 1e-13 of 0 count as inside.
StoppingRecord stopping_time(const SelfMap& f, const BallPoint& r_k, const BoundaryPoint& zeta,
                             int k, int max_iterations = 100000);

/// Backward chain z_j = f^{n - j}(r_k), j = 0..n, rebuilt from the same
/// forward pass so that f(z_{j+1}) == z_j exactly.
OrbitSegment harvest_chain(const SelfMap& f, const BallPoint& r_k, const StoppingRecord& record,
                           const BoundaryPoint& zeta, const Real& lambda);

enum class OrbitMode { SingleTail, Cluster };

struct OrbitParams {
  OrbitMode mode = OrbitMode::SingleTail;
  int k_min = 1;
  int k_max = 40;
  int max_iterations = 100000;
  Real eps_sigma = Real("1e-3");
  Real rho_cluster = Real("0.1");
  Real tol_cluster = Real("1e-6");
  Real target_distance = Real("1e-4");  // |z_N - zeta| required at the deep end
};

struct OrbitDiagnostics {
  std::vector<Real> steps;           // d_j = k(z_j, z_{j+1})
  std::vector<Real> horofunction;    // horofunction(z_j)
  std::vector<Real> dist_to_zeta;    // |z_j - zeta|
  Real sigma_hat = 0;                // deepest step
  bool steps_monotone = true;        // d_j <= d_{j+1} + 1e-12
  bool horofunction_decreasing = true;  // strictly, for j >= 1
};

OrbitDiagnostics diagnose(const OrbitSegment& orbit);

struct BackwardOrbitResult {
  OrbitSegment orbit;
  OrbitDiagnostics diagnostics;
  OrbitMode mode;
  int k_used;  // generating k in single-tail mode, deepest k of the final cluster otherwise
  std::vector<StoppingRecord> records;
  std::vector<std::string> report;    // one line per examined k
  std::vector<std::string> warnings;
};

/// Throws ConstructionError when no chain passes the diagnostics.
BackwardOrbitResult construct_backward_orbit(const SelfMap& f, const BoundaryPoint& zeta,
                                             const Real& lambda, const OrbitParams& params = {});

/// Solves f(z) = target by damped Newton from seed, with a grid search
/// around the seed when Newton stalls. Residual <= max(1e-30, 1e-12 (1 - |target|)).
BallPoint newton_preimage(const SelfMap& f, const BallPoint& target, const BallPoint& seed);

struct PreimageParams {
  Real rho_branch = Real("1e-6");
};

/// Backward orbit z_0, ..., z_N by preimage solving. Among the candidate
/// preimages of z_n the one minimizing k(c, z_n) + horofunction(c) -
/// horofunction(z_n) is kept (zero exactly on the geodesic ray to zeta).
OrbitSegment backward_orbit_via_preimages(const SelfMap& f, const BallPoint& z0,
                                          const BoundaryPoint& zeta, const Real& lambda, int steps,
                                          const PreimageParams& params = {});

// Orbit CSV: j, re_z1..re_zq, im_z1..im_zq, horofunction, step_to_next, dist_to_zeta
void write_orbit_csv(std::ostream& out, const OrbitSegment& orbit);
/// Reads coordinates only; zeta, lambda and map_id come from the caller.
OrbitSegment read_orbit_csv(std::istream& in, const BoundaryPoint& zeta, const Real& lambda,
                            const std::string& map_id);

}  // namespace backorbit
