#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "backorbit/map_catalog.hpp"
#include "backorbit/orbit_engine.hpp"

namespace backorbit {

/// Appends x_{-n} = f^n(x_0), n = 1..forward_steps, in front of the orbit.
OrbitSegment extend_to_bilateral(const OrbitSegment& orbit, const SelfMap& f, int forward_steps);

struct ProfileParams {
  Real eps_plateau = Real("1e-2");
};

struct OrbitComparison {
  int first = 0;                // common window [first, last]
  int last = 0;
  std::vector<Real> direct;     // k(x_n, y_n)
  std::vector<Real> shifted;    // min_m k(x_n, y_m)
  std::vector<int> argmin;      // minimizing m for each n
  bool shifted_monotone = true;  // within 1e-12
  Real last_quarter_increase = 0;
  bool plateau = false;
  Real bound = 0;               // sup of the shifted profile over the window
};

/// Both orbits must be backward orbits of f converging to the same point.
/// y is extended forward by f so the shifted scan covers a window of four
/// half-lengths around each n. Throws DomainError when the targets differ.
OrbitComparison orbit_distance_profile(const OrbitSegment& x, const OrbitSegment& y,
                                       const SelfMap& f, const ProfileParams& params = {});

struct ShiftRecovery {
  int alpha = 0;
  Real constant = 0;    // max_n k(x_n, y_{n+alpha})
  Real sigma = 0;       // step of y at its deep end
  Real bound = 0;       // constant + |alpha| sigma
  Real max_direct = 0;  // max_n k(x_n, y_n)
};

/// Throws InvariantError when the direct profile exceeds the certified bound.
ShiftRecovery shift_recovery(const OrbitSegment& x, const OrbitSegment& y, const SelfMap& f);

struct RegionSample {
  Real koranyi_margin;
  Real tube_margin;
  Real horosphere_margin;  // against E_0(zeta, 1)
};

struct RegionReport {
  int tube_samples = 0;
  int tube_violations = 0;        // samples of A(gamma, L) outside K(zeta, e^L)
  Real worst_tube_slack = 0;      // min over samples of 2L - functional
  std::vector<RegionSample> sequence;
  int tail_start = -1;            // first index from which the sequence stays in K(zeta, M)
  Real empirical_width = 0;       // max distance to gamma over that tail
};

/// (a) samples A(gamma, L) graded in s = 1..30 and checks the Koranyi
/// functional is at most 2L (InvariantError otherwise); (b) reports
/// memberships of the sequence and the tube width its K(zeta, M) tail needs.
RegionReport region_equivalence_check(const std::vector<BallPoint>& sequence,
                                      const BoundaryPoint& zeta, const Real& L, const Real& M,
                                      int samples = 10000, std::uint64_t seed = 1);

struct TubeCoveringReport {
  Real radius = 0;         // max over samples of k(z, orbit)
  Real width = 0;          // C: max distance of orbit points to gamma
  Real sigma = 0;
  Real bound = 0;          // L + 3C + sigma
  bool within_bound = false;
  int samples = 0;
  std::vector<Real> radius_by_s;  // per geodesic parameter
};

/// Throws InvariantError when the covering radius grows toward zeta.
TubeCoveringReport tube_covering_check(const OrbitSegment& orbit, const Real& L,
                                       int samples = 1000, std::uint64_t seed = 1);

/// Holomorphic map B^k -> B^q (the intertwiner of a pre-model).
struct HoloMap {
  int source_dimension;
  int target_dimension;
  std::string description;
  VectorField f;
};

/// w -> (inner(w), 0, ..., 0) in B^q.
HoloMap embed_map(const SelfMap& inner, int target_dimension);
/// g o l
HoloMap compose(const Automorphism& g, const HoloMap& l);

struct PreModel {
  int base_dimension;
  HoloMap intertwiner;
  Automorphism tau;
};

struct CheckLine {
  std::string name;
  bool pass;
  Real margin;
};

struct PremodelReport {
  std::vector<CheckLine> checks;
  Real intertwining_residual = 0;
  Real tau_dilation = 0;
  Real map_dilation = 0;
  CVector tau_repelling_point;
  bool pass() const;
  /// One line per check: CHECK <name> PASS|FAIL margin=<float>
  std::string text() const;
};

/// Checks f o l = l o tau on samples, the dilation of tau at its repelling
/// point against the dilation of f at zeta, l(tau^-n(x)) -> zeta, and the
/// K-limit of l at the repelling point.
PremodelReport premodel_validate(const SelfMap& f, const PreModel& model, const BoundaryPoint& zeta,
                                 int samples = 1000, std::uint64_t seed = 1);

}  // namespace backorbit
