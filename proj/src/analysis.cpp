#include "backorbit/analysis.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "backorbit/errors.hpp"
#include "backorbit/sampling.hpp"

namespace backorbit {

namespace {

const Complex kI(0, 1);

std::string describe_point(const CVector& z) {
  std::ostringstream os;
  for (int i = 0; i < z.size(); ++i) {
    os << (i ? ";" : "") << format_real(z(i).real()) << "," << format_real(z(i).imag());
  }
  return os.str();
}

Real max_step(const OrbitSegment& orbit) {
  Real s = 0;
  for (std::size_t i = 0; i + 1 < orbit.points.size(); ++i) {
    s = std::max(s, kob_dist(orbit.points[i], orbit.points[i + 1]));
  }
  return s;
}

// Offsets of Kobayashi length 0.5 around the radius towards zeta; pushed
// along it by axial translations they stay in a fixed Koranyi region.
std::vector<CVector> koranyi_offsets(const BoundaryPoint& zeta) {
  const int q = zeta.dimension();
  const Real r = tanh(Real("0.25"));
  std::vector<CVector> offsets{CVector::Zero(q), r * kI * zeta.coords()};
  if (q == 1) {
    offsets.push_back(-r * kI * zeta.coords());
  } else {
    CVector v = unit_vector(q, abs(zeta[0]) > Real("0.5") ? 1 : 0);
    v -= inner(v, zeta.coords()) * zeta.coords();
    offsets.push_back(r * v / v.norm());
  }
  return offsets;
}

// Repelling fixed point of a hyperbolic automorphism: the dominant
// eigenvector of M^-1 lies on the null cone.
CVector repelling_point(const Automorphism& tau) {
  const CMatrix inv = tau.inverse().matrix();
  const int k = tau.dimension();
  CVector v = CVector::Constant(k + 1, Complex(Real("0.1"), Real("0.07")));
  v(k) = 1;
  for (int i = 0; i < 2000; ++i) {
    v = inv * v;
    v /= v.norm();
  }
  return v.head(k) / v(k);
}

}  // namespace

OrbitSegment extend_to_bilateral(const OrbitSegment& orbit, const SelfMap& f, int forward_steps) {
  if (orbit.points.empty() || forward_steps <= 0) return orbit;
  std::vector<BallPoint> front;
  front.reserve(forward_steps);
  BallPoint z = orbit.points.front();
  for (int i = 0; i < forward_steps; ++i) {
    z = f(z);
    front.push_back(z);
  }
  OrbitSegment out = orbit;
  out.points.assign(front.rbegin(), front.rend());
  out.points.insert(out.points.end(), orbit.points.begin(), orbit.points.end());
  out.first_index = orbit.first_index - forward_steps;
  return out;
}

OrbitComparison orbit_distance_profile(const OrbitSegment& x, const OrbitSegment& y,
                                       const SelfMap& f, const ProfileParams& params) {
  if (x.zeta.dimension() != y.zeta.dimension() ||
      (x.zeta.coords() - y.zeta.coords()).norm() > Real("1e-10")) {
    throw DomainError("orbit_distance_profile: orbits converge to different boundary points (" +
                      describe_point(x.zeta.coords()) + " vs " + describe_point(y.zeta.coords()) +
                      ")");
  }
  OrbitComparison c;
  c.first = std::max(x.first_index, y.first_index);
  c.last = std::min(x.last_index(), y.last_index());
  if (c.first > c.last) throw DomainError("orbit_distance_profile: orbit windows do not overlap");
  const int len = c.last - c.first + 1;
  const int half = std::max(1, len / 2);
  const int reach = c.first - 2 * half;
  const OrbitSegment ye = extend_to_bilateral(y, f, std::max(0, y.first_index - reach));

  for (int n = c.first; n <= c.last; ++n) {
    const BallPoint& xn = x.at(n);
    c.direct.push_back(kob_dist(xn, y.at(n)));
    Real best = std::numeric_limits<Real>::infinity();
    int arg = n;
    for (int m = std::max(n - 2 * half, ye.first_index); m <= std::min(n + 2 * half, ye.last_index());
         ++m) {
      const Real d = kob_dist(xn, ye.at(m));
      if (d < best) {
        best = d;
        arg = m;
      }
    }
    if (!c.shifted.empty() && best < c.shifted.back() - Real("1e-12")) c.shifted_monotone = false;
    c.shifted.push_back(best);
    c.argmin.push_back(arg);
  }
  const int quarter = std::max(1, len / 4);
  const int start = std::max(0, len - 1 - quarter);
  const Real top = *std::max_element(c.direct.begin() + start, c.direct.end());
  c.last_quarter_increase = top - c.direct[start];
  c.plateau = c.last_quarter_increase < params.eps_plateau;
  c.bound = *std::max_element(c.shifted.begin(), c.shifted.end());
  return c;
}

ShiftRecovery shift_recovery(const OrbitSegment& x, const OrbitSegment& y, const SelfMap& f) {
  const OrbitComparison c = orbit_distance_profile(x, y, f);
  const int len = c.last - c.first + 1;
  const int half = std::max(1, len / 2);
  const OrbitSegment ye = extend_to_bilateral(y, f, std::max(0, y.first_index - (c.first - 2 * half)));

  // Candidate shifts are the minimizers of the shifted profile. Each is
  // scored by its sup over the window part where y_{n+alpha} exists, which
  // must cover at least half the window.
  std::vector<int> candidates;
  for (int n = c.first; n <= c.last; ++n) candidates.push_back(c.argmin[n - c.first] - n);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  ShiftRecovery r;
  r.constant = std::numeric_limits<Real>::infinity();
  for (int alpha : candidates) {
    if (len > 1 && std::abs(alpha) >= 2 * half) continue;
    Real sup = 0;
    int covered = 0;
    for (int n = c.first; n <= c.last; ++n) {
      if (!ye.contains(n + alpha)) continue;
      ++covered;
      sup = std::max(sup, kob_dist(x.at(n), ye.at(n + alpha)));
    }
    if (2 * covered < len) continue;
    if (sup < r.constant || (sup == r.constant && std::abs(alpha) < std::abs(r.alpha))) {
      r.constant = sup;
      r.alpha = alpha;
    }
  }
  if (!(r.constant < std::numeric_limits<Real>::infinity())) {
    throw InvariantError("shift_recovery: no admissible shift in the scanned range");
  }
  r.sigma = max_step(y);
  r.max_direct = *std::max_element(c.direct.begin(), c.direct.end());
  r.bound = r.constant + std::abs(r.alpha) * r.sigma;
  if (r.max_direct > r.bound + Real("1e-9")) {
    throw InvariantError("shift_recovery: direct profile " + format_real(r.max_direct) +
                         " exceeds certified bound " + format_real(r.bound));
  }
  return r;
}

RegionReport region_equivalence_check(const std::vector<BallPoint>& sequence,
                                      const BoundaryPoint& zeta, const Real& L, const Real& M,
                                      int samples, std::uint64_t seed) {
  if (L < 0) throw ConfigError("region_equivalence_check: L must be non-negative");
  if (!(M > 1)) throw ConfigError("region_equivalence_check: M must exceed 1");
  RegionReport rep;
  Sampler sampler(seed);
  rep.worst_tube_slack = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < samples; ++i) {
    const Real s = 1 + i % 30;
    // Half the samples sit on the tube boundary, where the bound is tight.
    const Real radius = i % 2 == 0 ? L : L * sampler.uniform();
    const BallPoint z = sampler.tube_point(zeta, s, radius);
    const Real slack = 2 * L - koranyi_functional(z, zeta);
    ++rep.tube_samples;
    if (slack < Real("-1e-9")) ++rep.tube_violations;
    rep.worst_tube_slack = std::min(rep.worst_tube_slack, slack);
  }
  if (rep.tube_violations > 0) {
    throw InvariantError("region_equivalence_check: " + std::to_string(rep.tube_violations) + " of " +
                         std::to_string(rep.tube_samples) +
                         " tube samples outside the Koranyi region, worst slack " +
                         format_real(rep.worst_tube_slack));
  }
  const KoranyiRegion region{zeta, M};
  const GeodesicTube tube{zeta, L};
  std::vector<Real> widths;
  for (const BallPoint& z : sequence) {
    rep.sequence.push_back({koranyi_contains(z, region).margin, tube_contains(z, tube).margin,
                            -horofunction(z, zeta)});
    widths.push_back(dist_to_geodesic(z, zeta).distance);
  }
  for (int i = static_cast<int>(sequence.size()) - 1; i >= 0 && rep.sequence[i].koranyi_margin >= 0; --i) {
    rep.tail_start = i;
  }
  if (rep.tail_start >= 0) {
    rep.empirical_width = *std::max_element(widths.begin() + rep.tail_start, widths.end());
  }
  return rep;
}

TubeCoveringReport tube_covering_check(const OrbitSegment& orbit, const Real& L, int samples,
                                       std::uint64_t seed) {
  if (L < 0) throw ConfigError("tube_covering_check: L must be non-negative");
  const BoundaryPoint& zeta = orbit.zeta;
  // The covering argument uses the part of the orbit inside the closed horoball E_0.
  std::size_t start = 0;
  while (start < orbit.points.size() && horofunction(orbit.points[start], zeta) > 0) ++start;
  std::vector<BallPoint> tail(orbit.points.begin() + start, orbit.points.end());
  if (tail.size() < 2) throw DomainError("tube_covering_check: orbit has no tail inside E_0");

  TubeCoveringReport rep;
  Real s_lo = std::numeric_limits<Real>::infinity();
  Real s_hi = 0;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    const GeodesicProjection p = dist_to_geodesic(tail[i], zeta);
    rep.width = std::max(rep.width, p.distance);
    s_lo = std::min(s_lo, p.parameter);
    s_hi = std::max(s_hi, p.parameter);
    if (i + 1 < tail.size()) rep.sigma = std::max(rep.sigma, kob_dist(tail[i], tail[i + 1]));
  }
  const int s_min = std::max(1, static_cast<int>(to_double(ceil(s_lo))));
  const int s_max = std::min(30, static_cast<int>(to_double(floor(s_hi))));
  if (s_min > s_max) throw DomainError("tube_covering_check: orbit tail does not shadow s in 1..30");

  const int levels = s_max - s_min + 1;
  rep.radius_by_s.assign(levels, Real(0));
  Sampler sampler(seed);
  for (int i = 0; i < samples; ++i) {
    const int level = i % levels;
    const Real radius = i % 2 == 0 ? L : L * sampler.uniform();
    const BallPoint z = sampler.tube_point(zeta, Real(s_min + level), radius);
    Real best = std::numeric_limits<Real>::infinity();
    for (const BallPoint& y : tail) best = std::min(best, kob_dist(z, y));
    rep.radius_by_s[level] = std::max(rep.radius_by_s[level], best);
    ++rep.samples;
  }
  rep.radius = *std::max_element(rep.radius_by_s.begin(), rep.radius_by_s.end());
  rep.bound = L + 3 * rep.width + rep.sigma;
  rep.within_bound = rep.radius <= rep.bound + Real("1e-6");
  if (levels >= 10) {
    const Real early = *std::max_element(rep.radius_by_s.begin(), rep.radius_by_s.begin() + 5);
    const Real late = *std::max_element(rep.radius_by_s.end() - 5, rep.radius_by_s.end());
    if (late > early + 1) {
      throw InvariantError("tube_covering_check: covering radius grows toward zeta (" +
                           format_real(early) + " -> " + format_real(late) + ")");
    }
  }
  return rep;
}

HoloMap embed_map(const SelfMap& inner, int target_dimension) {
  const int k = inner.dimension();
  if (target_dimension < k) throw ConfigError("embed_map: target dimension below source dimension");
  return {k, target_dimension, "embed(" + inner.description() + ")",
          [inner, k, target_dimension](const CVector& w) {
            CVector z = CVector::Zero(target_dimension);
            z.head(k) = inner.apply_raw(w);
            return z;
          }};
}

HoloMap compose(const Automorphism& g, const HoloMap& l) {
  if (g.dimension() != l.target_dimension) throw ConfigError("compose: dimension mismatch");
  const VectorField inner = l.f;
  return {l.source_dimension, l.target_dimension, "automorphism o " + l.description,
          [g, inner](const CVector& w) { return g.apply_raw(inner(w)); }};
}

bool PremodelReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

std::string PremodelReport::text() const {
  std::ostringstream os;
  for (const CheckLine& c : checks) {
    os << "CHECK " << c.name << " " << (c.pass ? "PASS" : "FAIL") << " margin=" << format_real(c.margin)
       << "\n";
  }
  return os.str();
}

PremodelReport premodel_validate(const SelfMap& f, const PreModel& model, const BoundaryPoint& zeta,
                                 int samples, std::uint64_t seed) {
  const int q = f.dimension();
  const int k = model.base_dimension;
  if (k < 1 || k > q || model.intertwiner.source_dimension != k ||
      model.intertwiner.target_dimension != q || model.tau.dimension() != k ||
      zeta.dimension() != q) {
    throw ConfigError("premodel_validate: inconsistent dimensions");
  }
  if (model.tau.form_defect() > Real("1e-10")) {
    throw ConfigError("premodel_validate: tau does not preserve the ball");
  }
  const VectorField& ell = model.intertwiner.f;
  PremodelReport rep;

  // (i) f o l = l o tau
  const Real tol_i("1e-8");
  Sampler sampler(seed);
  for (int i = 0; i < samples; ++i) {
    const CVector w = sampler.ball_point(k, 0.99).coords();
    const Real res = (f.apply_raw(ell(w)) - ell(model.tau.apply_raw(w))).norm();
    rep.intertwining_residual = std::max(rep.intertwining_residual, res);
  }
  rep.checks.push_back({"intertwining", rep.intertwining_residual < tol_i,
                        tol_i - rep.intertwining_residual});

  // (ii) dilation of tau at its repelling point against that of f at zeta
  const Real tol_ii("1e-4");
  rep.tau_repelling_point = repelling_point(model.tau);
  std::optional<BoundaryPoint> repelling;
  try {
    repelling = BoundaryPoint(rep.tau_repelling_point);
    rep.tau_dilation = model.tau.dilation_at(*repelling);
  } catch (const DomainError&) {
    repelling.reset();
    rep.tau_dilation = 1;
  }
  bool known = false;
  for (const KnownBoundaryFixedPoint& p : f.known_fixed_points()) {
    if ((p.point - zeta.coords()).norm() < Real("1e-12")) {
      rep.map_dilation = p.dilation;
      known = true;
    }
  }
  if (!known) rep.map_dilation = estimate_dilation(f, zeta).lambda;
  const bool hyperbolic = repelling && rep.tau_dilation > 1 + Real("1e-9");
  const Real diff = abs(rep.tau_dilation - rep.map_dilation);
  rep.checks.push_back({"dilation", hyperbolic && diff < tol_ii, tol_ii - diff});

  const Real tol_limit("1e-8");
  // (iii) l(tau^-n(x)) -> zeta
  {
    const Automorphism back = model.tau.inverse();
    std::vector<CVector> starts{CVector::Zero(k)};
    for (int i = 0; i < 3; ++i) starts.push_back(sampler.ball_point(k, 0.9).coords());
    Real worst = 0;
    for (CVector y : starts) {
      for (int n = 0; n < 500 && 1 - y.norm() > Real("1e-24"); ++n) y = back.apply_raw(y);
      worst = std::max(worst, Real((ell(y) - zeta.coords()).norm()));
    }
    rep.checks.push_back({"backward_limit", worst < tol_limit, tol_limit - worst});
  }

  // (iv) K-limit of l at the repelling point
  if (repelling) {
    Real worst = 0;
    bool ok = true;
    for (const CVector& u : koranyi_offsets(*repelling)) {
      Real first = -1;
      Real last = 0;
      for (int s = 4; s <= 40; s += 4) {
        const CVector w = axial_translation(*repelling, Real(s)).apply_raw(u);
        last = (ell(w) - zeta.coords()).norm();
        if (first < 0) first = last;
      }
      worst = std::max(worst, last);
      ok = ok && last <= first;
    }
    rep.checks.push_back({"k_limit", ok && worst < tol_limit, tol_limit - worst});
  } else {
    rep.checks.push_back({"k_limit", false, -std::numeric_limits<Real>::infinity()});
  }
  return rep;
}

}  // namespace backorbit
