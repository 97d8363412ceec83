#include "backorbit/acceptance.hpp"

#include <functional>
#include <sstream>

#include "backorbit/analysis.hpp"
#include "backorbit/errors.hpp"
#include "backorbit/map_catalog.hpp"
#include "backorbit/orbit_engine.hpp"
#include "backorbit/sampling.hpp"

namespace backorbit {

namespace {

const Complex kI(0, 1);

BoundaryPoint one() { return BoundaryPoint(CVector::Ones(1)); }

struct Fixture {
  SelfMap mobius = make_disc_mobius(Complex(Real("0.5")));  // repels from 1, dilation 3
  SelfMap blaschke;                                         // z(z - 1/3)/(1 - z/3), pole-cleared
  Real lambda = 3;
  std::optional<BackwardOrbitResult> orbit;

  Fixture()
      : blaschke(ensure_pole_clearance(make_blaschke({Complex(0), Complex(Real(1) / 3)}), one()).map) {}

  const BackwardOrbitResult& blaschke_orbit() {
    if (!orbit) orbit = construct_backward_orbit(blaschke, one(), lambda);
    return *orbit;
  }
};

using Check = std::function<std::pair<bool, std::string>(Fixture&, std::uint64_t)>;

std::string num(const Real& x) { return format_real(x, 6); }

std::pair<bool, std::string> convention(Fixture&, std::uint64_t) {
  Real worst = 0;
  const BoundaryPoint e1 = one();
  for (const Real lambda : {Real("1.5"), Real(3), Real(10)}) {
    for (int k = 0; k <= 20; ++k) {
      worst = std::max(worst, Real(abs(horofunction(radial_anchor(e1, lambda, k), e1) + k * log(lambda))));
    }
  }
  return {worst < Real("1e-12"), "max |h(r_k) + k log lambda| = " + num(worst)};
}

std::pair<bool, std::string> step_at_depth(Fixture& fx, std::uint64_t) {
  std::ostringstream os;
  bool ok = true;
  for (const SelfMap* f : {&fx.mobius, &fx.blaschke}) {
    const BallPoint r = radial_anchor(one(), fx.lambda, 40);
    const Real dev = abs(kob_dist(r, (*f)(r)) - log(fx.lambda));
    ok = ok && dev < Real("1e-3");
    os << (f == &fx.mobius ? "automorphism " : " blaschke ") << num(dev);
  }
  return {ok, "|k(r_40, f(r_40)) - log 3|: " + os.str()};
}

std::pair<bool, std::string> julia(Fixture& fx, std::uint64_t seed) {
  Sampler sampler(seed);
  const Real log_lambda = log(fx.lambda);
  int violations = 0;
  int samples = 0;
  for (const SelfMap* f : {&fx.mobius, &fx.blaschke}) {
    for (int k = 0; k <= 5; ++k) {
      const double top = -k * to_double(log_lambda);
      for (int i = 0; i < 10000; ++i) {
        const BallPoint z = sampler.horoball_point(one(), top - 12.0, top);
        ++samples;
        if (!(horofunction((*f)(z), one()) < -(k - 1) * log_lambda + Real("1e-9"))) ++violations;
      }
    }
  }
  return {violations == 0,
          std::to_string(violations) + " violations in " + std::to_string(samples) + " samples"};
}

std::pair<bool, std::string> stopping_times(Fixture& fx, std::uint64_t) {
  const SelfMap cube = ensure_pole_clearance(make_blaschke({Complex(0), Complex(0), Complex(0)}), one()).map;
  const SelfMap axial = make_automorphism(hyperbolic_automorphism(one(), fx.lambda));
  int bad_cleared = 0;
  int bad_axial = 0;
  for (int k = 1; k <= 30; ++k) {
    const BallPoint r = radial_anchor(one(), fx.lambda, k);
    for (const SelfMap* f : {static_cast<const SelfMap*>(&fx.blaschke), &cube}) {
      const StoppingRecord rec = stopping_time(*f, r, one(), k);
      if (rec.capped || rec.n <= k) ++bad_cleared;
    }
    if (stopping_time(axial, r, one(), k).n != k + 1) ++bad_axial;
  }
  return {bad_cleared == 0 && bad_axial == 0,
          "n(k) <= k on cleared maps: " + std::to_string(bad_cleared) +
              ", n(k) != k+1 on the automorphism: " + std::to_string(bad_axial)};
}

std::pair<bool, std::string> construction(Fixture& fx, std::uint64_t) {
  const BackwardOrbitResult& r = fx.blaschke_orbit();
  const Real residual = backward_residual(r.orbit, fx.blaschke);
  const Real step_dev = abs(r.diagnostics.sigma_hat - log(fx.lambda));
  const Real dist25 = r.orbit.points.size() > 25 ? r.diagnostics.dist_to_zeta[25] : Real(1);
  const bool ok = residual < Real("1e-10") && step_dev <= Real("1e-3") && r.diagnostics.steps_monotone &&
                  dist25 < Real("1e-4");
  return {ok, "residual " + num(residual) + ", |sigma - log 3| " + num(step_dev) + ", monotone " +
                  (r.diagnostics.steps_monotone ? "yes" : "no") + ", |z_25 - 1| " + num(dist25)};
}

std::pair<bool, std::string> comparison(Fixture& fx, std::uint64_t) {
  const OrbitSegment& x = fx.blaschke_orbit().orbit;
  const BallPoint y0 = mobius_involution(x.points[0])(BallPoint(CVector::Constant(1, kI * tanh(Real("0.025")))));
  const OrbitSegment y = backward_orbit_via_preimages(fx.blaschke, y0, one(), fx.lambda,
                                                      static_cast<int>(x.points.size()) - 1);
  const OrbitComparison c = orbit_distance_profile(x, y, fx.blaschke);
  const ShiftRecovery s = shift_recovery(x, y, fx.blaschke);
  return {c.plateau && c.shifted_monotone,
          "last-quarter increase " + num(c.last_quarter_increase) + ", alpha " + std::to_string(s.alpha) +
              ", certified bound " + num(s.bound) + " >= max direct " + num(s.max_direct)};
}

std::pair<bool, std::string> region(Fixture&, std::uint64_t seed) {
  std::ostringstream os;
  int violations = 0;
  for (const Real L : {Real("0.5"), Real(1), Real(2)}) {
    try {
      const RegionReport r = region_equivalence_check({}, one(), L, exp(L), 10000, seed);
      os << " L=" << num(L) << " slack " << num(r.worst_tube_slack);
    } catch (const InvariantError& e) {
      ++violations;
      os << " L=" << num(L) << " " << e.what();
    }
  }
  return {violations == 0, "functional <= 2L on 10000 samples each:" + os.str()};
}

std::pair<bool, std::string> tube(Fixture& fx, std::uint64_t seed) {
  const SelfMap axial_map = make_automorphism(hyperbolic_automorphism(one(), fx.lambda));
  const OrbitSegment axial = construct_backward_orbit(axial_map, one(), fx.lambda).orbit;
  const Real L = 1;
  const TubeCoveringReport a = tube_covering_check(axial, L, 1000, seed);
  const TubeCoveringReport b = tube_covering_check(fx.blaschke_orbit().orbit, L, 1000, seed);
  const bool ok = a.radius <= L + a.sigma + Real("1e-6") && b.within_bound;
  return {ok, "automorphism R " + num(a.radius) + " <= " + num(L + a.sigma) + ", blaschke R " +
                  num(b.radius) + " <= " + num(b.bound)};
}

std::pair<bool, std::string> premodel(Fixture&, std::uint64_t seed) {
  const SelfMap f = make_warped_product(make_disc_mobius(Complex(Real("0.5"))), Complex(Real("0.5")), 2);
  const BoundaryPoint zeta(CVector::Unit(2, 0));
  const BoundaryPoint r = one();
  const PreModel good{1, embed_map(make_identity(1), 2), hyperbolic_automorphism(r, 3)};
  const PreModel bad{1, embed_map(make_identity(1), 2), hyperbolic_automorphism(r, Real("3.3"))};
  const PremodelReport g = premodel_validate(f, good, zeta, 1000, seed);
  const PremodelReport b = premodel_validate(f, bad, zeta, 1000, seed);
  const bool ok = g.pass() && !b.checks.at(1).pass;
  std::string detail = "pre-model " + std::string(g.pass() ? "passes" : "fails") +
                       " (residual " + num(g.intertwining_residual) + "), corrupted dilation check " +
                       (b.checks.at(1).pass ? "passes" : "fails");
  return {ok, detail};
}

const std::vector<std::pair<std::string, Check>>& battery() {
  static const std::vector<std::pair<std::string, Check>> checks{
      {"convention", convention},      {"step-at-depth", step_at_depth},
      {"julia-inclusion", julia},      {"stopping-times", stopping_times},
      {"backward-orbit", construction}, {"orbit-comparison", comparison},
      {"tube-in-koranyi", region},     {"tube-covering", tube},
      {"premodel", premodel},
  };
  return checks;
}

std::vector<CriterionResult> run_battery(std::uint64_t seed) {
  Fixture fx;
  std::vector<CriterionResult> out;
  int id = 1;
  for (const auto& [name, check] : battery()) {
    CriterionResult r{id++, name, false, ""};
    try {
      std::tie(r.pass, r.detail) = check(fx, seed);
    } catch (const std::exception& e) {
      r.detail = std::string("error: ") + e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

bool SuiteReport::pass() const {
  for (const CriterionResult& c : criteria) {
    if (!c.pass) return false;
  }
  return !criteria.empty();
}

std::string SuiteReport::text() const {
  std::ostringstream os;
  for (const CriterionResult& c : criteria) {
    os << "CRITERION " << c.id << " " << (c.pass ? "PASS" : "FAIL") << " " << c.name << ": " << c.detail
       << "\n";
  }
  return os.str();
}

SuiteReport run_acceptance(std::uint64_t seed) {
  SuiteReport first{run_battery(seed)};
  const SuiteReport second{run_battery(seed)};
  const bool same = first.text() == second.text();
  first.criteria.push_back({10, "determinism", same,
                            same ? "two runs with seed " + std::to_string(seed) + " agree byte for byte"
                                 : "reports differ between runs"});
  return first;
}

}  // namespace backorbit
