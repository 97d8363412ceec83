#include "backorbit/orbit_engine.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "backorbit/errors.hpp"

namespace backorbit {

namespace {

const Complex kI(0, 1);
const Real kTieBand("1e-13");

bool outside_closed_horoball(const Real& h) { return h > 0 && !(abs(h) < kTieBand); }

std::string describe_chain(int k, const StoppingRecord& rec, const OrbitDiagnostics* d,
                           const std::string& verdict) {
  std::ostringstream os;
  os << "k=" << k << " n=" << rec.n;
  if (rec.capped) os << " capped";
  if (d) {
    os << " sigma=" << format_real(d->sigma_hat)
       << " dist=" << format_real(d->dist_to_zeta.empty() ? Real(0) : d->dist_to_zeta.back());
  }
  os << " " << verdict;
  return os.str();
}

// Empty string when the chain is acceptable, else the first failed test.
std::string judge(const OrbitDiagnostics& d, const Real& lambda, const OrbitParams& p) {
  if (d.steps.empty()) return "fail: chain too short";
  if (abs(d.sigma_hat - log(lambda)) > p.eps_sigma) return "fail: step tail off log(lambda)";
  if (!d.steps_monotone) return "fail: step profile not monotone";
  if (!d.horofunction_decreasing) return "fail: horofunction not decreasing";
  if (!(d.dist_to_zeta.back() < p.target_distance)) return "fail: deep end not near zeta";
  return "";
}

struct Chain {
  int k;
  StoppingRecord record;
  OrbitSegment orbit;
};

// Nested clustering over depths, mimicking the diagonal extraction.
// Returns an empty optional with a reason when the chain breaks.
std::optional<OrbitSegment> cluster_orbit(const SelfMap& f, const std::vector<Chain>& chains,
                                          const BoundaryPoint& zeta, const Real& lambda,
                                          const OrbitParams& p, int& deepest_k,
                                          std::string& reason) {
  std::vector<int> members(chains.size());
  for (std::size_t i = 0; i < chains.size(); ++i) members[i] = static_cast<int>(i);
  std::vector<BallPoint> w;
  for (int j = 0;; ++j) {
    std::vector<int> candidates;
    for (int i : members) {
      if (chains[i].record.n >= j) candidates.push_back(i);
    }
    if (candidates.size() < 2) break;
    const auto point = [&](int i) -> const BallPoint& { return chains[i].orbit.points[j]; };
    std::vector<int> best;
    for (int c : candidates) {
      std::vector<int> nb;
      for (int d : candidates) {
        if (kob_dist(point(c), point(d)) <= p.rho_cluster) nb.push_back(d);
      }
      if (nb.size() >= best.size()) best = nb;  // ties favour deeper k
    }
    int medoid = best.front();
    Real best_sum = -1;
    for (int c : best) {
      Real sum = 0;
      for (int d : best) sum += kob_dist(point(c), point(d));
      if (best_sum < 0 || sum <= best_sum) {
        best_sum = sum;
        medoid = c;
      }
    }
    if (j > 0) {
      const Real residual = (f.apply_raw(point(medoid).coords()) - w.back().coords()).norm();
      if (!(residual < p.tol_cluster)) {
        reason = "cluster residual " + format_real(residual) + " at depth " + std::to_string(j);
        return std::nullopt;
      }
    }
    w.push_back(point(medoid));
    deepest_k = chains[medoid].k;
    members = best;
  }
  if (w.size() < 2) {
    reason = "fewer than two clustered depths";
    return std::nullopt;
  }
  return OrbitSegment{w, zeta, lambda, f.description(), p.tol_cluster, 0};
}

}  // namespace

const BallPoint& OrbitSegment::at(int n) const {
  if (!contains(n)) {
    throw DomainError("orbit index " + std::to_string(n) + " outside window [" +
                      std::to_string(first_index) + ", " + std::to_string(last_index()) + "]");
  }
  return points[static_cast<std::size_t>(n - first_index)];
}

Real backward_residual(const OrbitSegment& orbit, const SelfMap& f) {
  Real worst = 0;
  for (std::size_t i = 0; i + 1 < orbit.points.size(); ++i) {
    worst = std::max(worst, Real((f.apply_raw(orbit.points[i + 1].coords()) -
                                  orbit.points[i].coords()).norm()));
  }
  return worst;
}

BallPoint radial_anchor(const BoundaryPoint& zeta, const Real& lambda, int k) {
  if (!(lambda > 1)) throw DomainError("radial_anchor: lambda must exceed 1");
  if (k < 0) throw DomainError("radial_anchor: k must be nonnegative");
  const Real lk = pow(lambda, k);
  return BallPoint(((lk - 1) / (lk + 1)) * zeta.coords());
}

StoppingRecord stopping_time(const SelfMap& f, const BallPoint& r_k, const BoundaryPoint& zeta,
                             int k, int max_iterations) {
  BallPoint z = r_k;
  for (int n = 0; n <= max_iterations; ++n) {
    const Real h = horofunction(z, zeta);
    if (outside_closed_horoball(h)) return {k, n, z, h, false};
    if (n == max_iterations) return {k, n, z, h, true};
    z = f(z);
  }
  return {k, max_iterations, z, horofunction(z, zeta), true};
}

OrbitSegment harvest_chain(const SelfMap& f, const BallPoint& r_k, const StoppingRecord& record,
                           const BoundaryPoint& zeta, const Real& lambda) {
  if (record.capped) throw DomainError("harvest_chain: stopping record is capped");
  std::vector<BallPoint> forward{r_k};
  for (int i = 0; i < record.n; ++i) forward.push_back(f(forward.back()));
  std::reverse(forward.begin(), forward.end());
  return {forward, zeta, lambda, f.description(), Real(0), 0};
}

OrbitDiagnostics diagnose(const OrbitSegment& orbit) {
  OrbitDiagnostics d;
  const auto& pts = orbit.points;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    d.horofunction.push_back(horofunction(pts[j], orbit.zeta));
    d.dist_to_zeta.push_back((pts[j].coords() - orbit.zeta.coords()).norm());
    if (j + 1 < pts.size()) d.steps.push_back(kob_dist(pts[j], pts[j + 1]));
  }
  for (std::size_t j = 0; j + 1 < d.steps.size(); ++j) {
    if (d.steps[j] > d.steps[j + 1] + Real("1e-12")) d.steps_monotone = false;
  }
  for (std::size_t j = 1; j + 1 < d.horofunction.size(); ++j) {
    if (!(d.horofunction[j + 1] < d.horofunction[j])) d.horofunction_decreasing = false;
  }
  if (!d.steps.empty()) d.sigma_hat = d.steps.back();
  return d;
}

BackwardOrbitResult construct_backward_orbit(const SelfMap& f, const BoundaryPoint& zeta,
                                             const Real& lambda, const OrbitParams& p) {
  if (p.k_min < 0 || p.k_min > p.k_max) throw ConfigError("construct_backward_orbit: need 0 <= k_min <= k_max");
  if (!(p.eps_sigma > 0 && p.rho_cluster > 0 && p.tol_cluster > 0 && p.target_distance > 0)) {
    throw ConfigError("construct_backward_orbit: tolerances must be positive");
  }
  BackwardOrbitResult result{OrbitSegment{{}, zeta, lambda, f.description(), 0, 0}, {}, p.mode, -1,
                             {}, {}, {}};
  std::vector<Chain> chains;
  int best = -1;
  for (int k = p.k_min; k <= p.k_max; ++k) {
    const BallPoint r = radial_anchor(zeta, lambda, k);
    const StoppingRecord rec = stopping_time(f, r, zeta, k, p.max_iterations);
    result.records.push_back(rec);
    if (rec.capped) {
      result.report.push_back(describe_chain(k, rec, nullptr, "fail: iteration cap"));
      continue;
    }
    OrbitSegment chain = harvest_chain(f, r, rec, zeta, lambda);
    const OrbitDiagnostics d = diagnose(chain);
    const std::string verdict = judge(d, lambda, p);
    result.report.push_back(describe_chain(k, rec, &d, verdict.empty() ? "pass" : verdict));
    chains.push_back({k, rec, std::move(chain)});
    if (verdict.empty() &&
        (best < 0 || rec.n >= chains[static_cast<std::size_t>(best)].record.n)) {
      best = static_cast<int>(chains.size()) - 1;
    }
  }

  if (p.mode == OrbitMode::Cluster) {
    std::string reason;
    int deepest_k = -1;
    auto w = cluster_orbit(f, chains, zeta, lambda, p, deepest_k, reason);
    if (w) {
      const OrbitDiagnostics d = diagnose(*w);
      const std::string verdict = judge(d, lambda, p);
      if (verdict.empty()) {
        result.orbit = std::move(*w);
        result.diagnostics = d;
        result.k_used = deepest_k;
        return result;
      }
      reason = "cluster orbit " + verdict;
    }
    result.warnings.push_back("cluster mode failed (" + reason + "); falling back to single-tail");
    result.mode = OrbitMode::SingleTail;
  }

  if (best < 0) {
    std::string msg = "construct_backward_orbit: no chain passed diagnostics";
    for (const auto& line : result.report) msg += "\n  " + line;
    throw ConstructionError(msg);
  }
  const Chain& chosen = chains[static_cast<std::size_t>(best)];
  result.orbit = chosen.orbit;
  result.diagnostics = diagnose(chosen.orbit);
  result.k_used = chosen.k;
  return result;
}

BallPoint newton_preimage(const SelfMap& f, const BallPoint& target, const BallPoint& seed) {
  if (!f.has_jacobian()) throw ConfigError("newton_preimage: map has no Jacobian");
  const int q = f.dimension();
  const CVector t = target.coords();
  const Real tol = std::max(Real("1e-30"), Real("1e-12") * (Real(1) - target.norm()));
  auto F = [&](const CVector& z) { return CVector(f.apply_raw(z) - t); };
  auto J = [&](const CVector& z) { return f.jacobian(z); };

  NewtonResult r = newton_in_ball(F, J, seed.coords(), tol);
  if (r.converged) return BallPoint(r.z);

  // Grid around the seed in its own Mobius chart; Newton from the best few.
  const Automorphism chart = mobius_involution(seed);
  std::vector<std::pair<Real, CVector>> grid;
  for (const double rho : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const Real radius = tanh(Real(rho) / 2);
    for (int i = 0; i < q; ++i) {
      for (const Complex& dir : {Complex(1), Complex(-1), kI, -kI}) {
        const CVector z = chart.apply_raw(radius * dir * unit_vector(q, i));
        grid.emplace_back(F(z).norm(), z);
      }
    }
  }
  std::sort(grid.begin(), grid.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < std::min<std::size_t>(4, grid.size()); ++i) {
    r = newton_in_ball(F, J, grid[i].second, tol);
    if (r.converged) return BallPoint(r.z);
  }
  throw NumericalError("newton_preimage: no preimage found near the seed (residual " +
                       format_real(r.residual) + ")");
}

OrbitSegment backward_orbit_via_preimages(const SelfMap& f, const BallPoint& z0,
                                          const BoundaryPoint& zeta, const Real& lambda, int steps,
                                          const PreimageParams& params) {
  if (!f.has_jacobian()) throw ConfigError("backward_orbit_via_preimages: map has no Jacobian");
  if (steps < 0) throw DomainError("backward_orbit_via_preimages: steps must be nonnegative");
  const int q = f.dimension();
  const Automorphism toward_zeta = hyperbolic_automorphism(BoundaryPoint(-zeta.coords()), lambda);
  std::vector<BallPoint> pts{z0};
  for (int n = 0; n < steps; ++n) {
    const BallPoint& zn = pts.back();
    const CVector t = zn.coords();
    const Real tol = std::max(Real("1e-30"), Real("1e-12") * (Real(1) - zn.norm()));
    auto F = [&](const CVector& z) { return CVector(f.apply_raw(z) - t); };
    auto J = [&](const CVector& z) { return f.jacobian(z); };

    std::vector<CVector> seeds{t, toward_zeta.apply_raw(t)};
    const Automorphism chart = mobius_involution(zn);
    for (const double rho : {0.5, 1.5, 3.0}) {
      const Real radius = tanh(Real(rho) / 2);
      for (const Complex& dir : {Complex(1), Complex(-1), kI, -kI}) {
        seeds.push_back(chart.apply_raw(radius * dir * zeta.coords()));
      }
    }
    std::vector<BallPoint> candidates;
    for (const auto& s : seeds) {
      const NewtonResult r = newton_in_ball(F, J, s, tol);
      if (!r.converged) continue;
      const BallPoint c(r.z);
      bool duplicate = false;
      for (const auto& other : candidates) duplicate |= kob_dist(c, other) < Real("1e-6");
      if (!duplicate) candidates.push_back(c);
    }
    if (candidates.empty()) candidates.push_back(newton_preimage(f, zn, zn));

    const Real hn = horofunction(zn, zeta);
    std::vector<std::pair<Real, std::size_t>> scored;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const Real score = kob_dist(candidates[i], zn) + horofunction(candidates[i], zeta) - hn;
      scored.emplace_back(score, i);
    }
    std::sort(scored.begin(), scored.end());
    if (scored.size() > 1 && scored[1].first - scored[0].first < params.rho_branch) {
      std::ostringstream msg;
      msg << "backward_orbit_via_preimages: ambiguous branch at step " << n << ":";
      for (const auto& [score, i] : scored) {
        msg << "\n  score=" << format_real(score) << " z=";
        for (int c = 0; c < q; ++c) {
          msg << (c ? ";" : "") << format_real(candidates[i][c].real()) << ","
              << format_real(candidates[i][c].imag());
        }
      }
      throw NumericalError(msg.str());
    }
    pts.push_back(candidates[scored[0].second]);
  }
  return {pts, zeta, lambda, f.description(), Real("1e-10"), 0};
}

void write_orbit_csv(std::ostream& out, const OrbitSegment& orbit) {
  const int q = orbit.zeta.dimension();
  out << "j";
  for (int i = 1; i <= q; ++i) out << ",re_z" << i;
  for (int i = 1; i <= q; ++i) out << ",im_z" << i;
  out << ",horofunction,step_to_next,dist_to_zeta\n";
  const auto& pts = orbit.points;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    out << orbit.first_index + static_cast<int>(j);
    for (int i = 0; i < q; ++i) out << "," << format_exact(pts[j][i].real());
    for (int i = 0; i < q; ++i) out << "," << format_exact(pts[j][i].imag());
    out << "," << format_real(horofunction(pts[j], orbit.zeta)) << ",";
    if (j + 1 < pts.size()) out << format_real(kob_dist(pts[j], pts[j + 1]));
    out << "," << format_real((pts[j].coords() - orbit.zeta.coords()).norm()) << "\n";
  }
}

OrbitSegment read_orbit_csv(std::istream& in, const BoundaryPoint& zeta, const Real& lambda,
                            const std::string& map_id) {
  const int q = zeta.dimension();
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("orbit CSV: empty input");
  const auto header_fields = std::count(line.begin(), line.end(), ',') + 1;
  if (header_fields != 2 * q + 4) {
    throw ConfigError("orbit CSV: header has " + std::to_string(header_fields) +
                      " columns, expected " + std::to_string(2 * q + 4) + " for dimension " +
                      std::to_string(q));
  }
  OrbitSegment orbit{{}, zeta, lambda, map_id, Real("1e-10"), 0};
  int expected = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (static_cast<int>(fields.size()) < 2 * q + 1) {
      throw ConfigError("orbit CSV line " + std::to_string(line_no) + ": too few columns");
    }
    try {
      const int j = std::stoi(fields[0]);
      if (orbit.points.empty()) {
        orbit.first_index = j;
        expected = j;
      }
      if (j != expected) {
        throw ConfigError("orbit CSV line " + std::to_string(line_no) + ": index " +
                          std::to_string(j) + " out of sequence");
      }
      ++expected;
      CVector z(q);
      for (int i = 0; i < q; ++i) z(i) = Complex(Real(fields[1 + i]), Real(fields[1 + q + i]));
      orbit.points.emplace_back(z);
    } catch (const std::invalid_argument&) {
      throw ConfigError("orbit CSV line " + std::to_string(line_no) + ": malformed number");
    } catch (const std::runtime_error& e) {
      if (dynamic_cast<const Error*>(&e)) throw;
      throw ConfigError("orbit CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (orbit.points.empty()) throw ConfigError("orbit CSV: no data rows");
  return orbit;
}

}  // namespace backorbit
