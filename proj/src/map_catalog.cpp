#include "backorbit/map_catalog.hpp"

#include <algorithm>
#include <cmath>

#include "backorbit/errors.hpp"
#include "backorbit/sampling.hpp"

namespace backorbit {

namespace {

const Complex kI(0, 1);

// Ascending coefficients.
using Poly = std::vector<Complex>;

Poly poly_mul(const Poly& p, const Poly& q) {
  Poly r(p.size() + q.size() - 1, Complex(0));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  }
  return r;
}

Complex poly_eval(const Poly& p, const Complex& z) {
  Complex acc(0);
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Poly poly_derivative(const Poly& p) {
  Poly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * Real(static_cast<int>(i)));
  if (d.empty()) d.push_back(Complex(0));
  return d;
}

// Roots from the companion matrix, then a few Newton polishing steps.
std::vector<Complex> poly_roots(Poly p) {
  Real scale = 0;
  for (const auto& c : p) scale = std::max(scale, abs(c));
  while (!p.empty() && abs(p.back()) <= Real("1e-30") * scale) p.pop_back();
  if (p.size() < 2) return {};
  const int n = static_cast<int>(p.size()) - 1;
  CMatrix companion = CMatrix::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = Complex(1);
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -p[i] / p[n];
  Eigen::ComplexEigenSolver<CMatrix> solver(companion, false);
  const Poly dp = poly_derivative(p);
  std::vector<Complex> roots;
  for (int i = 0; i < n; ++i) {
    Complex z = solver.eigenvalues()(i);
    for (int it = 0; it < 8; ++it) {
      const Complex d = poly_eval(dp, z);
      if (abs(d) == 0) break;
      z -= poly_eval(p, z) / d;
    }
    roots.push_back(z);
  }
  return roots;
}

Complex blaschke_factor(const Complex& a, const Complex& z) {
  return (z - a) / (Complex(1) - conj(a) * z);
}

CVector scalar_vector(const Complex& z) {
  CVector v(1);
  v(0) = z;
  return v;
}

CMatrix scalar_matrix(const Complex& z) {
  CMatrix m(1, 1);
  m(0, 0) = z;
  return m;
}

std::vector<KnownBoundaryFixedPoint> blaschke_fixed_points(const std::vector<Complex>& zeros,
                                                           const Real& theta) {
  // e^{i theta} prod (z - a_i) - z prod (1 - conj(a_i) z)
  Poly num{std::polar(Real(1), theta)};
  Poly den{Complex(1)};
  for (const auto& a : zeros) {
    num = poly_mul(num, {-a, Complex(1)});
    den = poly_mul(den, {Complex(1), -conj(a)});
  }
  den = poly_mul(den, {Complex(0), Complex(1)});
  Poly p(std::max(num.size(), den.size()), Complex(0));
  for (std::size_t i = 0; i < num.size(); ++i) p[i] += num[i];
  for (std::size_t i = 0; i < den.size(); ++i) p[i] -= den[i];

  std::vector<KnownBoundaryFixedPoint> out;
  for (const Complex& z : poly_roots(p)) {
    if (abs(abs(z) - 1) > Real("1e-20")) continue;
    const Complex zeta = z / abs(z);
    bool duplicate = false;
    for (const auto& known : out) duplicate |= abs(known.point(0) - zeta) < Real("1e-15");
    if (duplicate) continue;
    Real dilation = 0;
    for (const auto& a : zeros) dilation += (1 - std::norm(a)) / std::norm(zeta - a);
    out.push_back({scalar_vector(zeta), dilation});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return arg(x.point(0)) < arg(y.point(0));
  });
  return out;
}

std::vector<KnownBoundaryFixedPoint> automorphism_fixed_points(const Automorphism& g) {
  if (!g.normal_form()) return {};
  const auto& form = *g.normal_form();
  return {{form.fixed_point.coords(), form.dilation}};
}

void require_dimension(const SelfMap& f, int q, const char* what) {
  if (f.dimension() != q) {
    throw DomainError(std::string(what) + ": dimension mismatch (" +
                      std::to_string(f.dimension()) + " vs " + std::to_string(q) + ")");
  }
}

}  // namespace

SelfMap::SelfMap(int q, std::string kind, std::string description, VectorField f, MatrixField df)
    : q_(q),
      kind_(std::move(kind)),
      description_(std::move(description)),
      f_(std::move(f)),
      df_(std::move(df)) {
  if (q < 1) throw DomainError("SelfMap: dimension must be at least 1");
}

BallPoint SelfMap::operator()(const BallPoint& z) const {
  require_dimension(*this, z.dimension(), "SelfMap evaluation");
  return BallPoint(f_(z.coords()));
}

CMatrix SelfMap::jacobian(const CVector& z) const {
  if (!df_) throw ConfigError("map '" + description_ + "' has no Jacobian");
  return df_(z);
}

SelfMap SelfMap::with_fixed_points(std::vector<KnownBoundaryFixedPoint> points) const {
  SelfMap f = *this;
  f.fixed_ = std::move(points);
  return f;
}

SelfMap SelfMap::with_automorphism(Automorphism g) const {
  SelfMap f = *this;
  f.automorphism_ = std::move(g);
  return f;
}

// ---------------------------------------------------------------- builders

SelfMap make_identity(int q) {
  return SelfMap(
             q, "identity", "identity", [](const CVector& z) { return z; },
             [q](const CVector&) { return CMatrix(CMatrix::Identity(q, q)); })
      .with_automorphism(Automorphism::identity(q));
}

SelfMap make_linear(const CMatrix& a) {
  if (a.rows() != a.cols()) throw ConfigError("linear map: matrix must be square");
  return SelfMap(
      static_cast<int>(a.rows()), "linear", "linear",
      [a](const CVector& z) { return CVector(a * z); }, [a](const CVector&) { return a; });
}

SelfMap make_automorphism(const Automorphism& g, const std::string& description) {
  return SelfMap(
             g.dimension(), "ball_automorphism", description,
             [g](const CVector& z) { return g.apply_raw(z); },
             [g](const CVector& z) { return g.jacobian(z); })
      .with_automorphism(g)
      .with_fixed_points(automorphism_fixed_points(g));
}

SelfMap make_disc_mobius(const Complex& a, const Real& theta) {
  if (!(abs(a) < 1)) throw ConfigError("mobius: |a| must be < 1");
  const Complex rot = std::polar(Real(1), theta);
  CMatrix m(2, 2);
  m << rot, -rot * a, -conj(a), Complex(1);
  const Automorphism g = Automorphism::from_matrix(m);
  return SelfMap(
             1, "mobius", "disc mobius",
             [g](const CVector& z) { return g.apply_raw(z); },
             [g](const CVector& z) { return g.jacobian(z); })
      .with_automorphism(g)
      .with_fixed_points(blaschke_fixed_points({a}, theta));
}

SelfMap make_blaschke(const std::vector<Complex>& zeros, const Real& theta) {
  if (zeros.empty()) throw ConfigError("blaschke: at least one zero is required");
  for (const auto& a : zeros) {
    if (!(abs(a) < 1)) throw ConfigError("blaschke: zeros must lie in the open disc");
  }
  const Complex rot = std::polar(Real(1), theta);
  auto eval = [zeros, rot](const CVector& z) {
    Complex acc = rot;
    for (const auto& a : zeros) acc *= blaschke_factor(a, z(0));
    return scalar_vector(acc);
  };
  auto jac = [zeros, rot](const CVector& z) {
    Complex sum(0);
    for (std::size_t i = 0; i < zeros.size(); ++i) {
      const Complex d = Complex(1) - conj(zeros[i]) * z(0);
      Complex term = (1 - std::norm(zeros[i])) / (d * d);
      for (std::size_t j = 0; j < zeros.size(); ++j) {
        if (j != i) term *= blaschke_factor(zeros[j], z(0));
      }
      sum += term;
    }
    return scalar_matrix(rot * sum);
  };
  return SelfMap(1, "blaschke", "finite Blaschke product", eval, jac)
      .with_fixed_points(blaschke_fixed_points(zeros, theta));
}

SelfMap make_warped_product(const SelfMap& base, const Complex& c, int q) {
  require_dimension(base, 1, "warped_product base");
  if (q < 1) throw ConfigError("warped_product: dimension must be at least 1");
  const Real p0 = abs(base.apply_raw(CVector::Zero(1))(0));
  if (std::norm(c) > (1 - p0) / (1 + p0)) {
    throw ConfigError("warped_product: |c|^2 = " + format_real(std::norm(c)) +
                      " exceeds (1-|phi(0)|)/(1+|phi(0)|) = " + format_real((1 - p0) / (1 + p0)));
  }
  auto eval = [base, c, q](const CVector& z) {
    CVector w(q);
    w(0) = base.apply_raw(z.head(1))(0);
    for (int i = 1; i < q; ++i) w(i) = c * z(i);
    return w;
  };
  MatrixField jac;
  if (base.has_jacobian()) {
    jac = [base, c, q](const CVector& z) {
      CMatrix m = CMatrix::Zero(q, q);
      m(0, 0) = base.jacobian(z.head(1))(0, 0);
      for (int i = 1; i < q; ++i) m(i, i) = c;
      return m;
    };
  }
  std::vector<KnownBoundaryFixedPoint> fixed;
  for (const auto& p : base.known_fixed_points()) {
    CVector v = CVector::Zero(q);
    v(0) = p.point(0);
    fixed.push_back({v, p.dilation});
  }
  return SelfMap(q, "warped_product", "warped product over " + base.description(), eval, jac)
      .with_fixed_points(std::move(fixed));
}

SelfMap conjugate(const SelfMap& f, const Automorphism& g) {
  require_dimension(f, g.dimension(), "conjugate");
  const Automorphism gi = g.inverse();
  auto eval = [f, g, gi](const CVector& z) { return g.apply_raw(f.apply_raw(gi.apply_raw(z))); };
  MatrixField jac;
  if (f.has_jacobian()) {
    jac = [f, g, gi](const CVector& z) {
      const CVector u = gi.apply_raw(z);
      const CVector v = f.apply_raw(u);
      return CMatrix(g.jacobian(v) * f.jacobian(u) * gi.jacobian(z));
    };
  }
  std::vector<KnownBoundaryFixedPoint> fixed;
  for (const auto& p : f.known_fixed_points()) {
    fixed.push_back({g(BoundaryPoint(p.point)).coords(), p.dilation});
  }
  SelfMap out(f.dimension(), "conjugate", "conjugate of " + f.description(), eval, jac);
  if (f.automorphism()) out = out.with_automorphism(g * *f.automorphism() * gi);
  return out.with_fixed_points(std::move(fixed));
}

SelfMap compose(const SelfMap& outer, const SelfMap& inner) {
  require_dimension(outer, inner.dimension(), "compose");
  auto eval = [outer, inner](const CVector& z) { return outer.apply_raw(inner.apply_raw(z)); };
  MatrixField jac;
  if (outer.has_jacobian() && inner.has_jacobian()) {
    jac = [outer, inner](const CVector& z) {
      return CMatrix(outer.jacobian(inner.apply_raw(z)) * inner.jacobian(z));
    };
  }
  // Common boundary fixed points; dilations multiply.
  std::vector<KnownBoundaryFixedPoint> fixed;
  for (const auto& p : inner.known_fixed_points()) {
    for (const auto& r : outer.known_fixed_points()) {
      if ((p.point - r.point).norm() < Real("1e-20")) fixed.push_back({p.point, p.dilation * r.dilation});
    }
  }
  SelfMap out(outer.dimension(), "compose",
              "(" + outer.description() + ") o (" + inner.description() + ")", eval, jac);
  if (outer.automorphism() && inner.automorphism()) {
    out = out.with_automorphism(*outer.automorphism() * *inner.automorphism());
  }
  return out.with_fixed_points(std::move(fixed));
}

SelfMap iterate(const SelfMap& f, int count) {
  if (count < 1) throw ConfigError("iterate: count must be at least 1");
  auto eval = [f, count](const CVector& z) {
    CVector w = z;
    for (int i = 0; i < count; ++i) w = f.apply_raw(w);
    return w;
  };
  MatrixField jac;
  if (f.has_jacobian()) {
    jac = [f, count](const CVector& z) {
      CVector w = z;
      CMatrix m = CMatrix::Identity(f.dimension(), f.dimension());
      for (int i = 0; i < count; ++i) {
        m = f.jacobian(w) * m;
        w = f.apply_raw(w);
      }
      return m;
    };
  }
  std::vector<KnownBoundaryFixedPoint> fixed;
  for (const auto& p : f.known_fixed_points()) fixed.push_back({p.point, pow(p.dilation, count)});
  SelfMap out(f.dimension(), "iterate",
              std::to_string(count) + "-fold iterate of " + f.description(), eval, jac);
  if (f.automorphism()) {
    Automorphism g = *f.automorphism();
    for (int i = 1; i < count; ++i) g = g * *f.automorphism();
    out = out.with_automorphism(g);
  }
  return out.with_fixed_points(std::move(fixed));
}

// ------------------------------------------------------------------ checks

SelfMapCheck self_map_check(const SelfMap& f, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("self_map_check: need at least one sample");
  Sampler sampler(seed);
  const int q = f.dimension();
  SelfMapCheck out{true, Real(2), CVector::Zero(q), samples};
  for (int i = 0; i < samples; ++i) {
    const BallPoint z = (i % 2 == 0) ? sampler.ball_point(q) : sampler.shell_point(q, 20.0);
    const CVector w = f.apply_raw(z.coords());
    const Real margin = w.allFinite() ? Real(1) - w.norm() : Real(-1);
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.witness = z.coords();
    }
  }
  out.pass = out.worst_margin > 0;
  return out;
}

Real jacobian_check(const SelfMap& f, int samples, std::uint64_t seed) {
  Sampler sampler(seed);
  const int q = f.dimension();
  const Real h("1e-12");
  Real worst = 0;
  for (int i = 0; i < samples; ++i) {
    const CVector z = sampler.ball_point(q, 0.95).coords();
    const CMatrix j = f.jacobian(z);
    const Real scale = 1 + j.norm();
    for (int c = 0; c < q; ++c) {
      const CVector e = unit_vector(q, c) * h;
      const CVector fd = (f.apply_raw(z + e) - f.apply_raw(z - e)) / (2 * h);
      worst = std::max(worst, Real((fd - j.col(c)).norm() / scale));
    }
  }
  return worst;
}

BoundaryProbe probe_boundary_fixed(const SelfMap& f, const BoundaryPoint& zeta, const Real& tol) {
  require_dimension(f, zeta.dimension(), "is_boundary_fixed");
  const int q = zeta.dimension();
  // Offsets of Kobayashi length 0.5 from the radius keep the Koranyi
  // functional below 1 < 2 log 2.
  const Real r = tanh(Real("0.25"));
  std::vector<CVector> offsets{CVector::Zero(q), r * kI * zeta.coords()};
  if (q == 1) {
    offsets.push_back(-r * kI * zeta.coords());
  } else {
    CVector v = unit_vector(q, abs(zeta[0]) > Real("0.5") ? 1 : 0);
    v -= inner(v, zeta.coords()) * zeta.coords();
    offsets.push_back(r * v / v.norm());
  }
  BoundaryProbe probe{true, {}};
  for (const CVector& u : offsets) {
    Real first = -1;
    Real last = 0;
    for (int s = 4; s <= 40; s += 4) {
      const CVector z = axial_translation(zeta, Real(s)).apply_raw(u);
      const Real res = (f.apply_raw(z) - zeta.coords()).norm();
      if (first < 0) first = res;
      last = res;
    }
    probe.residuals.push_back(last);
    probe.fixed = probe.fixed && last < tol && last <= first;
  }
  return probe;
}

bool is_boundary_fixed(const SelfMap& f, const BoundaryPoint& zeta, const Real& tol) {
  return probe_boundary_fixed(f, zeta, tol).fixed;
}

DilationEstimate estimate_dilation(const SelfMap& f, const BoundaryPoint& zeta, const Real& s_max) {
  if (!is_boundary_fixed(f, zeta)) {
    throw DomainError("estimate_dilation: zeta is not a boundary fixed point of the map");
  }
  const int q = f.dimension();
  const BallPoint origin = BallPoint::origin(q);
  DilationEstimate est{};
  const int n = static_cast<int>(to_double(floor(s_max)));
  if (n < 4) throw DomainError("estimate_dilation: s_max must be at least 4");
  for (int i = 1; i <= n; ++i) {
    const BallPoint z = geodesic_point(zeta, Real(i));
    est.grid.push_back(Real(i));
    est.profile.push_back(kob_dist(origin, z) - kob_dist(origin, f(z)));
  }
  const auto& d = est.profile;
  est.tail_infimum = *std::min_element(d.begin() + n / 2, d.end());
  const Real x0 = d[n - 3], x1 = d[n - 2], x2 = d[n - 1];
  const Real den = (x2 - x1) - (x1 - x0);
  est.extrapolated = x2;
  if (abs(den) > Real("1e-30")) {
    const Real aitken = x2 - (x2 - x1) * (x2 - x1) / den;
    if (abs(aitken - x2) <= 10 * abs(x2 - x1)) est.extrapolated = aitken;
  }
  if (d[n - 1] - d[n / 2] > Real("0.5")) {
    throw OutOfScopeError("estimate_dilation: d(s) keeps growing (super-repelling point)",
                          to_double(d[n - 1]));
  }
  est.log_lambda = est.extrapolated;
  if (!(est.log_lambda > Real("1e-9"))) {
    throw OutOfScopeError("estimate_dilation: log dilation " + format_real(est.log_lambda) +
                              " is not positive (parabolic or attracting point)",
                          to_double(est.log_lambda));
  }
  est.lambda = exp(est.log_lambda);
  if (f.has_jacobian()) {
    const CVector z = geodesic_point(zeta, Real(n)).coords();
    est.jacobian_lambda = inner(f.jacobian(z) * zeta.coords(), zeta.coords()).real();
    if (abs(*est.jacobian_lambda - est.lambda) > Real("1e-4") * est.lambda) {
      throw NumericalError("estimate_dilation: radial derivative " +
                           format_real(*est.jacobian_lambda) + " disagrees with " +
                           format_real(est.lambda));
    }
  }
  return est;
}

DynamicsClass classify_dynamics(const SelfMap& f, int max_iterations, std::uint64_t seed) {
  const int q = f.dimension();
  Sampler sampler(seed);
  std::vector<CVector> cloud{CVector::Zero(q)};
  for (int i = 0; i < 8; ++i) cloud.push_back(sampler.ball_point(q, 0.9).coords());

  const int min_iterations = 256;
  std::optional<CVector> interior;
  int it = 0;
  for (; it < max_iterations; ++it) {
    if (!interior) {
      const CVector& x = cloud[0];
      const CVector fx = f.apply_raw(x);
      if ((fx - x).norm() <= Real("1e-26")) interior = fx;
    }
    if (interior && it >= min_iterations) break;

    bool all_near_sphere = true;
    for (auto& p : cloud) {
      p = f.apply_raw(p);
      all_near_sphere = all_near_sphere && Real(1) - p.norm() < Real("1e-8");
    }
    if (!interior && all_near_sphere) {
      Real spread = 0;
      for (const auto& p : cloud) spread = std::max(spread, Real((p - cloud[0]).norm()));
      if (spread < Real("1e-3")) {
        return {DynamicsTag::DenjoyWolffBoundary, cloud[0] / cloud[0].norm(), cloud, it + 1};
      }
    }
  }
  if (!interior && f.has_jacobian()) {
    // Elliptic-type maps whose fixed point is not reached by iteration.
    const int q2 = q;
    auto F = [&f](const CVector& z) { return CVector(f.apply_raw(z) - z); };
    auto J = [&f, q2](const CVector& z) {
      return CMatrix(f.jacobian(z) - CMatrix::Identity(q2, q2));
    };
    for (const auto& seed_point : cloud) {
      if (!(Real(1) - seed_point.norm() > Real("1e-6"))) continue;
      const NewtonResult r = newton_in_ball(F, J, seed_point, Real("1e-28"));
      if (r.converged) {
        interior = r.z;
        break;
      }
    }
  }
  if (!interior) {
    throw NumericalError("classify_dynamics: undecided after " + std::to_string(it) +
                         " iterations (no interior fixed point, no common boundary limit)");
  }
  return {DynamicsTag::InteriorFixedPoint, *interior, cloud, it};
}

PoleClearance ensure_pole_clearance(const SelfMap& f, const BoundaryPoint& zeta, const Real& delta) {
  return ensure_pole_clearance(f, zeta, classify_dynamics(f), delta);
}

PoleClearance ensure_pole_clearance(const SelfMap& f, const BoundaryPoint& zeta,
                                    const DynamicsClass& dynamics, const Real& delta) {
  require_dimension(f, zeta.dimension(), "ensure_pole_clearance");
  if (dynamics.tag == DynamicsTag::DenjoyWolffBoundary &&
      (dynamics.witness - zeta.coords()).norm() < Real("1e-6")) {
    throw DomainError("ensure_pole_clearance: zeta is the Denjoy-Wolff point of the map");
  }
  // Witness set: the fixed point (if interior) and the cloud with a few
  // further forward iterates.
  std::vector<BallPoint> witnesses;
  if (dynamics.tag == DynamicsTag::InteriorFixedPoint) witnesses.emplace_back(dynamics.witness);
  for (CVector p : dynamics.cloud) {
    for (int i = 0; i < 16; ++i) {
      if (Real(1) - p.norm() < Real("1e-20")) break;
      witnesses.emplace_back(p);
      p = f.apply_raw(p);
    }
  }
  auto min_horofunction = [&](const Automorphism& h) {
    Real m = std::numeric_limits<Real>::infinity();
    for (const auto& w : witnesses) m = std::min(m, horofunction(h(w), zeta));
    return m;
  };

  const DilationEstimate before = estimate_dilation(f, zeta);
  const int q = f.dimension();
  Automorphism h = Automorphism::identity(q);
  Real t = 0;
  Real m = min_horofunction(h);
  if (!(m > delta)) {
    t = Real("0.25");
    bool cleared = false;
    for (int doubling = 0; doubling <= 20; ++doubling, t *= 2) {
      h = hyperbolic_automorphism(zeta, exp(t));
      m = min_horofunction(h);
      if (m > delta) {
        cleared = true;
        break;
      }
    }
    if (!cleared) throw NumericalError("ensure_pole_clearance: not achieved after 20 doublings");
  }
  const SelfMap g = (t == 0) ? f : conjugate(f, h);
  const DilationEstimate after = estimate_dilation(g, zeta);
  if (abs(after.lambda - before.lambda) > Real("1e-6")) {
    throw InvariantError("ensure_pole_clearance: dilation changed from " +
                         format_real(before.lambda) + " to " + format_real(after.lambda));
  }
  return {g, h, t, m, before.lambda, after.lambda};
}

}  // namespace backorbit
