// Command-line front end. Exit codes: 0 success, 1 failed check or
// invariant, 2 bad input (spec, domain, out of scope), 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "backorbit/acceptance.hpp"
#include "backorbit/analysis.hpp"
#include "backorbit/errors.hpp"
#include "backorbit/map_spec.hpp"
#include "backorbit/orbit_engine.hpp"

using namespace backorbit;

namespace {

constexpr int kExitCheck = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

std::string fmt(const Real& x) { return format_real(x); }

std::string fmt(const CVector& z) {
  std::ostringstream os;
  for (int i = 0; i < z.size(); ++i) os << (i ? ";" : "") << fmt(z(i).real()) << "," << fmt(z(i).imag());
  return os.str();
}

std::string check_line(const std::string& name, bool pass, const Real& margin) {
  return "CHECK " + name + (pass ? " PASS" : " FAIL") + " margin=" + fmt(margin) + "\n";
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("BACKORBIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("BACKORBIT_SEED is not an unsigned integer: ") + env);
    }
  }
  return 1;
}

// Writes to the named file, or stdout for "" and "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw ConfigError("cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool is_stdout() const { return !file_; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

SelfMap load_map(const std::string& spec) { return build_map(load_spec(spec)); }

// Missing trailing coordinates of zeta are zero: "--zeta 1" is e_1 in any dimension.
BoundaryPoint load_zeta(const std::string& text, const SelfMap& f) {
  const BoundaryPoint given = parse_boundary_point(text);
  const int q = f.dimension();
  if (given.dimension() > q) {
    throw ConfigError("zeta has dimension " + std::to_string(given.dimension()) + ", map has " +
                      std::to_string(q));
  }
  CVector z = CVector::Zero(q);
  z.head(given.dimension()) = given.coords();
  return BoundaryPoint(z);
}

Real dilation_of(const SelfMap& f, const BoundaryPoint& zeta, const std::string& override_text) {
  if (!override_text.empty()) {
    const Real lambda = parse_real(override_text);
    if (!(lambda > 1)) throw ConfigError("--lambda must exceed 1");
    return lambda;
  }
  return estimate_dilation(f, zeta).lambda;
}

struct OrbitOptions {
  std::string map;
  std::string zeta;
  std::string lambda;
  int k_min = 1;
  int k_max = 40;
  int max_iterations = 100000;
  double eps_sigma = 1e-3;
  double tol_cluster = 1e-6;
  double rho_cluster = 0.1;
  std::string mode = "single";
  std::string output;
};

OrbitParams to_params(const OrbitOptions& o) {
  OrbitParams p;
  p.mode = o.mode == "cluster" ? OrbitMode::Cluster : OrbitMode::SingleTail;
  p.k_min = o.k_min;
  p.k_max = o.k_max;
  p.max_iterations = o.max_iterations;
  p.eps_sigma = Real(o.eps_sigma);
  p.tol_cluster = Real(o.tol_cluster);
  p.rho_cluster = Real(o.rho_cluster);
  return p;
}

// Orbit of the pole-cleared conjugate h f h^-1, together with h.
struct ClearedOrbit {
  PoleClearance clearance;
  BackwardOrbitResult result;
  Real lambda;
};

ClearedOrbit cleared_orbit(const SelfMap& f, const BoundaryPoint& zeta, const std::string& lambda_text,
                           const OrbitParams& params) {
  if (!is_boundary_fixed(f, zeta)) throw DomainError("zeta is not a boundary fixed point of the map");
  const Real lambda = dilation_of(f, zeta, lambda_text);
  PoleClearance clearance = ensure_pole_clearance(f, zeta, classify_dynamics(f));
  BackwardOrbitResult result = construct_backward_orbit(clearance.map, zeta, lambda, params);
  return {std::move(clearance), std::move(result), lambda};
}

// ---------------------------------------------------------------- commands

int cmd_geometry_dist(const std::string& a, const std::string& b) {
  std::cout << fmt(kob_dist(parse_ball_point(a), parse_ball_point(b))) << "\n";
  return 0;
}

int cmd_geometry_horo(const std::string& z, const std::string& zeta) {
  std::cout << fmt(horofunction(parse_ball_point(z), parse_boundary_point(zeta))) << "\n";
  return 0;
}

int cmd_geometry_koranyi(const std::string& z, const std::string& zeta, const std::string& m) {
  const BallPoint p = parse_ball_point(z);
  const BoundaryPoint v = parse_boundary_point(zeta);
  const Real amplitude = parse_real(m);
  if (!(amplitude > 1)) throw ConfigError("--M must exceed 1");
  const Membership mem = koranyi_contains(p, {v, amplitude});
  std::cout << (mem.inside ? "inside" : "outside") << " margin=" << fmt(mem.margin)
            << " functional=" << fmt(koranyi_functional(p, v)) << "\n";
  return 0;
}

int cmd_geometry_tube(const std::string& z, const std::string& zeta, const std::string& l) {
  const BallPoint p = parse_ball_point(z);
  const BoundaryPoint v = parse_boundary_point(zeta);
  const Real width = parse_real(l);
  if (width < 0) throw ConfigError("--L must be non-negative");
  const GeodesicProjection proj = dist_to_geodesic(p, v);
  const Membership mem = tube_contains(p, {v, width});
  std::cout << (mem.inside ? "inside" : "outside") << " margin=" << fmt(mem.margin)
            << " distance=" << fmt(proj.distance) << " parameter=" << fmt(proj.parameter) << "\n";
  return 0;
}

int cmd_dilation(const std::string& spec, const std::string& zeta_text) {
  const SelfMap f = load_map(spec);
  const BoundaryPoint zeta = load_zeta(zeta_text, f);
  const DilationEstimate e = estimate_dilation(f, zeta);
  std::cout << "lambda " << fmt(e.lambda) << "\n"
            << "log_lambda " << fmt(e.log_lambda) << "\n"
            << "tail_infimum " << fmt(e.tail_infimum) << "\n";
  if (e.jacobian_lambda) std::cout << "jacobian_lambda " << fmt(*e.jacobian_lambda) << "\n";
  for (const KnownBoundaryFixedPoint& p : f.known_fixed_points()) {
    if ((p.point - zeta.coords()).norm() < Real("1e-12")) std::cout << "closed_form " << fmt(p.dilation) << "\n";
  }
  return 0;
}

int cmd_classify(const std::string& spec) {
  const SelfMap f = load_map(spec);
  const DynamicsClass d = classify_dynamics(f);
  std::cout << (d.tag == DynamicsTag::InteriorFixedPoint ? "interior_fixed_point " : "denjoy_wolff ")
            << fmt(d.witness) << "\n"
            << "iterations " << d.iterations << "\n";
  return 0;
}

int cmd_orbit(const OrbitOptions& o) {
  const SelfMap f = load_map(o.map);
  const BoundaryPoint zeta = load_zeta(o.zeta, f);
  ClearedOrbit c = cleared_orbit(f, zeta, o.lambda, to_params(o));
  // Back to the original map: f(h^-1 w_{j+1}) = h^-1 w_j.
  OrbitSegment orbit = c.result.orbit;
  const Automorphism back = c.clearance.conjugator.inverse();
  for (BallPoint& z : orbit.points) z = back(z);
  orbit.map_id = f.description();

  Output out(o.output);
  write_orbit_csv(out.stream(), orbit);
  std::ostream& log = out.is_stdout() ? std::cerr : std::cout;
  const OrbitDiagnostics d = diagnose(orbit);
  log << "map " << f.description() << "\n"
      << "zeta " << fmt(zeta.coords()) << "\n"
      << "lambda " << fmt(c.lambda) << "\n"
      << "pole_clearance_translation " << fmt(c.clearance.translation) << "\n"
      << "mode " << (c.result.mode == OrbitMode::Cluster ? "cluster" : "single") << "\n"
      << "k_used " << c.result.k_used << "\n"
      << "length " << orbit.points.size() << "\n"
      << "sigma " << fmt(d.sigma_hat) << "\n"
      << "residual " << fmt(backward_residual(orbit, f)) << "\n";
  for (const std::string& w : c.result.warnings) log << "warning " << w << "\n";
  for (const std::string& r : c.result.report) log << "chain " << r << "\n";
  return 0;
}

struct CompareOptions {
  std::string map;
  std::vector<std::string> csv;
  std::string zeta;
  std::string lambda;
  double offset = 0.05;
  double eps_plateau = 1e-2;
  std::string output;
};

int cmd_compare(const CompareOptions& o) {
  const SelfMap f = load_map(o.map);
  const BoundaryPoint zeta = load_zeta(o.zeta, f);
  SelfMap g = f;
  std::optional<OrbitSegment> x, y;
  if (o.csv.size() == 2) {
    const Real lambda = dilation_of(f, zeta, o.lambda);
    auto read = [&](const std::string& path) {
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot read " + path);
      return read_orbit_csv(in, zeta, lambda, f.description());
    };
    x = read(o.csv[0]);
    y = read(o.csv[1]);
    for (const OrbitSegment* s : {&*x, &*y}) {
      if (backward_residual(*s, f) > Real("1e-10")) throw ConfigError("CSV orbit is not a backward orbit of the map");
    }
  } else if (o.csv.empty()) {
    // Construction orbit against a Newton orbit from a seed moved tangentially by `offset`.
    if (!(o.offset > 0)) throw ConfigError("--offset must be positive");
    ClearedOrbit c = cleared_orbit(f, zeta, o.lambda, {});
    g = c.clearance.map;
    x = c.result.orbit;
    const CVector tangent = Complex(0, 1) * tanh(Real(o.offset) / 2) * zeta.coords();
    const BallPoint y0 = mobius_involution(x->points[0])(BallPoint(tangent));
    y = backward_orbit_via_preimages(g, y0, zeta, c.lambda, static_cast<int>(x->points.size()) - 1);
  } else {
    throw ConfigError("compare takes either two orbit CSV files or none");
  }
  ProfileParams pp;
  pp.eps_plateau = Real(o.eps_plateau);
  const OrbitComparison cmp = orbit_distance_profile(*x, *y, g, pp);
  Output out(o.output);
  std::ostream& os = out.stream();
  os << "n,direct,shifted,argmin\n";
  for (int n = cmp.first; n <= cmp.last; ++n) {
    const int i = n - cmp.first;
    os << n << "," << fmt(cmp.direct[i]) << "," << fmt(cmp.shifted[i]) << "," << cmp.argmin[i] << "\n";
  }
  os << check_line("plateau", cmp.plateau, pp.eps_plateau - cmp.last_quarter_increase);
  os << check_line("shifted_monotone", cmp.shifted_monotone, Real(0));
  Real worst_gap = 0;
  for (std::size_t i = 0; i < cmp.direct.size(); ++i) worst_gap = std::min(worst_gap, cmp.direct[i] - cmp.shifted[i]);
  os << check_line("shifted_below_direct", worst_gap >= 0, worst_gap);
  const ShiftRecovery s = shift_recovery(*x, *y, g);
  os << check_line("shift_recovery", true, s.bound - s.max_direct);
  os << "alpha=" << s.alpha << " C=" << fmt(s.constant) << " sigma=" << fmt(s.sigma)
     << " bound=" << fmt(s.bound) << "\n";
  return cmp.plateau && cmp.shifted_monotone && worst_gap >= 0 ? 0 : kExitCheck;
}

int cmd_validate_premodel(const std::string& spec, const std::string& premodel_path,
                          const std::string& zeta_text, std::uint64_t seed) {
  const SelfMap f = load_map(spec);
  const BoundaryPoint zeta = load_zeta(zeta_text, f);
  const PreModel p = build_premodel(load_spec(premodel_path), f.dimension());
  const PremodelReport r = premodel_validate(f, p, zeta, 1000, seed);
  std::cout << r.text();
  return r.pass() ? 0 : kExitCheck;
}

int cmd_suite(std::uint64_t seed, const std::string& output) {
  const SuiteReport r = run_acceptance(seed);
  Output out(output);
  out.stream() << r.text();
  return r.pass() ? 0 : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backward orbits at boundary repelling fixed points of self-maps of the unit ball"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t s) { seed = s, seed_given = true; },
      "RNG seed (default: $BACKORBIT_SEED, else 1)");

  std::function<int()> run;

  auto* geometry = app.add_subcommand("geometry", "Distances, horofunctions and region membership");
  geometry->require_subcommand(1);
  std::string ga, gb, gzeta = "1", gm = "2", gl = "1";
  auto* gdist = geometry->add_subcommand("dist", "Kobayashi distance k(z, w)");
  gdist->add_option("z", ga)->required();
  gdist->add_option("w", gb)->required();
  gdist->callback([&] { run = [&] { return cmd_geometry_dist(ga, gb); }; });
  auto* ghoro = geometry->add_subcommand("horo", "Horofunction of z at zeta");
  ghoro->add_option("z", ga)->required();
  ghoro->add_option("--zeta", gzeta, "Boundary point")->required();
  ghoro->callback([&] { run = [&] { return cmd_geometry_horo(ga, gzeta); }; });
  auto* gkor = geometry->add_subcommand("koranyi", "Membership in the Koranyi region K(zeta, M)");
  gkor->add_option("z", ga)->required();
  gkor->add_option("--zeta", gzeta, "Vertex")->required();
  gkor->add_option("--M", gm, "Amplitude, > 1");
  gkor->callback([&] { run = [&] { return cmd_geometry_koranyi(ga, gzeta, gm); }; });
  auto* gtube = geometry->add_subcommand("tube", "Membership in the geodesic tube A(gamma, L)");
  gtube->add_option("z", ga)->required();
  gtube->add_option("--zeta", gzeta, "Endpoint of the radius")->required();
  gtube->add_option("--L", gl, "Width");
  gtube->callback([&] { run = [&] { return cmd_geometry_tube(ga, gzeta, gl); }; });

  std::string map, zeta;
  auto* dilation = app.add_subcommand("dilation", "Estimate the dilation at a boundary fixed point");
  dilation->add_option("map", map, "Map spec (inline or file)")->required();
  dilation->add_option("--zeta", zeta)->required();
  dilation->callback([&] { run = [&] { return cmd_dilation(map, zeta); }; });

  auto* classify = app.add_subcommand("classify", "Interior fixed point or Denjoy-Wolff point");
  classify->add_option("map", map)->required();
  classify->callback([&] { run = [&] { return cmd_classify(map); }; });

  OrbitOptions oo;
  auto* orbit = app.add_subcommand("orbit", "Construct a bounded-step backward orbit, write CSV");
  orbit->add_option("map", oo.map)->required();
  orbit->add_option("--zeta", oo.zeta)->required();
  orbit->add_option("--lambda", oo.lambda, "Dilation (default: estimated)");
  orbit->add_option("--kmin", oo.k_min)->check(CLI::NonNegativeNumber);
  orbit->add_option("--kmax", oo.k_max)->check(CLI::NonNegativeNumber);
  orbit->add_option("--max-iterations", oo.max_iterations)->check(CLI::PositiveNumber);
  orbit->add_option("--eps-sigma", oo.eps_sigma)->check(CLI::PositiveNumber);
  orbit->add_option("--tol-cluster", oo.tol_cluster)->check(CLI::PositiveNumber);
  orbit->add_option("--rho-cluster", oo.rho_cluster)->check(CLI::PositiveNumber);
  orbit->add_option("--mode", oo.mode)->check(CLI::IsMember({"single", "cluster"}));
  orbit->add_option("-o,--output", oo.output, "CSV path (default stdout; summary then goes to stderr)");
  orbit->callback([&] { run = [&] { return cmd_orbit(oo); }; });

  CompareOptions co;
  auto* compare = app.add_subcommand("compare", "Distance profiles of two backward orbits");
  compare->add_option("map", co.map)->required();
  compare->add_option("csv", co.csv, "Two orbit CSV files; without them the construction orbit is "
                                     "compared with a Newton orbit from a perturbed seed");
  compare->add_option("--zeta", co.zeta)->required();
  compare->add_option("--lambda", co.lambda);
  compare->add_option("--offset", co.offset, "Kobayashi offset of the second seed");
  compare->add_option("--eps-plateau", co.eps_plateau)->check(CLI::PositiveNumber);
  compare->add_option("-o,--output", co.output);
  compare->callback([&] { run = [&] { return cmd_compare(co); }; });

  std::string premodel;
  auto* validate = app.add_subcommand("validate-premodel", "Check a pre-model of the map");
  validate->add_option("map", map)->required();
  validate->add_option("premodel", premodel, "Pre-model spec file")->required();
  validate->add_option("--zeta", zeta)->required();
  validate->callback([&] {
    run = [&] { return cmd_validate_premodel(map, premodel, zeta, seed_given ? seed : default_seed()); };
  });

  std::string suite_output;
  auto* suite = app.add_subcommand("suite", "Run the acceptance battery");
  suite->add_option("-o,--output", suite_output);
  suite->callback([&] {
    run = [&] { return cmd_suite(seed_given ? seed : default_seed(), suite_output); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }
  try {
    return run();
  } catch (const InvariantError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return kExitCheck;
  } catch (const OutOfScopeError& e) {
    std::cerr << "out of scope: " << e.what() << "\n";
    return kExitInput;
  } catch (const ConfigError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ConstructionError& e) {
    std::cerr << "construction failed: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
