#include "backorbit/map_spec.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <vector>

#include "backorbit/errors.hpp"

namespace backorbit {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Real parse_decimal(const std::string& s) {
  static const std::regex number(R"([+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)");
  if (!std::regex_match(s, number)) throw ConfigError("not a number: '" + s + "'");
  return Real(s);
}

int parse_int(const std::string& s) {
  static const std::regex integer(R"([+-]?\d{1,9})");
  if (!std::regex_match(s, integer)) throw ConfigError("not an integer: '" + s + "'");
  return std::stoi(s);
}

void expect_keys(const SpecNode& node, const std::string& kind, std::set<std::string> keys,
                 std::set<std::string> children = {}) {
  keys.insert("kind");
  for (const auto& [k, v] : node.values) {
    if (!keys.count(k)) throw ConfigError(kind + ": unknown key '" + k + "'");
  }
  for (const auto& [k, v] : node.children) {
    if (!children.count(k)) throw ConfigError(kind + ": unknown section '" + k + "'");
  }
}

Real real_or(const SpecNode& node, const std::string& key, const Real& fallback) {
  return node.has(key) ? parse_real(node.get(key)) : fallback;
}

}  // namespace

Real parse_real(std::string_view text) {
  const std::string s = trim(text);
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_decimal(s);
  const Real den = parse_decimal(trim(s.substr(slash + 1)));
  if (den == 0) throw ConfigError("zero denominator in '" + s + "'");
  return parse_decimal(trim(s.substr(0, slash))) / den;
}

Complex parse_complex(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() == 1) return Complex(parse_real(parts[0]), 0);
  if (parts.size() == 2) return Complex(parse_real(parts[0]), parse_real(parts[1]));
  throw ConfigError("complex numbers are written re,im: '" + std::string(text) + "'");
}

CVector parse_vector(std::string_view text) {
  const auto parts = split(text, ';');
  CVector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(i) = parse_complex(parts[i]);
  return v;
}

CMatrix parse_matrix(std::string_view text) {
  const auto rows = split(text, '|');
  std::vector<CVector> parsed;
  for (const auto& r : rows) parsed.push_back(parse_vector(r));
  const auto cols = parsed.front().size();
  CMatrix m(static_cast<Eigen::Index>(parsed.size()), cols);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (parsed[i].size() != cols) throw ConfigError("matrix rows differ in length");
    m.row(i) = parsed[i].transpose();
  }
  return m;
}

BallPoint parse_ball_point(std::string_view text) {
  const CVector v = parse_vector(text);
  if (!(v.norm() < 1)) throw ConfigError("point is not inside the unit ball: '" + std::string(text) + "'");
  try {
    return BallPoint(v);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

BoundaryPoint parse_boundary_point(std::string_view text) {
  const CVector v = parse_vector(text);
  if (v.norm() == 0) throw ConfigError("boundary point must be nonzero");
  return BoundaryPoint(CVector(v / v.norm()));
}

const std::string& SpecNode::get(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

const SpecNode& SpecNode::child(const std::string& name) const {
  const auto it = children.find(name);
  if (it == children.end()) throw ConfigError("missing section [" + name + "]");
  return it->second;
}

SpecNode parse_inline_spec(std::string_view text) {
  const auto parts = split(text, ':');
  SpecNode node;
  if (parts[0].empty()) throw ConfigError("map spec has no kind: '" + std::string(text) + "'");
  node.values["kind"] = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + parts[i] + "'");
    node.values[trim(parts[i].substr(0, eq))] = trim(parts[i].substr(eq + 1));
  }
  return node;
}

SpecNode parse_spec_text(std::istream& in) {
  SpecNode root;
  SpecNode* current = &root;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string s = trim(line.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
      current = &root;
      for (const auto& name : split(s.substr(1, s.size() - 2), '.')) {
        if (name.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
        current = &current->children[name];
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    current->values[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  return root;
}

SpecNode load_spec(const std::string& arg) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) {
    std::ifstream in(arg);
    if (!in) throw ConfigError("cannot read " + arg);
    return parse_spec_text(in);
  }
  return parse_inline_spec(arg);
}

Automorphism build_automorphism(const SpecNode& node) {
  const std::string type = node.has("type") ? node.get("type") : "hyperbolic";
  try {
    if (type == "hyperbolic") {
      expect_keys(node, "ball_automorphism", {"type", "zeta", "lambda"});
      return hyperbolic_automorphism(parse_boundary_point(node.get("zeta")), parse_real(node.get("lambda")));
    }
    if (type == "parabolic") {
      expect_keys(node, "ball_automorphism", {"type", "zeta", "shift", "t"});
      const BoundaryPoint zeta = parse_boundary_point(node.get("zeta"));
      const CVector shift = node.has("shift") ? parse_vector(node.get("shift"))
                                              : CVector(CVector::Zero(zeta.dimension() - 1));
      return parabolic_automorphism(zeta, shift, real_or(node, "t", 0));
    }
    if (type == "involution") {
      expect_keys(node, "ball_automorphism", {"type", "center"});
      return mobius_involution(parse_ball_point(node.get("center")));
    }
    if (type == "general") {
      expect_keys(node, "ball_automorphism", {"type", "matrix"});
      return Automorphism::from_matrix(parse_matrix(node.get("matrix")));
    }
    if (type == "unitary") {
      expect_keys(node, "ball_automorphism", {"type", "matrix"});
      return Automorphism::from_unitary(parse_matrix(node.get("matrix")));
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("ball_automorphism: ") + e.what());
  }
  throw ConfigError("ball_automorphism: unknown type '" + type + "'");
}

SelfMap build_map_unchecked(const SpecNode& node) {
  const std::string& kind = node.get("kind");
  if (kind == "identity") {
    expect_keys(node, kind, {"q"});
    const int q = node.has("q") ? parse_int(node.get("q")) : 1;
    if (q < 1) throw ConfigError("identity: q must be positive");
    return make_identity(q);
  }
  if (kind == "linear") {
    expect_keys(node, kind, {"matrix"});
    return make_linear(parse_matrix(node.get("matrix")));
  }
  if (kind == "mobius") {
    expect_keys(node, kind, {"a", "theta"});
    return make_disc_mobius(node.has("a") ? parse_complex(node.get("a")) : Complex(0),
                            real_or(node, "theta", 0));
  }
  if (kind == "blaschke") {
    expect_keys(node, kind, {"a", "zeros", "theta"});
    if (node.has("a") == node.has("zeros")) throw ConfigError("blaschke: give exactly one of a, zeros");
    std::vector<Complex> zeros;
    if (node.has("a")) {
      zeros = {Complex(0), parse_complex(node.get("a"))};
    } else {
      const CVector z = parse_vector(node.get("zeros"));
      zeros.assign(z.data(), z.data() + z.size());
    }
    for (const Complex& a : zeros) {
      if (!(abs(a) < 1)) throw ConfigError("blaschke: zeros must lie in the disc");
    }
    return make_blaschke(zeros, real_or(node, "theta", 0));
  }
  if (kind == "ball_automorphism") {
    const Automorphism g = build_automorphism(node);
    SelfMap f = make_automorphism(g);
    if (!node.has("type") || node.get("type") == "hyperbolic") {
      const BoundaryPoint zeta = parse_boundary_point(node.get("zeta"));
      const Real lambda = parse_real(node.get("lambda"));
      f = f.with_fixed_points({{zeta.coords(), lambda}, {CVector(-zeta.coords()), 1 / lambda}});
    }
    return f;
  }
  if (kind == "warped_product") {
    expect_keys(node, kind, {"c", "q"}, {"base"});
    const int q = node.has("q") ? parse_int(node.get("q")) : 2;
    return make_warped_product(build_map_unchecked(node.child("base")), parse_complex(node.get("c")), q);
  }
  if (kind == "conjugate") {
    expect_keys(node, kind, {}, {"map", "by"});
    return conjugate(build_map_unchecked(node.child("map")), build_automorphism(node.child("by")));
  }
  if (kind == "compose") {
    expect_keys(node, kind, {}, {"outer", "inner"});
    return compose(build_map_unchecked(node.child("outer")), build_map_unchecked(node.child("inner")));
  }
  if (kind == "iterate") {
    expect_keys(node, kind, {"count"}, {"map"});
    const int count = parse_int(node.get("count"));
    if (count < 1) throw ConfigError("iterate: count must be positive");
    return iterate(build_map_unchecked(node.child("map")), count);
  }
  throw ConfigError("unknown map kind '" + kind + "'");
}

SelfMap build_map(const SpecNode& node) {
  SelfMap f = [&] {
    try {
      return build_map_unchecked(node);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }();
  const SelfMapCheck check = self_map_check(f, 1000);
  if (!check.pass) {
    throw ConfigError("map spec does not define a self-map of the ball (worst margin " +
                      format_real(check.worst_margin) + ")");
  }
  return f;
}

PreModel build_premodel(const SpecNode& node, int target_dimension) {
  expect_keys(node, "premodel", {"base_dimension"}, {"intertwiner", "tau"});
  const Automorphism tau = build_automorphism(node.child("tau"));
  const int k = node.has("base_dimension") ? parse_int(node.get("base_dimension")) : tau.dimension();
  const SpecNode& l = node.child("intertwiner");
  expect_keys(l, "intertwiner", {}, {"map", "post"});
  if (l.has("kind") && l.get("kind") != "embed") {
    throw ConfigError("intertwiner: only kind = embed is supported");
  }
  const SelfMap inner = l.children.count("map") ? build_map(l.child("map")) : make_identity(k);
  if (inner.dimension() != k) throw ConfigError("intertwiner: map dimension differs from base_dimension");
  HoloMap ell = embed_map(inner, target_dimension);
  if (l.children.count("post")) ell = compose(build_automorphism(l.child("post")), ell);
  return {k, ell, tau};
}

}  // namespace backorbit
