#include "nldp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "nldp/error.hpp"
#include "nldp/polynomial.hpp"

namespace nldp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::config, where + ": " + what);
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, _] : j.items()) {
    if (!ok.count(k)) fail(where, "unknown key '" + k + "'");
  }
}

const json& need(const json& j, const std::string& where, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

std::int64_t as_count(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

int as_axis(const json& j, const std::string& where, int dim) {
  const auto a = as_count(j, where);
  if (a < 0 || a >= dim) fail(where, "axis must lie in [0, dim)");
  return static_cast<int>(a);
}

Point as_point(const json& j, const std::string& where, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    fail(where, "expected an array of " + std::to_string(dim) + " numbers");
  }
  Point p(dim);
  for (int k = 0; k < dim; ++k) p[k] = as_number(j[k], where + "[" + std::to_string(k) + "]");
  return p;
}

std::vector<Point> as_points(const json& j, const std::string& where, int dim) {
  if (!j.is_array()) fail(where, "expected an array of points");
  std::vector<Point> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_point(j[i], where + "[" + std::to_string(i) + "]", dim));
  return out;
}

std::vector<double> as_numbers(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// [[coef, [p1, ..., pd]], ...]
Polynomial as_polynomial(const json& j, const std::string& where, int dim) {
  if (!j.is_array()) fail(where, "expected a list of [coef, [powers]] terms");
  std::vector<Monomial> terms;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const json& t = j[i];
    if (!t.is_array() || t.size() != 2 || !t[1].is_array() || static_cast<int>(t[1].size()) != dim) {
      fail(w, "expected [coef, [" + std::to_string(dim) + " powers]]");
    }
    Monomial m;
    m.coef = as_number(t[0], w);
    for (int k = 0; k < dim; ++k) {
      const auto p = as_count(t[1][k], w);
      if (p < 0 || p > 16) fail(w, "powers must lie in [0, 16]");
      m.powers[k] = static_cast<int>(p);
    }
    terms.push_back(m);
  }
  return Polynomial(dim, std::move(terms));
}

// sup |p| over a box, bounded termwise.
double polynomial_bound(const Polynomial& p, const Box& box) {
  double s = 0.0;
  for (const auto& m : p.terms()) {
    double t = std::abs(m.coef);
    for (int k = 0; k < p.dim(); ++k) {
      const double r = std::max(std::abs(box.lo[k]), std::abs(box.hi[k]));
      t *= std::pow(r, m.powers[k]);
    }
    s += t;
  }
  return s;
}

struct ParsedScalar {
  ScalarField field;
  std::optional<Polynomial> poly;  // for bounding unbounded kinds on a region
};

ParsedScalar parse_scalar(const json& j, int dim, const std::string& where, bool allow_sup) {
  const std::string kind = as_string(need(j, where, "kind"), where + ".kind");
  ParsedScalar out;
  auto with_sup = [&](std::initializer_list<const char*> keys) {
    std::vector<const char*> all(keys);
    all.push_back("kind");
    if (allow_sup) all.push_back("sup");
    std::set<std::string> ok(all.begin(), all.end());
    for (const auto& [k, _] : j.items()) {
      if (!ok.count(k)) fail(where, "unknown key '" + k + "'");
    }
  };
  if (kind == "constant") {
    with_sup({"value"});
    out.field = ScalarField::constant(as_number(need(j, where, "value"), where + ".value"));
  } else if (kind == "coordinate") {
    with_sup({"axis", "scale"});
    const int axis = as_axis(need(j, where, "axis"), where + ".axis", dim);
    const double scale = j.contains("scale") ? as_number(j["scale"], where + ".scale") : 1.0;
    std::array<int, kMaxDim> pw{};
    pw[axis] = 1;
    out.poly = Polynomial(dim, {Monomial{scale, pw}});
    out.field = ScalarField::function([axis, scale](const Point& x) { return scale * x[axis]; });
  } else if (kind == "expr") {
    with_sup({"terms"});
    Polynomial p = as_polynomial(need(j, where, "terms"), where + ".terms", dim);
    out.poly = p;
    if (p.is_constant()) {
      out.field = ScalarField::constant(p(Point::Zero(dim)));
    } else {
      out.field = ScalarField::function([p](const Point& x) { return p(x); });
    }
  } else if (kind == "abs_coordinate") {
    // offset + scale |x_axis|
    with_sup({"axis", "offset", "scale"});
    const int axis = as_axis(need(j, where, "axis"), where + ".axis", dim);
    const double offset = j.contains("offset") ? as_number(j["offset"], where + ".offset") : 0.0;
    const double scale = j.contains("scale") ? as_number(j["scale"], where + ".scale") : 1.0;
    out.field = ScalarField::function(
        [axis, offset, scale](const Point& x) { return offset + scale * std::abs(x[axis]); });
  } else if (kind == "inverse_quadratic") {
    // offset + scale / (1 + |x|^2)
    with_sup({"offset", "scale"});
    const double offset = j.contains("offset") ? as_number(j["offset"], where + ".offset") : 0.0;
    const double scale = j.contains("scale") ? as_number(j["scale"], where + ".scale") : 1.0;
    out.field = ScalarField::function(
        [offset, scale](const Point& x) { return offset + scale / (1.0 + x.squaredNorm()); },
        std::max(std::abs(offset), std::abs(offset + scale)));
  } else if (kind == "indicator_box") {
    // value on the closed box [lo, hi], 0 elsewhere
    with_sup({"lo", "hi", "value"});
    const Point lo = as_point(need(j, where, "lo"), where + ".lo", dim);
    const Point hi = as_point(need(j, where, "hi"), where + ".hi", dim);
    const double value = j.contains("value") ? as_number(j["value"], where + ".value") : 1.0;
    if ((hi - lo).minCoeff() < 0.0) fail(where, "lo must not exceed hi");
    out.field = ScalarField::function(
        [lo, hi, value](const Point& x) {
          return ((x - lo).minCoeff() >= 0.0 && (hi - x).minCoeff() >= 0.0) ? value : 0.0;
        },
        std::abs(value));
  } else {
    fail(where + ".kind", "unknown scalar kind '" + kind + "'");
  }
  if (allow_sup && j.contains("sup")) {
    const double s = as_number(j["sup"], where + ".sup");
    if (s < 0.0) fail(where + ".sup", "must be >= 0");
    auto fn = out.field;
    out.field = ScalarField::function([fn](const Point& x) { return fn(x); }, s);
  }
  return out;
}

double lambda_of(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw Error(ErrorKind::invalid_argument, "A is not positive definite");
  return std::max({1.0, hi, 1.0 / lo});
}

EllipticField parse_elliptic(const json& j, int dim) {
  const std::string w = "elliptic";
  const std::string kind = as_string(need(j, w, "kind"), w + ".kind");
  if (kind == "identity") {
    allow_keys(j, w, {"kind"});
    return EllipticField::identity(dim);
  }
  if (kind == "constant_matrix") {
    allow_keys(j, w, {"kind", "matrix", "lambda"});
    const json& m = need(j, w, "matrix");
    if (!m.is_array() || static_cast<int>(m.size()) != dim) fail(w + ".matrix", "expected dim rows");
    Matrix a(dim, dim);
    for (int r = 0; r < dim; ++r) a.row(r) = as_point(m[r], w + ".matrix[" + std::to_string(r) + "]", dim).transpose();
    const double lambda = j.contains("lambda") ? as_number(j["lambda"], w + ".lambda") : lambda_of(0.5 * (a + a.transpose()));
    return EllipticField::constant(a, lambda);
  }
  if (kind == "expr") {
    allow_keys(j, w, {"kind", "diagonal", "entries", "lambda"});
    const double lambda = as_number(need(j, w, "lambda"), w + ".lambda");
    if (j.contains("diagonal") == j.contains("entries")) fail(w, "give exactly one of 'diagonal' or 'entries'");
    std::vector<std::vector<Polynomial>> e(dim, std::vector<Polynomial>(dim, Polynomial::constant(dim, 0.0)));
    const bool diagonal = j.contains("diagonal");
    if (diagonal) {
      const json& d = j["diagonal"];
      if (!d.is_array() || static_cast<int>(d.size()) != dim) fail(w + ".diagonal", "expected dim polynomials");
      for (int k = 0; k < dim; ++k) e[k][k] = as_polynomial(d[k], w + ".diagonal[" + std::to_string(k) + "]", dim);
    } else {
      const json& m = j["entries"];
      if (!m.is_array() || static_cast<int>(m.size()) != dim) fail(w + ".entries", "expected dim rows");
      for (int r = 0; r < dim; ++r) {
        if (!m[r].is_array() || static_cast<int>(m[r].size()) != dim) fail(w + ".entries", "expected dim columns");
        for (int c = 0; c < dim; ++c) {
          e[r][c] = as_polynomial(m[r][c], w + ".entries[" + std::to_string(r) + "][" + std::to_string(c) + "]", dim);
        }
      }
    }
    // (div A)_i = sum_j d_j a_ij
    std::vector<std::vector<Polynomial>> de(dim, std::vector<Polynomial>(dim));
    bool zero_div = true;
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) {
        de[r][c] = e[r][c].derivative(c);
        zero_div = zero_div && de[r][c].terms().empty();
      }
    }
    auto a_fn = [e, dim](const Point& x) {
      Matrix a(dim, dim);
      for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) a(r, c) = e[r][c](x);
      }
      return a;
    };
    EllipticField::VectorFn div_fn;
    if (!zero_div) {
      div_fn = [de, dim](const Point& x) {
        Point v = Point::Zero(dim);
        for (int r = 0; r < dim; ++r) {
          for (int c = 0; c < dim; ++c) v[r] += de[r][c](x);
        }
        return v;
      };
    }
    return EllipticField::variable(dim, a_fn, div_fn, lambda, diagonal);
  }
  fail(w + ".kind", "unknown elliptic kind '" + kind + "'");
}

DriftField parse_drift(const json& j, int dim) {
  const std::string w = "drift";
  const std::string kind = as_string(need(j, w, "kind"), w + ".kind");
  if (kind == "zero") {
    allow_keys(j, w, {"kind"});
    return DriftField::zero(dim);
  }
  if (kind == "constant") {
    allow_keys(j, w, {"kind", "vector"});
    return DriftField::constant(as_point(need(j, w, "vector"), w + ".vector", dim));
  }
  if (kind == "expr") {
    allow_keys(j, w, {"kind", "components", "bound"});
    const json& c = need(j, w, "components");
    if (!c.is_array() || static_cast<int>(c.size()) != dim) fail(w + ".components", "expected dim polynomials");
    std::vector<Polynomial> comps;
    for (int k = 0; k < dim; ++k) comps.push_back(as_polynomial(c[k], w + ".components[" + std::to_string(k) + "]", dim));
    std::optional<double> bound;
    if (j.contains("bound")) bound = as_number(j["bound"], w + ".bound");
    return DriftField::variable(
        dim,
        [comps, dim](const Point& x) {
          Point v(dim);
          for (int k = 0; k < dim; ++k) v[k] = comps[k](x);
          return v;
        },
        bound);
  }
  fail(w + ".kind", "unknown drift kind '" + kind + "'");
}

std::shared_ptr<const Domain> parse_domain(const json& j, int dim) {
  const std::string w = "domain";
  const std::string kind = as_string(need(j, w, "kind"), w + ".kind");
  if (kind == "ball") {
    allow_keys(j, w, {"kind", "center", "radius"});
    const double r = as_number(need(j, w, "radius"), w + ".radius");
    if (!(r > 0.0)) fail(w + ".radius", "must be > 0");
    return make_ball(as_point(need(j, w, "center"), w + ".center", dim), r);
  }
  if (kind == "box") {
    allow_keys(j, w, {"kind", "lo", "hi"});
    const Point lo = as_point(need(j, w, "lo"), w + ".lo", dim);
    const Point hi = as_point(need(j, w, "hi"), w + ".hi", dim);
    if (!((hi - lo).minCoeff() > 0.0)) fail(w, "need lo < hi on every axis");
    return make_box(lo, hi);
  }
  if (kind == "interval") {
    allow_keys(j, w, {"kind", "lo", "hi"});
    if (dim != 1) fail(w, "interval domains need dim = 1");
    const double lo = as_number(need(j, w, "lo"), w + ".lo");
    const double hi = as_number(need(j, w, "hi"), w + ".hi");
    if (!(hi > lo)) fail(w, "need lo < hi");
    return make_interval(lo, hi);
  }
  fail(w + ".kind", "unknown domain kind '" + kind + "'");
}

std::optional<JumpKernel> parse_jumps(const json& j, int dim) {
  const std::string w = "jumps";
  allow_keys(j, w, {"kappa", "nu"});
  JumpKernel k;
  k.kappa = parse_scalar(need(j, w, "kappa"), dim, w + ".kappa", false).field;
  if (j.contains("nu")) {
    const json& nu = j["nu"];
    allow_keys(nu, w + ".nu", {"atoms", "density"});
    std::vector<Atom> atoms;
    if (nu.contains("atoms")) {
      const json& a = nu["atoms"];
      if (!a.is_array()) fail(w + ".nu.atoms", "expected a list of [weight, [y...]]");
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string wi = w + ".nu.atoms[" + std::to_string(i) + "]";
        if (!a[i].is_array() || a[i].size() != 2) fail(wi, "expected [weight, [y...]]");
        atoms.push_back({as_number(a[i][0], wi + "[0]"), as_point(a[i][1], wi + "[1]", dim)});
      }
    }
    std::optional<UniformBoxDensity> density;
    if (nu.contains("density")) {
      const json& d = nu["density"];
      const std::string wd = w + ".nu.density";
      allow_keys(d, wd, {"weight", "lo", "hi", "nodes_per_axis"});
      UniformBoxDensity u;
      u.weight = as_number(need(d, wd, "weight"), wd + ".weight");
      u.support = Box{as_point(need(d, wd, "lo"), wd + ".lo", dim), as_point(need(d, wd, "hi"), wd + ".hi", dim)};
      if (d.contains("nodes_per_axis")) u.nodes_per_axis = static_cast<int>(as_count(d["nodes_per_axis"], wd + ".nodes_per_axis"));
      density = u;
    }
    try {
      k.nu = RedistributionLaw(std::move(atoms), density);
    } catch (const Error& e) {
      fail(w + ".nu", e.what());
    }
  }
  return k;
}

ExitRule parse_exit_rule(const std::string& s, const std::string& where) {
  if (s == "first_exterior_sample") return ExitRule::first_exterior_sample;
  if (s == "bridge_corrected") return ExitRule::bridge_corrected;
  fail(where, "unknown exit rule '" + s + "'");
}

HazardRule parse_hazard_rule(const std::string& s, const std::string& where) {
  if (s == "trapezoid") return HazardRule::trapezoid;
  if (s == "left_point") return HazardRule::left_point;
  fail(where, "unknown hazard rule '" + s + "'");
}

RunSection parse_run(const json& j, int dim) {
  const std::string w = "run";
  allow_keys(j, w,
             {"points", "probes", "f", "alpha", "alphas", "radii", "center", "horizon", "paths", "inner_paths", "h",
              "threshold", "seed", "dt", "dt_boundary_factor", "max_steps", "max_jumps", "exit_rule", "hazard_rule"});
  RunSection r;
  if (j.contains("points")) r.points = as_points(j["points"], w + ".points", dim);
  if (j.contains("probes")) r.probes = as_points(j["probes"], w + ".probes", dim);
  if (j.contains("f")) r.f = parse_scalar(j["f"], dim, w + ".f", true).field;
  if (j.contains("alpha")) r.alpha = as_number(j["alpha"], w + ".alpha");
  if (j.contains("alphas")) r.alphas = as_numbers(j["alphas"], w + ".alphas");
  if (j.contains("radii")) r.radii = as_numbers(j["radii"], w + ".radii");
  if (j.contains("center")) r.center = as_point(j["center"], w + ".center", dim);
  if (j.contains("horizon")) r.horizon = as_number(j["horizon"], w + ".horizon");
  if (j.contains("paths")) r.paths = as_count(j["paths"], w + ".paths");
  if (j.contains("inner_paths")) r.inner_paths = as_count(j["inner_paths"], w + ".inner_paths");
  if (j.contains("h")) r.h = as_number(j["h"], w + ".h");
  if (j.contains("threshold")) r.threshold = as_number(j["threshold"], w + ".threshold");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0)) {
      fail(w + ".seed", "expected a non-negative integer");
    }
    r.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("dt")) r.sim.dt_base = as_number(j["dt"], w + ".dt");
  if (j.contains("dt_boundary_factor")) r.sim.dt_boundary_factor = as_number(j["dt_boundary_factor"], w + ".dt_boundary_factor");
  if (j.contains("max_steps")) r.sim.max_steps = as_count(j["max_steps"], w + ".max_steps");
  if (j.contains("max_jumps")) r.sim.max_jumps = as_count(j["max_jumps"], w + ".max_jumps");
  if (j.contains("exit_rule")) r.sim.exit_rule = parse_exit_rule(as_string(j["exit_rule"], w + ".exit_rule"), w + ".exit_rule");
  if (j.contains("hazard_rule")) {
    r.sim.hazard_rule = parse_hazard_rule(as_string(j["hazard_rule"], w + ".hazard_rule"), w + ".hazard_rule");
  }
  try {
    r.sim.validate();
  } catch (const Error& e) {
    fail(w, e.what());
  }
  return r;
}

}  // namespace

ScalarField parse_scalar_field(const json& j, int dim, const std::string& where) {
  return parse_scalar(j, dim, where, true).field;
}

LoadedConfig parse_config(const std::string& text) {
  LoadedConfig out;
  out.text = text;
  try {
    out.json = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }
  const json& j = out.json;
  allow_keys(j, "config", {"dim", "elliptic", "drift", "jumps", "domain", "phi", "run"});
  const auto dim = as_count(need(j, "config", "dim"), "dim");
  if (dim < 1 || dim > kMaxDim) fail("dim", "must lie in [1, 3]");
  const int d = static_cast<int>(dim);

  try {
    ProblemSpec& s = out.spec;
    s.dim = d;
    s.elliptic = parse_elliptic(need(j, "config", "elliptic"), d);
    s.drift = j.contains("drift") ? parse_drift(j["drift"], d) : DriftField::zero(d);
    if (j.contains("jumps")) s.jumps = parse_jumps(j["jumps"], d);
    s.domain = parse_domain(need(j, "config", "domain"), d);

    const ParsedScalar phi = parse_scalar(need(j, "config", "phi"), d, "phi", true);
    s.boundary.phi = phi.field;
    if (auto sup = phi.field.sup_bound()) {
      s.boundary.sup_bound = *sup;
    } else {
      // Bound over twice the bounding box plus every jump target.
      Box region = s.domain->bounding_box();
      const Point extent = region.hi - region.lo;
      region.lo -= 0.5 * extent;
      region.hi += 0.5 * extent;
      if (s.jumps && s.jumps->nu) {
        for (const auto& a : s.jumps->nu->quadrature()) {
          region.lo = region.lo.cwiseMin(a.point);
          region.hi = region.hi.cwiseMax(a.point);
        }
      }
      if (!phi.poly) fail("phi", "give 'sup' for this kind");
      s.boundary.sup_bound = polynomial_bound(*phi.poly, region);
      s.boundary.phi = ScalarField::function([fn = phi.field](const Point& x) { return fn(x); }, s.boundary.sup_bound);
    }
    s.check_dims();
    out.run = j.contains("run") ? parse_run(j["run"], d) : RunSection{};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    throw Error(ErrorKind::config, e.what());
  }
  return out;
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<Point> parse_points(const std::string& text, int dim) {
  std::vector<Point> out;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::stringstream ps(item);
    std::string tok;
    std::vector<double> xs;
    while (std::getline(ps, tok, ',')) {
      try {
        std::size_t used = 0;
        xs.push_back(std::stod(tok, &used));
        if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorKind::config, "cannot parse point coordinate '" + tok + "'");
      }
    }
    if (static_cast<int>(xs.size()) != dim) {
      throw Error(ErrorKind::config, "point '" + item + "' does not have " + std::to_string(dim) + " coordinates");
    }
    Point p(dim);
    for (int k = 0; k < dim; ++k) p[k] = xs[k];
    out.push_back(p);
  }
  return out;
}

}  // namespace nldp
