#pragma once

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <fstream>
#include <numbers>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "aphom/ap/pore_distribution.hpp"
#include "aphom/fem/assembly.hpp"
#include "aphom/geometry/cell_geometry.hpp"
#include "aphom/homogenizer/cell_domain.hpp"
#include "aphom/harness/convergence.hpp"
#include "aphom/macro/macro_solver.hpp"

namespace aphom {

/// One separable load term  Re(space(x)) Re(time(t)) direction.
struct LoadTerm {
  Point direction;
  TrigPolynomial space{1};
  TrigPolynomial time = TrigPolynomial::constant(1, 1.0);
};

struct LoadSpec {
  std::vector<LoadTerm> terms;

  LoadField field(int dim) const {
    if (terms.empty()) return zero_load(dim);
    auto copy = terms;
    return [copy, dim](const Point& x, double t) {
      Vector out = Vector::Zero(dim);
      const double tt[1] = {t};
      for (const auto& term : copy) {
        const double s = term.space.real_value(x) * term.time.real_value(tt);
        for (int i = 0; i < dim; ++i) out(i) += s * term.direction[static_cast<std::size_t>(i)];
      }
      return out;
    };
  }
};

struct MeshSpec {
  int cell = 16;   // cell-problem mesh cells per lattice unit
  int fine = 8;    // fine mesh cells per eps-cell
  int macro = 32;  // macro mesh cells per unit length
};

struct SolverSpec {
  double spd_tolerance = 1e-11;
  double saddle_tolerance = 1e-10;
  double stabilization = 0.1;
  double macro_tolerance = 1e-12;
};

/// Everything one experiment needs.
struct SimConfig {
  std::string name = "unnamed";
  int dimension = 2;
  ShapeSpec geometry;
  PoreDistribution theta = PoreDistribution::all_ones(2);
  CellCoefficients coefficients;
  LoadSpec f, g;
  Point lengths{1.0, 1.0};
  double T = 1.0, dt = 0.05;
  std::vector<double> epsilons;
  MeshSpec mesh;
  SolverSpec solver;
  bool single_phase_validation = false;
  std::string output = "out";
  std::uint64_t seed = 1;
  int threads = 1;

  CellSolveOptions cell_options() const {
    CellSolveOptions o;
    o.spd_tolerance = solver.spd_tolerance;
    o.saddle_tolerance = solver.saddle_tolerance;
    o.stabilization = solver.stabilization;
    o.single_phase_validation = single_phase_validation;
    o.threads = threads;
    return o;
  }
};

namespace config_detail {

inline int line_of(const YAML::Node& n) { return n.IsDefined() && n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

inline double parse_real(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) throw ConfigError(field, "expected a number", line_of(n));
  const std::string s = n.Scalar();
  // plain number, or a multiple of pi such as "2*pi", "-pi", "pi/2"
  static const std::regex pi_form(R"(^\s*([+-]?(?:\d+\.?\d*(?:[eE][+-]?\d+)?)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$)");
  std::smatch m;
  if (std::regex_match(s, m, pi_form)) {
    double a = 1.0;
    const std::string coef = m[1].str();
    if (coef == "-") a = -1.0;
    else if (!coef.empty() && coef != "+") a = std::stod(coef);
    double v = a * std::numbers::pi;
    if (m[2].matched) v /= std::stod(m[2].str());
    return v;
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "'" + s + "' is not a number", line_of(n));
  }
}

inline long parse_int(const YAML::Node& n, const std::string& field) {
  const double v = parse_real(n, field);
  if (v != std::floor(v)) throw ConfigError(field, "expected an integer", line_of(n));
  return static_cast<long>(v);
}

inline Point parse_point(const YAML::Node& n, const std::string& field, int dim) {
  if (!n.IsSequence()) throw ConfigError(field, "expected a list of " + std::to_string(dim) + " numbers", line_of(n));
  if (static_cast<int>(n.size()) != dim)
    throw ConfigError(field, "expected " + std::to_string(dim) + " entries, got " + std::to_string(n.size()),
                      line_of(n));
  Point p;
  for (std::size_t i = 0; i < n.size(); ++i) p.push_back(parse_real(n[i], field + "[" + std::to_string(i) + "]"));
  return p;
}

inline Complex parse_complex(const YAML::Node& n, const std::string& field) {
  if (n.IsSequence()) {
    if (n.size() != 2) throw ConfigError(field, "complex amplitude must be [re, im]", line_of(n));
    return {parse_real(n[0], field + ".re"), parse_real(n[1], field + ".im")};
  }
  return parse_real(n, field);
}

inline TrigPolynomial parse_poly(const YAML::Node& n, const std::string& field, int dim) {
  if (!n.IsDefined() || n.IsNull()) throw ConfigError(field, "missing polynomial", line_of(n));
  if (n.IsScalar()) return TrigPolynomial::constant(dim, parse_real(n, field));
  if (n.IsMap()) {
    if (!n["factors"]) throw ConfigError(field, "expected a term list or 'factors'", line_of(n));
    const YAML::Node fs = n["factors"];
    if (!fs.IsSequence() || fs.size() == 0) throw ConfigError(field + ".factors", "expected a non-empty list", line_of(fs));
    TrigPolynomial p = parse_poly(fs[0], field + ".factors[0]", dim);
    for (std::size_t i = 1; i < fs.size(); ++i) p = p * parse_poly(fs[i], field + ".factors[" + std::to_string(i) + "]", dim);
    return p;
  }
  TrigPolynomial p(dim);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const YAML::Node t = n[i];
    const std::string tf = field + "[" + std::to_string(i) + "]";
    if (!t.IsMap()) throw ConfigError(tf, "expected a term map", line_of(t));
    if (t["constant"]) {
      p += TrigPolynomial::constant(dim, parse_complex(t["constant"], tf + ".constant"));
      continue;
    }
    const double amp_real = t["amplitude"] && !t["amplitude"].IsSequence() ? parse_real(t["amplitude"], tf + ".amplitude") : 1.0;
    if (t["cos"]) {
      p += TrigPolynomial::cosine(parse_point(t["cos"], tf + ".cos", dim), amp_real);
    } else if (t["sin"]) {
      p += TrigPolynomial::sine(parse_point(t["sin"], tf + ".sin", dim), amp_real);
    } else if (t["frequency"]) {
      if (!t["amplitude"]) throw ConfigError(tf + ".amplitude", "missing amplitude", line_of(t));
      p.add_term(parse_point(t["frequency"], tf + ".frequency", dim), parse_complex(t["amplitude"], tf + ".amplitude"));
    } else {
      throw ConfigError(tf, "a term needs one of frequency, cos, sin or constant", line_of(t));
    }
  }
  return p;
}

inline Matrix parse_matrix(const YAML::Node& n, const std::string& field, int dim) {
  if (n.IsScalar()) return parse_real(n, field) * Matrix::Identity(dim, dim);
  if (!n.IsSequence() || static_cast<int>(n.size()) != dim)
    throw ConfigError(field, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix", line_of(n));
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const Point row = parse_point(n[r], field + "[" + std::to_string(r) + "]", dim);
    for (int c = 0; c < dim; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

inline MatrixField parse_matrix_field(const YAML::Node& n, const std::string& field, int dim) {
  if (!n.IsDefined() || n.IsNull()) throw ConfigError(field, "missing coefficient", line_of(n));
  if (n.IsScalar()) return MatrixField::scalar(dim, parse_real(n, field));
  if (!n.IsSequence()) throw ConfigError(field, "expected a number or a list of terms", line_of(n));
  MatrixField out(dim);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const YAML::Node t = n[i];
    const std::string tf = field + "[" + std::to_string(i) + "]";
    if (!t.IsMap() || !t["matrix"]) throw ConfigError(tf, "expected a map with 'matrix'", line_of(t));
    const Matrix m = parse_matrix(t["matrix"], tf + ".matrix", dim);
    const TrigPolynomial prof =
        t["profile"] ? parse_poly(t["profile"], tf + ".profile", dim) : TrigPolynomial::constant(dim, 1.0);
    out.add(prof, m);
  }
  return out;
}

inline MemoryKernel parse_kernel(const YAML::Node& n, const std::string& field, int dim) {
  if (!n.IsDefined() || n.IsNull()) return MemoryKernel::zero(dim);
  if (!n.IsMap()) throw ConfigError(field, "expected a map with spatial, temporal, samples", line_of(n));
  const int samples = n["samples"] ? static_cast<int>(parse_int(n["samples"], field + ".samples")) : 16;
  if (samples < 2) throw ConfigError(field + ".samples", "at least two samples are required", line_of(n["samples"]));
  return MemoryKernel::from_profile(parse_matrix_field(n["spatial"], field + ".spatial", dim),
                                    parse_poly(n["temporal"], field + ".temporal", 1), samples);
}

inline LoadSpec parse_load(const YAML::Node& n, const std::string& field, int dim) {
  LoadSpec s;
  if (!n.IsDefined() || n.IsNull()) return s;
  if (!n.IsSequence()) throw ConfigError(field, "expected a list of load terms", line_of(n));
  for (std::size_t i = 0; i < n.size(); ++i) {
    const YAML::Node t = n[i];
    const std::string tf = field + "[" + std::to_string(i) + "]";
    if (!t.IsMap()) throw ConfigError(tf, "expected a map", line_of(t));
    LoadTerm term;
    term.direction = parse_point(t["direction"], tf + ".direction", dim);
    term.space = parse_poly(t["space"], tf + ".space", dim);
    if (t["time"]) term.time = parse_poly(t["time"], tf + ".time", 1);
    s.terms.push_back(std::move(term));
  }
  return s;
}

inline PoreDistribution parse_theta(const YAML::Node& n, const std::string& field, int dim) {
  if (!n.IsDefined() || n.IsNull()) return PoreDistribution::all_ones(dim);
  if (!n.IsMap() || !n["window"]) throw ConfigError(field, "expected a map with 'window'", line_of(n));
  std::vector<long> shape;
  std::vector<std::uint8_t> values;
  // nested lists, outermost index = axis 0
  std::function<void(const YAML::Node&, int, const std::string&)> walk = [&](const YAML::Node& a, int depth,
                                                                                const std::string& f) {
    if (!a.IsSequence() || a.size() == 0) throw ConfigError(f, "expected a non-empty nested list", line_of(a));
    if (static_cast<int>(shape.size()) == depth) shape.push_back(static_cast<long>(a.size()));
    else if (shape[static_cast<std::size_t>(depth)] != static_cast<long>(a.size()))
      throw ConfigError(f, "ragged window", line_of(a));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string fi = f + "[" + std::to_string(i) + "]";
      if (depth + 1 < dim) {
        walk(a[i], depth + 1, fi);
      } else {
        const long v = parse_int(a[i], fi);
        if (v != 0 && v != 1) throw ConfigError(fi, "values must be 0 or 1", line_of(a[i]));
        values.push_back(static_cast<std::uint8_t>(v));
      }
    }
  };
  walk(n["window"], 0, field + ".window");
  std::optional<std::vector<long>> period;
  if (n["period"]) {
    const Point p = parse_point(n["period"], field + ".period", dim);
    period = std::vector<long>();
    for (double v : p) period->push_back(std::lround(v));
  }
  try {
    return PoreDistribution(shape, values, period);
  } catch (const Error& e) {
    throw ConfigError(field, e.what(), line_of(n));
  }
}

inline ShapeSpec parse_geometry(const YAML::Node& n, const std::string& field, int dim) {
  if (!n.IsMap() || !n["shape"]) throw ConfigError(field, "expected a map with 'shape'", line_of(n));
  const std::string shape = n["shape"].Scalar();
  ShapeSpec s;
  if (shape == "disk") {
    if (!n["radius"]) throw ConfigError(field + ".radius", "missing", line_of(n));
    s = disk_spec(dim, parse_real(n["radius"], field + ".radius"));
    if (n["center"]) s.center = parse_point(n["center"], field + ".center", dim);
  } else if (shape == "box") {
    s = box_spec(parse_point(n["corner"], field + ".corner", dim), parse_point(n["sides"], field + ".sides", dim));
  } else if (shape == "laminate") {
    s = laminate_spec(dim, n["axis"] ? static_cast<int>(parse_int(n["axis"], field + ".axis")) : 0,
                      n["thickness"] ? parse_real(n["thickness"], field + ".thickness") : 0.5);
  } else {
    throw ConfigError(field + ".shape", "unknown shape '" + shape + "' (disk, box or laminate)", line_of(n["shape"]));
  }
  try {
    build_cell(s);
  } catch (const Error& e) {
    throw ConfigError(field, e.what(), line_of(n));
  }
  return s;
}

// coercivity and positivity of sampled coefficients
inline void check_field(const MatrixField& m, const std::string& field, int line, int dim) {
  const int per = dim == 1 ? 64 : (dim == 2 ? 16 : 6);
  long total = 1;
  for (int i = 0; i < dim; ++i) total *= per;
  Point y(static_cast<std::size_t>(dim));
  for (long n = 0; n < total; ++n) {
    long r = n;
    for (int i = 0; i < dim; ++i) {
      y[static_cast<std::size_t>(i)] = (static_cast<double>(r % per) + 0.5) / per;
      r /= per;
    }
    try {
      std::string at = "sample at y = (";
      for (int i = 0; i < dim; ++i) at += (i ? ", " : "") + std::to_string(y[static_cast<std::size_t>(i)]);
      check_coercive(m(y), at + ")");
    } catch (const CoercivityViolation& e) {
      throw ConfigError(field, e.what(), line);
    }
  }
}

inline void check_positive(const ScalarProfile& p, const std::string& field, int line, int dim) {
  const double bound = p.profile.amplitude_sum();
  const double mean = mean_value(p.profile).real();
  if (!(mean > 0.0) || !(2.0 * mean > bound)) {
    // fall back to sampling when the crude bound is inconclusive
    const int per = 16;
    long total = 1;
    for (int i = 0; i < dim; ++i) total *= per;
    Point y(static_cast<std::size_t>(dim));
    for (long n = 0; n < total; ++n) {
      long r = n;
      for (int i = 0; i < dim; ++i) {
        y[static_cast<std::size_t>(i)] = (static_cast<double>(r % per) + 0.5) / per;
        r /= per;
      }
      if (!(p(y) > 0.0)) throw ConfigError(field, "density must be positive", line);
    }
  }
}

// ---- emission ----

inline void emit_real(YAML::Emitter& e, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  e << YAML::Value << std::string(buf);
}

inline void emit_reals(YAML::Emitter& e, const Point& p) {
  e << YAML::Flow << YAML::BeginSeq;
  for (double v : p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    e << std::string(buf);
  }
  e << YAML::EndSeq;
}

inline void emit_poly(YAML::Emitter& e, const TrigPolynomial& p) {
  e << YAML::BeginSeq;
  for (const auto& t : p.terms()) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "frequency" << YAML::Value;
    emit_reals(e, t.frequency);
    e << YAML::Key << "amplitude" << YAML::Value;
    emit_reals(e, {t.amplitude.real(), t.amplitude.imag()});
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
}

}  // namespace config_detail

/// Parse a YAML configuration; every problem is a ConfigError naming the field and line.
/// `check_assumptions` adds the ellipticity and positivity checks on the coefficients.
inline SimConfig parse_config(const std::string& text, bool check_assumptions = true) {
  using namespace config_detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  if (!root.IsMap()) throw ConfigError("<document>", "expected a top-level map", line_of(root));

  static const char* known[] = {"name",     "dimension", "geometry", "theta",  "coefficients", "loads",
                                "lengths",  "time",      "epsilons", "mesh",   "solver",       "validation",
                                "output",   "seed",      "threads"};
  for (const auto& kv : root) {
    const std::string key = kv.first.Scalar();
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(key, "unknown key", line_of(kv.first));
  }

  SimConfig c;
  if (root["name"]) c.name = root["name"].Scalar();
  if (!root["dimension"]) throw ConfigError("dimension", "missing", 1);
  c.dimension = static_cast<int>(parse_int(root["dimension"], "dimension"));
  if (c.dimension < 1 || c.dimension > 3) throw ConfigError("dimension", "must be 1, 2 or 3", line_of(root["dimension"]));
  const int dim = c.dimension;

  if (!root["geometry"]) throw ConfigError("geometry", "missing", 1);
  c.geometry = parse_geometry(root["geometry"], "geometry", dim);
  c.theta = parse_theta(root["theta"], "theta", dim);
  c.single_phase_validation = root["validation"] && root["validation"].as<bool>();

  const YAML::Node co = root["coefficients"];
  if (!co || !co.IsMap()) throw ConfigError("coefficients", "missing or not a map", line_of(co));
  auto& cc = c.coefficients;
  cc.A0 = parse_matrix_field(co["A0"], "coefficients.A0", dim);
  cc.B0 = parse_matrix_field(co["B0"], "coefficients.B0", dim);
  cc.A1 = parse_kernel(co["A1"], "coefficients.A1", dim);
  cc.B1 = parse_kernel(co["B1"], "coefficients.B1", dim);
  if (co["A0_phase2"]) cc.A0_phase2 = parse_matrix_field(co["A0_phase2"], "coefficients.A0_phase2", dim);
  cc.rho1 = {co["rho1"] ? parse_poly(co["rho1"], "coefficients.rho1", dim) : TrigPolynomial::constant(dim, 1.0)};
  cc.rho2 = {co["rho2"] ? parse_poly(co["rho2"], "coefficients.rho2", dim) : TrigPolynomial::constant(dim, 1.0)};
  if (check_assumptions) {
    check_field(cc.A0, "coefficients.A0", line_of(co["A0"]), dim);
    check_field(cc.B0, "coefficients.B0", line_of(co["B0"]), dim);
    if (cc.A0_phase2) check_field(*cc.A0_phase2, "coefficients.A0_phase2", line_of(co["A0_phase2"]), dim);
    check_positive(cc.rho1, "coefficients.rho1", line_of(co["rho1"]), dim);
    check_positive(cc.rho2, "coefficients.rho2", line_of(co["rho2"]), dim);
  }

  if (const YAML::Node l = root["loads"]) {
    c.f = parse_load(l["f"], "loads.f", dim);
    c.g = parse_load(l["g"], "loads.g", dim);
  }
  c.lengths = root["lengths"] ? parse_point(root["lengths"], "lengths", dim) : Point(static_cast<std::size_t>(dim), 1.0);
  for (double v : c.lengths)
    if (!(v > 0)) throw ConfigError("lengths", "must be positive", line_of(root["lengths"]));

  if (const YAML::Node t = root["time"]) {
    if (t["T"]) c.T = parse_real(t["T"], "time.T");
    if (t["dt"]) c.dt = parse_real(t["dt"], "time.dt");
    if (!(c.T > 0) || !(c.dt > 0)) throw ConfigError("time", "T and dt must be positive", line_of(t));
    const double steps = c.T / c.dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
      throw ConfigError("time.dt", "T must be an integer multiple of dt", line_of(t["dt"]));
  }

  if (const YAML::Node e = root["epsilons"]) {
    if (!e.IsSequence()) throw ConfigError("epsilons", "expected a list", line_of(e));
    for (std::size_t i = 0; i < e.size(); ++i) c.epsilons.push_back(parse_real(e[i], "epsilons[" + std::to_string(i) + "]"));
    try {
      if (!c.epsilons.empty()) validate_epsilons(c.epsilons);
    } catch (const ConfigError& err) {
      throw ConfigError("epsilons", err.what(), line_of(e));
    }
    const std::vector<long> period = c.theta.declared_period() ? *c.theta.declared_period() : detect_period(c.theta);
    for (std::size_t k = 0; k < c.epsilons.size(); ++k)
      for (int i = 0; i < dim; ++i) {
        const double cells = c.lengths[static_cast<std::size_t>(i)] / c.epsilons[k];
        const long m = std::lround(cells);
        if (std::abs(cells - static_cast<double>(m)) > 1e-9 * cells || m % period[static_cast<std::size_t>(i)] != 0)
          throw ConfigError("epsilons[" + std::to_string(k) + "]",
                            "the domain is not tiled by whole theta periods", line_of(e[k]));
      }
  }

  if (const YAML::Node m = root["mesh"]) {
    if (m["cell"]) c.mesh.cell = static_cast<int>(parse_int(m["cell"], "mesh.cell"));
    if (m["fine"]) c.mesh.fine = static_cast<int>(parse_int(m["fine"], "mesh.fine"));
    if (m["macro"]) c.mesh.macro = static_cast<int>(parse_int(m["macro"], "mesh.macro"));
    if (c.mesh.cell < 1 || c.mesh.fine < 1 || c.mesh.macro < 1)
      throw ConfigError("mesh", "resolutions must be positive", line_of(m));
  }
  if (const YAML::Node s = root["solver"]) {
    if (s["spd_tolerance"]) c.solver.spd_tolerance = parse_real(s["spd_tolerance"], "solver.spd_tolerance");
    if (s["saddle_tolerance"]) c.solver.saddle_tolerance = parse_real(s["saddle_tolerance"], "solver.saddle_tolerance");
    if (s["stabilization"]) c.solver.stabilization = parse_real(s["stabilization"], "solver.stabilization");
    if (s["macro_tolerance"]) c.solver.macro_tolerance = parse_real(s["macro_tolerance"], "solver.macro_tolerance");
  }
  if (root["output"]) c.output = root["output"].Scalar();
  if (root["seed"]) c.seed = static_cast<std::uint64_t>(parse_int(root["seed"], "seed"));
  if (root["threads"]) {
    c.threads = static_cast<int>(parse_int(root["threads"], "threads"));
    if (c.threads < 1) throw ConfigError("threads", "must be at least 1", line_of(root["threads"]));
  }
  return c;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Canonical YAML: explicit frequency/amplitude pairs, all reals printed with 17 digits.
inline std::string serialize_config(const SimConfig& c) {
  using namespace config_detail;
  const int dim = c.dimension;
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.name;
  e << YAML::Key << "dimension" << YAML::Value << dim;

  e << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
  const ShapeSpec& s = c.geometry;
  e << YAML::Key << "shape" << YAML::Value << to_string(s.shape);
  switch (s.shape) {
    case InclusionShape::Disk:
      e << YAML::Key << "radius";
      emit_real(e, s.radius);
      e << YAML::Key << "center" << YAML::Value;
      emit_reals(e, s.center);
      break;
    case InclusionShape::AxisBox:
      e << YAML::Key << "corner" << YAML::Value;
      emit_reals(e, s.corner);
      e << YAML::Key << "sides" << YAML::Value;
      emit_reals(e, s.sides);
      break;
    case InclusionShape::Laminate:
      e << YAML::Key << "axis" << YAML::Value << s.axis;
      e << YAML::Key << "thickness";
      emit_real(e, s.thickness);
      break;
  }
  e << YAML::EndMap;

  e << YAML::Key << "theta" << YAML::Value << YAML::BeginMap << YAML::Key << "window" << YAML::Value;
  {
    const auto& shape = c.theta.shape();
    const auto& vals = c.theta.values();
    std::size_t pos = 0;
    std::function<void(int)> rec = [&](int depth) {
      e << YAML::Flow << YAML::BeginSeq;
      for (long i = 0; i < shape[static_cast<std::size_t>(depth)]; ++i) {
        if (depth + 1 < static_cast<int>(shape.size())) rec(depth + 1);
        else e << static_cast<int>(vals[pos++]);
      }
      e << YAML::EndSeq;
    };
    rec(0);
  }
  if (c.theta.declared_period()) {
    e << YAML::Key << "period" << YAML::Value << YAML::Flow << *c.theta.declared_period();
  }
  e << YAML::EndMap;

  e << YAML::Key << "validation" << YAML::Value << c.single_phase_validation;

  auto emit_field = [&](const MatrixField& m) {
    e << YAML::BeginSeq;
    for (const auto& t : m.terms()) {
      e << YAML::BeginMap << YAML::Key << "matrix" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (Index r = 0; r < t.value.rows(); ++r) {
        Point row;
        for (Index col = 0; col < t.value.cols(); ++col) row.push_back(t.value(r, col));
        emit_reals(e, row);
      }
      e << YAML::EndSeq << YAML::Key << "profile" << YAML::Value;
      emit_poly(e, t.profile);
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  };
  auto emit_kernel = [&](const MemoryKernel& k) {
    e << YAML::BeginMap << YAML::Key << "spatial" << YAML::Value;
    emit_field(k.spatial);
    e << YAML::Key << "temporal" << YAML::Value;
    emit_poly(e, k.temporal_profile);
    e << YAML::Key << "samples" << YAML::Value << k.samples() << YAML::EndMap;
  };
  const auto& cc = c.coefficients;
  e << YAML::Key << "coefficients" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "A0" << YAML::Value;
  emit_field(cc.A0);
  if (cc.A0_phase2) {
    e << YAML::Key << "A0_phase2" << YAML::Value;
    emit_field(*cc.A0_phase2);
  }
  e << YAML::Key << "B0" << YAML::Value;
  emit_field(cc.B0);
  if (!cc.A1.is_zero()) {
    e << YAML::Key << "A1" << YAML::Value;
    emit_kernel(cc.A1);
  }
  if (!cc.B1.is_zero()) {
    e << YAML::Key << "B1" << YAML::Value;
    emit_kernel(cc.B1);
  }
  e << YAML::Key << "rho1" << YAML::Value;
  emit_poly(e, cc.rho1.profile);
  e << YAML::Key << "rho2" << YAML::Value;
  emit_poly(e, cc.rho2.profile);
  e << YAML::EndMap;

  auto emit_load = [&](const LoadSpec& l) {
    e << YAML::BeginSeq;
    for (const auto& t : l.terms) {
      e << YAML::BeginMap << YAML::Key << "direction" << YAML::Value;
      emit_reals(e, t.direction);
      e << YAML::Key << "space" << YAML::Value;
      emit_poly(e, t.space);
      e << YAML::Key << "time" << YAML::Value;
      emit_poly(e, t.time);
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  };
  e << YAML::Key << "loads" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "f" << YAML::Value;
  emit_load(c.f);
  e << YAML::Key << "g" << YAML::Value;
  emit_load(c.g);
  e << YAML::EndMap;

  e << YAML::Key << "lengths" << YAML::Value;
  emit_reals(e, c.lengths);
  e << YAML::Key << "time" << YAML::Value << YAML::BeginMap << YAML::Key << "T";
  emit_real(e, c.T);
  e << YAML::Key << "dt";
  emit_real(e, c.dt);
  e << YAML::EndMap;
  e << YAML::Key << "epsilons" << YAML::Value;
  emit_reals(e, c.epsilons);
  e << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap << YAML::Key << "cell" << YAML::Value << c.mesh.cell
    << YAML::Key << "fine" << YAML::Value << c.mesh.fine << YAML::Key << "macro" << YAML::Value << c.mesh.macro
    << YAML::EndMap;
  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "spd_tolerance";
  emit_real(e, c.solver.spd_tolerance);
  e << YAML::Key << "saddle_tolerance";
  emit_real(e, c.solver.saddle_tolerance);
  e << YAML::Key << "stabilization";
  emit_real(e, c.solver.stabilization);
  e << YAML::Key << "macro_tolerance";
  emit_real(e, c.solver.macro_tolerance);
  e << YAML::EndMap;
  e << YAML::Key << "output" << YAML::Value << c.output;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "threads" << YAML::Value << c.threads;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

/// The canonical form of a configuration text.
inline std::string normalize_config(const std::string& text) { return serialize_config(parse_config(text)); }

}  // namespace aphom
