#pragma once

// JSON for measures, spectra, test functions, certificates, estimates and
// catalog reports. Malformed input throws InvalidArgument.
//
// Measures
//   {"kind":"atomic","atoms":[[[x...],w],...]}        (1-D: [x,w] also read)
//   {"kind":"density","box":[[lo,hi],...],"pieces":[{"box":[[lo,hi],...],"value":v},...]}
//   {"kind":"density","breakpoints":[b0,...,bn],"values":[v1,...,vn]}   (1-D)
//   {"kind":"ifs","R":[[...]],"digits":[[...]],"weights":[...]}
//   {"kind":"convolution","left":M,"right":M}
//   {"kind":"sum","terms":[M,...]}
//   {"kind":"lebesgue","box":...}, {"kind":"uniform","box":...}
//   {"kind":"spectrum","spectrum":S,"level":L[,"weight":w]}
// Densities may carry "quadrature":{"panels_per_unit":n,"nodes":k}.
// A density without pieces is written as cell averages on a grid of
// "cells_per_unit" cells per unit length.

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "framelab/catalog.hpp"

namespace framelab {

using Json = nlohmann::json;

namespace detail {

inline const Json& field(const Json& j, const char* key) {
  require(j.is_object() && j.contains(key), "missing field '", key, "'");
  return j.at(key);
}

inline double number(const Json& j, const char* what) {
  if (j.is_string() && (j == "inf" || j == "Infinity")) return kInf;
  require(j.is_number(), what, " must be a number");
  return j.get<double>();
}

inline Point read_point(const Json& j) {
  if (j.is_number()) return {j.get<double>()};
  require(j.is_array() && !j.empty(), "a point must be a non-empty array of numbers");
  Point x;
  for (const auto& v : j) x.push_back(number(v, "coordinate"));
  return x;
}

inline Json write_point(PointView x) { return Json(std::vector<double>(x.begin(), x.end())); }

inline Box read_box(const Json& j) {
  require(j.is_array() && !j.empty(), "a box must be an array of [lo, hi] pairs");
  Box b;
  for (const auto& iv : j) {
    require(iv.is_array() && iv.size() == 2, "a box axis must be [lo, hi]");
    b.push_back({number(iv[0], "lo"), number(iv[1], "hi")});
  }
  validate_box(b);
  return b;
}

inline Json write_box(const Box& b) {
  Json j = Json::array();
  for (const auto& iv : b) j.push_back({iv.lo, iv.hi});
  return j;
}

inline Complex read_complex(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  require(j.is_array() && j.size() == 2, "a complex number must be [re, im]");
  return {number(j[0], "re"), number(j[1], "im")};
}

inline Json write_complex(Complex c) { return {c.real(), c.imag()}; }

inline Json write_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

inline QuadratureSpec read_quadrature(const Json& j) {
  QuadratureSpec q;
  if (!j.contains("quadrature")) return q;
  const Json& s = j.at("quadrature");
  q.panels_per_unit = s.value("panels_per_unit", q.panels_per_unit);
  q.nodes = s.value("nodes", q.nodes);
  require(q.panels_per_unit >= 1 && q.nodes >= 1, "quadrature needs panels_per_unit >= 1 and nodes >= 1");
  return q;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spectra

inline SpectrumSet spectrum_from_json(const Json& j) {
  const std::string kind = detail::field(j, "kind").get<std::string>();
  auto points = [](const Json& arr) {
    require(arr.is_array(), "expected an array of points");
    std::vector<Point> out;
    for (const auto& x : arr) out.push_back(detail::read_point(x));
    return out;
  };
  if (kind == "lattice") return SpectrumSet::lattice(j.value("dim", std::size_t{1}), j.value("step", 1.0));
  if (kind == "shifted_union")
    return SpectrumSet::shifted_union(spectrum_from_json(detail::field(j, "base")), points(detail::field(j, "shifts")));
  if (kind == "digits")
    return SpectrumSet::digit_set(detail::number(detail::field(j, "base"), "base"), points(detail::field(j, "digits")),
                                  j.value("max_level", -1));
  if (kind == "explicit") return SpectrumSet::explicit_set(points(detail::field(j, "points")));
  if (kind == "perturbed")
    return perturb(spectrum_from_json(detail::field(j, "base")), detail::number(detail::field(j, "C"), "C"),
                   detail::field(j, "seed").get<std::uint64_t>());
  throw InvalidArgument("unknown spectrum kind '" + kind + "'");
}

/// preview_level >= 0 adds the truncated points (and offsets for perturbed sets).
inline Json to_json(const SpectrumSet& s, int preview_level = -1) {
  Json j;
  auto points = [](const std::vector<Point>& pts) {
    Json a = Json::array();
    for (const auto& x : pts) a.push_back(detail::write_point(x));
    return a;
  };
  switch (s.kind()) {
    case SpectrumSet::Kind::Lattice:
      j = {{"kind", "lattice"}, {"dim", s.dim()}, {"step", s.step()}};
      break;
    case SpectrumSet::Kind::ShiftedUnion:
      j = {{"kind", "shifted_union"}, {"base", to_json(*s.base())}, {"shifts", points(s.points())}};
      break;
    case SpectrumSet::Kind::DigitSet:
      j = {{"kind", "digits"}, {"base", s.step()}, {"digits", points(s.points())}, {"max_level", s.max_level()}};
      break;
    case SpectrumSet::Kind::Explicit:
      j = {{"kind", "explicit"}, {"points", points(s.points())}};
      break;
    case SpectrumSet::Kind::Perturbed:
      j = {{"kind", "perturbed"}, {"base", to_json(*s.base())}, {"C", s.radius()}, {"seed", s.seed()}};
      break;
  }
  if (preview_level >= 0) {
    const auto pts = s.truncate(preview_level);
    j["preview"] = {{"level", preview_level}, {"points", points(pts)}};
    if (s.kind() == SpectrumSet::Kind::Perturbed) {
      std::vector<Point> offs;
      for (std::size_t n = 0; n < pts.size(); ++n) offs.push_back(s.offset(n));
      j["preview"]["offsets"] = points(offs);
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Measures

inline Measure measure_from_json(const Json& j) {
  const std::string kind = detail::field(j, "kind").get<std::string>();
  if (kind == "atomic") {
    const Json& arr = detail::field(j, "atoms");
    require(arr.is_array() && !arr.empty(), "atoms must be a non-empty array");
    std::vector<Atom> atoms;
    for (const auto& a : arr) {
      require(a.is_array() && a.size() == 2, "an atom must be [[x...], w]");
      atoms.push_back({detail::read_point(a[0]), detail::number(a[1], "atom weight")});
    }
    return Measure::atomic(std::move(atoms));
  }
  if (kind == "density") {
    const QuadratureSpec quad = detail::read_quadrature(j);
    if (j.contains("breakpoints")) {
      const auto b = j.at("breakpoints").get<std::vector<double>>();
      const auto v = detail::field(j, "values").get<std::vector<double>>();
      require(b.size() >= 2 && v.size() + 1 == b.size(), "need n + 1 breakpoints for n values");
      std::vector<DensityPiece> pieces;
      for (std::size_t i = 0; i < v.size(); ++i) {
        require(b[i] < b[i + 1], "breakpoints must increase");
        if (v[i] != 0.0) pieces.push_back({{{b[i], b[i + 1]}}, v[i]});
      }
      return Measure::piecewise_constant({{b.front(), b.back()}}, std::move(pieces), quad);
    }
    const Box box = detail::read_box(detail::field(j, "box"));
    const Json& arr = detail::field(j, "pieces");
    require(arr.is_array(), "pieces must be an array");
    std::vector<DensityPiece> pieces;
    for (const auto& p : arr) pieces.push_back({detail::read_box(detail::field(p, "box")), detail::number(detail::field(p, "value"), "value")});
    return Measure::piecewise_constant(box, std::move(pieces), quad);
  }
  if (kind == "ifs") {
    const auto R = detail::field(j, "R").get<IntMatrix>();
    const auto digits = detail::field(j, "digits").get<std::vector<IntPoint>>();
    std::vector<double> weights;
    if (j.contains("weights")) weights = j.at("weights").get<std::vector<double>>();
    else weights.assign(digits.size(), 1.0 / static_cast<double>(digits.size()));
    return Measure::self_similar(R, digits, weights);
  }
  if (kind == "convolution")
    return convolve(measure_from_json(detail::field(j, "left")), measure_from_json(detail::field(j, "right")));
  if (kind == "sum") {
    std::vector<Measure> terms;
    for (const auto& t : detail::field(j, "terms")) terms.push_back(measure_from_json(t));
    return Measure::sum(std::move(terms));
  }
  if (kind == "lebesgue") return Measure::lebesgue(detail::read_box(detail::field(j, "box")), detail::read_quadrature(j));
  if (kind == "uniform") return Measure::uniform(detail::read_box(detail::field(j, "box")), detail::read_quadrature(j));
  if (kind == "spectrum") {
    const SpectrumSet s = spectrum_from_json(detail::field(j, "spectrum"));
    const int level = detail::field(j, "level").get<int>();
    const std::size_t n = s.truncate(level).size();
    const std::vector<double> w(n, j.value("weight", 1.0));
    return as_atomic_measure(s, level, &w);
  }
  throw InvalidArgument("unknown measure kind '" + kind + "'");
}

inline Json to_json(const Measure& m, int cells_per_unit = 16) {
  if (const auto* a = m.as_atomic()) {
    Json atoms = Json::array();
    for (const auto& atom : a->atoms) atoms.push_back({detail::write_point(atom.x), atom.w});
    return {{"kind", "atomic"}, {"atoms", atoms}};
  }
  if (const auto* d = m.as_density()) {
    Json j = {{"kind", "density"}, {"box", detail::write_box(d->box)}};
    Json pieces = Json::array();
    if (d->piecewise_constant()) {
      for (const auto& p : d->pieces) pieces.push_back({{"box", detail::write_box(p.box)}, {"value", p.value}});
    } else {
      // Cell averages on a regular grid over the box.
      const std::size_t dim = d->box.size();
      std::vector<std::size_t> counts(dim);
      std::size_t total = 1;
      for (std::size_t i = 0; i < dim; ++i) {
        const double len = d->box[i].length();
        counts[i] = d->box[i].degenerate() ? 1 : std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len * cells_per_unit - 1e-9)));
        total *= counts[i];
      }
      for (std::size_t n = 0; n < total; ++n) {
        Box cell(dim);
        std::size_t r = n;
        for (std::size_t i = dim; i-- > 0;) {
          const std::size_t k = r % counts[i];
          r /= counts[i];
          const Interval& iv = d->box[i];
          const double w = iv.length() / static_cast<double>(counts[i]);
          cell[i] = iv.degenerate() ? iv : Interval{iv.lo + w * k, k + 1 == counts[i] ? iv.hi : iv.lo + w * (k + 1)};
        }
        const double vol = box_volume(cell);
        const double v = detail::density_box_mass(*d, cell) / vol;
        if (v != 0.0) pieces.push_back({{"box", detail::write_box(cell)}, {"value", v}});
      }
      j["cells_per_unit"] = cells_per_unit;
    }
    j["pieces"] = pieces;
    if (!(d->quadrature == QuadratureSpec{}))
      j["quadrature"] = {{"panels_per_unit", d->quadrature.panels_per_unit}, {"nodes", d->quadrature.nodes}};
    return j;
  }
  if (const auto* s = m.as_self_similar())
    return {{"kind", "ifs"}, {"R", s->R}, {"digits", s->digits}, {"weights", s->weights}};
  if (const auto* c = m.as_convolution())
    return {{"kind", "convolution"}, {"left", to_json(c->left, cells_per_unit)}, {"right", to_json(c->right, cells_per_unit)}};
  const auto* sm = m.as_sum();
  Json terms = Json::array();
  for (const auto& t : sm->terms) terms.push_back(to_json(t, cells_per_unit));
  return {{"kind", "sum"}, {"terms", terms}};
}

// ---------------------------------------------------------------------------
// Test functions
//   {"kind":"trig","terms":[[[freq...],[re,im]],...][,"mask":box]}
//   {"kind":"simple","cells":[box,...],"values":[[re,im],...]}
//   {"kind":"atom_samples","measure":M,"values":[[re,im],...]}

inline TestFunction test_function_from_json(const Json& j) {
  const std::string kind = detail::field(j, "kind").get<std::string>();
  auto values = [](const Json& arr) {
    require(arr.is_array(), "values must be an array");
    std::vector<Complex> out;
    for (const auto& v : arr) out.push_back(detail::read_complex(v));
    return out;
  };
  if (kind == "trig") {
    std::vector<TrigTerm> terms;
    for (const auto& t : detail::field(j, "terms")) {
      require(t.is_array() && t.size() == 2, "a trig term must be [[freq...], [re, im]]");
      terms.push_back({detail::read_point(t[0]), detail::read_complex(t[1])});
    }
    std::optional<Box> mask;
    if (j.contains("mask")) mask = detail::read_box(j.at("mask"));
    return TestFunction::trig(std::move(terms), std::move(mask));
  }
  if (kind == "simple") {
    std::vector<Box> cells;
    for (const auto& c : detail::field(j, "cells")) cells.push_back(detail::read_box(c));
    return TestFunction::simple(std::move(cells), values(detail::field(j, "values")));
  }
  if (kind == "atom_samples")
    return TestFunction::atom_samples(measure_from_json(detail::field(j, "measure")), values(detail::field(j, "values")));
  throw InvalidArgument("unknown test function kind '" + kind + "'");
}

inline Json to_json(const TestFunction& f) {
  auto values = [](const std::vector<Complex>& v) {
    Json a = Json::array();
    for (auto c : v) a.push_back(detail::write_complex(c));
    return a;
  };
  if (const auto* t = f.as_trig()) {
    Json terms = Json::array();
    for (const auto& term : t->terms) terms.push_back({detail::write_point(term.freq), detail::write_complex(term.coef)});
    Json j = {{"kind", "trig"}, {"terms", terms}};
    if (t->mask) j["mask"] = detail::write_box(*t->mask);
    return j;
  }
  if (const auto* s = f.as_simple()) {
    Json cells = Json::array();
    for (const auto& c : s->cells) cells.push_back(detail::write_box(c));
    return {{"kind", "simple"}, {"cells", cells}, {"values", values(s->values)}};
  }
  const auto* a = f.as_atom_samples();
  return {{"kind", "atom_samples"}, {"measure", to_json(a->measure)}, {"values", values(a->values)}};
}

// ---------------------------------------------------------------------------
// Results

inline Json to_json(const BoundCertificate& c) {
  Json premises = Json::object();
  for (const auto& [k, v] : c.premises) premises[k] = detail::write_number(v);
  Json j = {{"rule", rule_name(c.rule)},
            {"upper", detail::write_number(c.upper)},
            {"lower", c.lower ? detail::write_number(*c.lower) : Json(nullptr)},
            {"p", c.exponents.p()},
            {"q", detail::write_number(c.exponents.q())},
            {"premises", premises},
            {"condition_holds", c.condition_holds}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline Json to_json(const BoundEstimate& e) {
  return {{"lower_hat", detail::write_number(e.lower_hat)},
          {"upper_hat", detail::write_number(e.upper_hat)},
          {"sample_count", e.sample_count},
          {"degenerate_count", e.degenerate_count},
          {"family", e.family},
          {"p", e.exponents.p()},
          {"q", detail::write_number(e.exponents.q())},
          {"truncation", e.truncation >= 0 ? Json(e.truncation) : Json(nullptr)},
          {"seed", e.seed},
          {"sup_norm_pathway", e.sup_norm_pathway},
          {"argmin_family", e.argmin_family},
          {"argmax_family", e.argmax_family}};
}

inline Json to_json(const Report& r) {
  Json details = Json::object();
  for (const auto& [k, v] : r.details) details[k] = detail::write_number(v);
  Json j = {{"id", r.id},
            {"pass", r.pass},
            {"measured", detail::write_number(r.measured)},
            {"expected", detail::write_number(r.expected)},
            {"tolerance", r.tolerance},
            {"truncation", r.truncation >= 0 ? Json(r.truncation) : Json(nullptr)},
            {"runtime_ms", r.runtime_ms},
            {"comparison", r.comparison},
            {"details", details}};
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

// ---------------------------------------------------------------------------
// Files

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open '", path, "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidArgument("cannot parse '" + path + "': " + e.what());
  }
}

/// Parses a measure, turning JSON type errors into InvalidArgument.
inline Measure load_measure(const std::string& path) {
  const Json j = read_json_file(path);
  try {
    return measure_from_json(j);
  } catch (const Json::exception& e) {
    throw InvalidArgument("bad measure in '" + path + "': " + e.what());
  }
}

inline SpectrumSet load_spectrum(const std::string& path) {
  const Json j = read_json_file(path);
  try {
    return spectrum_from_json(j);
  } catch (const Json::exception& e) {
    throw InvalidArgument("bad spectrum in '" + path + "': " + e.what());
  }
}

}  // namespace framelab
