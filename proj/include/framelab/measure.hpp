#pragma once

// Finite Borel measures on R^d.
//
// Five representations share one immutable value type:
//   Atomic       finite weighted point masses
//   Density      a nonnegative function on a box, integrated by composite
//                Gauss-Legendre; piecewise-constant densities also keep their
//                pieces so that transforms are evaluated in closed form
//   SelfSimilar  invariant probability measure of x -> R^{-1}(x + a), known
//                only through its Fourier transform
//   Convolution  lazy convolution of two measures
//   Sum          lazy finite sum (mixed-type measures, combinations of
//                unlike kinds)
//
// A Density box may have degenerate axes (lo == hi); such an axis carries a
// point mass, which is how product measures like mu x delta_0 are stored.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <variant>

#include "framelab/core.hpp"
#include "framelab/quadrature.hpp"

namespace framelab {

using DensityFn = std::function<double(PointView)>;

struct Atom {
  Point x;
  double w = 0.0;
};

/// A constant value on a box; the pieces of a density add where they overlap.
struct DensityPiece {
  Box box;
  double value = 0.0;
};

struct DensityOptions {
  QuadratureSpec quadrature{};
  /// Extra breakpoints per axis; quadrature panels never straddle a knot.
  std::vector<std::vector<double>> knots{};
  /// The density is smooth and vanishes at the box boundary.
  bool smooth = false;
};

struct SelfSimilarOptions {
  int max_depth = 400;
  double tail_tolerance = 1e-10;
};

using IntMatrix = std::vector<std::vector<long>>;
using IntPoint = std::vector<long>;

struct MeasureImpl;

class Measure {
 public:
  enum class Kind { Atomic, Density, SelfSimilar, Convolution, Sum };

  static Measure atomic(std::vector<Atom> atoms);
  static Measure dirac(Point x, double weight = 1.0);
  static Measure density(Box box, DensityFn fn, DensityOptions options = {});
  static Measure piecewise_constant(Box box, std::vector<DensityPiece> pieces, QuadratureSpec quadrature = {});
  /// Lebesgue measure restricted to the box.
  static Measure lebesgue(Box box, QuadratureSpec quadrature = {});
  /// Normalised Lebesgue measure on the box.
  static Measure uniform(Box box, QuadratureSpec quadrature = {});
  static Measure self_similar(IntMatrix R, std::vector<IntPoint> digits, std::vector<double> weights,
                              SelfSimilarOptions options = {});
  static Measure convolution_node(Measure left, Measure right);
  static Measure sum(std::vector<Measure> terms);

  Kind kind() const;
  std::size_t dim() const;

  const struct AtomicData* as_atomic() const;
  const struct DensityData* as_density() const;
  const struct SelfSimilarData* as_self_similar() const;
  const struct ConvolutionData* as_convolution() const;
  const struct SumData* as_sum() const;

  /// Identity of the underlying immutable value.
  const void* identity() const { return impl_.get(); }
  const MeasureImpl& impl() const { return *impl_; }

 private:
  explicit Measure(std::shared_ptr<const MeasureImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const MeasureImpl> impl_;
};

struct AtomicData {
  std::size_t dim = 0;
  std::vector<Atom> atoms;
};

struct DensityData {
  Box box;
  DensityFn fn;
  std::vector<DensityPiece> pieces;  // non-empty iff piecewise constant
  std::vector<std::vector<double>> knots;
  QuadratureSpec quadrature;
  bool smooth = false;

  bool piecewise_constant() const { return !pieces.empty(); }

  /// Density value; zero outside the box.
  double eval(PointView x) const {
    if (!box_contains_closed(box, x)) return 0.0;
    return fn(x);
  }
};

struct SelfSimilarData {
  IntMatrix R;
  std::vector<IntPoint> digits;
  std::vector<double> weights;
  SelfSimilarOptions options;
  Eigen::MatrixXd contraction;  // (R^T)^{-1}
  double tail_factor = 0.0;     // sum_{i>=1} ||contraction^i||_2
  double max_digit_norm = 0.0;

  /// m(s) = sum_a rho_a e^{-2 pi i a.s}
  Complex mask(const Eigen::VectorXd& s) const {
    Complex v{0.0, 0.0};
    for (std::size_t j = 0; j < digits.size(); ++j) {
      double ph = 0.0;
      for (std::size_t i = 0; i < digits[j].size(); ++i) ph += static_cast<double>(digits[j][i]) * s[i];
      ph *= -kTwoPi;
      v += weights[j] * Complex(std::cos(ph), std::sin(ph));
    }
    return v;
  }
};

struct ConvolutionData {
  Measure left;
  Measure right;
};

struct SumData {
  std::vector<Measure> terms;
};

struct MeasureImpl {
  std::variant<AtomicData, DensityData, SelfSimilarData, ConvolutionData, SumData> data;
  std::size_t dim = 0;

  mutable std::once_flag cloud_once;
  mutable std::shared_ptr<const PointCloud> cloud;
};

// ---------------------------------------------------------------------------
// Accessors

inline Measure::Kind Measure::kind() const { return static_cast<Kind>(impl_->data.index()); }
inline std::size_t Measure::dim() const { return impl_->dim; }
inline const AtomicData* Measure::as_atomic() const { return std::get_if<AtomicData>(&impl_->data); }
inline const DensityData* Measure::as_density() const { return std::get_if<DensityData>(&impl_->data); }
inline const SelfSimilarData* Measure::as_self_similar() const {
  return std::get_if<SelfSimilarData>(&impl_->data);
}
inline const ConvolutionData* Measure::as_convolution() const {
  return std::get_if<ConvolutionData>(&impl_->data);
}
inline const SumData* Measure::as_sum() const { return std::get_if<SumData>(&impl_->data); }

inline std::string kind_name(Measure::Kind k) {
  switch (k) {
    case Measure::Kind::Atomic: return "atomic";
    case Measure::Kind::Density: return "density";
    case Measure::Kind::SelfSimilar: return "ifs";
    case Measure::Kind::Convolution: return "convolution";
    case Measure::Kind::Sum: return "sum";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Construction

namespace detail {

inline bool lex_less(PointView a, PointView b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Merges atoms closer than kMergeTolerance. Output keeps the order of first
/// occurrence; group[i] is the output index of input atom i.
inline std::vector<Atom> merge_atoms(const std::vector<Atom>& in, std::vector<std::size_t>* group = nullptr) {
  const std::size_t n = in.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lex_less(in[a].x, in[b].x); });
  std::vector<std::size_t> leader(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    leader[i] = i;
    // Scan back over the lexicographic neighbourhood for a coincident atom.
    for (std::size_t j = k; j-- > 0;) {
      const std::size_t prev = order[j];
      if (in[i].x[0] - in[prev].x[0] > kMergeTolerance) break;
      if (distance(in[i].x, in[prev].x) <= kMergeTolerance) {
        leader[i] = std::min(leader[i], leader[prev]);
        break;
      }
    }
  }
  std::vector<std::size_t> slot(n, static_cast<std::size_t>(-1));
  std::vector<Atom> out;
  std::vector<std::size_t> local_group(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t l = leader[i];
    while (leader[l] != l) l = leader[l];
    if (slot[l] == static_cast<std::size_t>(-1)) {
      slot[l] = out.size();
      out.push_back({in[l].x, 0.0});
    }
    out[slot[l]].w += in[i].w;
    local_group[i] = slot[l];
  }
  if (group) *group = std::move(local_group);
  return out;
}

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline double eigen_min_modulus(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  double mn = kInf;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    mn = std::min(mn, std::abs(solver.eigenvalues()[i]));
  return mn;
}

inline std::shared_ptr<MeasureImpl> make_impl(std::size_t dim) {
  auto impl = std::make_shared<MeasureImpl>();
  impl->dim = dim;
  return impl;
}

}  // namespace detail

inline Measure Measure::atomic(std::vector<Atom> atoms) {
  require(!atoms.empty(), "atomic measure needs at least one atom");
  const std::size_t d = atoms.front().x.size();
  require(d >= 1, "atoms must have dimension >= 1");
  for (const auto& a : atoms) {
    require(a.x.size() == d, "atoms must share one dimension");
    require(std::isfinite(a.w) && a.w > 0.0, "atom weights must be positive and finite, got ", a.w);
    for (double c : a.x) require(std::isfinite(c), "atom coordinates must be finite");
  }
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return detail::lex_less(atoms[a].x, atoms[b].x); });
  for (std::size_t k = 1; k < order.size(); ++k)
    require(distance(atoms[order[k]].x, atoms[order[k - 1]].x) > kMergeTolerance,
            "atomic measure points must be pairwise distinct");
  auto impl = detail::make_impl(d);
  impl->data = AtomicData{d, std::move(atoms)};
  return Measure(std::move(impl));
}

inline Measure Measure::dirac(Point x, double weight) { return atomic({Atom{std::move(x), weight}}); }

inline Measure Measure::density(Box box, DensityFn fn, DensityOptions options) {
  validate_box(box);
  require(static_cast<bool>(fn), "density function must be callable");
  require(options.quadrature.panels_per_unit >= 1 && options.quadrature.nodes >= 1, "invalid quadrature spec");
  const std::size_t d = box.size();
  options.knots.resize(d);
  for (std::size_t i = 0; i < d; ++i) options.knots[i] = detail::sorted_unique(std::move(options.knots[i]));
  auto impl = detail::make_impl(d);
  DensityData data;
  data.box = std::move(box);
  data.fn = std::move(fn);
  data.knots = std::move(options.knots);
  data.quadrature = options.quadrature;
  data.smooth = options.smooth;
  impl->data = std::move(data);
  return Measure(std::move(impl));
}

inline Measure Measure::piecewise_constant(Box box, std::vector<DensityPiece> pieces, QuadratureSpec quadrature) {
  validate_box(box);
  const std::size_t d = box.size();
  std::vector<DensityPiece> clipped;
  std::vector<std::vector<double>> knots(d);
  for (auto& piece : pieces) {
    require(piece.box.size() == d, "density piece dimension does not match the box");
    validate_box(piece.box);
    require(std::isfinite(piece.value) && piece.value >= 0.0, "density piece values must be finite and >= 0");
    if (piece.value == 0.0) continue;
    Box c;
    if (!clip_piece(piece.box, box, c)) continue;
    for (std::size_t i = 0; i < d; ++i) {
      knots[i].push_back(c[i].lo);
      knots[i].push_back(c[i].hi);
    }
    clipped.push_back({std::move(c), piece.value});
  }
  require(!clipped.empty(), "piecewise-constant density has no mass inside its box");
  auto shared = std::make_shared<const std::vector<DensityPiece>>(clipped);
  DensityFn fn = [shared](PointView x) {
    double v = 0.0;
    for (const auto& p : *shared)
      if (box_contains(p.box, x)) v += p.value;
    return v;
  };
  Measure m = density(std::move(box), std::move(fn), DensityOptions{quadrature, std::move(knots), false});
  auto impl = std::const_pointer_cast<MeasureImpl>(m.impl_);
  std::get<DensityData>(impl->data).pieces = std::move(clipped);
  return m;
}

inline Measure Measure::lebesgue(Box box, QuadratureSpec quadrature) {
  Box piece = box;
  return piecewise_constant(std::move(box), {DensityPiece{std::move(piece), 1.0}}, quadrature);
}

inline Measure Measure::uniform(Box box, QuadratureSpec quadrature) {
  validate_box(box);
  const double vol = box_volume(box);
  require(vol > 0.0, "uniform measure needs positive volume");
  Box piece = box;
  return piecewise_constant(std::move(box), {DensityPiece{std::move(piece), 1.0 / vol}}, quadrature);
}

inline Measure Measure::self_similar(IntMatrix R, std::vector<IntPoint> digits, std::vector<double> weights,
                                     SelfSimilarOptions options) {
  const std::size_t d = R.size();
  require(d >= 1, "IFS matrix must be non-empty");
  for (const auto& row : R) require(row.size() == d, "IFS matrix must be square");
  require(digits.size() >= 2, "IFS needs at least two digits");
  require(weights.size() == digits.size(), "IFS needs one weight per digit");
  bool has_zero = false;
  for (const auto& a : digits) {
    require(a.size() == d, "digit dimension must match the matrix");
    has_zero = has_zero || std::all_of(a.begin(), a.end(), [](long v) { return v == 0; });
  }
  require(has_zero, "digit set must contain 0");
  double total = 0.0;
  for (double w : weights) {
    require(w > 0.0 && w < 1.0, "IFS weights must lie in (0, 1), got ", w);
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12, "IFS weights must sum to 1, got ", total);
  require(options.max_depth >= 1 && options.tail_tolerance > 0.0, "invalid IFS transform options");

  Eigen::MatrixXd Rm(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) Rm(i, j) = static_cast<double>(R[i][j]);
  const double min_mod = detail::eigen_min_modulus(Rm);
  require(min_mod > 1.0, "IFS matrix must be expanding (all |eigenvalue| > 1); smallest modulus is ", min_mod);

  SelfSimilarData data;
  data.contraction = Rm.transpose().inverse();
  // sum_{i>=1} ||P^i|| <= (sum_{i=1}^{m} ||P^i||) / (1 - ||P^m||) for the
  // first m with ||P^m|| < 1.
  Eigen::MatrixXd power = data.contraction;
  double partial = 0.0;
  for (int m = 1;; ++m) {
    const double nm = power.operatorNorm();
    partial += nm;
    if (nm < 1.0) {
      data.tail_factor = partial / (1.0 - nm);
      break;
    }
    require<EvaluationError>(m < 1000, "IFS contraction norm does not decay");
    power = power * data.contraction;
  }
  for (const auto& a : digits) {
    double s = 0.0;
    for (long v : a) s += static_cast<double>(v) * static_cast<double>(v);
    data.max_digit_norm = std::max(data.max_digit_norm, std::sqrt(s));
  }
  data.R = std::move(R);
  data.digits = std::move(digits);
  data.weights = std::move(weights);
  data.options = options;
  auto impl = detail::make_impl(d);
  impl->data = std::move(data);
  return Measure(std::move(impl));
}

inline Measure Measure::convolution_node(Measure left, Measure right) {
  require(left.dim() == right.dim(), "convolution operands must share a dimension");
  auto impl = detail::make_impl(left.dim());
  impl->data = ConvolutionData{std::move(left), std::move(right)};
  return Measure(std::move(impl));
}

inline Measure Measure::sum(std::vector<Measure> terms) {
  require(!terms.empty(), "sum needs at least one term");
  const std::size_t d = terms.front().dim();
  for (const auto& t : terms) require(t.dim() == d, "sum terms must share a dimension");
  if (terms.size() == 1) return terms.front();
  auto impl = detail::make_impl(d);
  impl->data = SumData{std::move(terms)};
  return Measure(std::move(impl));
}

// ---------------------------------------------------------------------------
// Quadrature clouds

/// Weighted points representing the measure for integration: exact for
/// atomic measures, Gauss-Legendre nodes times density values for densities,
/// pairwise sums for convolutions and concatenation for sums. Cached.
inline const PointCloud& quadrature_cloud(const Measure& m);

namespace detail {

inline PointCloud build_cloud(const Measure& m) {
  PointCloud cloud;
  cloud.dim = m.dim();
  if (const auto* a = m.as_atomic()) {
    for (const auto& atom : a->atoms) cloud.push(atom.x, atom.w);
  } else if (const auto* dd = m.as_density()) {
    PointCloud grid = tensor_grid(dd->box, dd->knots, dd->quadrature);
    cloud.coords.reserve(grid.coords.size());
    cloud.weights.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = dd->fn(grid.point(i));
      if (!std::isfinite(v) || v < 0.0)
        throw EvaluationError(concat("density evaluated to ", v, " (must be finite and >= 0)"));
      if (v == 0.0) continue;
      cloud.push(grid.point(i), grid.weights[i] * v);
    }
  } else if (m.as_self_similar()) {
    throw UnsupportedKind("self-similar measures are only available through their Fourier transform");
  } else if (const auto* c = m.as_convolution()) {
    const PointCloud& l = quadrature_cloud(c->left);
    const PointCloud& r = quadrature_cloud(c->right);
    cloud.coords.reserve(l.size() * r.size() * cloud.dim);
    cloud.weights.reserve(l.size() * r.size());
    Point x(cloud.dim);
    for (std::size_t i = 0; i < l.size(); ++i)
      for (std::size_t j = 0; j < r.size(); ++j) {
        for (std::size_t k = 0; k < cloud.dim; ++k) x[k] = l.point(i)[k] + r.point(j)[k];
        cloud.push(x, l.weights[i] * r.weights[j]);
      }
  } else if (const auto* s = m.as_sum()) {
    for (const auto& t : s->terms) {
      const PointCloud& tc = quadrature_cloud(t);
      cloud.coords.insert(cloud.coords.end(), tc.coords.begin(), tc.coords.end());
      cloud.weights.insert(cloud.weights.end(), tc.weights.begin(), tc.weights.end());
    }
  }
  return cloud;
}

}  // namespace detail

inline const PointCloud& quadrature_cloud(const Measure& m) {
  const MeasureImpl& impl = m.impl();
  std::call_once(impl.cloud_once,
                 [&] { impl.cloud = std::make_shared<const PointCloud>(detail::build_cloud(m)); });
  return *impl.cloud;
}

// ---------------------------------------------------------------------------
// Mass and integration

inline double mass(const Measure& m) {
  if (const auto* a = m.as_atomic()) {
    double s = 0.0;
    for (const auto& atom : a->atoms) s += atom.w;
    return s;
  }
  if (const auto* d = m.as_density()) {
    if (d->piecewise_constant()) {
      double s = 0.0;
      for (const auto& p : d->pieces) s += p.value * box_volume(p.box);
      return s;
    }
    const PointCloud& c = quadrature_cloud(m);
    return std::accumulate(c.weights.begin(), c.weights.end(), 0.0);
  }
  if (m.as_self_similar()) return 1.0;
  if (const auto* c = m.as_convolution()) return mass(c->left) * mass(c->right);
  const auto* s = m.as_sum();
  double total = 0.0;
  for (const auto& t : s->terms) total += mass(t);
  return total;
}

inline bool is_probability(const Measure& m) { return std::abs(mass(m) - 1.0) <= kProbabilityTolerance; }

/// Integral of g against the measure. Exact for atomic measures; composite
/// Gauss-Legendre for densities; iterated over the children of a convolution.
template <class G>
Complex integrate(const Measure& m, const G& g) {
  if (m.as_self_similar())
    throw UnsupportedKind("direct integration against a self-similar measure is not supported");
  const PointCloud& c = quadrature_cloud(m);
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < c.size(); ++i) s += c.weights[i] * Complex(g(c.point(i)));
  if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) throw EvaluationError("integral is not finite");
  return s;
}

// ---------------------------------------------------------------------------
// Fourier-Stieltjes transform

inline Complex fourier_stieltjes(const Measure& m, PointView t);

namespace detail {

inline Complex self_similar_transform(const SelfSimilarData& ss, PointView t, int fixed_depth) {
  const Eigen::Index d = static_cast<Eigen::Index>(t.size());
  Eigen::VectorXd s(d);
  for (Eigen::Index i = 0; i < d; ++i) s[i] = t[i];
  const double tail_scale = kTwoPi * ss.max_digit_norm * ss.tail_factor;
  Complex prod{1.0, 0.0};
  const int depth = fixed_depth > 0 ? fixed_depth : ss.options.max_depth;
  for (int k = 1; k <= depth; ++k) {
    // Remaining factors differ from 1 by at most tail_scale * |s|.
    if (fixed_depth <= 0 && tail_scale * s.norm() < ss.options.tail_tolerance) return prod;
    s = ss.contraction * s;
    prod *= ss.mask(s);
  }
  if (fixed_depth <= 0 && tail_scale * s.norm() >= ss.options.tail_tolerance)
    throw EvaluationError("IFS transform did not reach its tail tolerance within max_depth factors");
  return prod;
}

}  // namespace detail

/// Product of the first `depth` mask factors, without the adaptive stop.
inline Complex self_similar_transform_truncated(const Measure& m, PointView t, int depth) {
  const auto* ss = m.as_self_similar();
  require<UnsupportedKind>(ss != nullptr, "not a self-similar measure");
  require(depth >= 1, "truncation depth must be >= 1");
  return detail::self_similar_transform(*ss, t, depth);
}

/// mu^(t) = integral of e^{-2 pi i t.x} d mu(x).
inline Complex fourier_stieltjes(const Measure& m, PointView t) {
  require(t.size() == m.dim(), "frequency dimension ", t.size(), " does not match measure dimension ", m.dim());
  if (const auto* a = m.as_atomic()) {
    Complex s{0.0, 0.0};
    for (const auto& atom : a->atoms) s += atom.w * character(t, atom.x);
    return s;
  }
  if (const auto* d = m.as_density()) {
    if (d->piecewise_constant()) {
      Point neg(t.begin(), t.end());
      for (double& v : neg) v = -v;
      Complex s{0.0, 0.0};
      for (const auto& p : d->pieces) s += p.value * box_exponential(p.box, neg);
      return s;
    }
    const PointCloud& c = quadrature_cloud(m);
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < c.size(); ++i) s += c.weights[i] * character(t, c.point(i));
    return s;
  }
  if (const auto* ss = m.as_self_similar()) return detail::self_similar_transform(*ss, t, 0);
  if (const auto* c = m.as_convolution()) return fourier_stieltjes(c->left, t) * fourier_stieltjes(c->right, t);
  const auto* s = m.as_sum();
  Complex total{0.0, 0.0};
  for (const auto& term : s->terms) total += fourier_stieltjes(term, t);
  return total;
}

// ---------------------------------------------------------------------------
// Scaling, convolution, mixed type

inline Measure scale(const Measure& m, double alpha) {
  require(std::isfinite(alpha) && alpha > 0.0, "scale factor must be positive, got ", alpha);
  if (const auto* a = m.as_atomic()) {
    auto atoms = a->atoms;
    for (auto& atom : atoms) atom.w *= alpha;
    return Measure::atomic(std::move(atoms));
  }
  if (const auto* d = m.as_density()) {
    if (d->piecewise_constant()) {
      auto pieces = d->pieces;
      for (auto& p : pieces) p.value *= alpha;
      return Measure::piecewise_constant(d->box, std::move(pieces), d->quadrature);
    }
    DensityFn fn = [inner = d->fn, alpha](PointView x) { return alpha * inner(x); };
    return Measure::density(d->box, std::move(fn), DensityOptions{d->quadrature, d->knots, d->smooth});
  }
  if (m.as_self_similar()) {
    // alpha * mu = (alpha delta_0) * mu
    return Measure::convolution_node(Measure::dirac(Point(m.dim(), 0.0), alpha), m);
  }
  if (const auto* c = m.as_convolution()) return Measure::convolution_node(scale(c->left, alpha), c->right);
  const auto* s = m.as_sum();
  std::vector<Measure> terms;
  for (const auto& t : s->terms) terms.push_back(scale(t, alpha));
  return Measure::sum(std::move(terms));
}

namespace detail {

inline Box atom_bounding_box(const std::vector<Atom>& atoms) {
  const std::size_t d = atoms.front().x.size();
  Box b(d, Interval{kInf, -kInf});
  for (const auto& a : atoms)
    for (std::size_t i = 0; i < d; ++i) {
      b[i].lo = std::min(b[i].lo, a.x[i]);
      b[i].hi = std::max(b[i].hi, a.x[i]);
    }
  return b;
}

inline std::vector<std::vector<double>> box_knots(const DensityData& d) {
  auto knots = d.knots;
  for (std::size_t i = 0; i < d.box.size(); ++i) {
    knots[i].push_back(d.box[i].lo);
    knots[i].push_back(d.box[i].hi);
    knots[i] = sorted_unique(std::move(knots[i]));
  }
  return knots;
}

inline Measure convolve_atomic_density(const AtomicData& a, const DensityData& d) {
  const Box box = minkowski_sum(d.box, atom_bounding_box(a.atoms));
  if (d.piecewise_constant()) {
    std::vector<DensityPiece> pieces;
    pieces.reserve(a.atoms.size() * d.pieces.size());
    for (const auto& atom : a.atoms)
      for (const auto& p : d.pieces) {
        Box shifted = p.box;
        for (std::size_t i = 0; i < shifted.size(); ++i) {
          shifted[i].lo += atom.x[i];
          shifted[i].hi += atom.x[i];
        }
        pieces.push_back({std::move(shifted), atom.w * p.value});
      }
    return Measure::piecewise_constant(box, std::move(pieces), d.quadrature);
  }
  const auto base_knots = box_knots(d);
  std::vector<std::vector<double>> knots(box.size());
  for (std::size_t i = 0; i < box.size(); ++i)
    for (const auto& atom : a.atoms)
      for (double k : base_knots[i]) knots[i].push_back(k + atom.x[i]);
  auto atoms = std::make_shared<const std::vector<Atom>>(a.atoms);
  DensityFn fn = [atoms, d](PointView x) {
    double v = 0.0;
    Point y(x.size());
    for (const auto& atom : *atoms) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - atom.x[i];
      v += atom.w * d.eval(y);
    }
    return v;
  };
  return Measure::density(box, std::move(fn), DensityOptions{d.quadrature, std::move(knots), d.smooth});
}

inline double density_box_mass(const DensityData& d, const Box& region);

inline Measure convolve_densities(const Measure& ma, const Measure& mb) {
  const DensityData& a = *ma.as_density();
  const DensityData& b = *mb.as_density();
  const Box box = minkowski_sum(a.box, b.box);

  const auto ka = box_knots(a), kb = box_knots(b);
  std::vector<std::vector<double>> knots(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (ka[i].size() * kb[i].size() <= 4096) {
      for (double x : ka[i])
        for (double y : kb[i]) knots[i].push_back(x + y);
    } else {
      for (double x : ka[i]) knots[i].push_back(x + b.box[i].lo), knots[i].push_back(x + b.box[i].hi);
      for (double y : kb[i]) knots[i].push_back(y + a.box[i].lo), knots[i].push_back(y + a.box[i].hi);
    }
  }
  const QuadratureSpec q = a.quadrature;
  const bool smooth = a.smooth || b.smooth;

  if (a.piecewise_constant() || b.piecewise_constant()) {
    // h(x) = sum_k v_k * other(x - box_k): box masses of the other factor,
    // so the jumps of the piecewise-constant factor are integrated exactly.
    const bool pieces_b = b.piecewise_constant();
    auto pieces = std::make_shared<const std::vector<DensityPiece>>(pieces_b ? b.pieces : a.pieces);
    DensityData other = pieces_b ? a : b;
    DensityFn fn = [pieces, other](PointView x) {
      double v = 0.0;
      Box region(x.size());
      for (const auto& p : *pieces) {
        for (std::size_t i = 0; i < x.size(); ++i) region[i] = {x[i] - p.box[i].hi, x[i] - p.box[i].lo};
        v += p.value * density_box_mass(other, region);
      }
      return v;
    };
    return Measure::density(box, std::move(fn), DensityOptions{q, std::move(knots), smooth});
  }

  // Quadrature runs over the non-smooth factor; the smooth one is evaluated
  // pointwise.
  const bool swap = a.smooth && !b.smooth;
  const Measure& quad_side = swap ? mb : ma;
  const DensityData& eval_side = swap ? a : b;
  auto cloud = std::make_shared<const PointCloud>(quadrature_cloud(quad_side));
  DensityFn fn = [cloud, eval_side](PointView x) {
    double v = 0.0;
    Point y(x.size());
    for (std::size_t j = 0; j < cloud->size(); ++j) {
      const PointView s = cloud->point(j);
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - s[i];
      v += cloud->weights[j] * eval_side.eval(y);
    }
    return v;
  };
  return Measure::density(box, std::move(fn), DensityOptions{q, std::move(knots), smooth});
}

}  // namespace detail

/// Atomic convolution together with the output index of each pair (i, j),
/// stored row-major as i * |b| + j.
inline Measure convolve_atomic(const Measure& a, const Measure& b, std::vector<std::size_t>* pair_index = nullptr) {
  const auto* aa = a.as_atomic();
  const auto* bb = b.as_atomic();
  require<UnsupportedKind>(aa && bb, "convolve_atomic needs two atomic measures");
  require(a.dim() == b.dim(), "convolution operands must share a dimension");
  std::vector<Atom> pairs;
  pairs.reserve(aa->atoms.size() * bb->atoms.size());
  for (const auto& x : aa->atoms)
    for (const auto& y : bb->atoms) pairs.push_back({add(x.x, y.x), x.w * y.w});
  return Measure::atomic(detail::merge_atoms(pairs, pair_index));
}

/// a * b. Atomic and density operands convolve eagerly; anything involving a
/// self-similar measure becomes a lazy convolution node.
inline Measure convolve(const Measure& a, const Measure& b) {
  require(a.dim() == b.dim(), "convolution operands must share a dimension");
  if (a.as_atomic() && b.as_atomic()) return convolve_atomic(a, b);
  if (a.as_atomic() && b.as_density()) return detail::convolve_atomic_density(*a.as_atomic(), *b.as_density());
  if (a.as_density() && b.as_atomic()) return detail::convolve_atomic_density(*b.as_atomic(), *a.as_density());
  if (a.as_density() && b.as_density()) return detail::convolve_densities(a, b);
  if (const auto* s = a.as_sum()) {
    std::vector<Measure> terms;
    for (const auto& t : s->terms) terms.push_back(convolve(t, b));
    return Measure::sum(std::move(terms));
  }
  if (const auto* s = b.as_sum()) {
    std::vector<Measure> terms;
    for (const auto& t : s->terms) terms.push_back(convolve(a, t));
    return Measure::sum(std::move(terms));
  }
  return Measure::convolution_node(a, b);
}

namespace detail {

/// Pushes m forward under x -> (x, 0) (first = true) or x -> (0, x).
inline Measure embed(const Measure& m, std::size_t other_dim, bool first) {
  const std::size_t n = m.dim();
  const std::size_t total = n + other_dim;
  const std::size_t offset = first ? 0 : other_dim;
  auto lift = [&](PointView x) {
    Point out(total, 0.0);
    std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
    return out;
  };
  auto lift_box = [&](const Box& b) {
    Box out(total, Interval{0.0, 0.0});
    std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
    return out;
  };
  if (const auto* a = m.as_atomic()) {
    std::vector<Atom> atoms;
    for (const auto& atom : a->atoms) atoms.push_back({lift(atom.x), atom.w});
    return Measure::atomic(std::move(atoms));
  }
  if (const auto* d = m.as_density()) {
    if (d->piecewise_constant()) {
      std::vector<DensityPiece> pieces;
      for (const auto& p : d->pieces) pieces.push_back({lift_box(p.box), p.value});
      return Measure::piecewise_constant(lift_box(d->box), std::move(pieces), d->quadrature);
    }
    std::vector<std::vector<double>> knots(total);
    for (std::size_t i = 0; i < n; ++i) knots[offset + i] = d->knots[i];
    DensityFn fn = [inner = d->fn, offset, n](PointView x) { return inner(x.subspan(offset, n)); };
    return Measure::density(lift_box(d->box), std::move(fn), DensityOptions{d->quadrature, std::move(knots), d->smooth});
  }
  if (const auto* c = m.as_convolution())
    return convolve(embed(c->left, other_dim, first), embed(c->right, other_dim, first));
  if (const auto* s = m.as_sum()) {
    std::vector<Measure> terms;
    for (const auto& t : s->terms) terms.push_back(embed(t, other_dim, first));
    return Measure::sum(std::move(terms));
  }
  throw UnsupportedKind("self-similar measures cannot be embedded in a product space");
}

}  // namespace detail

/// rho = a x delta_0 + delta_0 x b on R^{n+m}.
inline Measure mixed_type(const Measure& a, const Measure& b) {
  Measure ea = detail::embed(a, b.dim(), true);
  Measure eb = detail::embed(b, a.dim(), false);
  if (ea.as_atomic() && eb.as_atomic()) {
    auto atoms = ea.as_atomic()->atoms;
    const auto& more = eb.as_atomic()->atoms;
    atoms.insert(atoms.end(), more.begin(), more.end());
    return Measure::atomic(detail::merge_atoms(atoms));
  }
  return Measure::sum({std::move(ea), std::move(eb)});
}

// ---------------------------------------------------------------------------
// Ball and box masses

namespace detail {

/// Density mass inside a region box. Exact for piecewise-constant densities;
/// otherwise composite Gauss-Legendre on the clipped box with the density's
/// own knots.
inline double density_box_mass(const DensityData& d, const Box& region) {
  if (d.piecewise_constant()) {
    double s = 0.0;
    Box c;
    for (const auto& p : d.pieces)
      if (clip_piece(p.box, region, c)) s += p.value * box_volume(c);
    return s;
  }
  Box c;
  if (!clip_piece(d.box, region, c)) return 0.0;
  const PointCloud grid = tensor_grid(c, d.knots, d.quadrature);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weights[i] * d.fn(grid.point(i));
  return s;
}

/// Integral of the density along the line through x parallel to `axis`,
/// over `chord`.
inline double line_mass(const DensityData& d, PointView x, std::size_t axis, const Interval& chord) {
  if (d.piecewise_constant()) {
    double s = 0.0;
    for (const auto& p : d.pieces) {
      bool hit = true;
      for (std::size_t i = 0; i < x.size() && hit; ++i)
        if (i != axis) hit = p.box[i].contains_closed(x[i]);
      const double lo = std::max(p.box[axis].lo, chord.lo), hi = std::min(p.box[axis].hi, chord.hi);
      if (hit && hi > lo) s += p.value * (hi - lo);
    }
    return s;
  }
  std::vector<double> nodes, weights;
  const std::span<const double> knots = axis < d.knots.size() ? std::span<const double>(d.knots[axis]) : std::span<const double>();
  axis_rule(chord, knots, d.quadrature, nodes, weights);
  Point y(x.begin(), x.end());
  double s = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    y[axis] = nodes[j];
    s += weights[j] * d.eval(y);
  }
  return s;
}

}  // namespace detail

/// Mass of the open Euclidean ball B(center, radius).
inline double ball_mass(const Measure& m, PointView center, double radius) {
  require(radius > 0.0, "ball radius must be positive");
  require(center.size() == m.dim(), "ball center dimension mismatch");
  if (const auto* a = m.as_atomic()) {
    double s = 0.0;
    for (const auto& atom : a->atoms)
      if (distance(atom.x, center) < radius) s += atom.w;
    return s;
  }
  if (const auto* d = m.as_density()) {
    if (m.dim() == 1 || std::count_if(d->box.begin(), d->box.end(), [](auto& iv) { return !iv.degenerate(); }) <= 1) {
      // The ball meets the support in a segment along the single free axis.
      Box region(m.dim());
      for (std::size_t i = 0; i < m.dim(); ++i) region[i] = d->box[i];
      std::size_t free_axis = 0;
      double off = 0.0;
      for (std::size_t i = 0; i < m.dim(); ++i) {
        if (d->box[i].degenerate()) off += (d->box[i].lo - center[i]) * (d->box[i].lo - center[i]);
        else free_axis = i;
      }
      if (off >= radius * radius) return 0.0;
      const double half = std::sqrt(radius * radius - off);
      Interval& ax = region[free_axis];
      if (d->box[free_axis].degenerate()) return detail::density_box_mass(*d, region);
      ax = {std::max(ax.lo, center[free_axis] - half), std::min(ax.hi, center[free_axis] + half)};
      if (!(ax.hi > ax.lo)) return 0.0;
      return detail::density_box_mass(*d, region);
    }
    // Several free axes: quadrature over all but the last free axis, with
    // the exact chord of the ball along the last one.
    std::size_t last = 0;
    for (std::size_t i = 0; i < m.dim(); ++i)
      if (!d->box[i].degenerate()) last = i;
    Box outer = d->box;
    outer[last] = {d->box[last].lo, d->box[last].lo};
    std::vector<std::vector<double>> knots = detail::box_knots(*d);
    knots.resize(m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i)
      if (i != last) {
        // The chord length has a square-root edge; grade the panels into it.
        knots[i].push_back(center[i] - radius);
        knots[i].push_back(center[i] + radius);
        for (int k = 1; k <= 24; ++k) {
          const double g = radius * (1.0 - std::ldexp(1.0, -k));
          knots[i].push_back(center[i] - g);
          knots[i].push_back(center[i] + g);
        }
      }
    const PointCloud grid = tensor_grid(outer, knots, d->quadrature);
    double s = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const auto x = grid.point(n);
      double off = 0.0;
      for (std::size_t i = 0; i < m.dim(); ++i)
        if (i != last) off += (x[i] - center[i]) * (x[i] - center[i]);
      if (off >= radius * radius) continue;
      const double half = std::sqrt(radius * radius - off);
      const Interval chord{std::max(d->box[last].lo, center[last] - half), std::min(d->box[last].hi, center[last] + half)};
      if (chord.hi > chord.lo) s += grid.weights[n] * detail::line_mass(*d, x, last, chord);
    }
    return s;
  }
  if (const auto* s = m.as_sum()) {
    double total = 0.0;
    for (const auto& t : s->terms) total += ball_mass(t, center, radius);
    return total;
  }
  throw UnsupportedKind(detail::concat("ball_mass is not available for ", kind_name(m.kind()), " measures"));
}

}  // namespace framelab
