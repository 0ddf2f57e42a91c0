#pragma once

// Derived measures: discretizations, smoothing, approximate identities, the
// P-operator, budgeted Bessel measures and convex combinations.

#include <map>

#include "framelab/bounds.hpp"

namespace framelab {

// ---------------------------------------------------------------------------
// Discretization

struct DiscretizationSpec {
  enum class Representative { Center, Corner, Explicit };

  double r = 1.0;
  Representative rule = Representative::Center;
  /// Representatives for Explicit; every x_k must lie in r(k + [0,1)^d).
  std::map<std::vector<long>, Point> points;
  /// Optional window: only cells meeting it are kept.
  std::optional<Box> window;
};

namespace detail {

using CellIndex = std::vector<long>;

inline CellIndex cell_of(PointView x, double r) {
  CellIndex k(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) k[i] = static_cast<long>(std::floor(x[i] / r));
  return k;
}

inline Box cell_box(const CellIndex& k, double r) {
  Box b(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) b[i] = {r * static_cast<double>(k[i]), r * static_cast<double>(k[i] + 1)};
  return b;
}

inline void accumulate_cells(const Measure& m, double r, std::map<CellIndex, double>& cells) {
  if (const auto* a = m.as_atomic()) {
    for (const auto& atom : a->atoms) cells[cell_of(atom.x, r)] += atom.w;
    return;
  }
  if (const auto* d = m.as_density()) {
    const std::size_t dim = d->box.size();
    std::vector<long> lo(dim), hi(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const Interval& iv = d->box[i];
      lo[i] = static_cast<long>(std::floor(iv.lo / r));
      hi[i] = iv.degenerate() ? lo[i] : static_cast<long>(std::ceil(iv.hi / r)) - 1;
      hi[i] = std::max(hi[i], lo[i]);
    }
    CellIndex k = lo;
    while (true) {
      const double w = density_box_mass(*d, cell_box(k, r));
      if (w != 0.0) cells[k] += w;
      std::size_t i = 0;
      while (i < dim && ++k[i] > hi[i]) k[i] = lo[i], ++i;
      if (i == dim) break;
    }
    return;
  }
  if (const auto* s = m.as_sum()) {
    for (const auto& t : s->terms) accumulate_cells(t, r, cells);
    return;
  }
  require<UnsupportedKind>(has_cloud(m), "cannot discretize a self-similar measure");
  const PointCloud& c = quadrature_cloud(m);
  for (std::size_t i = 0; i < c.size(); ++i) cells[cell_of(c.point(i), r)] += c.weights[i];
}

}  // namespace detail

/// nu' = sum_k nu(r(k + Q)) delta_{x_k}, Q = [0,1)^d, zero-mass cells omitted.
inline Measure discretize(const Measure& nu, const DiscretizationSpec& spec) {
  require(std::isfinite(spec.r) && spec.r > 0.0, "cell size must be positive");
  std::map<detail::CellIndex, double> cells;
  detail::accumulate_cells(nu, spec.r, cells);
  std::vector<Atom> atoms;
  for (const auto& [k, w] : cells) {
    if (!(w > 0.0)) continue;
    const Box cell = detail::cell_box(k, spec.r);
    if (spec.window && !boxes_overlap(cell, *spec.window)) continue;
    Point x(k.size());
    switch (spec.rule) {
      case DiscretizationSpec::Representative::Center:
        for (std::size_t i = 0; i < k.size(); ++i) x[i] = spec.r * (static_cast<double>(k[i]) + 0.5);
        break;
      case DiscretizationSpec::Representative::Corner:
        for (std::size_t i = 0; i < k.size(); ++i) x[i] = spec.r * static_cast<double>(k[i]);
        break;
      case DiscretizationSpec::Representative::Explicit: {
        auto it = spec.points.find(k);
        require(it != spec.points.end(), "no representative given for a cell with positive mass");
        x = it->second;
        require(x.size() == k.size() && box_contains(cell, x), "representative lies outside its cell");
        break;
      }
    }
    atoms.push_back({std::move(x), w});
  }
  require(!atoms.empty(), "discretization has no cell with positive mass");
  return Measure::atomic(std::move(atoms));
}

/// {c_k e_{x_k}} with c_k = w_k^{1/q}.
struct WeightedExponentials {
  std::vector<Point> frequencies;
  std::vector<double> coefficients;
  ExponentPair exponents{2.0};
};

inline WeightedExponentials q_frame_from_discretization(const Measure& nu_prime, const ExponentPair& e) {
  const auto* a = nu_prime.as_atomic();
  require(a != nullptr, "discretized measure must be atomic");
  require(!e.is_endpoint(), "q-frame family needs finite q");
  WeightedExponentials fam;
  fam.exponents = e;
  for (const auto& atom : a->atoms) {
    fam.frequencies.push_back(atom.x);
    fam.coefficients.push_back(std::pow(atom.w, 1.0 / e.q()));
  }
  return fam;
}

/// sum_k |[f, c_k e_{x_k}]|^q through the semi-inner product.
inline double family_sum(const WeightedExponentials& fam, const TestFunction& f, const Measure& mu) {
  double s = 0.0;
  for (std::size_t k = 0; k < fam.frequencies.size(); ++k) {
    const TestFunction g = exponential(fam.frequencies[k], fam.coefficients[k]);
    s += std::pow(std::abs(semi_inner_product(f, g, mu, fam.exponents)), fam.exponents.q());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Smoothing

/// Normalised C-infinity bump exp(-1 / (1 - (x/h)^2)) on [-h, h].
inline Measure smooth_bump(double half_width = 0.5) {
  require(half_width > 0.0, "bump half-width must be positive");
  const double h = half_width;
  auto raw = [h](double x) {
    const double u = x / h;
    return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
  };
  // Normalise with the rule that will integrate the density.
  PointCloud grid = tensor_grid({{-h, h}}, {}, QuadratureSpec{});
  double z = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) z += grid.weights[i] * raw(grid.point(i)[0]);
  DensityFn fn = [raw, z](PointView x) { return raw(x[0]) / z; };
  DensityOptions opt;
  opt.smooth = true;
  return Measure::density({{-h, h}}, std::move(fn), opt);
}

/// nu * chi_[0,1] dx: the density t -> nu([t-1, t]).
inline Measure smooth_first_stage(const Measure& nu) {
  require(nu.dim() == 1, "smoothing works in one dimension");
  return convolve(nu, Measure::lebesgue({{0.0, 1.0}}));
}

/// (nu * chi_[0,1] dx) * g dx for the normalised bump g: a C-infinity density
/// of the same mass.
inline Measure smooth(const Measure& nu, double bump_half_width = 0.5) {
  return convolve(smooth_first_stage(nu), smooth_bump(bump_half_width));
}

// ---------------------------------------------------------------------------
// Approximate identities

enum class ApproximateIdentityKind { Uniform, Atomic };

/// Uniform: normalised Lebesgue on [-1/n, 1/n]^d. Atomic: delta at e_1 / n.
inline Measure approximate_identity(ApproximateIdentityKind kind, int n, std::size_t dim = 1) {
  require(n >= 1, "approximate identity index must be >= 1");
  require(dim >= 1, "dimension must be >= 1");
  const double s = 1.0 / n;
  if (kind == ApproximateIdentityKind::Uniform) return Measure::uniform(Box(dim, Interval{-s, s}));
  Point x(dim, 0.0);
  x[0] = s;
  return Measure::dirac(std::move(x));
}

/// sup{|t| : t in supp lambda_n}
inline double support_radius(ApproximateIdentityKind kind, int n, std::size_t dim = 1) {
  require(n >= 1, "approximate identity index must be >= 1");
  return kind == ApproximateIdentityKind::Uniform ? std::sqrt(static_cast<double>(dim)) / n : 1.0 / n;
}

// ---------------------------------------------------------------------------
// P-operator

struct POperatorResult {
  Measure rho;  // mu * mu'
  TestFunction pf;
};

inline bool is_origin_dirac(const Measure& m) {
  const auto* a = m.as_atomic();
  if (!a || a->atoms.size() != 1) return false;
  const auto& atom = a->atoms.front();
  return std::abs(atom.w - 1.0) <= kProbabilityTolerance &&
         std::all_of(atom.x.begin(), atom.x.end(), [](double v) { return v == 0.0; });
}

/// Pf = d((f dmu) * mu') / d(mu * mu'). For atomic pairs, Pf(z) is the
/// average of f(x) over the pairs x + y = z weighted by mu(x) mu'(y).
inline POperatorResult p_operator(const TestFunction& f, const Measure& mu, const Measure& mu_prime) {
  require(mu.dim() == mu_prime.dim() && f.dim() == mu.dim(), "dimension mismatch");
  require(is_probability(mu) && is_probability(mu_prime), "the P-operator needs probability measures");
  if (is_origin_dirac(mu_prime) && !mu.as_atomic()) return {mu, f};
  const auto* a = mu.as_atomic();
  const auto* b = mu_prime.as_atomic();
  require<UnsupportedKind>(a && b, "the P-operator is implemented for atomic pairs and mu' = delta_0");
  std::vector<std::size_t> pair;
  Measure rho = convolve_atomic(mu, mu_prime, &pair);
  const auto fv = detail::values_on_atoms(f, mu);
  const auto& out_atoms = rho.as_atomic()->atoms;
  std::vector<Complex> values(out_atoms.size(), 0.0);
  const std::size_t nb = b->atoms.size();
  for (std::size_t i = 0; i < a->atoms.size(); ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      const std::size_t z = pair[i * nb + j];
      values[z] += (a->atoms[i].w * b->atoms[j].w) / out_atoms[z].w * fv[i];
    }
  TestFunction pf = TestFunction::atom_samples(rho, std::move(values));
  return {std::move(rho), std::move(pf)};
}

// ---------------------------------------------------------------------------
// Budgeted Bessel measures and convex combinations

struct BudgetedBessel {
  Measure nu;
  BoundCertificate certificate;
};

/// nu = sum_i c delta_{lambda_i} with equal c and sum c = B / mu(R^d); nu is
/// then (p,q)-Bessel for mu with bound B.
inline BudgetedBessel budgeted_bessel(const Measure& mu, double B, const std::vector<Point>& points,
                                      const ExponentPair& e) {
  require(B > 0.0, "target bound must be positive");
  require(!points.empty(), "budgeted measure needs points");
  const double total = B / mass(mu);
  const double c = total / static_cast<double>(points.size());
  std::vector<Atom> atoms;
  for (const auto& x : points) atoms.push_back({x, c});
  BudgetedBessel out{Measure::atomic(std::move(atoms)), {}};
  out.certificate.rule = Rule::Budgeted;
  out.certificate.exponents = e;
  out.certificate.upper = B;
  out.certificate.premises = {{"B", B}, {"mass_mu", mass(mu)}, {"weight_sum", total}};
  return out;
}

/// lambda nu1 + (1 - lambda) nu2.
inline Measure convex_combine(const Measure& nu1, const Measure& nu2, double lambda) {
  require(lambda > 0.0 && lambda < 1.0, "lambda must lie in (0, 1)");
  require(nu1.dim() == nu2.dim(), "dimension mismatch");
  const double mu = 1.0 - lambda;
  if (nu1.as_atomic() && nu2.as_atomic()) {
    std::vector<Atom> atoms;
    for (const auto& a : nu1.as_atomic()->atoms) atoms.push_back({a.x, lambda * a.w});
    for (const auto& a : nu2.as_atomic()->atoms) atoms.push_back({a.x, mu * a.w});
    return Measure::atomic(detail::merge_atoms(atoms));
  }
  const auto* d1 = nu1.as_density();
  const auto* d2 = nu2.as_density();
  if (d1 && d2) {
    Box hull(d1->box.size());
    for (std::size_t i = 0; i < hull.size(); ++i)
      hull[i] = {std::min(d1->box[i].lo, d2->box[i].lo), std::max(d1->box[i].hi, d2->box[i].hi)};
    if (d1->piecewise_constant() && d2->piecewise_constant()) {
      std::vector<DensityPiece> pieces;
      for (const auto& p : d1->pieces) pieces.push_back({p.box, lambda * p.value});
      for (const auto& p : d2->pieces) pieces.push_back({p.box, mu * p.value});
      return Measure::piecewise_constant(hull, std::move(pieces), d1->quadrature);
    }
    auto k1 = detail::box_knots(*d1), k2 = detail::box_knots(*d2);
    for (std::size_t i = 0; i < k1.size(); ++i) k1[i].insert(k1[i].end(), k2[i].begin(), k2[i].end());
    DensityFn fn = [a = *d1, b = *d2, lambda, mu](PointView x) { return lambda * a.eval(x) + mu * b.eval(x); };
    return Measure::density(hull, std::move(fn), DensityOptions{d1->quadrature, std::move(k1), d1->smooth && d2->smooth});
  }
  return Measure::sum({scale(nu1, lambda), scale(nu2, mu)});
}

}  // namespace framelab
