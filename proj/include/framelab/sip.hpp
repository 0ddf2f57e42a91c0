#pragma once

// The compatible semi-inner product on L^p(mu)
//
//   [f, g] = ||g||^{2-p} * integral f |g|^{p-2} conj(g) d mu      (p > 1)
//
// with [f, g] = 0 when ||g|| = 0 and a zero integrand wherever g = 0. For
// g = e_t and a probability measure this is the Fourier coefficient
// integral f e^{-2 pi i t.x} d mu, which fourier_coefficient evaluates
// directly (and in closed form where possible).

#include "framelab/parallel.hpp"
#include "framelab/test_function.hpp"

namespace framelab {

namespace detail {

/// Values of f at the atoms of an atomic measure, in atom order.
inline std::vector<Complex> values_on_atoms(const TestFunction& f, const Measure& m) {
  const auto& atoms = m.as_atomic()->atoms;
  if (const auto* s = f.as_atom_samples(); s && s->measure.identity() == m.identity()) return s->values;
  std::vector<Complex> out(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) out[i] = f(atoms[i].x);
  return out;
}

inline std::optional<std::vector<Box>> intersect_regions(const std::optional<std::vector<Box>>& a,
                                                         const std::optional<std::vector<Box>>& b) {
  if (!a) return b;
  if (!b) return a;
  std::vector<Box> out;
  for (const auto& x : *a)
    for (const auto& y : *b) {
      if (!boxes_overlap(x, y)) continue;
      Box c(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].degenerate()) c[i] = x[i];
        else if (y[i].degenerate()) c[i] = y[i];
        else c[i] = {std::max(x[i].lo, y[i].lo), std::min(x[i].hi, y[i].hi)};
      }
      out.push_back(std::move(c));
    }
  return out;
}

/// integral of h d mu where h vanishes outside the (disjoint) regions.
/// Densities are integrated region by region so that region edges are
/// quadrature breakpoints.
template <class H>
Complex integrate_on(const Measure& m, const std::optional<std::vector<Box>>& regions, const H& h) {
  if (const auto* a = m.as_atomic()) {
    Complex s{0.0, 0.0};
    for (const auto& atom : a->atoms) s += atom.w * h(PointView(atom.x));
    return s;
  }
  if (const auto* d = m.as_density(); d && regions) {
    Complex s{0.0, 0.0};
    Box c;
    for (const auto& r : *regions) {
      if (!clip_piece(d->box, r, c)) continue;
      const PointCloud grid = tensor_grid(c, d->knots, d->quadrature);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const PointView x = grid.point(i);
        const double v = d->fn(x);
        if (v != 0.0) s += grid.weights[i] * v * h(x);
      }
    }
    return s;
  }
  if (const auto* sum = m.as_sum()) {
    Complex s{0.0, 0.0};
    for (const auto& t : sum->terms) s += integrate_on(t, regions, h);
    return s;
  }
  return integrate(m, h);
}

/// The function is c e_w for a single frequency, with no mask.
inline bool single_exponential(const TestFunction& f) {
  const auto* t = f.as_trig();
  return t && !t->mask && t->terms.size() == 1;
}

inline double p_integral(const TestFunction& f, const Measure& m, double p) {
  if (const auto* a = m.as_atomic()) {
    const auto v = values_on_atoms(f, m);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += a->atoms[i].w * std::pow(std::abs(v[i]), p);
    return s;
  }
  if (const auto* sm = m.as_sum()) {
    double s = 0.0;
    for (const auto& t : sm->terms) s += p_integral(f, t, p);
    return s;
  }
  if (single_exponential(f)) return std::pow(std::abs(f.as_trig()->terms.front().coef), p) * mass(m);
  if (const auto* t = f.as_trig(); t && !t->mask && p == 2.0 && m.as_self_similar()) {
    // Gram form: sum_{j,k} c_j conj(c_k) mu^(w_k - w_j)
    Complex s{0.0, 0.0};
    for (const auto& a : t->terms)
      for (const auto& b : t->terms) s += a.coef * std::conj(b.coef) * fourier_stieltjes(m, subtract(b.freq, a.freq));
    return std::max(0.0, s.real());
  }
  if (m.as_self_similar())
    throw UnsupportedKind("L^p norms over a self-similar measure need an exponential or p = 2");
  if (const auto* s = f.as_simple()) {
    // Constants on cells: sum |v|^p mu(cell), through the density's own rule.
    if (const auto* d = m.as_density()) {
      double total = 0.0;
      for (std::size_t i = 0; i < s->cells.size(); ++i)
        total += std::pow(std::abs(s->values[i]), p) * detail::density_box_mass(*d, s->cells[i]);
      return total;
    }
  }
  return integrate_on(m, f.support_regions(), [&](PointView x) { return std::pow(std::abs(f(x)), p); }).real();
}

}  // namespace detail

/// ||f||_{L^p(mu)} = (integral |f|^p d mu)^{1/p}
inline double norm_p(const TestFunction& f, const Measure& m, const ExponentPair& e) {
  require(f.dim() == m.dim(), "test function dimension does not match the measure");
  const double v = detail::p_integral(f, m, e.p());
  if (!std::isfinite(v)) throw EvaluationError("L^p norm is not finite");
  return std::pow(v, 1.0 / e.p());
}

/// integral f(x) e^{-2 pi i t.x} d mu(x); independent of p.
inline Complex fourier_coefficient(const TestFunction& f, PointView t, const Measure& m) {
  require(f.dim() == m.dim() && t.size() == m.dim(), "dimension mismatch in fourier_coefficient");
  if (const auto* a = m.as_atomic()) {
    const auto v = detail::values_on_atoms(f, m);
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < v.size(); ++i) s += a->atoms[i].w * v[i] * character(t, a->atoms[i].x);
    return s;
  }
  const auto* trig = f.as_trig();
  if (trig && !trig->mask) {
    Complex s{0.0, 0.0};
    for (const auto& term : trig->terms) s += term.coef * fourier_stieltjes(m, subtract(t, term.freq));
    return s;
  }
  if (const auto* sm = m.as_sum()) {
    Complex s{0.0, 0.0};
    for (const auto& term : sm->terms) s += fourier_coefficient(f, t, term);
    return s;
  }
  if (const auto* d = m.as_density(); d && d->piecewise_constant() && !f.as_atom_samples()) {
    // Closed form over the intersections of density pieces with f's boxes.
    Complex s{0.0, 0.0};
    Box c;
    Point omega(t.size());
    if (trig) {
      for (const auto& term : trig->terms) {
        for (std::size_t i = 0; i < t.size(); ++i) omega[i] = term.freq[i] - t[i];
        for (const auto& p : d->pieces)
          if (clip_piece(p.box, *trig->mask, c)) s += term.coef * p.value * box_exponential(c, omega);
      }
    } else {
      const auto& simple = *f.as_simple();
      for (std::size_t i = 0; i < t.size(); ++i) omega[i] = -t[i];
      for (std::size_t k = 0; k < simple.cells.size(); ++k)
        for (const auto& p : d->pieces)
          if (clip_piece(p.box, simple.cells[k], c)) s += simple.values[k] * p.value * box_exponential(c, omega);
    }
    return s;
  }
  if (m.as_self_similar())
    throw UnsupportedKind("Fourier coefficients over a self-similar measure need an unmasked trig function");
  return detail::integrate_on(m, f.support_regions(), [&](PointView x) { return f(x) * character(t, x); });
}

/// The compatible semi-inner product [f, g] on L^p(mu), p > 1.
inline Complex semi_inner_product(const TestFunction& f, const TestFunction& g, const Measure& m,
                                  const ExponentPair& e) {
  require(!e.is_endpoint(), "the semi-inner product formula needs p > 1; use sup_norm_transform for p = 1");
  require(f.dim() == m.dim() && g.dim() == m.dim(), "dimension mismatch in semi_inner_product");
  const double p = e.p();
  const double ng = norm_p(g, m, e);
  if (ng == 0.0) return {0.0, 0.0};
  auto weight = [p](Complex gv) -> Complex {
    const double a = std::abs(gv);
    if (a == 0.0) return {0.0, 0.0};
    return std::pow(a, p - 2.0) * std::conj(gv);
  };
  Complex integral{0.0, 0.0};
  if (const auto* a = m.as_atomic()) {
    const auto fv = detail::values_on_atoms(f, m);
    const auto gv = detail::values_on_atoms(g, m);
    for (std::size_t i = 0; i < fv.size(); ++i) integral += a->atoms[i].w * fv[i] * weight(gv[i]);
  } else if (m.as_self_similar() && detail::single_exponential(g)) {
    // |g| is constant, so the integral is a Fourier coefficient of f.
    const auto& term = g.as_trig()->terms.front();
    integral = weight(term.coef) * fourier_coefficient(f, term.freq, m);
  } else {
    const auto regions = detail::intersect_regions(f.support_regions(), g.support_regions());
    integral = detail::integrate_on(m, regions, [&](PointView x) { return f(x) * weight(g(x)); });
  }
  return std::pow(ng, 2.0 - p) * integral;
}

/// Largest |fourier_coefficient(f, t)| over a uniform grid of `grid` points
/// per axis spanning the window (endpoints included). A lower estimate of
/// the true sup over the window.
inline double sup_norm_transform(const TestFunction& f, const Measure& m, const Box& window, int grid = 2048) {
  validate_box(window);
  require(window.size() == m.dim(), "window dimension mismatch");
  require(grid >= 1, "grid must have at least one point per axis");
  const std::size_t d = window.size();
  std::vector<std::size_t> counts(d);
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    counts[i] = window[i].degenerate() ? 1 : static_cast<std::size_t>(grid);
    total *= counts[i];
  }
  std::vector<double> values(total);
  parallel_for(total, [&](std::size_t n) {
    Point t(d);
    std::size_t r = n;
    for (std::size_t i = d; i-- > 0;) {
      const std::size_t k = r % counts[i];
      r /= counts[i];
      const double frac = counts[i] == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(counts[i] - 1);
      t[i] = window[i].lo + frac * window[i].length();
    }
    values[n] = std::abs(fourier_coefficient(f, t, m));
  });
  return *std::max_element(values.begin(), values.end());
}

}  // namespace framelab
