#pragma once

// Composite Gauss-Legendre rules on boxes, plus closed forms for exponentials
// integrated over boxes (used for piecewise-constant densities, where sampled
// quadrature cannot follow high frequencies).

#include <cmath>
#include <map>
#include <mutex>

#include "framelab/core.hpp"

namespace framelab {

/// Panels per unit length and Gauss nodes per panel, applied on each axis.
struct QuadratureSpec {
  int panels_per_unit = 64;
  int nodes = 8;

  friend bool operator==(const QuadratureSpec&, const QuadratureSpec&) = default;
};

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

namespace detail {

inline GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  if (n == 1) {
    rule.weights[0] = 2.0;
    return rule;
  }
  // Legendre P_n and its derivative at x by the three-term recurrence.
  auto legendre = [n](double x, double& deriv) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    deriv = n * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };
  for (int i = 0; i < n / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double deriv = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      const double dx = legendre(x, deriv) / deriv;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, deriv);
    const double w = 2.0 / ((1.0 - x * x) * deriv * deriv);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    double deriv = 0.0;
    legendre(0.0, deriv);
    rule.weights[n / 2] = 2.0 / (deriv * deriv);
  }
  return rule;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1]; computed once per n.
inline const GaussRule& gauss_legendre(int n) {
  require(n >= 1 && n <= 256, "Gauss-Legendre order must be in [1, 256], got ", n);
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
  return it->second;
}

/// Weighted points in R^d with flat coordinate storage.
struct PointCloud {
  std::size_t dim = 0;
  std::vector<double> coords;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  PointView point(std::size_t i) const { return {coords.data() + i * dim, dim}; }

  void push(PointView x, double w) {
    coords.insert(coords.end(), x.begin(), x.end());
    weights.push_back(w);
  }
};

/// Composite rule on one axis. Knots strictly inside the interval split it
/// into segments, and every segment gets ceil(panels_per_unit * length)
/// panels. A degenerate interval yields one node of weight 1.
inline void axis_rule(const Interval& iv, std::span<const double> knots, const QuadratureSpec& spec,
                      std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.clear();
  weights.clear();
  if (iv.degenerate()) {
    nodes.push_back(iv.lo);
    weights.push_back(1.0);
    return;
  }
  std::vector<double> cuts{iv.lo};
  for (double k : knots)
    if (k > iv.lo && k < iv.hi) cuts.push_back(k);
  cuts.push_back(iv.hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const GaussRule& rule = gauss_legendre(spec.nodes);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s], b = cuts[s + 1];
    const int panels = std::max(1, static_cast<int>(std::ceil(spec.panels_per_unit * (b - a) - 1e-9)));
    const double h = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
      const double mid = a + (k + 0.5) * h;
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        nodes.push_back(mid + 0.5 * h * rule.nodes[j]);
        weights.push_back(0.5 * h * rule.weights[j]);
      }
    }
  }
}

/// Tensor-product composite Gauss-Legendre rule on a box.
inline PointCloud tensor_grid(const Box& box, const std::vector<std::vector<double>>& knots,
                              const QuadratureSpec& spec) {
  const std::size_t d = box.size();
  std::vector<std::vector<double>> ax_nodes(d), ax_weights(d);
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    std::span<const double> k;
    if (i < knots.size()) k = knots[i];
    axis_rule(box[i], k, spec, ax_nodes[i], ax_weights[i]);
    total *= ax_nodes[i].size();
  }
  PointCloud cloud;
  cloud.dim = d;
  cloud.coords.reserve(total * d);
  cloud.weights.reserve(total);
  std::vector<std::size_t> idx(d, 0);
  Point x(d);
  for (std::size_t n = 0; n < total; ++n) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = ax_nodes[i][idx[i]];
      w *= ax_weights[i][idx[i]];
    }
    cloud.push(x, w);
    for (std::size_t i = d; i-- > 0;) {
      if (++idx[i] < ax_nodes[i].size()) break;
      idx[i] = 0;
    }
  }
  return cloud;
}

/// sin(z)/z, stable near zero.
inline double sinc(double z) {
  if (std::abs(z) < 1e-5) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

/// Integral of e^{2 pi i omega x} over the interval; for a degenerate
/// interval, the point evaluation e^{2 pi i omega lo}.
inline Complex axis_exponential(const Interval& iv, double omega) {
  if (iv.degenerate()) {
    const double ph = kTwoPi * omega * iv.lo;
    return {std::cos(ph), std::sin(ph)};
  }
  const double len = iv.length();
  const double mid = 0.5 * (iv.lo + iv.hi);
  const double ph = kTwoPi * omega * mid;
  return Complex(std::cos(ph), std::sin(ph)) * (len * sinc(kPi * omega * len));
}

/// Integral of e^{2 pi i omega.x} over a box (degenerate axes evaluate).
inline Complex box_exponential(const Box& box, PointView omega) {
  Complex v{1.0, 0.0};
  for (std::size_t i = 0; i < box.size(); ++i) v *= axis_exponential(box[i], omega[i]);
  return v;
}

/// Part of a measure piece lying in a region. The piece's degenerate axes
/// carry point mass and survive if the region contains the point; a
/// degenerate region axis against a non-degenerate piece axis is a null set.
/// Returns false when the overlap carries no mass.
inline bool clip_piece(const Box& piece, const Box& region, Box& out) {
  out.resize(piece.size());
  for (std::size_t i = 0; i < piece.size(); ++i) {
    const Interval& x = piece[i];
    const Interval& y = region[i];
    if (x.degenerate()) {
      if (!y.contains_closed(x.lo)) return false;
      out[i] = x;
    } else if (y.degenerate()) {
      return false;
    } else {
      const double lo = std::max(x.lo, y.lo), hi = std::min(x.hi, y.hi);
      if (!(hi > lo)) return false;
      out[i] = {lo, hi};
    }
  }
  return true;
}

}  // namespace framelab
