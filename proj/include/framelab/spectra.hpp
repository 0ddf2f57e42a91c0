#pragma once

// Countable frequency sets with a fixed enumeration.
//
// Every set is enumerated shell by shell and truncate(level) returns shells
// 0..level concatenated, so a truncation is always a prefix of the next one.
//   Lattice       step * Z^d; shell k is the sup-norm sphere of radius k,
//                 lexicographic within the shell
//   ShiftedUnion  base shell k, then base shell k + s for each shift s
//   DigitSet      sums sum_{m<=k} b^m d_m, d_m in D; shell k holds the sums
//                 whose highest nonzero digit sits at power k (sorted)
//   Explicit      a finite list, returned in full at every level
//   Perturbed     base points plus offsets uniform in [-C, C]^d, drawn
//                 per enumeration index from the seed

#include <memory>
#include <random>
#include <set>

#include "framelab/measure.hpp"

namespace framelab {

namespace detail {
inline std::vector<Point> dedupe(std::vector<Point> pts);
}

class SpectrumSet {
 public:
  enum class Kind { Lattice, ShiftedUnion, DigitSet, Explicit, Perturbed };

  static SpectrumSet lattice(std::size_t dim, double step = 1.0) {
    require(dim >= 1, "lattice dimension must be >= 1");
    require(std::isfinite(step) && step > 0.0, "lattice step must be positive");
    SpectrumSet s(Kind::Lattice, dim);
    s.step_ = step;
    return s;
  }

  static SpectrumSet shifted_union(SpectrumSet base, std::vector<Point> shifts) {
    require(!shifts.empty(), "shifted union needs at least one shift");
    for (const auto& v : shifts) require(v.size() == base.dim(), "shift dimension mismatch");
    SpectrumSet s(Kind::ShiftedUnion, base.dim());
    s.base_ = std::make_shared<const SpectrumSet>(std::move(base));
    s.points_ = std::move(shifts);
    return s;
  }

  /// max_level < 0 leaves the set infinite.
  static SpectrumSet digit_set(double base, std::vector<Point> digits, int max_level = -1) {
    require(std::isfinite(base) && std::abs(base) > 1.0, "digit base must satisfy |b| > 1");
    require(!digits.empty(), "digit set needs digits");
    const std::size_t d = digits.front().size();
    bool has_zero = false;
    for (const auto& v : digits) {
      require(v.size() == d && d >= 1, "digits must share a dimension");
      has_zero = has_zero || std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    }
    require(has_zero, "digit set must contain 0 so that levels are nested");
    std::sort(digits.begin(), digits.end());
    digits.erase(std::unique(digits.begin(), digits.end()), digits.end());
    SpectrumSet s(Kind::DigitSet, d);
    s.step_ = base;
    s.points_ = std::move(digits);
    s.max_level_ = max_level;
    return s;
  }

  static SpectrumSet explicit_set(std::vector<Point> points) {
    require(!points.empty(), "explicit spectrum needs points");
    const std::size_t d = points.front().size();
    for (const auto& v : points) require(v.size() == d && d >= 1, "explicit points must share a dimension");
    SpectrumSet s(Kind::Explicit, d);
    s.points_ = detail::dedupe(std::move(points));
    return s;
  }

  static SpectrumSet perturbed(SpectrumSet base, double C, std::uint64_t seed) {
    require(std::isfinite(C) && C >= 0.0, "perturbation radius must be >= 0");
    SpectrumSet s(Kind::Perturbed, base.dim());
    s.base_ = std::make_shared<const SpectrumSet>(std::move(base));
    s.radius_ = C;
    s.seed_ = seed;
    return s;
  }

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  double step() const { return step_; }
  const SpectrumSet* base() const { return base_.get(); }
  const std::vector<Point>& points() const { return points_; }  // shifts, digits or explicit points
  int max_level() const { return max_level_; }
  double radius() const { return radius_; }
  std::uint64_t seed() const { return seed_; }

  /// Points of shell k, in enumeration order.
  std::vector<Point> shell(int k) const {
    require(k >= 0, "shell index must be >= 0");
    switch (kind_) {
      case Kind::Lattice: return lattice_shell(k);
      case Kind::ShiftedUnion: {
        std::vector<Point> out;
        const auto b = base_->shell(k);
        for (const auto& s : points_)
          for (const auto& x : b) out.push_back(add(x, s));
        return out;
      }
      case Kind::DigitSet: return digit_shell(k);
      case Kind::Explicit: return k == 0 ? points_ : std::vector<Point>{};
      case Kind::Perturbed: break;
    }
    throw InvalidArgument("perturbed sets are enumerated through truncate");
  }

  /// Shells 0..level, duplicates removed (first occurrence kept).
  std::vector<Point> truncate(int level) const {
    require(level >= 0, "truncation level must be >= 0");
    if (kind_ == Kind::Perturbed) {
      auto pts = base_->truncate(level);
      for (std::size_t n = 0; n < pts.size(); ++n) {
        const Point off = offset(n);
        for (std::size_t i = 0; i < dim_; ++i) pts[n][i] += off[i];
      }
      return pts;
    }
    std::vector<Point> out;
    for (int k = 0; k <= level; ++k) {
      auto s = shell(k);
      out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    }
    return detail::dedupe(std::move(out));
  }

  /// Offset of the n-th enumerated point of a perturbed set.
  Point offset(std::size_t n) const {
    require(kind_ == Kind::Perturbed, "offsets exist only for perturbed sets");
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(static_cast<std::uint64_t>(n) >> 32)};
    std::mt19937_64 rng(seq);
    Point off(dim_);
    for (auto& v : off) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
      v = radius_ * (2.0 * u - 1.0);
    }
    return off;
  }

 private:
  SpectrumSet(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {}

  std::vector<Point> lattice_shell(int k) const {
    std::vector<Point> out;
    if (k == 0) {
      out.push_back(Point(dim_, 0.0));
      return out;
    }
    // Lexicographic walk over the sup-norm sphere; the last axis is pinned to
    // +-k unless an earlier axis already sits on the sphere.
    Point x(dim_);
    auto walk = [&](auto&& self, std::size_t axis, bool on_sphere) -> void {
      const bool last = axis + 1 == dim_;
      for (long v = -k; v <= k; ++v) {
        const bool here = std::labs(v) == k;
        if (last && !on_sphere && !here) continue;
        x[axis] = step_ * static_cast<double>(v);
        if (last) out.push_back(x);
        else self(self, axis + 1, on_sphere || here);
      }
    };
    walk(walk, 0, false);
    return out;
  }

  std::vector<Point> digit_shell(int k) const {
    if (max_level_ >= 0 && k > max_level_) return {};
    if (k == 0) return points_;
    // Lower digits range over D; digit k over D \ {0}.
    std::vector<Point> lower{Point(dim_, 0.0)};
    double scale = 1.0;
    for (int m = 0; m < k; ++m, scale *= step_) {
      std::vector<Point> next;
      for (const auto& x : lower)
        for (const auto& dgt : points_) {
          Point y = x;
          for (std::size_t i = 0; i < dim_; ++i) y[i] += scale * dgt[i];
          next.push_back(std::move(y));
        }
      lower = std::move(next);
    }
    std::vector<Point> out;
    for (const auto& dgt : points_) {
      if (std::all_of(dgt.begin(), dgt.end(), [](double v) { return v == 0.0; })) continue;
      for (const auto& x : lower) {
        Point y = x;
        for (std::size_t i = 0; i < dim_; ++i) y[i] += scale * dgt[i];
        out.push_back(std::move(y));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  Kind kind_;
  std::size_t dim_;
  double step_ = 1.0;
  std::shared_ptr<const SpectrumSet> base_;
  std::vector<Point> points_;
  int max_level_ = -1;
  double radius_ = 0.0;
  std::uint64_t seed_ = 0;
};

namespace detail {

inline std::vector<Point> dedupe(std::vector<Point> pts) {
  std::set<Point> seen;
  std::vector<Point> out;
  out.reserve(pts.size());
  for (auto& x : pts)
    if (seen.insert(x).second) out.push_back(std::move(x));
  return out;
}

}  // namespace detail

/// Perturbed copy of the set with offsets uniform in [-C, C]^d.
inline SpectrumSet perturb(const SpectrumSet& s, double C, std::uint64_t seed) {
  require(C > 0.0, "perturbation radius must be positive");
  return SpectrumSet::perturbed(s, C, seed);
}

inline std::vector<Point> truncate(const SpectrumSet& s, int level) { return s.truncate(level); }

/// Atomic measure at the truncated points with unit or given weights.
inline Measure as_atomic_measure(const SpectrumSet& s, int level, const std::vector<double>* weights = nullptr) {
  auto pts = s.truncate(level);
  if (weights) require(weights->size() == pts.size(), "got ", weights->size(), " weights for ", pts.size(), " points");
  std::vector<Atom> atoms;
  atoms.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) atoms.push_back({std::move(pts[i]), weights ? (*weights)[i] : 1.0});
  return Measure::atomic(std::move(atoms));
}

}  // namespace framelab
