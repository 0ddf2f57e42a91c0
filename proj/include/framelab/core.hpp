#pragma once

// Basic vocabulary shared by every framelab module: points, boxes, complex
// scalars, the conjugate exponent pair and the error hierarchy.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace framelab {

using Complex = std::complex<double>;
using Point = std::vector<double>;
using PointView = std::span<const double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Coincident atoms closer than this (Euclidean) are merged.
inline constexpr double kMergeTolerance = 1e-12;
// Mass within this distance of 1 flags a probability measure.
inline constexpr double kProbabilityTolerance = 1e-9;
// Ratios functional / norm^q are refused below this norm.
inline constexpr double kDegenerateNorm = 1e-12;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical evaluation produced a non-finite value or otherwise failed.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for the measure (or function) representation.
class UnsupportedKind : public Error {
 public:
  using Error::Error;
};

/// Argument outside the operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Every sampled test function had (numerically) zero norm.
class DegenerateFamily : public Error {
 public:
  using Error::Error;
};

namespace detail {
template <class... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  os.precision(17);
  (os << ... << args);
  return os.str();
}
}  // namespace detail

template <class E = InvalidArgument, class... Args>
inline void require(bool cond, const Args&... msg) {
  if (!cond) throw E(detail::concat(msg...));
}

// ---------------------------------------------------------------------------
// Intervals and boxes

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool degenerate() const { return lo == hi; }

  // Degenerate intervals contain only their point; otherwise half-open [lo, hi).
  bool contains(double x) const { return degenerate() ? x == lo : (lo <= x && x < hi); }
  bool contains_closed(double x) const { return lo <= x && x <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

using Box = std::vector<Interval>;

inline bool box_contains(const Box& box, PointView x) {
  for (std::size_t i = 0; i < box.size(); ++i)
    if (!box[i].contains(x[i])) return false;
  return true;
}

inline bool box_contains_closed(const Box& box, PointView x) {
  for (std::size_t i = 0; i < box.size(); ++i)
    if (!box[i].contains_closed(x[i])) return false;
  return true;
}

/// Lebesgue volume over the non-degenerate axes.
inline double box_volume(const Box& box) {
  double v = 1.0;
  for (const auto& iv : box)
    if (!iv.degenerate()) v *= iv.length();
  return v;
}

inline Box minkowski_sum(const Box& a, const Box& b) {
  Box out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = {a[i].lo + b[i].lo, a[i].hi + b[i].hi};
  return out;
}

inline void validate_box(const Box& box) {
  require(!box.empty(), "box must have at least one axis");
  for (const auto& iv : box)
    require(std::isfinite(iv.lo) && std::isfinite(iv.hi) && iv.lo <= iv.hi,
            "box axis [", iv.lo, ", ", iv.hi, "] is not a finite closed interval");
}

// ---------------------------------------------------------------------------
// Small vector helpers

inline double dot(PointView a, PointView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(PointView a) { return std::sqrt(dot(a, a)); }

inline double distance(PointView a, PointView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline Point add(PointView a, PointView b) {
  Point out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Point subtract(PointView a, PointView b) {
  Point out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

/// e^{-2 pi i t.x}
inline Complex character(PointView t, PointView x) {
  const double phase = -kTwoPi * dot(t, x);
  return {std::cos(phase), std::sin(phase)};
}

// ---------------------------------------------------------------------------
// Conjugate exponents

/// Conjugate pair (p, q) with 1/p + 1/q = 1. q is always derived from p; p = 1
/// pairs with q = infinity.
class ExponentPair {
 public:
  explicit ExponentPair(double p) : p_(p) {
    require(std::isfinite(p) && p >= 1.0, "exponent p must lie in [1, inf), got ", p);
    q_ = (p == 1.0) ? kInf : p / (p - 1.0);
  }

  /// The pair whose q is the given value (q = inf gives p = 1).
  static ExponentPair from_q(double q) {
    require(q > 1.0, "exponent q must lie in (1, inf], got ", q);
    return ExponentPair(std::isinf(q) ? 1.0 : q / (q - 1.0));
  }

  double p() const { return p_; }
  double q() const { return q_; }
  bool is_endpoint() const { return p_ == 1.0; }

  friend bool operator==(const ExponentPair& a, const ExponentPair& b) { return a.p_ == b.p_; }

 private:
  double p_;
  double q_;
};

}  // namespace framelab
