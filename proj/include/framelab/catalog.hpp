#pragma once

// Built-in worked examples. Each entry runs end to end and compares against
// a closed form, an identity or a threshold frozen from an independent
// high-truncation computation.

#include <chrono>
#include <functional>
#include <limits>

#include "framelab/constructions.hpp"

namespace framelab {

enum class Outcome { Identity, Bound, Divergence, NoFrame };

inline std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Identity: return "identity";
    case Outcome::Bound: return "bound";
    case Outcome::Divergence: return "divergence";
    case Outcome::NoFrame: return "no-frame";
  }
  return "unknown";
}

struct Report {
  std::string id;
  bool pass = false;
  double measured = 0.0;
  double expected = std::numeric_limits<double>::quiet_NaN();  // NaN: no single expected value
  double tolerance = 0.0;
  std::string comparison;  // how measured is judged against expected
  long truncation = -1;    // -1: no truncation parameter
  double runtime_ms = 0.0;
  std::vector<std::pair<std::string, double>> details;
  std::vector<std::string> notes;
};

struct CatalogEntry {
  std::string id;
  std::string summary;
  std::string mu;
  std::string nu;
  std::string exponents;
  Outcome outcome = Outcome::Identity;
  double tolerance = 0.0;
  long default_truncation = -1;  // -1: entry has no truncation parameter
  std::string truncation_meaning;
  std::function<Report(long)> run;
};

namespace catalog_detail {

inline std::mt19937_64 rng_for(const std::string& id) {
  std::seed_seq seq(id.begin(), id.end());
  return std::mt19937_64(seq);
}

inline Measure two_interval_measure() {
  return Measure::piecewise_constant({{0.0, 3.0}}, {{{{0.0, 1.0}}, 0.5}, {{{2.0, 3.0}}, 0.5}});
}

inline Report two_atom(long) {
  Report r;
  const Measure mu = Measure::atomic({{{0.0}, 0.5}, {{0.5}, 0.5}});
  const Measure nu = Measure::atomic({{{0.0}, 1.0}, {{1.0}, 1.0}});
  const ExponentPair e(2.0);
  auto rng = rng_for("two_atom");
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const TestFunction f = random_atom_samples(rng, mu);
    const double n = norm_p(f, mu, e);
    worst = std::max(worst, std::abs(bessel_functional(f, mu, nu, e) - n * n));
  }
  r.measured = worst;
  r.expected = 0.0;
  r.tolerance = 1e-12;
  r.comparison = "measured < tolerance";
  r.pass = worst < r.tolerance;
  r.details = {{"functions", 1000}};
  return r;
}

inline Report two_interval(long N) {
  require(N >= 1, "two_interval needs a lattice window >= 1");
  Report r;
  r.truncation = N;
  const Measure mu = two_interval_measure();
  const ExponentPair e(2.0);
  const SpectrumSet lambda = SpectrumSet::shifted_union(SpectrumSet::lattice(1), {{0.0}, {0.25}});

  std::vector<std::pair<std::string, TestFunction>> battery;
  battery.emplace_back("chi_[0,1]", indicator({{0.0, 1.0}}));
  battery.emplace_back("one", constant_function(1));
  battery.emplace_back("e_1", exponential({1.0}));
  battery.emplace_back("1+2e_-2+ie_3", TestFunction::trig({{{0.0}, 1.0}, {{-2.0}, 2.0}, {{3.0}, Complex(0.0, 1.0)}}));

  bool monotone = true;
  double main_sum = 0.0;
  double worst_battery = 0.0;
  for (std::size_t b = 0; b < battery.size(); ++b) {
    const TestFunction& f = battery[b].second;
    double s = 0.0;
    for (long k = 0; k <= N; ++k) {
      const double before = s;
      for (const auto& t : lambda.shell(static_cast<int>(k))) s += std::norm(fourier_coefficient(f, t, mu));
      monotone = monotone && s >= before;
      if (b == 0 && (k == 10 || k == 100 || k == 1000)) r.details.emplace_back("sum_at_" + std::to_string(k), s);
    }
    const double n2 = std::pow(norm_p(f, mu, e), 2.0);
    if (b == 0) main_sum = s;
    else worst_battery = std::max(worst_battery, std::abs(s - n2) / n2);
    r.details.emplace_back("residual_" + battery[b].first, s - n2);
  }
  r.measured = main_sum;
  r.expected = 0.5;
  r.tolerance = 5e-5;
  r.comparison = "expected - tolerance <= measured <= expected, monotone in truncation";
  r.details.emplace_back("battery_worst_relative_residual", worst_battery);
  r.notes.push_back("battery (1, e_1, a trig polynomial) checked to 1e-10 relative: evidence for the basis claim, not a proof");
  r.pass = monotone && main_sum >= 0.5 - r.tolerance && main_sum <= 0.5 + 1e-12 && worst_battery <= 1e-10;
  return r;
}

inline double hausdorff_young_worst(std::mt19937_64& rng, std::size_t dim, int degree, int window, int count,
                                    QuadratureSpec quad) {
  const Measure mu = Measure::lebesgue(Box(dim, Interval{0.0, 1.0}), quad);
  const Measure nu = as_atomic_measure(SpectrumSet::lattice(dim), window);
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const TestFunction f = random_full_trig(rng, dim, degree);
    for (double p : {1.25, 1.5, 2.0}) {
      const ExponentPair e(p);
      const double nq = std::pow(norm_p(f, mu, e), e.q());
      worst = std::max(worst, bessel_functional(f, mu, nu, e) / nq);
    }
  }
  return worst;
}

inline Report unit_cube_lattice(long window) {
  require(window >= 1, "lattice window must be >= 1");
  Report r;
  r.truncation = window;
  auto rng = rng_for("unit_cube_lattice");
  const double d1 = hausdorff_young_worst(rng, 1, 32, static_cast<int>(window), 200, QuadratureSpec{});
  // d = 2 runs on a coarser rule and a smaller window to stay within budget.
  const int w2 = static_cast<int>(std::min<long>(window, 8));
  const double d2 = hausdorff_young_worst(rng, 2, 4, w2, 50, QuadratureSpec{16, 8});
  r.measured = std::max(d1, d2);
  r.expected = 1.0;
  r.tolerance = 1e-9;
  r.comparison = "measured <= expected + tolerance";
  r.details = {{"worst_ratio_d1", d1}, {"worst_ratio_d2", d2}, {"window_d2", w2}};
  r.notes.push_back("ratio = sum_{|n|<=window} |f^(n)|^q / ||f||_p^q, p in {1.25, 1.5, 2}");
  r.pass = r.measured <= 1.0 + r.tolerance;
  return r;
}

/// Level-8 partial sum for f = e_{0.3}, frozen from a depth-60 product and
/// level-12 spectrum computed independently.
inline constexpr double kCantorShiftedLevel8 = 0.9999991332286268;
inline constexpr double kCantorShiftedThreshold = 0.9999991;

inline Report cantor4(long level) {
  require(level >= 1, "cantor4 needs a digit level >= 1");
  Report r;
  r.truncation = level;
  const Measure mu4 = Measure::self_similar({{4}}, {{0}, {2}}, {0.5, 0.5});
  const SpectrumSet lambda = SpectrumSet::digit_set(4.0, {{0.0}, {1.0}});
  const std::vector<std::pair<std::string, TestFunction>> battery = {{"one", constant_function(1)},
                                                                    {"e_0.3", exponential({0.3})}};
  bool monotone = true, bounded = true;
  std::vector<double> finals;
  for (const auto& [name, f] : battery) {
    double s = 0.0, prev = -1.0;
    for (long k = 0; k <= level; ++k) {
      for (const auto& t : lambda.shell(static_cast<int>(k))) s += std::norm(fourier_coefficient(f, t, mu4));
      if (k >= 1) {
        monotone = monotone && s >= prev;
        bounded = bounded && s <= 1.0 + 1e-9;
        prev = s;
      }
      if (k == 8) r.details.emplace_back("sum_level8_" + name, s);
    }
    finals.push_back(s);
    r.details.emplace_back("sum_" + name, s);
  }
  r.measured = finals[0];
  r.expected = 1.0;
  r.tolerance = 1e-12;
  r.comparison = "monotone over levels 1..L, <= 1 + 1e-9, >= expected - tolerance";
  r.details.emplace_back("threshold_level8_e_0.3", kCantorShiftedThreshold);
  bool threshold = finals[0] >= 1.0 - r.tolerance;
  if (level >= 8) threshold = threshold && finals[1] >= kCantorShiftedThreshold;
  r.pass = monotone && bounded && threshold;
  return r;
}

inline Report dirac_tight(long) {
  Report r;
  const Measure mu = Measure::dirac({0.0});
  auto rng = rng_for("dirac_tight");
  double worst = 0.0;
  for (double m : {0.5, 1.0, 3.0}) {
    const Measure nu = Measure::atomic({{{-1.3}, 0.2 * m}, {{0.2}, 0.3 * m}, {{2.7}, 0.5 * m}});
    for (double p : {1.5, 2.0, 4.0}) {
      const ExponentPair e(p);
      for (int i = 0; i < 100; ++i) {
        const TestFunction f = random_trig(rng, 1, 32, 8);
        const double ratio = bessel_functional(f, mu, nu, e) / std::pow(norm_p(f, mu, e), e.q());
        worst = std::max(worst, std::abs(ratio - m));
      }
    }
  }
  r.measured = worst;
  r.expected = 0.0;
  r.tolerance = 1e-12;
  r.comparison = "max |ratio - mass(nu)| < tolerance";
  r.pass = worst < r.tolerance;
  return r;
}

/// Degree-8 polynomial with c_k = cos k + i sin(2k) / (1 + |k|).
inline TestFunction plancherel_function() {
  std::vector<TrigTerm> terms;
  for (int k = -8; k <= 8; ++k)
    terms.push_back({{static_cast<double>(k)}, Complex(std::cos(k), std::sin(2.0 * k) / (1.0 + std::abs(k)))});
  return TestFunction::trig(std::move(terms));
}

/// Windowed ratio at T = 64 for plancherel_function, frozen from an
/// independent adaptive integration.
inline constexpr double kPlancherelRatio64 = 0.9994855374364271;

inline Report lebesgue_plancherel(long T) {
  require(T >= 1, "window half-width must be >= 1");
  Report r;
  r.truncation = T;
  const Measure mu = Measure::lebesgue({{0.0, 1.0}});
  const TestFunction f = plancherel_function();
  const ExponentPair e(2.0);
  const double n2 = std::pow(norm_p(f, mu, e), 2.0);
  std::vector<long> schedule;
  for (long t = 8; t < T; t *= 2) schedule.push_back(t);
  schedule.push_back(T);
  bool monotone = true;
  double prev = 0.0, last = 0.0;
  for (long t : schedule) {
    const Measure window = Measure::lebesgue({{-static_cast<double>(t), static_cast<double>(t)}});
    last = bessel_functional(f, mu, window, e) / n2;
    monotone = monotone && last >= prev;
    prev = last;
    r.details.emplace_back("ratio_T" + std::to_string(t), last);
  }
  r.measured = last;
  r.expected = 1.0;
  r.tolerance = 0.05;
  r.comparison = "|measured - expected| <= tolerance, monotone in T";
  bool oracle = true;
  if (T == 64) {
    oracle = std::abs(last - kPlancherelRatio64) <= 1e-6;
    r.details.emplace_back("frozen_ratio_T64", kPlancherelRatio64);
  }
  r.pass = monotone && std::abs(last - 1.0) <= r.tolerance && oracle;
  return r;
}

inline Report no_frame_counterexample(long level) {
  require(level >= 1, "spectrum level must be >= 1");
  Report r;
  r.truncation = level;
  const Measure mu = Measure::sum({Measure::lebesgue({{0.0, 1.0}}), Measure::dirac({2.0})});
  const std::vector<std::pair<std::string, Measure>> nus = {
      {"Z+Z/4", as_atomic_measure(SpectrumSet::shifted_union(SpectrumSet::lattice(1), {{0.0}, {0.25}}),
                                  static_cast<int>(level))},
      {"two_point", Measure::atomic({{{1.0 / 3.0}, 0.5}, {{-0.5}, 0.5}})}};
  const TestFunction point = point_indicator(std::vector<double>{2.0});
  bool pass = true;
  double worst100 = 0.0;
  for (const auto& [name, nu] : nus) {
    for (double p : {1.5, 2.0}) {
      const ExponentPair e(p);
      double prev = kInf;
      for (double T : {1.0, 10.0, 100.0}) {
        const TestFunction g = modulated_indicator(std::vector<double>{T}, {{0.0, 1.0}});
        const double ratio = bessel_functional(g, mu, nu, e) / std::pow(norm_p(g, mu, e), e.q());
        pass = pass && ratio < prev;
        prev = ratio;
        r.details.emplace_back(name + "_p" + std::to_string(p).substr(0, 3) + "_T" + std::to_string(int(T)), ratio);
      }
      worst100 = std::max(worst100, prev);
      pass = pass && prev < 0.01;
      const double rp = bessel_functional(point, mu, nu, e) / std::pow(norm_p(point, mu, e), e.q());
      pass = pass && rp >= 0.5 * mass(nu);
      r.details.emplace_back(name + "_p" + std::to_string(p).substr(0, 3) + "_point", rp);
    }
    TestFamily fam;
    fam.trig = false;
    fam.modulations = {{1.0}, {10.0}, {100.0}};
    fam.fixed = {point};
    const auto est = estimate_bounds(mu, nu, ExponentPair(2.0), fam, 16, 0, static_cast<int>(level));
    r.details.emplace_back(name + "_lower_hat", est.lower_hat);
  }
  r.measured = worst100;
  r.expected = 0.0;
  r.tolerance = 0.01;
  r.comparison = "ratio(g_T) decreasing over T in {1,10,100}, measured (T=100) < tolerance, point ratio >= mass/2";
  r.pass = pass;
  return r;
}

inline Report p_gt_2_divergence(long n_max) {
  require(n_max >= 1000, "schedule needs N >= 1000");
  Report r;
  r.truncation = n_max;
  const double eps = 0.2;
  const long top = 2 * n_max;
  std::vector<double> S(static_cast<std::size_t>(top) + 1, 0.0);
  for (long n = 2; n <= top; ++n) {
    const double c = 1.0 / (std::sqrt(static_cast<double>(n)) * std::pow(std::log(static_cast<double>(n)), 2.0));
    S[n] = S[n - 1] + std::pow(c, 2.0 - eps);
  }
  bool growth = true;
  double min_increment = kInf;
  for (long N = 1000; N <= n_max; N += 1000) {
    const double inc = S[2 * N] - S[N];
    growth = growth && inc > 0.0;
    min_increment = std::min(min_increment, inc);
  }
  // Condensed series 2^j c_{2^j}^{2-eps}: term ratio tends to 2^{eps/2} > 1.
  const double limit_ratio = std::pow(2.0, eps / 2.0);
  auto condensed = [&](double j) {
    return std::pow(2.0, j) * std::pow(std::pow(2.0, -j / 2.0) / std::pow(j * std::log(2.0), 2.0), 2.0 - eps);
  };
  const double tail_ratio = condensed(1001.0) / condensed(1000.0);
  for (long N : {1000L, 10000L, 100000L, 1000000L})
    if (N <= top) r.details.emplace_back("S_" + std::to_string(N), S[N]);
  r.details.emplace_back("S_" + std::to_string(top), S[top]);
  r.details.emplace_back("min_increment", min_increment);
  r.details.emplace_back("condensed_ratio_limit", limit_ratio);
  r.details.emplace_back("condensed_ratio_j1000", tail_ratio);
  r.measured = S[top];
  r.comparison = "S_2N > S_N for N = 1000, 2000, ..., N_max; condensed term ratio > 1";
  r.notes.push_back("terms n^{-0.9} (log n)^{-3.6}: divergent, but the growth is logarithmically slow at desk scale");
  r.pass = growth && limit_ratio > 1.0 && tail_ratio > 1.0;
  return r;
}

}  // namespace catalog_detail

/// Catalog entries in a fixed order.
inline const std::vector<CatalogEntry>& list_entries() {
  using namespace catalog_detail;
  static const std::vector<CatalogEntry> entries = {
      {"two_atom", "Parseval for two atoms and two exponentials", "1/2 (delta_0 + delta_1/2)", "delta_0 + delta_1",
       "p = q = 2", Outcome::Identity, 1e-12, -1, "", two_atom},
      {"two_interval", "Z u (Z + 1/4) against 1/2 chi_[0,1]u[2,3]", "1/2 chi_[0,1]u[2,3] dx", "Z u (Z + 1/4), |n| <= N",
       "p = q = 2", Outcome::Identity, 5e-5, 10000, "lattice window N", two_interval},
      {"unit_cube_lattice", "Hausdorff-Young for integer frequencies on the unit cube (d = 1, 2)", "chi_[0,1]^d dx",
       "sum_{|n|<=W} delta_n", "p in {1.25, 1.5, 2}", Outcome::Bound, 1e-9, 64, "lattice window W", unit_cube_lattice},
      {"cantor4", "Parseval sums for the quarter Cantor measure over its digit spectrum", "mu_4 (R = 4, digits {0, 2})",
       "sum_{m<=L} 4^m {0, 1}", "p = q = 2", Outcome::Identity, 1e-12, 8, "digit level L", cantor4},
      {"dirac_tight", "every finite nu is a tight frame measure for delta_0", "delta_0", "three atoms of mass m",
       "p in {1.5, 2, 4}", Outcome::Identity, 1e-12, -1, "", dirac_tight},
      {"lebesgue_plancherel", "windowed Plancherel identity", "chi_[0,1] dx", "Lebesgue on [-T, T]", "p = q = 2",
       Outcome::Identity, 0.05, 64, "window half-width T", lebesgue_plancherel},
      {"no_frame_counterexample", "no frame measure exists for chi_[0,1] dx + delta_2", "chi_[0,1] dx + delta_2",
       "Z u (Z + 1/4) at level L; 1/2 (delta_1/3 + delta_-1/2)", "p in {1.5, 2}", Outcome::NoFrame, 0.01, 2,
       "spectrum level L", no_frame_counterexample},
      {"p_gt_2_divergence", "q-Bessel sums of exponentials diverge for p > 2", "chi_[0,1] dx", "sum_n delta_n",
       "exponent 2 - eps, eps = 0.2", Outcome::Divergence, 0.0, 1000000, "largest N in the schedule",
       p_gt_2_divergence},
  };
  return entries;
}

inline const CatalogEntry* find_entry(const std::string& id) {
  for (const auto& e : list_entries())
    if (e.id == id) return &e;
  return nullptr;
}

/// Runs an entry. Throws InvalidArgument for an unknown id.
inline Report verify(const std::string& id, std::optional<long> truncation = std::nullopt) {
  const CatalogEntry* entry = find_entry(id);
  require(entry != nullptr, "unknown catalog id '", id, "'");
  const long level = truncation.value_or(entry->default_truncation);
  const auto t0 = std::chrono::steady_clock::now();
  Report r = entry->run(level);
  const auto t1 = std::chrono::steady_clock::now();
  r.id = entry->id;
  r.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return r;
}

}  // namespace framelab
