#pragma once

// (p,q)-Bessel / frame functionals
//
//   Phi(f) = integral |[f, e_t]|^q d nu(t),   ratio(f) = Phi(f) / ||f||_p^q
//
// together with an empirical estimator of inf/sup of the ratio over a test
// family, analytic bound certificates, envelope sums and a ball-mass probe.

#include <map>
#include <random>

#include "framelab/sip.hpp"
#include "framelab/spectra.hpp"

namespace framelab {

// ---------------------------------------------------------------------------
// Functional

namespace detail {

inline bool has_cloud(const Measure& m) {
  if (m.as_self_similar()) return false;
  if (const auto* c = m.as_convolution()) return has_cloud(c->left) && has_cloud(c->right);
  if (const auto* s = m.as_sum())
    return std::all_of(s->terms.begin(), s->terms.end(), [](const Measure& t) { return has_cloud(t); });
  return true;
}

inline const PointCloud& nu_nodes(const Measure& nu) {
  require<UnsupportedKind>(has_cloud(nu), "nu must be integrable directly (atomic, density or sums of these)");
  return quadrature_cloud(nu);
}

}  // namespace detail

/// integral |f dmu ^(t)|^q d nu(t); for atomic nu the q-Bessel sum
/// sum_l w_l |[f, e_l]|^q.
inline double bessel_functional(const TestFunction& f, const Measure& mu, const Measure& nu, const ExponentPair& e) {
  require(!e.is_endpoint(), "p = 1 has no finite-q functional; use sup_norm_transform");
  require(mu.dim() == nu.dim(), "mu and nu must share a dimension");
  const PointCloud& nodes = detail::nu_nodes(nu);
  std::vector<double> terms(nodes.size());
  const double q = e.q();
  parallel_for(nodes.size(), [&](std::size_t i) {
    terms[i] = nodes.weights[i] * std::pow(std::abs(fourier_coefficient(f, nodes.point(i), mu)), q);
  });
  double s = 0.0;
  for (double v : terms) s += v;
  if (!std::isfinite(s)) throw EvaluationError("Bessel functional is not finite");
  return s;
}

inline double bessel_functional(const TestFunction& f, const Measure& mu, const SpectrumSet& spectrum, int level,
                                const ExponentPair& e) {
  return bessel_functional(f, mu, as_atomic_measure(spectrum, level), e);
}

// ---------------------------------------------------------------------------
// Empirical estimation

/// Test family for estimate_bounds. Multi-coefficient members (trig, atoms)
/// are searched locally; modulated and fixed members are single functions.
struct TestFamily {
  bool trig = true;
  int trig_window = 32;
  std::size_t trig_terms = 8;
  bool atoms = false;  // indicators of the atoms of an atomic mu
  std::size_t max_atom_basis = 64;
  std::vector<Point> modulations;     // T for e_{-T} chi_box
  std::optional<Box> modulation_box;  // default [0,1]^d
  std::vector<TestFunction> fixed;
  int starts = 200;
  int refine_steps = 50;
  double step = 0.25;
  double step_decay = 0.5;

  /// Trig polynomials, the modulated family for T in {1, 10, 100} along the
  /// first axis and, for atomic mu, atom indicators.
  static TestFamily defaults(const Measure& mu) {
    TestFamily f;
    f.atoms = mu.as_atomic() != nullptr;
    for (double T : {1.0, 10.0, 100.0}) {
      Point t(mu.dim(), 0.0);
      t[0] = T;
      f.modulations.push_back(std::move(t));
    }
    return f;
  }

  std::string descriptor() const {
    std::ostringstream os;
    const char* sep = "";
    if (trig) os << sep << "trig(window=" << trig_window << ",terms=" << trig_terms << ")", sep = "+";
    if (atoms) os << sep << "atoms(max=" << max_atom_basis << ")", sep = "+";
    if (!modulations.empty()) os << sep << "modulated(n=" << modulations.size() << ")", sep = "+";
    if (!fixed.empty()) os << sep << "fixed(n=" << fixed.size() << ")", sep = "+";
    os << ";starts=" << starts << ",steps=" << refine_steps << ",step=" << step << ",decay=" << step_decay;
    return os.str();
  }
};

struct EstimateRow {
  std::string family_id;
  std::size_t sample_index = 0;
  double p = 0.0;
  double q = 0.0;
  int truncation = -1;
  double functional = 0.0;
  double norm_q_power = 0.0;
  double ratio = 0.0;
};

struct BoundEstimate {
  double lower_hat = kInf;
  double upper_hat = 0.0;
  std::size_t sample_count = 0;      // functional evaluations
  std::size_t degenerate_count = 0;  // draws refused for ||f|| < 1e-12
  std::string family;
  ExponentPair exponents{2.0};
  int truncation = -1;
  std::uint64_t seed = 0;
  /// p = 1: the functional is max |f dmu ^| over nu's nodes (a window grid).
  bool sup_norm_pathway = false;
  std::string argmin_family;
  std::string argmax_family;
  std::vector<EstimateRow> rows;
};

inline std::string csv_header() { return "family_id,sample_index,p,q,truncation,functional,norm_q_power,ratio"; }

inline std::string to_csv(const BoundEstimate& est) {
  std::ostringstream os;
  os.precision(17);
  os << csv_header() << '\n';
  for (const auto& r : est.rows) {
    os << r.family_id << ',' << r.sample_index << ',' << r.p << ',';
    if (std::isinf(r.q)) os << "inf";
    else os << r.q;
    os << ',';
    if (r.truncation >= 0) os << r.truncation;
    os << ',' << r.functional << ',' << r.norm_q_power << ',' << r.ratio << '\n';
  }
  return os.str();
}

namespace detail {

struct Evaluation {
  double functional = 0.0;
  double norm_q_power = 0.0;
  double ratio = 0.0;
  bool ok = false;
};

/// Evaluation from values on mu's nodes (fv) and transforms on nu's nodes (F).
inline Evaluation evaluate_values(const std::vector<Complex>& fv, const std::vector<Complex>& F,
                                  const PointCloud& mu_nodes, const PointCloud& nu_nodes, const ExponentPair& e) {
  Evaluation ev;
  const double p = e.p();
  double np = 0.0;
  for (std::size_t j = 0; j < fv.size(); ++j) np += mu_nodes.weights[j] * std::pow(std::abs(fv[j]), p);
  const double norm = std::pow(np, 1.0 / p);
  if (!(norm >= kDegenerateNorm) || !std::isfinite(norm)) return ev;
  if (e.is_endpoint()) {
    double mx = 0.0;
    for (const auto& v : F) mx = std::max(mx, std::abs(v));
    ev.functional = mx;
    ev.norm_q_power = norm;
  } else {
    const double q = e.q();
    double s = 0.0;
    for (std::size_t t = 0; t < F.size(); ++t) s += nu_nodes.weights[t] * std::pow(std::abs(F[t]), q);
    ev.functional = s;
    ev.norm_q_power = std::pow(norm, q);
  }
  ev.ratio = ev.functional / ev.norm_q_power;
  ev.ok = std::isfinite(ev.ratio);
  return ev;
}

/// Evaluation of a single test function through the sip module.
inline Evaluation evaluate_function(const TestFunction& f, const Measure& mu, const Measure& nu,
                                    const ExponentPair& e) {
  Evaluation ev;
  const double norm = norm_p(f, mu, e);
  if (!(norm >= kDegenerateNorm)) return ev;
  if (e.is_endpoint()) {
    const PointCloud& nodes = nu_nodes(nu);
    double mx = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      mx = std::max(mx, std::abs(fourier_coefficient(f, nodes.point(i), mu)));
    ev.functional = mx;
    ev.norm_q_power = norm;
  } else {
    ev.functional = bessel_functional(f, mu, nu, e);
    ev.norm_q_power = std::pow(norm, e.q());
  }
  ev.ratio = ev.functional / ev.norm_q_power;
  ev.ok = std::isfinite(ev.ratio);
  return ev;
}

/// Linear block: members are sum_k c_k b_k for basis functions b_k.
struct Block {
  std::string family_id;
  std::vector<TestFunction> basis;
  std::vector<std::vector<Complex>> samples;     // per basis: values on mu nodes
  std::vector<std::vector<Complex>> transforms;  // per basis: transforms on nu nodes
};

struct StartResult {
  bool ok = false;
  std::size_t evaluations = 0;
  std::size_t degenerate = 0;
  std::string family_id;
  Evaluation initial, best_upper, best_lower;
};

inline Block make_trig_block(std::mt19937_64& rng, const TestFamily& fam, const Measure& mu,
                             const PointCloud* mu_nodes, const PointCloud& nu_nodes) {
  Block b;
  b.family_id = "trig";
  double count = 1.0;
  for (std::size_t i = 0; i < mu.dim(); ++i) count *= 2.0 * fam.trig_window + 1.0;
  const std::size_t K = static_cast<std::size_t>(std::min<double>(static_cast<double>(fam.trig_terms), count));
  const TestFunction draw = random_trig(rng, mu.dim(), fam.trig_window, K);
  for (const auto& term : draw.as_trig()->terms) {
    b.basis.push_back(exponential(term.freq));
    if (mu_nodes) {
      std::vector<Complex> s(mu_nodes->size());
      for (std::size_t j = 0; j < s.size(); ++j) s[j] = exponential_at(term.freq, mu_nodes->point(j));
      b.samples.push_back(std::move(s));
    }
    std::vector<Complex> tr(nu_nodes.size());
    for (std::size_t t = 0; t < tr.size(); ++t) tr[t] = fourier_stieltjes(mu, subtract(nu_nodes.point(t), term.freq));
    b.transforms.push_back(std::move(tr));
  }
  return b;
}

inline Block make_atom_block(std::mt19937_64& rng, const TestFamily& fam, const Measure& mu,
                             const PointCloud& nu_nodes) {
  Block b;
  b.family_id = "atoms";
  const auto& atoms = mu.as_atomic()->atoms;
  std::vector<std::size_t> idx(atoms.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (idx.size() > fam.max_atom_basis) {
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(fam.max_atom_basis);
    std::sort(idx.begin(), idx.end());
  }
  for (std::size_t k : idx) {
    b.basis.push_back(point_indicator(atoms[k].x));
    std::vector<Complex> s(atoms.size(), 0.0);
    s[k] = 1.0;
    b.samples.push_back(std::move(s));
    std::vector<Complex> tr(nu_nodes.size());
    for (std::size_t t = 0; t < tr.size(); ++t) tr[t] = atoms[k].w * character(nu_nodes.point(t), atoms[k].x);
    b.transforms.push_back(std::move(tr));
  }
  return b;
}

inline TestFunction combine(const Block& b, const std::vector<Complex>& c) {
  if (b.family_id == "trig") {
    std::vector<TrigTerm> terms;
    for (std::size_t k = 0; k < c.size(); ++k) terms.push_back({b.basis[k].as_trig()->terms.front().freq, c[k]});
    return TestFunction::trig(std::move(terms));
  }
  std::vector<Box> cells;
  for (const auto& f : b.basis) cells.push_back(f.as_simple()->cells.front());
  return TestFunction::simple(std::move(cells), c);
}

}  // namespace detail

/// Empirical lower/upper ratio over the family. Budget is the total number
/// of functional evaluations: single members cost one each, and the rest is
/// split into random starts of cost 1 + 2 * steps (an upward and a downward
/// coordinate search per start). Deterministic for a given seed.
inline BoundEstimate estimate_bounds(const Measure& mu, const Measure& nu, const ExponentPair& e,
                                     const TestFamily& family, std::size_t budget, std::uint64_t seed,
                                     int truncation = -1) {
  require(budget >= 1, "budget must be >= 1");
  require(mu.dim() == nu.dim(), "mu and nu must share a dimension");
  require(!family.atoms || mu.as_atomic(), "the atom family needs an atomic mu");
  require(family.starts >= 1 && family.refine_steps >= 0 && family.step > 0.0 && family.step_decay > 0.0 &&
              family.step_decay < 1.0,
          "invalid search parameters");
  const bool any_member = family.trig || family.atoms || !family.modulations.empty() || !family.fixed.empty();
  require(any_member, "test family is empty");

  BoundEstimate est;
  est.family = family.descriptor();
  est.exponents = e;
  est.truncation = truncation;
  est.seed = seed;
  est.sup_norm_pathway = e.is_endpoint();

  const PointCloud& nu_nodes = detail::nu_nodes(nu);
  const bool node_mode = detail::has_cloud(mu);
  const PointCloud* mu_nodes = node_mode ? &quadrature_cloud(mu) : nullptr;

  std::size_t sample_index = 0;
  auto record = [&](const std::string& id, const detail::Evaluation& ev) {
    est.rows.push_back({id, sample_index++, e.p(), e.q(), truncation, ev.functional, ev.norm_q_power, ev.ratio});
    if (ev.ratio > est.upper_hat) est.upper_hat = ev.ratio, est.argmax_family = id;
    if (ev.ratio < est.lower_hat) est.lower_hat = ev.ratio, est.argmin_family = id;
  };

  // Single members.
  std::vector<std::pair<std::string, TestFunction>> singles;
  Box mbox = family.modulation_box.value_or(Box(mu.dim(), Interval{0.0, 1.0}));
  for (const auto& T : family.modulations) singles.emplace_back("modulated", modulated_indicator(T, mbox));
  for (const auto& f : family.fixed) singles.emplace_back("fixed", f);
  std::size_t used = 0;
  for (const auto& [id, f] : singles) {
    if (used >= budget) break;
    ++used;
    const auto ev = detail::evaluate_function(f, mu, nu, e);
    if (!ev.ok) {
      ++est.degenerate_count;
      continue;
    }
    record(id, ev);
  }

  // Random starts with local search.
  std::vector<std::string> kinds;
  if (family.trig) kinds.push_back("trig");
  if (family.atoms) kinds.push_back("atoms");
  const std::size_t remaining = budget - used;
  if (!kinds.empty() && remaining > 0) {
    const std::size_t starts = std::min<std::size_t>(static_cast<std::size_t>(family.starts), remaining);
    const std::size_t per_start = remaining / starts;
    const std::size_t steps =
        std::min<std::size_t>(static_cast<std::size_t>(family.refine_steps), per_start >= 1 ? (per_start - 1) / 2 : 0);
    std::vector<detail::StartResult> results(starts);

    parallel_for(starts, [&](std::size_t s) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(static_cast<std::uint64_t>(s) >> 32)};
      std::mt19937_64 rng(seq);
      detail::StartResult& out = results[s];
      out.family_id = kinds[s % kinds.size()];
      const detail::Block block = out.family_id == "trig" ? detail::make_trig_block(rng, family, mu, mu_nodes, nu_nodes)
                                                          : detail::make_atom_block(rng, family, mu, nu_nodes);
      const std::size_t K = block.basis.size();

      std::vector<Complex> c(K);
      for (auto& v : c) v = complex_normal(rng);

      struct State {
        std::vector<Complex> c, fv, F;
      };
      auto evaluate = [&](const State& st) {
        ++out.evaluations;
        if (node_mode) return detail::evaluate_values(st.fv, st.F, *mu_nodes, nu_nodes, e);
        // No quadrature nodes for mu: norms go through the sip module.
        detail::Evaluation ev;
        const double norm = norm_p(detail::combine(block, st.c), mu, e);
        if (!(norm >= kDegenerateNorm)) return ev;
        if (e.is_endpoint()) {
          for (const auto& v : st.F) ev.functional = std::max(ev.functional, std::abs(v));
          ev.norm_q_power = norm;
        } else {
          for (std::size_t t = 0; t < st.F.size(); ++t)
            ev.functional += nu_nodes.weights[t] * std::pow(std::abs(st.F[t]), e.q());
          ev.norm_q_power = std::pow(norm, e.q());
        }
        ev.ratio = ev.functional / ev.norm_q_power;
        ev.ok = std::isfinite(ev.ratio);
        return ev;
      };
      auto build = [&](const std::vector<Complex>& coef) {
        State st;
        st.c = coef;
        st.F.assign(nu_nodes.size(), 0.0);
        if (node_mode) st.fv.assign(mu_nodes->size(), 0.0);
        for (std::size_t k = 0; k < K; ++k) {
          for (std::size_t t = 0; t < st.F.size(); ++t) st.F[t] += coef[k] * block.transforms[k][t];
          if (node_mode)
            for (std::size_t j = 0; j < st.fv.size(); ++j) st.fv[j] += coef[k] * block.samples[k][j];
        }
        return st;
      };
      auto normalize = [](State& st) {
        double n = 0.0;
        for (const auto& v : st.c) n += std::norm(v);
        n = std::sqrt(n);
        if (n == 0.0) return;
        for (auto* vec : {&st.c, &st.fv, &st.F})
          for (auto& v : *vec) v /= n;
      };

      State start = build(c);
      normalize(start);
      out.initial = evaluate(start);
      if (!out.initial.ok) {
        ++out.degenerate;
        return;
      }
      out.ok = true;
      std::uniform_int_distribution<std::size_t> pick(0, K - 1);
      for (int direction : {+1, -1}) {
        State cur = start;
        detail::Evaluation best = out.initial;
        double step = family.step;
        for (std::size_t it = 0; it < steps; ++it) {
          const std::size_t k = pick(rng);
          const Complex delta = step * complex_normal(rng);
          State trial = cur;
          trial.c[k] += delta;
          for (std::size_t t = 0; t < trial.F.size(); ++t) trial.F[t] += delta * block.transforms[k][t];
          if (node_mode)
            for (std::size_t j = 0; j < trial.fv.size(); ++j) trial.fv[j] += delta * block.samples[k][j];
          const auto ev = evaluate(trial);
          if (!ev.ok) ++out.degenerate;
          if (ev.ok && (direction > 0 ? ev.ratio > best.ratio : ev.ratio < best.ratio)) {
            best = ev;
            cur = std::move(trial);
            normalize(cur);
          } else {
            step *= family.step_decay;
          }
        }
        (direction > 0 ? out.best_upper : out.best_lower) = best;
      }
    });

    for (const auto& r : results) {
      used += r.evaluations;
      est.degenerate_count += r.degenerate;
      if (!r.ok) continue;
      record(r.family_id, r.initial);
      record(r.family_id, r.best_upper);
      record(r.family_id, r.best_lower);
    }
  }
  est.sample_count = used;
  if (est.rows.empty()) throw DegenerateFamily("every sampled test function had norm below 1e-12");
  return est;
}

// ---------------------------------------------------------------------------
// Certificates

enum class Rule { Holder, RieszThorin, Perturbation, Scaling, ConvolutionClosure, Deconvolution, Budgeted, WeightedExponential };

inline std::string rule_name(Rule r) {
  switch (r) {
    case Rule::Holder: return "Holder";
    case Rule::RieszThorin: return "RieszThorin";
    case Rule::Perturbation: return "Perturbation";
    case Rule::Scaling: return "Scaling";
    case Rule::ConvolutionClosure: return "ConvolutionClosure";
    case Rule::Deconvolution: return "Deconvolution";
    case Rule::Budgeted: return "Budgeted";
    case Rule::WeightedExponential: return "WeightedExponential";
  }
  return "unknown";
}

/// An analytic bound valid under the recorded premises.
struct BoundCertificate {
  Rule rule = Rule::Holder;
  double upper = kInf;
  std::optional<double> lower;
  ExponentPair exponents{2.0};
  std::vector<std::pair<std::string, double>> premises;
  /// False when a requested lower bound's sufficient condition fails.
  bool condition_holds = true;
  std::string note;

  std::optional<double> premise(const std::string& key) const {
    for (const auto& [k, v] : premises)
      if (k == key) return v;
    return std::nullopt;
  }
};

/// B = mu(R^d) nu(R^d). At p = 1 the sup-norm bound |f dmu ^| <= ||f||_1
/// gives B = 1.
inline BoundCertificate holder_bound(const Measure& mu, const Measure& nu, const ExponentPair& e) {
  BoundCertificate c;
  c.rule = Rule::Holder;
  c.exponents = e;
  const double mm = mass(mu), mn = mass(nu);
  c.premises = {{"mass_mu", mm}, {"mass_nu", mn}};
  if (e.is_endpoint()) {
    c.upper = 1.0;
    c.note = "sup-norm bound";
  } else {
    c.upper = mm * mn;
  }
  return c;
}

/// Interpolates Bessel bounds C0 at e0 and C1 at e1 to 1/p = (1-theta)/p0 +
/// theta/p1. The operator norm bound is C0^{(1-theta)/q0} C1^{theta/q1},
/// where 1/q is replaced by 1 at a (1, inf) endpoint; the functional bound is
/// its q-th power.
inline std::pair<ExponentPair, BoundCertificate> riesz_thorin(const ExponentPair& e0, double C0, const ExponentPair& e1,
                                                              double C1, double theta) {
  require(!(e0 == e1), "interpolation needs two distinct exponent pairs");
  require(theta > 0.0 && theta < 1.0, "theta must lie in (0, 1), got ", theta);
  require(C0 > 0.0 && C1 > 0.0, "endpoint bounds must be positive");
  const double inv_p = (1.0 - theta) / e0.p() + theta / e1.p();
  const ExponentPair e(1.0 / inv_p);
  auto exponent = [](const ExponentPair& x) { return x.is_endpoint() ? 1.0 : 1.0 / x.q(); };
  const double op = std::pow(C0, (1.0 - theta) * exponent(e0)) * std::pow(C1, theta * exponent(e1));
  BoundCertificate c;
  c.rule = Rule::RieszThorin;
  c.exponents = e;
  c.upper = std::pow(op, e.q());
  c.premises = {{"p0", e0.p()}, {"q0", e0.q()}, {"C0", C0}, {"p1", e1.p()}, {"q1", e1.q()}, {"C1", C1},
                {"theta", theta}, {"operator_norm", op}};
  return {e, c};
}

/// Bessel (and optionally frame) bounds after moving every frequency by at
/// most C in each coordinate, for mu supported in [-M, M]^d. One coordinate
/// is perturbed at a time, so the one-dimensional estimate is applied d times.
inline BoundCertificate perturbation_bound(double B, const ExponentPair& e, double C, double M, std::size_t dim = 1,
                                           std::optional<double> A = std::nullopt) {
  require(!e.is_endpoint(), "perturbation bound needs finite p and q");
  require(B > 0.0 && C >= 0.0 && M > 0.0 && dim >= 1, "perturbation bound needs B > 0, C >= 0, M > 0");
  const double p = e.p(), q = e.q();
  const double factor = std::pow(std::expm1(std::pow(C, p)), q - 1.0) * std::expm1(std::pow(kTwoPi * M, q));
  double upper = B;
  std::optional<double> lower = A;
  bool holds = true;
  for (std::size_t k = 0; k < dim; ++k) {
    const double dev = std::pow(upper * factor, 1.0 / q);
    if (lower) {
      const double margin = std::pow(*lower, 1.0 / q) - dev;
      holds = holds && margin > 0.0;
      lower = margin > 0.0 ? std::pow(margin, q) : 0.0;
    }
    upper = std::pow(std::pow(upper, 1.0 / q) + dev, q);
  }
  BoundCertificate c;
  c.rule = Rule::Perturbation;
  c.exponents = e;
  c.upper = upper;
  c.premises = {{"B", B}, {"C", C}, {"M", M}, {"dim", static_cast<double>(dim)}};
  if (A) {
    c.premises.emplace_back("A", *A);
    c.lower = lower;
    c.condition_holds = holds;
    if (!holds) c.note = "frame condition A^{1/q} > deviation fails; no lower bound";
  }
  return c;
}

/// Bounds for {phi e_t} with a <= phi <= b: upper factor b^p / a^{p-q},
/// lower factor a^p / b^{p-q}, applied to base bounds (or to 1).
inline BoundCertificate weighted_exponential_bound(double a, double b, const ExponentPair& e,
                                                   std::optional<double> base_lower = std::nullopt,
                                                   std::optional<double> base_upper = std::nullopt) {
  require(a > 0.0 && a <= b && std::isfinite(b), "weight bounds need 0 < a <= b < inf");
  require(!e.is_endpoint(), "weighted exponential bound needs finite q");
  const double p = e.p(), q = e.q();
  BoundCertificate c;
  c.rule = Rule::WeightedExponential;
  c.exponents = e;
  const double up = std::pow(b, p) / std::pow(a, p - q);
  const double lo = std::pow(a, p) / std::pow(b, p - q);
  c.upper = up * base_upper.value_or(1.0);
  c.lower = lo * base_lower.value_or(1.0);
  c.premises = {{"a", a}, {"b", b}, {"upper_factor", up}, {"lower_factor", lo}};
  if (base_lower) c.premises.emplace_back("A", *base_lower);
  if (base_upper) c.premises.emplace_back("B", *base_upper);
  return c;
}

/// Frame bounds for alpha * mu: A -> alpha A, B -> alpha B.
inline BoundCertificate scaling_bound(double alpha, const ExponentPair& e, double B,
                                      std::optional<double> A = std::nullopt) {
  require(alpha > 0.0, "scale factor must be positive");
  BoundCertificate c;
  c.rule = Rule::Scaling;
  c.exponents = e;
  c.upper = alpha * B;
  if (A) c.lower = alpha * *A;
  c.premises = {{"alpha", alpha}, {"B", B}};
  if (A) c.premises.emplace_back("A", *A);
  return c;
}

/// nu * rho keeps the Bessel bound B of nu for any probability rho.
inline BoundCertificate convolution_closure_bound(double B, const ExponentPair& e) {
  BoundCertificate c;
  c.rule = Rule::ConvolutionClosure;
  c.exponents = e;
  c.upper = B;
  c.premises = {{"B", B}};
  return c;
}

/// |mu'^|^q d nu is Bessel for mu with the bound B that nu has for mu * mu'.
inline BoundCertificate deconvolution_bound(double B, const ExponentPair& e) {
  BoundCertificate c;
  c.rule = Rule::Deconvolution;
  c.exponents = e;
  c.upper = B;
  c.premises = {{"B", B}};
  return c;
}

/// |mu'^(t)|^q d nu(t). Atomic nu is reweighted exactly (atoms whose weight
/// vanishes are dropped); a density is multiplied pointwise, so its
/// quadrature grid samples the product.
inline Measure deconvolution_weight(const Measure& nu, const Measure& mu_prime, const ExponentPair& e) {
  require(nu.dim() == mu_prime.dim(), "dimension mismatch");
  require(!e.is_endpoint(), "deconvolution weight needs finite q");
  const double q = e.q();
  if (const auto* a = nu.as_atomic()) {
    std::vector<Atom> atoms;
    for (const auto& atom : a->atoms) {
      const double w = atom.w * std::pow(std::abs(fourier_stieltjes(mu_prime, atom.x)), q);
      if (w > 0.0) atoms.push_back({atom.x, w});
    }
    require(!atoms.empty(), "every reweighted atom vanished");
    return Measure::atomic(std::move(atoms));
  }
  if (const auto* d = nu.as_density()) {
    DensityFn fn = [inner = d->fn, mu_prime, q](PointView t) {
      const double v = inner(t);
      return v == 0.0 ? 0.0 : v * std::pow(std::abs(fourier_stieltjes(mu_prime, t)), q);
    };
    auto knots = d->knots;
    return Measure::density(d->box, std::move(fn), DensityOptions{d->quadrature, std::move(knots), d->smooth});
  }
  throw UnsupportedKind("deconvolution weight needs an atomic or density nu");
}

// ---------------------------------------------------------------------------
// Envelopes

struct EnvelopeSums {
  double inf_sum = 0.0;
  double sup_sum = 0.0;
};

namespace detail {

/// Offsets y with |y| <= r: a symmetric grid containing 0.
inline std::vector<Point> ball_net(std::size_t dim, double r, int probes) {
  int per_axis = dim == 1 ? probes : std::max(3, static_cast<int>(std::lround(std::pow(probes, 1.0 / dim))));
  if (per_axis % 2 == 0) ++per_axis;
  std::vector<Point> out;
  std::vector<int> idx(dim, 0);
  const int half = per_axis / 2;
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) total *= static_cast<std::size_t>(per_axis);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rr = n;
    Point y(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const int k = static_cast<int>(rr % per_axis) - half;
      rr /= per_axis;
      y[i] = half == 0 ? 0.0 : r * k / half;
    }
    if (norm2(y) <= r * (1.0 + 1e-12)) out.push_back(std::move(y));
  }
  return out;
}

template <class G>
double golden_section(G&& g, double a, double b, bool maximize, int iterations = 40) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  auto better = [&](double u, double v) { return maximize ? u > v : u < v; };
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double gc = g(c), gd = g(d);
  double best = better(gc, gd) ? gc : gd;
  for (int i = 0; i < iterations; ++i) {
    if (better(gc, gd)) {
      b = d, d = c, gd = gc;
      c = b - phi * (b - a), gc = g(c);
    } else {
      a = c, c = d, gc = gd;
      d = a + phi * (b - a), gd = g(d);
    }
    best = better(gc, best) ? gc : best;
    best = better(gd, best) ? gd : best;
  }
  return best;
}

}  // namespace detail

/// integral inf / sup_{|y| <= r} |[f, e_{x+y}]|^q d nu(x), probing y on a
/// symmetric net that contains 0 (in one dimension refined by golden-section
/// search around the best probe). nu may be atomic or a density; the
/// inequality inf_sum <= bessel_functional <= sup_sum holds by construction.
inline EnvelopeSums envelope_functional(const TestFunction& f, const Measure& mu, const Measure& nu,
                                        const ExponentPair& e, double r, int probes = 33) {
  require(r > 0.0, "envelope radius must be positive");
  require(probes >= 1, "probe count must be >= 1");
  require(!e.is_endpoint(), "envelope sums need finite q");
  const PointCloud& nodes = detail::nu_nodes(nu);
  const double q = e.q();
  const auto net = detail::ball_net(mu.dim(), r, probes);
  std::vector<double> lo(nodes.size()), hi(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) {
    const PointView x = nodes.point(i);
    Point t(x.size());
    auto value = [&](PointView y) {
      for (std::size_t k = 0; k < t.size(); ++k) t[k] = x[k] + y[k];
      return std::pow(std::abs(fourier_coefficient(f, t, mu)), q);
    };
    std::vector<double> vals(net.size());
    for (std::size_t k = 0; k < net.size(); ++k) vals[k] = value(net[k]);
    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    double vmin = *mn, vmax = *mx;
    if (mu.dim() == 1 && net.size() >= 3) {
      auto g = [&](double y) {
        const double yy[] = {y};
        return value(yy);
      };
      // Refine around every local extremum of the probe sequence, not just
      // the best probe: |.|^q can have several near-zeros inside one ball.
      const std::size_t n = net.size();
      for (std::size_t k = 0; k < n; ++k) {
        const double left = k == 0 ? vals[k] : vals[k - 1];
        const double right = k + 1 == n ? vals[k] : vals[k + 1];
        const double a = net[k == 0 ? 0 : k - 1][0];
        const double b = net[std::min(k + 1, n - 1)][0];
        if (vals[k] <= left && vals[k] <= right) vmin = std::min(vmin, detail::golden_section(g, a, b, false));
        if (vals[k] >= left && vals[k] >= right) vmax = std::max(vmax, detail::golden_section(g, a, b, true));
      }
    }
    lo[i] = nodes.weights[i] * vmin;
    hi[i] = nodes.weights[i] * vmax;
  });
  EnvelopeSums out;
  for (std::size_t i = 0; i < nodes.size(); ++i) out.inf_sum += lo[i], out.sup_sum += hi[i];
  return out;
}

// ---------------------------------------------------------------------------
// Ball-mass probe

struct ProbeViolation {
  Point center;
  double ball_mass = 0.0;
};

struct SigmaProbeReport {
  double delta = 0.0;    // (1 - eta)^q
  double epsilon = 0.0;  // |mu^| >= 1 - eta on B(0, epsilon)
  double limit = 0.0;    // B / delta
  std::size_t probes = 0;
  bool atoms_only = false;  // no epsilon found (eta = 0, say): only the eps -> 0 limit nu({t}) <= B / delta is checked
  std::vector<ProbeViolation> violations;
  bool pass() const { return violations.empty(); }
};

namespace detail {

/// nu({t}); only atomic parts carry point masses.
inline double point_mass(const Measure& nu, PointView t) {
  double s = 0.0;
  if (const auto* a = nu.as_atomic()) {
    for (const auto& atom : a->atoms)
      if (distance(atom.x, t) <= kMergeTolerance) s += atom.w;
  } else if (const auto* sm = nu.as_sum()) {
    for (const auto& term : sm->terms) s += point_mass(term, t);
  }
  return s;
}

}  // namespace detail

/// With |mu^| >= 1 - eta on B(0, epsilon), a Bessel bound B for nu forces
/// nu(B(t, epsilon)) <= B / delta for every t. Finds epsilon by halving from
/// the window size, then checks balls centred on a grid over the window and,
/// for atomic nu, on every atom in the window. When no epsilon is found, or
/// the grid would be too fine, only the point masses of the atoms are checked.
inline SigmaProbeReport sigma_finiteness_probe(const Measure& nu, const Measure& mu, const ExponentPair& e, double B,
                                               double eta, const Box& window, int check_points = 64) {
  require(is_probability(mu), "the probe needs a probability mu");
  require(B > 0.0, "Bessel bound must be positive");
  require(eta >= 0.0 && eta < 1.0, "eta must lie in [0, 1)");
  require(!e.is_endpoint(), "the probe needs finite q");
  validate_box(window);
  require(window.size() == nu.dim() && mu.dim() == nu.dim(), "dimension mismatch");
  SigmaProbeReport rep;
  rep.delta = std::pow(1.0 - eta, e.q());
  rep.limit = B / rep.delta;
  const std::size_t d = nu.dim();

  double eps = 0.0;
  for (const auto& iv : window) eps = std::max(eps, iv.length());
  if (eps == 0.0) eps = 1.0;
  const auto net = detail::ball_net(d, 1.0, check_points);
  bool found = false;
  for (int it = 0; it < 60 && !found; ++it) {
    bool ok = true;
    for (const auto& y : net) {
      Point t(d);
      for (std::size_t i = 0; i < d; ++i) t[i] = eps * y[i];
      if (std::abs(fourier_stieltjes(mu, t)) < 1.0 - eta) {
        ok = false;
        break;
      }
    }
    if (ok) found = true;
    else eps *= 0.5;
  }
  std::size_t total = 1;
  std::vector<std::size_t> counts(d);
  for (std::size_t i = 0; i < d; ++i) {
    counts[i] = window[i].degenerate() ? 1 : static_cast<std::size_t>(std::ceil(window[i].length() / eps)) + 1;
    total = found && total < (std::size_t{1} << 40) / counts[i] ? total * counts[i] : std::size_t{1} << 40;
  }
  if (!found || total > (std::size_t{1} << 22)) {
    rep.atoms_only = true;
    rep.epsilon = 0.0;
    total = 0;
  } else {
    rep.epsilon = eps;
  }

  std::vector<Point> centers;
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rr = n;
    Point t(d);
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t k = rr % counts[i];
      rr /= counts[i];
      t[i] = counts[i] == 1 ? window[i].lo : std::min(window[i].hi, window[i].lo + eps * static_cast<double>(k));
    }
    centers.push_back(std::move(t));
  }
  if (const auto* a = nu.as_atomic())
    for (const auto& atom : a->atoms)
      if (box_contains_closed(window, atom.x)) centers.push_back(atom.x);
  rep.probes = centers.size();
  for (const auto& t : centers) {
    const double m = rep.atoms_only ? detail::point_mass(nu, t) : ball_mass(nu, t, eps);
    if (m > rep.limit * (1.0 + 1e-12)) rep.violations.push_back({t, m});
  }
  return rep;
}

}  // namespace framelab
