#include <gtest/gtest.h>

#include <set>

#include "framelab/framelab.hpp"

using namespace framelab;

TEST(Catalog, EntriesAreUniqueAndDescribed) {
  const auto& entries = list_entries();
  EXPECT_GE(entries.size(), 8u);
  std::set<std::string> ids;
  for (const auto& e : entries) {
    EXPECT_TRUE(ids.insert(e.id).second) << e.id;
    EXPECT_FALSE(e.summary.empty());
    EXPECT_FALSE(e.mu.empty());
    EXPECT_FALSE(e.nu.empty());
    EXPECT_EQ(find_entry(e.id), &e);
  }
  EXPECT_EQ(find_entry("nosuch"), nullptr);
  EXPECT_THROW(verify("nosuch"), InvalidArgument);
}

TEST(Catalog, CheapEntriesPass) {
  for (const char* id : {"two_atom", "dirac_tight", "cantor4", "lebesgue_plancherel"}) {
    const Report r = verify(id);
    EXPECT_TRUE(r.pass) << id << " measured " << r.measured;
    EXPECT_EQ(r.id, id);
    EXPECT_GE(r.runtime_ms, 0.0);
  }
}

TEST(Catalog, TwoIntervalLevelOverride) {
  const Report r = verify("two_interval", 1000);
  EXPECT_EQ(r.truncation, 1000);
  EXPECT_GT(r.measured, 0.49);
  EXPECT_LT(r.measured, 0.5);
}

TEST(Catalog, FrozenConstants) {
  const Report c = catalog_detail::cantor4(8);
  double shifted = 0.0;
  for (const auto& [k, v] : c.details)
    if (k == "sum_level8_e_0.3") shifted = v;
  EXPECT_NEAR(shifted, catalog_detail::kCantorShiftedLevel8, 1e-12);
  const Report p = verify("lebesgue_plancherel");
  EXPECT_NEAR(p.measured, catalog_detail::kPlancherelRatio64, 1e-6);
  EXPECT_GT(catalog_detail::kCantorShiftedLevel8, catalog_detail::kCantorShiftedThreshold);
}

TEST(Json, MeasureRoundTrips) {
  const std::vector<Measure> ms = {
      Measure::atomic({{{0.0}, 0.25}, {{1.5}, 0.75}}),
      Measure::piecewise_constant({{0.0, 3.0}}, {{{{0.0, 1.0}}, 0.5}, {{{2.0, 3.0}}, 0.5}}),
      Measure::self_similar(IntMatrix{{4}}, {{0}, {2}}, {0.5, 0.5}),
  };
  const Point t = {0.7};
  for (const auto& m : ms) {
    const Measure back = measure_from_json(Json::parse(to_json(m).dump()));
    EXPECT_EQ(back.kind(), m.kind());
    EXPECT_NEAR(mass(back), mass(m), 1e-14);
    EXPECT_LT(std::abs(fourier_stieltjes(back, t) - fourier_stieltjes(m, t)), 1e-13);
  }
}

TEST(Json, SmoothDensityWrittenAsCellAverages) {
  const Measure s = smooth_first_stage(Measure::atomic({{{0.0}, 1.0}, {{0.5}, 1.0}}));
  const Json j = to_json(s, 4);
  const Measure back = measure_from_json(j);
  EXPECT_NEAR(mass(back), mass(s), 1e-12);
}

TEST(Json, SpectrumRoundTrips) {
  const SpectrumSet s = perturb(SpectrumSet::digit_set(4.0, {{0.0}, {1.0}}), 0.2, 9);
  const SpectrumSet back = spectrum_from_json(Json::parse(to_json(s).dump()));
  EXPECT_EQ(back.truncate(4), s.truncate(4));
  const Json preview = to_json(s, 2);
  EXPECT_EQ(preview["preview"]["points"].size(), s.truncate(2).size());
  EXPECT_EQ(preview["preview"]["offsets"].size(), s.truncate(2).size());
}

TEST(Json, TestFunctionRoundTrips) {
  const Measure m = Measure::atomic({{{0.0}, 0.5}, {{1.0}, 0.5}});
  const std::vector<TestFunction> fs = {
      TestFunction::trig({{{1.0}, Complex(1.0, 2.0)}, {{-3.0}, 0.5}}, Box{{0.0, 1.0}}),
      TestFunction::simple({{{0.0, 0.5}}, {{0.5, 1.0}}}, {1.0, Complex(0.0, -1.0)}),
      TestFunction::atom_samples(m, {2.0, Complex(1.0, 1.0)}),
  };
  for (const auto& f : fs) {
    const TestFunction back = test_function_from_json(Json::parse(to_json(f).dump()));
    EXPECT_EQ(back.kind(), f.kind());
    for (double x : {0.0, 0.25, 0.75, 1.0}) EXPECT_EQ(back(Point{x}), f(Point{x})) << x;
  }
}

TEST(Json, NonFiniteNumbers) {
  const auto [e, cert] = riesz_thorin(ExponentPair(1.0), 1.0, ExponentPair(2.0), 1.0, 0.5);
  EXPECT_EQ(detail::write_number(ExponentPair(1.0).q()), "inf");
  BoundCertificate c;
  c.upper = kInf;
  c.exponents = ExponentPair(1.0);
  const Json j = to_json(c);
  EXPECT_EQ(j["upper"], "inf");
  EXPECT_EQ(j["q"], "inf");
  EXPECT_TRUE(j["lower"].is_null());
  EXPECT_NEAR(to_json(cert)["q"].get<double>(), 4.0, 1e-12);
  Report r;
  EXPECT_TRUE(to_json(r)["expected"].is_null());
  EXPECT_TRUE(to_json(r)["truncation"].is_null());
  EXPECT_EQ(detail::number(Json("inf"), "x"), kInf);
}

TEST(Json, MalformedInputThrows) {
  EXPECT_THROW(measure_from_json(Json::parse(R"({"kind":"atomic","atoms":[]})")), InvalidArgument);
  EXPECT_THROW(measure_from_json(Json::parse(R"({"kind":"atomic","atoms":[[[0],-1]]})")), InvalidArgument);
  EXPECT_THROW(measure_from_json(Json::parse(R"({"kind":"nosuch"})")), InvalidArgument);
  EXPECT_THROW(measure_from_json(Json::parse(R"({"atoms":[]})")), InvalidArgument);
  EXPECT_THROW(measure_from_json(Json::parse(R"({"kind":"density","breakpoints":[1,0],"values":[1]})")), InvalidArgument);
  EXPECT_THROW(spectrum_from_json(Json::parse(R"({"kind":"perturbed","base":{"kind":"lattice"},"C":0,"seed":1})")),
               InvalidArgument);
  EXPECT_THROW(load_measure("/nonexistent/file.json"), InvalidArgument);
}
