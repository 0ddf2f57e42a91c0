#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace {

const std::string kCli = FRAMELAB_CLI_PATH;
const std::string kSamples = FRAMELAB_SAMPLES_DIR;

struct CliResult {
  int code;
  std::string out;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult invoke(const std::string& args) {
  const auto out = std::filesystem::temp_directory_path() / ("framelab_cli_" + std::to_string(::getpid()) + ".txt");
  const int status = std::system((kCli + " " + args + " > " + out.string() + " 2>/dev/null").c_str());
  CliResult r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
  std::filesystem::remove(out);
  return r;
}

std::string sample(const char* name) { return kSamples + "/" + name; }

}  // namespace

TEST(Cli, CatalogList) {
  const CliResult r = invoke("catalog list");
  ASSERT_EQ(r.code, 0);
  EXPECT_GE(std::count(r.out.begin(), r.out.end(), '\n'), 8);
  EXPECT_NE(r.out.find("two_atom"), std::string::npos);
}

TEST(Cli, CatalogVerify) {
  const CliResult r = invoke("catalog verify two_atom");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["id"], "two_atom");
  EXPECT_EQ(invoke("catalog verify nosuch").code, 2);
}

TEST(Cli, DiracBoundsEqualMass) {
  const CliResult r = invoke("bounds --mu " + sample("dirac0.json") + " --nu " + sample("three_atoms_mass2.json") + " --p 2 --budget 200");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["estimate"]["lower_hat"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(j["estimate"]["upper_hat"].get<double>(), 2.0, 1e-12);
  EXPECT_TRUE(j["ordering_check"]["holds"].get<bool>());
}

TEST(Cli, HolderCertificateForProbabilityPair) {
  const CliResult r = invoke("bounds --mu " + sample("two_atom.json") + " --nu " + sample("leb01.json") + " --p 1.5 --budget 200");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_FALSE(j["certificates"].empty());
  EXPECT_NEAR(j["certificates"][0]["upper"].get<double>(), 1.0, 1e-12);
  EXPECT_LE(j["estimate"]["upper_hat"].get<double>(), 1.0 + 1e-9);
}

TEST(Cli, SeededCsvIsReproducible) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = dir / "framelab_csv_a.csv", b = dir / "framelab_csv_b.csv";
  const std::string base = "bounds --mu " + sample("leb01.json") + " --nu " + sample("lattice_nu.json") + " --p 2 --budget 100 --seed 17 --csv ";
  ASSERT_EQ(invoke(base + a.string()).code, 0);
  ASSERT_EQ(invoke(base + b.string()).code, 0);
  const std::string ca = slurp(a);
  EXPECT_FALSE(ca.empty());
  EXPECT_EQ(ca, slurp(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Cli, TruncOverridesSpectrumLevel) {
  const CliResult r = invoke("bounds --mu " + sample("leb01.json") + " --nu " + sample("lattice_nu.json") + " --p 2 --budget 50 --trunc 4");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["estimate"]["truncation"], 4);
}

TEST(Cli, ConstructInterpolate) {
  const CliResult r = invoke("construct interpolate --p0 1 --p1 2 --c0 1 --c1 1 --theta 0.5");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["p"].get<double>(), 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(j["q"].get<double>(), 4.0, 1e-12);
  EXPECT_NEAR(j["upper"].get<double>(), 1.0, 1e-12);
}

TEST(Cli, ConstructDiscretize) {
  const CliResult r = invoke("construct discretize --nu " + sample("leb01.json") + " --r 0.5");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["atoms"].size(), 2u);
  EXPECT_DOUBLE_EQ(j["atoms"][0][0][0].get<double>(), 0.25);
  EXPECT_DOUBLE_EQ(j["atoms"][1][0][0].get<double>(), 0.75);
  EXPECT_NEAR(j["atoms"][0][1].get<double>(), 0.5, 1e-15);
}

TEST(Cli, ConstructPerturb) {
  const CliResult r = invoke("construct perturb --lambda lattice --C 0.1 --seed 7 --level 3");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["kind"], "perturbed");
  for (const auto& off : j["preview"]["offsets"]) EXPECT_LE(std::abs(off[0].get<double>()), 0.1);
  EXPECT_EQ(r.out, invoke("construct perturb --lambda lattice --C 0.1 --seed 7 --level 3").out);
}

TEST(Cli, ConstructConvolveAndSmooth) {
  const CliResult c = invoke("construct convolve --a " + sample("two_atom.json") + " --b " + sample("leb01.json"));
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(nlohmann::json::parse(c.out)["kind"], "density");
  EXPECT_EQ(invoke("construct smooth --nu " + sample("dirac0.json")).code, 0);
  EXPECT_EQ(invoke("construct deconvolve --nu " + sample("lattice_nu.json") + " --mu-prime " + sample("two_atom.json") + " --p 2").code, 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke("").code, 2);
  EXPECT_EQ(invoke("bounds --mu " + sample("leb01.json")).code, 2);
  EXPECT_EQ(invoke("bounds --mu " + sample("leb01.json") + " --nu " + sample("leb01.json") + " --p 0.5").code, 2);
  EXPECT_EQ(invoke("bounds --mu /nonexistent.json --nu " + sample("leb01.json") + " --p 2").code, 2);
  EXPECT_EQ(invoke("construct interpolate --theta 2").code, 2);
  EXPECT_EQ(invoke("construct discretize --nu " + sample("leb01.json") + " --rule sideways").code, 2);
  EXPECT_EQ(invoke("--help").code, 0);
}
