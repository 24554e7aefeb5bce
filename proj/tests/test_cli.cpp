#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "amolab/cli.hpp"
#include "amolab/spectral.hpp"

using namespace amolab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "amolab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("amolab-test-cli-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  for (std::string f; std::getline(is, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("validation failures exit 2") {
  CHECK(invoke({"cf", "--eta", "0.3"}).code == 2);
  CHECK(invoke({"cf", "--eta", "0.05"}).code == 2);
  CHECK(invoke({"cf", "--eta", "0"}).code == 2);
  CHECK(invoke({"cf", "-N", "4"}).code == 2);
  CHECK(invoke({"cf", "--precision", "32"}).code == 2);
  CHECK(invoke({"cf", "--theta", "1/3"}).code == 2);
  CHECK(invoke({"cf", "--golden", "5", "--liouville", "0.5"}).code == 2);
  CHECK(invoke({"verify", "--unknown-flag"}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"verify", "--scale", "medium"}).code == 2);
  CHECK(invoke({"verify", "--criteria", "13"}).code == 2);
  auto r = invoke({"cf", "--eta", "0.3"});
  CHECK(r.err.find("eta") != std::string::npos);
}

TEST_CASE("help exits 0") { CHECK(invoke({"--help"}).code == 0); }

TEST_CASE("cf: beta estimates from the written convergents") {
  auto dir = scratch("cf");
  REQUIRE(invoke({"cf", "--liouville", "0.5", "--levels", "3", "--out", dir.string()}).code == 0);
  auto freq = nlohmann::json::parse(slurp(dir / "frequency.json"));
  auto beta = nlohmann::json::parse(slurp(dir / "beta.json"));
  // ln q_m / q_{m-1} straight from the convergent strings
  auto conv = freq["convergents"];
  REQUIRE(conv.size() >= 2);
  mpz_class qm(conv.back()[1].get<std::string>()), qm1(conv[conv.size() - 2][1].get<std::string>());
  double want = std::log(qm.get_d()) / qm1.get_d();
  double got = std::stod(beta["tail"].get<std::string>());
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
  CHECK(std::fabs(got - 0.5) <= 0.05);

  auto gdir = scratch("cf-golden");
  REQUIRE(invoke({"cf", "--golden", "40", "--out", gdir.string()}).code == 0);
  auto gb = nlohmann::json::parse(slurp(gdir / "beta.json"));
  CHECK(std::stod(gb["tail"].get<std::string>()) < 1e-6);
}

TEST_CASE("precedence: defaults, then JSON, then the environment, then flags") {
  auto dir = scratch("prec");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.json");
    cfg << R"({"lambda": 2.5, "N": 30, "precision": 160, "eta": 0.02, "theta": "alpha/2",
              "frequency": {"kind": "coeffs", "coeffs": [1, 2, "3", 1, 1, 1, 1, 1, 1, 1, 1, 1]}})";
  }
  auto run_decay = [&](std::vector<std::string> extra) {
    std::vector<std::string> args{"decay", "--config", (dir / "run.json").string(), "--out", (dir / "o").string(),
                                  "--e-lo", "0.1", "--e-hi", "0.1"};
    args.insert(args.end(), extra.begin(), extra.end());
    REQUIRE(invoke(args).code == 0);
    return nlohmann::json::parse(slurp(dir / "o" / "decay.json"))["config"];
  };
  auto c = run_decay({});
  CHECK(c["lambda"] == 2.5);
  CHECK(c["N"] == 30);
  CHECK(c["precision"] == 160);
  CHECK(c["eta"] == 0.02);
  CHECK(c["theta"] == "alpha/2");
  CHECK(c["frequency"]["coeffs"][2] == "3");
  CHECK(c["seed"] == 20240601);  // default survives

  setenv("AMOLAB_PRECISION_BITS", "192", 1);
  c = run_decay({});
  CHECK(c["precision"] == 192);
  c = run_decay({"--precision", "96", "-N", "20"});
  CHECK(c["precision"] == 96);
  CHECK(c["N"] == 20);
  setenv("AMOLAB_PRECISION_BITS", "48", 1);
  CHECK(invoke({"cf"}).code == 2);
  setenv("AMOLAB_PRECISION_BITS", "lots", 1);
  CHECK(invoke({"cf"}).code == 2);
  unsetenv("AMOLAB_PRECISION_BITS");

  std::ofstream(dir / "bad.json") << R"({"lamda": 2})";
  CHECK(invoke({"cf", "--config", (dir / "bad.json").string()}).code == 2);
  std::ofstream(dir / "broken.json") << "{";
  CHECK(invoke({"cf", "--config", (dir / "broken.json").string()}).code == 2);
  CHECK(invoke({"cf", "--config", (dir / "missing.json").string()}).code == 2);
}

TEST_CASE("decay: empty window gives an empty CSV") {
  auto dir = scratch("empty");
  auto r = invoke({"decay", "-N", "40", "--e-lo", "0.5", "--e-hi", "0.5", "--out", dir.string()});
  CHECK(r.code == 0);
  auto rows = lines_of(slurp(dir / "decay.csv"));
  REQUIRE(rows.size() == 1);  // header only
  CHECK(rows[0].rfind("index,energy", 0) == 0);
  // reversed ends are an empty window too
  CHECK(invoke({"decay", "-N", "40", "--e-lo", "-0.5", "--e-hi", "-0.8", "--out", dir.string()}).code == 0);
  CHECK(lines_of(slurp(dir / "decay.csv")).size() == 1);
}

TEST_CASE("decay: subcritical coupling is reported as not localized") {
  auto dir = scratch("sub");
  REQUIRE(invoke({"decay", "--lambda", "0.5", "-N", "40", "--out", dir.string()}).code == 0);
  auto rows = lines_of(slurp(dir / "decay.csv"));
  REQUIRE(rows.size() == 82);
  for (size_t i = 1; i < rows.size(); ++i) CHECK(split(rows[i])[3] == "not localized");
  CHECK(lines_of(slurp(dir / "profiles.csv")).size() == 1);
}

TEST_CASE("decay: golden run at lambda 3 writes fits and profiles") {
  auto dir = scratch("golden");
  REQUIRE(invoke({"decay", "-N", "120", "--e-lo", "-1", "--e-hi", "1", "--out", dir.string()}).code == 0);
  auto report = nlohmann::json::parse(slurp(dir / "decay.json"));
  CHECK(report["localized"].get<int>() > 0);
  CHECK(report["q"] == "55");
  auto rows = lines_of(slurp(dir / "decay.csv"));
  CHECK(rows.size() == report["eigenpairs"].get<size_t>() + 1);
  int localized = 0;
  for (size_t i = 1; i < rows.size(); ++i) {
    auto f = split(rows[i]);
    REQUIRE(f.size() == 7);
    if (f[3] != "localized") continue;
    ++localized;
    CHECK(std::stod(f[4]) < 0);  // decaying envelope
  }
  CHECK(localized == report["localized"].get<int>());
  CHECK(report["fits"].size() == static_cast<size_t>(localized));
}

TEST_CASE("spectrum CSV round-trips at the working precision") {
  auto dir = scratch("spec");
  REQUIRE(invoke({"spectrum", "-N", "15", "--lambda", "2", "--theta", "1/2", "--out", dir.string()}).code == 0);
  auto rows = lines_of(slurp(dir / "spectrum.csv"));
  auto want = spectral::spectrum_sample(make_params(2, cfrac::Frequency::golden(40), ThetaKind::Half), 15);
  REQUIRE(rows.size() == want.size() + 1);
  for (size_t i = 0; i < want.size(); ++i) CHECK(Real(std::string_view(split(rows[i + 1])[1])) == want[i]);
}

TEST_CASE("spectrum sweep columns") {
  auto dir = scratch("sweep");
  REQUIRE(invoke({"spectrum", "-N", "10", "--sweep-k", "8", "--grid", "16", "--energy", "0.25,1.5", "--out",
                  dir.string()})
              .code == 0);
  auto rows = lines_of(slurp(dir / "sweep.csv"));
  CHECK(rows[0] == "k,theta,E,sign,logmag,normalized_logmag");
  REQUIRE(rows.size() == 1 + 2 * 16);
  auto f = split(rows[1]);
  CHECK(f[0] == "8");
  CHECK(std::stod(f[5]) * 8 == doctest::Approx(std::stod(f[4])));
}

TEST_CASE("green: both evaluations agree") {
  auto dir = scratch("green");
  REQUIRE(invoke({"green", "--x1", "-20", "--k", "60", "--y", "3", "--energy", "0.3", "--out", dir.string()}).code ==
          0);
  auto j = nlohmann::json::parse(slurp(dir / "green.json"));
  CHECK(j["direct"]["left"]["sign"] == j["cramer"]["left"]["sign"]);
  CHECK(j["direct"]["right"]["sign"] == j["cramer"]["right"]["sign"]);
  CHECK(std::stod(j["max_logmag_difference"].get<std::string>()) < 1e-20);
  CHECK(invoke({"green", "--x1", "0", "--k", "5", "--y", "9"}).code == 2);
}

TEST_CASE("lagrange: La CSV and uniformity witness") {
  auto dir = scratch("lagrange");
  REQUIRE(invoke({"lagrange", "--set", "custom", "--residues", "0.05,0.2,0.35", "--out", dir.string()}).code == 0);
  CHECK(lines_of(slurp(dir / "la.csv")).size() == 4);
  CHECK(invoke({"lagrange", "--set", "custom", "--residues", "0.1,0.9"}).code == 2);
  CHECK(invoke({"lagrange", "--set", "star"}).code == 2);

  auto r = invoke({"lagrange", "--set", "regular", "--y", "40", "--level", "8", "--energy", "0.5", "--out",
                   dir.string()});
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(slurp(dir / "uniformity.json"));
  CHECK(j["violation"] == false);
}

TEST_CASE("verify: exit codes and byte-identical verdicts") {
  auto a = scratch("verify-a"), b = scratch("verify-b");
  CHECK(invoke({"verify", "--scale", "quick", "--criteria", "1,3,11", "--out", a.string()}).code == 0);
  CHECK(invoke({"verify", "--scale", "quick", "--criteria", "1,3,11", "--out", b.string()}).code == 0);
  CHECK(slurp(a / "verdict.json") == slurp(b / "verdict.json"));
  auto c = scratch("verify-c");
  CHECK(invoke({"verify", "--scale", "quick", "--criteria", "1,3,11", "--seed", "7", "--out", c.string()}).code == 0);
  CHECK(slurp(a / "verdict.json") != slurp(c / "verdict.json"));

  auto v = nlohmann::json::parse(slurp(a / "verdict.json"));
  CHECK(v["pass"] == true);
  CHECK(v["criteria"].size() == 3);
  CHECK(v["scale"] == "quick");
}

TEST_CASE("verify: 64-bit precision exhausts on the eigenvector criteria") {
  auto dir = scratch("p64");
  auto r = invoke({"verify", "--scale", "quick", "--precision", "64", "--k", "500", "--criteria", "4", "--out",
                   dir.string()});
  CHECK(r.code == 1);
  auto v = nlohmann::json::parse(slurp(dir / "verdict.json"));
  CHECK(v["pass"] == false);
  CHECK(v["precision_bits"] == 64);
  CHECK(v["k_override"] == 500);
  CHECK(v["criteria"][0]["summary"].get<std::string>().find("could not be resolved") != std::string::npos);
  // the same criterion clears at the default precision
  CHECK(invoke({"verify", "--scale", "quick", "--criteria", "4", "--out", dir.string()}).code == 0);
}
