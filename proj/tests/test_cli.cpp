#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "srnbound/cli_runner.hpp"
#include "srnbound/errors.hpp"

using namespace srnbound;
namespace fs = std::filesystem;

namespace {

const fs::path kToy = fs::path(SRNBOUND_DATA_DIR) / "toy_network.json";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("srnbound_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
  args.insert(args.begin(), "bounds");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

RunConfig toy_config(const fs::path& dir) {
  RunConfig c;
  c.network = kToy;
  c.lower_weights = {2, 2, 5};
  c.upper_weights = {2, 1, 1};
  c.out_dir = dir;
  return c;
}

}  // namespace

TEST_CASE("parsers") {
  CHECK(parse_grid("0:4:1") == std::vector<double>{0, 1, 2, 3, 4});
  CHECK(parse_grid("2:4") == std::vector<double>{2, 3, 4});
  CHECK(parse_grid("0:1:0.25").size() == 5);
  CHECK_THROWS_AS(parse_grid("4:0"), ValidationError);
  CHECK_THROWS_AS(parse_grid("0:x"), ValidationError);

  const auto d = parse_p0("delta:3", 5);
  CHECK(d == std::vector<double>{0, 0, 0, 1, 0, 0});
  const auto u = parse_p0("uniform:1:4", 5);
  CHECK(u[0] == 0.0);
  CHECK(u[2] == doctest::Approx(0.25));
  CHECK_THROWS_AS(parse_p0("delta:9", 5), ValidationError);
  CHECK_THROWS_AS(parse_p0("gauss:1", 5), ValidationError);

  const auto p = parse_parameters("b1=1,b2=2.5");
  CHECK(p.at("b2") == 2.5);
  CHECK(parse_parameters("").empty());
  CHECK_THROWS_AS(parse_parameters("b1"), ValidationError);
}

TEST_CASE("analyze on the toy network") {
  const fs::path dir = scratch("analyze");
  const auto r = cmd_analyze(toy_config(dir));
  CHECK(r["x"] == "positive recurrent");
  CHECK(r["upper"]["drift"]["class"] == "positive-recurrent");
  CHECK(r["lower"]["drift"]["B1"].get<double>() == doctest::Approx(-3.9));
  CHECK(r["lower"]["verify"]["passed"] == true);
  CHECK(r["upper"]["irreducible"]["attested"] == true);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "lower_chain.csv"));

  std::ifstream in(dir / "manifest.json");
  const auto m = nlohmann::json::parse(in);
  CHECK(m["tool"] == "bounds");
  CHECK(m.contains("config_hash"));
  CHECK_FALSE(m.contains("timestamp"));
}

TEST_CASE("analyze with the naive upper partition") {
  RunConfig c = toy_config(scratch("naive"));
  c.upper_weights = {1, 1, 1};
  const auto r = cmd_analyze(c);
  CHECK(r["upper"]["drift"]["class"] == "explosive");
  CHECK(r["x"] == "no information");
  CHECK(r["upper"]["notes"].size() == 1);
}

TEST_CASE("analyze errors carry a stage label") {
  RunConfig c = toy_config(scratch("missing"));
  c.network = "/nonexistent/network.json";
  try {
    cmd_analyze(c);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).rfind("[load]", 0) == 0);
  }
  c = toy_config(scratch("badweights"));
  c.lower_weights = {2, 2};
  try {
    cmd_analyze(c);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find('[') == 0);
  }
}

TEST_CASE("exit codes") {
  std::string out, err;
  CHECK(run({"analyze", "--network", "/nonexistent.json", "--lower-weights", "2,2,5",
             "--upper-weights", "2,1,1"},
            &out, &err) == kExitValidation);
  CHECK(run({"frobnicate"}) == kExitValidation);
  CHECK(run({"--version"}, &out) == kExitOk);
  CHECK(out.find("0.1.0") != std::string::npos);

  const fs::path dir = scratch("codes");
  fs::create_directories(dir);
  const std::string chain = (dir / "upper.csv").string();
  REQUIRE(run({"build", "--network", kToy.string(), "--weights", "2,1,1", "--out", chain}) ==
          kExitOk);
  CHECK(run({"truncate", "--chain", chain, "--p0", "delta:80", "--M", "100", "--epsilon",
             "0.001"},
            &out, &err) == kExitInfeasible);
  CHECK(err.find("increase M") != std::string::npos);
  CHECK(run({"truncate", "--chain", chain, "--p0", "delta:0", "--M", "200"}, &out, &err) ==
        kExitValidation);

  try {
    throw StiffnessError("stuck");
  } catch (...) {
    std::ostringstream e;
    CHECK(exit_code_for_current_exception(e) == kExitConsistency);
  }
}

TEST_CASE("build, verify, classify, combine round trip") {
  const fs::path dir = scratch("roundtrip");
  fs::create_directories(dir);
  const std::string up = (dir / "u.csv").string(), lo = (dir / "l.csv").string();
  REQUIRE(run({"build", "--network", kToy.string(), "--weights", "2,1,1", "--out", up}) == 0);
  REQUIRE(run({"build", "--network", kToy.string(), "--weights", "2,2,5", "--direction", "lower",
               "--out", lo}) == 0);
  CHECK(run({"verify", "--network", kToy.string(), "--weights", "2,1,1", "--chain", up}) == 0);
  const std::string ur = (dir / "u.json").string(), lr = (dir / "l.json").string();
  REQUIRE(run({"classify", "--chain", up, "--out", ur}) == 0);
  REQUIRE(run({"classify", "--chain", lo, "--weights", "2,2,5", "--out", lr}) == 0);
  std::string out;
  REQUIRE(run({"combine", "--lower", lr, "--upper", ur}, &out) == 0);
  CHECK(nlohmann::json::parse(out)["x"] == "positive recurrent");

  const std::string traj = (dir / "traj.csv").string();
  REQUIRE(run({"couple", "--network", kToy.string(), "--weights", "2,1,1", "--chain", up, "--x0",
               "5,2,2", "--y0", "20", "--tf", "2", "--runs", "3", "--out", traj},
              &out) == 0);
  const auto j = nlohmann::json::parse(out);
  CHECK(j["max_marginal_defect"].get<double>() <= 1e-10);
  CHECK(fs::exists(traj + ".manifest.json"));
}

TEST_CASE("plan-truncation") {
  RunConfig c;
  c.network = kToy;
  c.upper_weights = {2, 1, 1};
  c.M = 600;
  c.l_total = 600;
  c.p0 = "delta:80";
  c.epsilons = {0.1, 0.01, 1.0};
  c.t_grid = parse_grid("0:4:1");
  c.n_grid = {80, 100, 120, 140};
  c.out_dir = scratch("plan");
  const auto r = cmd_plan_truncation(c);
  const auto& n = r["N_hat"];
  REQUIRE(n.size() == 3);
  CHECK(n[1]["N_hat"].get<long long>() >= n[0]["N_hat"].get<long long>());
  CHECK(n[2]["N_hat"] == 0);
  CHECK(n[0]["N_hat"] == 110);
  CHECK(n[0]["over_time"].size() == 5);
  CHECK(n[0]["certificate"]["E_T_clipped"].get<double>() <= 0.1);
  CHECK(fs::exists(c.out_dir / "heatmap.csv"));

  c.epsilons = {0.0};
  CHECK_THROWS_AS(cmd_plan_truncation(c), ValidationError);
}
