#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "srnbound/network.hpp"

namespace srnbound {

/** Exit codes of the command-line tool. */
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitInfeasible = 3,
  kExitConsistency = 4,
};

struct RunConfig {
  std::filesystem::path network;
  std::map<std::string, double> parameters;
  std::vector<Count> lower_weights;
  std::vector<Count> upper_weights;
  ClassIndex l_exact = 300;
  ClassIndex l_total = 300;
  int max_degree = 1;
  ClassIndex verify_horizon = 100;
  ClassIndex irreducible_horizon = 200;
  ClassIndex M = 2000;
  double t_final = 4.0;
  std::string p0 = "delta:0";
  std::vector<double> epsilons;
  std::vector<double> t_grid;
  std::vector<ClassIndex> n_grid;
  double budget = 1e-8;
  std::filesystem::path out_dir = ".";
};

/** Builds, verifies, classifies and combines the lower and upper chains. */
nlohmann::json cmd_analyze(const RunConfig& config);

/** One CME solve on the upper chain; heatmap CSV plus N-hat per epsilon and time. */
nlohmann::json cmd_plan_truncation(const RunConfig& config);

/** "delta:80" or "uniform:a:b" on [0, M]. */
std::vector<double> parse_p0(const std::string& spec, ClassIndex M);

/** "a:b" (unit step) or "a:b:step", inclusive. */
std::vector<double> parse_grid(const std::string& spec);

/** "b1=1,b2=2.5". */
std::map<std::string, double> parse_parameters(const std::string& text);

/** Exit code for the exception currently being handled. */
int exit_code_for_current_exception(std::ostream& err);

/** Entry point of the `bounds` tool. */
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace srnbound
