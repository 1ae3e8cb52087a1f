#include "srnbound/cli_runner.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "srnbound/bounds.hpp"
#include "srnbound/chain_io.hpp"
#include "srnbound/classifier.hpp"
#include "srnbound/cme.hpp"
#include "srnbound/coupling.hpp"
#include "srnbound/errors.hpp"
#include "srnbound/network_io.hpp"
#include "srnbound/rng.hpp"
#include "srnbound/ssa.hpp"
#include "srnbound/version.hpp"

namespace srnbound {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Re-raises the active library error with a stage label, keeping its type.
template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  const std::string tag = "[" + name + "] ";
  try {
    return f();
  } catch (const StabilizationError& e) {
    throw StabilizationError(tag + e.what(), e.offset(), e.detected_degree());
  } catch (const PrefixDominationError& e) {
    throw PrefixDominationError(tag + e.what(), e.index());
  } catch (const ValidationError& e) {
    throw ValidationError(tag + e.what());
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(tag + e.what());
  } catch (const ConsistencyError& e) {
    throw ConsistencyError(tag + e.what());
  } catch (const BudgetExceeded& e) {
    throw BudgetExceeded(tag + e.what());
  } catch (const StiffnessError& e) {
    throw StiffnessError(tag + e.what());
  } catch (const Error& e) {
    throw Error(tag + e.what());
  }
}

void write_json(const json& doc, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::uint64_t config_hash(const json& config) { return fnv1a(config.dump()); }

void write_manifest(const fs::path& path, const std::string& command, const json& config,
                    const std::vector<std::uint64_t>& seeds = {}) {
  json m;
  m["tool"] = "bounds";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config;
  m["config_hash"] = config_hash(config);
  m["seeds"] = seeds;
  write_json(m, path);
}

ReactionNetwork network_for(const fs::path& path, const std::map<std::string, double>& params) {
  if (!fs::exists(path)) throw ValidationError("network file not found: " + path.string());
  ReactionNetwork net = load_network(path);
  return params.empty() ? net : net.with_parameters(params);
}

State parse_state(const std::string& text) {
  const auto v = parse_count_list(text);
  return State(v.begin(), v.end());
}

json counterexample_json(const AssumptionReport& r) {
  json j;
  j["passed"] = r.passed;
  j["checks"] = r.checks;
  if (r.first) {
    const Counterexample& c = *r.first;
    j["counterexample"] = {{"assumption", c.assumption}, {"l", c.l}, {"m", c.m},
                           {"chain_value", c.chain_value}, {"reference_value", c.reference_value}};
    if (c.state) j["counterexample"]["state"] = *c.state;
  }
  return j;
}

json tails_json(const BoundingChain& chain) {
  json tails = json::array();
  for (const RateTail& t : chain.tails()) {
    tails.push_back({{"offset", t.offset}, {"degree", t.degree}, {"period", t.period},
                     {"onset", t.onset}});
  }
  return tails;
}

json drift_json(const DriftStats& s, const Classification& c) {
  json j;
  j["B1"] = s.b1;
  j["B2"] = s.b2;
  j["B3"] = s.b3;
  j["valid"] = s.valid;
  j["periodic_intercepts"] = s.periodic_intercepts;
  j["up_degree"] = s.up_degree;
  j["down_degree"] = s.down_degree;
  j["class"] = to_string(c.kind);
  j["provenance"] = c.provenance;
  return j;
}

json irreducible_json(const IrreducibilityReport& r) {
  json j;
  j["attested"] = r.attested;
  j["reason"] = r.reason;
  std::vector<ClassIndex> head(r.witness.begin(),
                               r.witness.begin() + std::min<std::size_t>(r.witness.size(), 50));
  j["witness"] = head;
  j["witness_size"] = r.witness.size();
  return j;
}

// Build with the requested degree, retrying with cubic tails if stabilization fails.
BoundingChain build_adaptive(const ReactionNetwork& net, const ClassPartition& p, Direction dir,
                             BuildOptions opt, json& notes) {
  try {
    return build_bounding_chain(net, p, dir, opt);
  } catch (const StabilizationError& e) {
    if (opt.max_degree >= 3) throw;
    notes.push_back(std::string("retried with cubic tails: ") + e.what());
    opt.max_degree = 3;
    return build_bounding_chain(net, p, dir, opt);
  }
}

std::vector<double> output_times(const std::vector<double>& grid, double t_final) {
  std::vector<double> t;
  for (double v : grid) {
    if (v >= 0 && v <= t_final + 1e-12) t.push_back(std::min(v, t_final));
  }
  if (t.empty() || t.front() > 0) t.insert(t.begin(), 0.0);
  if (t.back() < t_final) t.push_back(t_final);
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

json certificate_json(const TruncationCertificate& c) {
  return {{"N", c.N},
          {"M", c.M},
          {"T_f", c.t_final},
          {"retained_loss", c.retained_loss},
          {"initial_above", c.initial_above},
          {"exit_integral", c.exit_integral},
          {"solver_budget", c.solver_budget},
          {"E_T", c.bound},
          {"E_T_clipped", c.clipped()}};
}

void write_heatmap(const fs::path& path, const CmeSolution& sol, const BoundingChain& chain,
                   const std::vector<ClassIndex>& levels) {
  const auto heat = truncation_heatmap(sol, chain, levels);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "t,N,E_T_clipped\n";
  char buf[64];
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.10g,%lld,%.10g\n", sol.times[k],
                    static_cast<long long>(levels[i]), heat[k][i]);
      out << buf;
    }
  }
}

std::vector<ClassIndex> class_grid(const std::vector<double>& grid, ClassIndex M) {
  std::vector<ClassIndex> out;
  for (double v : grid) {
    const auto n = static_cast<ClassIndex>(std::llround(v));
    if (n >= 0 && n <= M && (out.empty() || out.back() != n)) out.push_back(n);
  }
  return out;
}

}  // namespace

std::vector<double> parse_p0(const std::string& spec, ClassIndex M) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string s; std::getline(ss, s, ':');) parts.push_back(s);
  try {
    if (parts.size() == 2 && parts[0] == "delta") return delta(std::stoll(parts[1]), M);
    if (parts.size() == 3 && parts[0] == "uniform") {
      const ClassIndex a = std::stoll(parts[1]), b = std::stoll(parts[2]);
      if (a < 0 || b < a || b > M) throw ValidationError("uniform range outside [0, M]");
      std::vector<double> p(static_cast<std::size_t>(M + 1), 0.0);
      for (ClassIndex l = a; l <= b; ++l) p[static_cast<std::size_t>(l)] = 1.0 / (b - a + 1);
      return p;
    }
  } catch (const std::logic_error&) {
  }
  throw ValidationError("cannot parse p0 '" + spec + "' (expected delta:L or uniform:A:B)");
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> v;
  std::stringstream ss(spec);
  try {
    for (std::string s; std::getline(ss, s, ':');) v.push_back(std::stod(s));
  } catch (const std::logic_error&) {
    throw ValidationError("cannot parse grid '" + spec + "'");
  }
  if (v.size() == 2) v.push_back(1.0);
  if (v.size() != 3 || !(v[2] > 0) || v[1] < v[0]) {
    throw ValidationError("grid must be a:b or a:b:step with a <= b and step > 0");
  }
  std::vector<double> out;
  const auto n = static_cast<long long>(std::floor((v[1] - v[0]) / v[2] + 1e-9));
  for (long long k = 0; k <= n; ++k) out.push_back(v[0] + static_cast<double>(k) * v[2]);
  return out;
}

std::map<std::string, double> parse_parameters(const std::string& text) {
  std::map<std::string, double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("parameter '" + item + "' lacks '='");
    try {
      out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw ValidationError("parameter '" + item + "' has no numeric value");
    }
  }
  return out;
}

json cmd_analyze(const RunConfig& c) {
  if (c.lower_weights.empty() || c.upper_weights.empty()) {
    throw ValidationError("[config] analyze needs lower and upper weights");
  }
  const ReactionNetwork net = stage("load", [&] { return network_for(c.network, c.parameters); });
  fs::create_directories(c.out_dir);
  json report;
  report["network"] = c.network.string();
  report["notes"] = json::array();

  BuildOptions opt;
  opt.l_exact = c.l_exact;
  opt.l_total = std::max({c.l_total, c.verify_horizon + 1, c.irreducible_horizon});
  opt.max_degree = c.max_degree;

  std::map<std::string, Classification> classes;
  std::map<std::string, IrreducibilityReport> irreducible;
  for (const auto& [side, weights, dir] :
       {std::tuple{std::string("lower"), c.lower_weights, Direction::kLower},
        std::tuple{std::string("upper"), c.upper_weights, Direction::kUpper}}) {
    const ClassPartition p = stage("config", [&] { return ClassPartition(weights); });
    json notes = json::array();
    const BoundingChain chain =
        stage("build " + side, [&] { return build_adaptive(net, p, dir, opt, notes); });
    const fs::path csv = c.out_dir / (side + "_chain.csv");
    write_chain_csv(chain, csv);
    const AssumptionReport v =
        stage("verify " + side, [&] { return verify_assumptions(net, p, chain, c.verify_horizon); });
    const DriftStats s = stage("drift " + side, [&] { return drift_stats(chain); });
    const Classification cls = classify(s);
    const IrreducibilityReport irr = stage("irreducible " + side, [&] {
      return check_irreducible(chain, c.irreducible_horizon,
                               empty_classes(p, c.irreducible_horizon));
    });
    json j;
    j["weights"] = weights;
    j["chain"] = csv.string();
    j["max_jump"] = chain.max_jump();
    j["tails"] = tails_json(chain);
    j["verify"] = counterexample_json(v);
    j["drift"] = drift_json(s, cls);
    j["irreducible"] = irreducible_json(irr);
    j["notes"] = notes;
    report[side] = j;
    classes[side] = cls;
    irreducible[side] = irr;
    if (!v.passed) throw ValidationError("[verify " + side + "] assumptions fail");
  }
  const XBehavior x = stage("combine", [&] {
    return combine(classes["lower"], irreducible["lower"], classes["upper"], irreducible["upper"]);
  });
  report["x"] = to_string(x);
  const fs::path out = c.out_dir / "analyze.json";
  write_json(report, out);
  report["report"] = out.string();
  json cfg = {{"network", c.network.string()},   {"lower_weights", c.lower_weights},
              {"upper_weights", c.upper_weights}, {"l_exact", c.l_exact},
              {"l_total", opt.l_total},           {"max_degree", c.max_degree},
              {"parameters", c.parameters}};
  write_manifest(c.out_dir / "manifest.json", "analyze", cfg);
  return report;
}

json cmd_plan_truncation(const RunConfig& c) {
  if (c.upper_weights.empty()) throw ValidationError("[config] plan-truncation needs weights");
  for (double e : c.epsilons) {
    if (!(e > 0 && e <= 1)) throw ValidationError("[config] epsilon must lie in (0, 1]");
  }
  const ReactionNetwork net = stage("load", [&] { return network_for(c.network, c.parameters); });
  const ClassPartition p = stage("config", [&] { return ClassPartition(c.upper_weights); });
  BuildOptions opt;
  opt.l_exact = c.l_exact;
  opt.l_total = std::max(c.l_total, c.M);
  opt.max_degree = c.max_degree;
  json notes = json::array();
  const BoundingChain chain =
      stage("build upper", [&] { return build_adaptive(net, p, Direction::kUpper, opt, notes); });
  fs::create_directories(c.out_dir);
  write_chain_csv(chain, c.out_dir / "upper_chain.csv");

  const auto p0 = stage("config", [&] { return parse_p0(c.p0, c.M); });
  const std::vector<double> times = output_times(c.t_grid, c.t_final);
  SolveOptions so;
  so.budget = c.budget;
  const CmeSolution sol =
      stage("solve", [&] { return solve_cme(chain_generator(chain, c.M), p0, times, so); });
  std::vector<ClassIndex> levels = c.n_grid;
  if (levels.empty()) {
    for (ClassIndex n = 0; n <= c.M; ++n) levels.push_back(n);
  }
  const fs::path heat = c.out_dir / "heatmap.csv";
  write_heatmap(heat, sol, chain, levels);

  const std::size_t last = times.size() - 1;
  json report;
  report["heatmap"] = heat.string();
  report["chain"] = (c.out_dir / "upper_chain.csv").string();
  report["solver"] = {{"steps", sol.steps}, {"mass_defect", sol.mass_defect},
                      {"retained_loss", sol.loss(last)}};
  report["notes"] = notes;
  json n_hat = json::array();
  for (double eps : c.epsilons) {
    const ClassIndex N = stage("plan", [&] { return min_truncation(sol, chain, eps, last); });
    json per_t = json::array();
    for (std::size_t k = 0; k < times.size(); ++k) {
      json row = {{"t", times[k]}};
      try {
        row["N_hat"] = min_truncation(sol, chain, eps, k);
      } catch (const InfeasibleError&) {
        row["N_hat"] = nullptr;
      }
      per_t.push_back(row);
    }
    n_hat.push_back({{"epsilon", eps},
                     {"N_hat", N},
                     {"certificate", certificate_json(certificate_from(sol, chain, N, last))},
                     {"over_time", per_t}});
  }
  report["N_hat"] = n_hat;
  write_json(report, c.out_dir / "plan.json");
  json cfg = {{"network", c.network.string()}, {"weights", c.upper_weights},
              {"l_exact", c.l_exact},          {"M", c.M},
              {"T_f", c.t_final},              {"p0", c.p0},
              {"epsilons", c.epsilons},        {"budget", c.budget},
              {"parameters", c.parameters}};
  write_manifest(c.out_dir / "manifest.json", "plan-truncation", cfg);
  return report;
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const StabilizationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConsistency;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounding chains, couplings and truncation certificates for reaction networks",
               "bounds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // shared option storage
  std::string network, weights, lower, upper, direction = "upper", chain_path, out_path,
                                                params, x0, p0 = "delta:0", stop, n_grid, t_grid,
                                                out_dir = ".", epsilon_list;
  ClassIndex l_exact = 300, l_total = 300, l_check = 100, horizon = 200, y0 = 0, M = 2000, N = -1;
  int max_degree = 1;
  double tf = 4.0, epsilon = -1, budget = 1e-8;
  std::uint64_t seed = 1, samples = 1000, runs = 1;
  json result;
  int status = kExitOk;

  auto add_network = [&](CLI::App* s) {
    s->add_option("--network", network, "network JSON")->required()->check(CLI::ExistingFile);
    s->add_option("--params", params, "parameter overrides, e.g. b1=1,b2=2.5");
  };
  auto net = [&] { return network_for(network, parse_parameters(params)); };
  auto partition = [&] { return ClassPartition(parse_count_list(weights)); };

  auto* build = app.add_subcommand("build", "build an optimal bounding chain");
  add_network(build);
  build->add_option("--weights", weights, "class weights, e.g. 2,1,1")->required();
  build->add_option("--direction", direction, "upper or lower");
  build->add_option("--l-exact", l_exact, "last class computed exactly");
  build->add_option("--l-total", l_total, "last class covered by the chain");
  build->add_option("--max-degree", max_degree, "largest tail degree");
  build->add_option("--out", out_path, "chain CSV")->required();
  build->callback([&] {
    BuildOptions opt;
    opt.l_exact = l_exact;
    opt.l_total = l_total;
    opt.max_degree = max_degree;
    const BoundingChain c = build_bounding_chain(net(), partition(), parse_direction(direction), opt);
    write_chain_csv(c, out_path);
    result = {{"chain", out_path},
              {"direction", to_string(c.direction())},
              {"max_jump", c.max_jump()},
              {"l_exact", c.l_exact()},
              {"l_total", c.l_total()},
              {"tails", tails_json(c)}};
    write_manifest(out_path + ".manifest.json", "build",
                   {{"network", network}, {"weights", weights}, {"direction", direction},
                    {"l_exact", l_exact}, {"l_total", l_total}, {"max_degree", max_degree},
                    {"params", params}});
  });

  auto* verify = app.add_subcommand("verify", "check the comparison assumptions of a chain");
  add_network(verify);
  verify->add_option("--weights", weights)->required();
  verify->add_option("--chain", chain_path)->required()->check(CLI::ExistingFile);
  verify->add_option("--l-check", l_check, "last class checked");
  verify->callback([&] {
    const BoundingChain c = read_chain_csv(chain_path);
    const AssumptionReport r = verify_assumptions(net(), partition(), c, l_check);
    result = counterexample_json(r);
    if (!r.passed) status = kExitValidation;
  });

  auto* cls = app.add_subcommand("classify", "drift statistics and class of a chain");
  cls->add_option("--chain", chain_path)->required()->check(CLI::ExistingFile);
  cls->add_option("--weights", weights, "partition weights, used to skip empty classes");
  cls->add_option("--horizon", horizon, "irreducibility window");
  cls->add_option("--out", out_path, "report JSON");
  cls->callback([&] {
    const BoundingChain c = read_chain_csv(chain_path);
    const DriftStats s = drift_stats(c);
    const ClassIndex h = std::min(horizon, c.l_total());
    const auto ignored = weights.empty() ? std::vector<ClassIndex>{} : empty_classes(partition(), h);
    result = drift_json(s, classify(s));
    result["direction"] = to_string(c.direction());
    result["irreducible"] = irreducible_json(check_irreducible(c, h, ignored));
    if (!out_path.empty()) write_json(result, out_path);
  });

  auto* comb = app.add_subcommand("combine", "combine lower and upper classifications");
  comb->add_option("--lower", lower, "classify report of the lower chain")->required()
      ->check(CLI::ExistingFile);
  comb->add_option("--upper", upper, "classify report of the upper chain")->required()
      ->check(CLI::ExistingFile);
  comb->callback([&] {
    auto load = [](const std::string& path) {
      std::ifstream in(path);
      const json j = json::parse(in);
      Classification c{parse_chain_class(j.at("class").get<std::string>()),
                       j.value("provenance", "")};
      IrreducibilityReport r;
      r.attested = j.at("irreducible").at("attested").get<bool>();
      return std::pair{c, r};
    };
    const auto [z, zr] = load(lower);
    const auto [y, yr] = load(upper);
    result = {{"lower", to_string(z.kind)},
              {"upper", to_string(y.kind)},
              {"x", to_string(combine(z, zr, y, yr))}};
  });

  auto* couple = app.add_subcommand("couple", "simulate the coupled pair (X, Y)");
  add_network(couple);
  couple->add_option("--weights", weights)->required();
  couple->add_option("--chain", chain_path)->required()->check(CLI::ExistingFile);
  couple->add_option("--x0", x0)->required();
  couple->add_option("--y0", y0)->required();
  couple->add_option("--tf", tf);
  couple->add_option("--seed", seed);
  couple->add_option("--runs", runs, "number of trajectories");
  couple->add_option("--out", out_path, "trajectory CSV")->required();
  couple->callback([&] {
    const ReactionNetwork n = net();
    const ClassPartition p = partition();
    const BoundingChain c = read_chain_csv(chain_path);
    std::ofstream csv(out_path);
    if (!csv) throw ValidationError("cannot write " + out_path);
    csv << "run,t";
    for (const auto& s : n.species()) csv << ',' << s;
    csv << ",class,y\n";
    CoupledOptions opt;
    double worst = 0;
    opt.on_row = [&](const CouplingRow& row) {
      worst = std::max(worst, coupling_marginal_defect(row, n, p, c));
    };
    std::uint64_t overflow = 0, jumps = 0;
    const State start = parse_state(x0);
    for (std::uint64_t r = 0; r < runs; ++r) {
      const JointTrajectory t = coupled_ssa(n, p, c, start, y0, tf, seed + r, opt);
      overflow += t.band_overflow;
      jumps += t.jump_count;
      for (const JointJump& j : t.jumps) {
        csv << r << ',' << j.t;
        for (Count v : j.x) csv << ',' << v;
        csv << ',' << p.class_of(j.x) << ',' << j.y << '\n';
      }
    }
    result = {{"runs", runs},
              {"jumps", jumps},
              {"band_overflow", overflow},
              {"max_marginal_defect", worst},
              {"order_preserved", true},
              {"out", out_path}};
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t r = 0; r < runs; ++r) seeds.push_back(seed + r);
    write_manifest(out_path + ".manifest.json", "couple",
                   {{"network", network}, {"weights", weights}, {"chain", chain_path},
                    {"x0", x0}, {"y0", y0}, {"tf", tf}, {"params", params}},
                   seeds);
  });

  auto* sim = app.add_subcommand("simulate", "Monte Carlo exit probabilities");
  add_network(sim);
  sim->add_option("--weights", weights)->required();
  sim->add_option("--x0", x0)->required();
  sim->add_option("--tf", tf);
  sim->add_option("--samples", samples);
  sim->add_option("--seed", seed);
  sim->add_option("--stop", stop, "class>N, or class>N1,N2,...")->required();
  sim->add_option("--out", out_path, "estimate JSON");
  sim->callback([&] {
    if (stop.rfind("class>", 0) != 0) throw ValidationError("--stop must read class>N");
    std::vector<ClassIndex> levels;
    for (Count v : parse_count_list(stop.substr(6))) levels.push_back(v);
    SsaOptions opt;
    const json cfg = {{"network", network}, {"weights", weights}, {"x0", x0}, {"tf", tf},
                      {"samples", samples}, {"stop", stop},       {"params", params}};
    opt.config_hash = config_hash(cfg);
    const auto est =
        estimate_exit(net(), partition(), levels, tf, parse_state(x0), samples, seed, opt);
    result["levels"] = json::array();
    for (const ExitEstimate& e : est) {
      result["levels"].push_back({{"N", e.N},
                                  {"samples", e.samples},
                                  {"exits", e.exits},
                                  {"capped", e.capped},
                                  {"estimate", e.estimate},
                                  {"wilson_lower", e.wilson.lower},
                                  {"wilson_upper", e.wilson.upper}});
    }
    if (!out_path.empty()) {
      write_json(result, out_path);
      write_manifest(out_path + ".manifest.json", "simulate", cfg, {seed});
    }
  });

  auto* trunc = app.add_subcommand("truncate", "truncation certificate from the upper chain");
  trunc->add_option("--chain", chain_path)->required()->check(CLI::ExistingFile);
  trunc->add_option("--p0", p0, "delta:L or uniform:A:B");
  trunc->add_option("--M", M, "truncation of the chain solve");
  trunc->add_option("--tf", tf);
  trunc->add_option("--epsilon", epsilon, "target error; reports N-hat");
  trunc->add_option("--N", N, "level to certify");
  trunc->add_option("--budget", budget, "solver error budget");
  trunc->add_option("--out", out_path, "certificate JSON");
  trunc->callback([&] {
    const BoundingChain c = read_chain_csv(chain_path);
    SolveOptions so;
    so.budget = budget;
    const CmeSolution sol = solve_cme(chain_generator(c, M), parse_p0(p0, M), {0.0, tf}, so);
    ClassIndex level = N;
    if (epsilon > 0) {
      level = min_truncation(sol, c, epsilon, 1);
      result["N_hat"] = level;
      result["epsilon"] = epsilon;
    }
    if (level < 0) throw ValidationError("truncate needs --N or --epsilon");
    result["certificate"] = certificate_json(certificate_from(sol, c, level, 1));
    if (!out_path.empty()) {
      write_json(result, out_path);
      write_manifest(out_path + ".manifest.json", "truncate",
                     {{"chain", chain_path}, {"p0", p0}, {"M", M}, {"tf", tf},
                      {"epsilon", epsilon}, {"N", N}, {"budget", budget}});
    }
  });

  auto* heat = app.add_subcommand("heatmap", "clipped E^T over (t, N)");
  heat->add_option("--chain", chain_path)->required()->check(CLI::ExistingFile);
  heat->add_option("--p0", p0);
  heat->add_option("--M", M);
  heat->add_option("--tf", tf);
  heat->add_option("--n-grid", n_grid, "a:b[:step]");
  heat->add_option("--t-grid", t_grid, "a:b:step");
  heat->add_option("--budget", budget);
  heat->add_option("--out", out_path, "CSV")->required();
  heat->callback([&] {
    const BoundingChain c = read_chain_csv(chain_path);
    SolveOptions so;
    so.budget = budget;
    const auto times = output_times(t_grid.empty() ? std::vector<double>{} : parse_grid(t_grid), tf);
    const CmeSolution sol = solve_cme(chain_generator(c, M), parse_p0(p0, M), times, so);
    const auto levels =
        class_grid(n_grid.empty() ? parse_grid("0:" + std::to_string(M)) : parse_grid(n_grid), M);
    write_heatmap(out_path, sol, c, levels);
    result = {{"out", out_path}, {"times", times.size()}, {"levels", levels.size()}};
    write_manifest(out_path + ".manifest.json", "heatmap",
                   {{"chain", chain_path}, {"p0", p0}, {"M", M}, {"tf", tf},
                    {"n_grid", n_grid}, {"t_grid", t_grid}, {"budget", budget}});
  });

  RunConfig cfg;
  auto* analyze = app.add_subcommand("analyze", "full asymptotic analysis of a network");
  add_network(analyze);
  analyze->add_option("--lower-weights", lower)->required();
  analyze->add_option("--upper-weights", upper)->required();
  analyze->add_option("--l-exact", l_exact);
  analyze->add_option("--l-total", l_total);
  analyze->add_option("--max-degree", max_degree);
  analyze->add_option("--verify-horizon", l_check);
  analyze->add_option("--horizon", horizon, "irreducibility window");
  analyze->add_option("--out-dir", out_dir);
  analyze->callback([&] {
    cfg.network = network;
    cfg.parameters = parse_parameters(params);
    cfg.lower_weights = parse_count_list(lower);
    cfg.upper_weights = parse_count_list(upper);
    cfg.l_exact = l_exact;
    cfg.l_total = l_total;
    cfg.max_degree = max_degree;
    cfg.verify_horizon = l_check;
    cfg.irreducible_horizon = horizon;
    cfg.out_dir = out_dir;
    result = cmd_analyze(cfg);
  });

  auto* plan = app.add_subcommand("plan-truncation", "N-hat for several epsilons from one solve");
  add_network(plan);
  plan->add_option("--weights", weights)->required();
  plan->add_option("--p0", p0);
  plan->add_option("--M", M);
  plan->add_option("--tf", tf);
  plan->add_option("--epsilon", epsilon_list, "comma-separated targets")->required();
  plan->add_option("--t-grid", t_grid);
  plan->add_option("--n-grid", n_grid);
  plan->add_option("--l-exact", l_exact);
  plan->add_option("--budget", budget);
  plan->add_option("--out-dir", out_dir);
  plan->callback([&] {
    cfg.network = network;
    cfg.parameters = parse_parameters(params);
    cfg.upper_weights = parse_count_list(weights);
    cfg.l_exact = l_exact;
    cfg.M = M;
    cfg.t_final = tf;
    cfg.p0 = p0;
    cfg.budget = budget;
    cfg.out_dir = out_dir;
    std::stringstream ss(epsilon_list);
    for (std::string e; std::getline(ss, e, ',');) {
      try {
        cfg.epsilons.push_back(std::stod(e));
      } catch (const std::logic_error&) {
        throw ValidationError("cannot parse epsilon '" + e + "'");
      }
    }
    if (!t_grid.empty()) cfg.t_grid = parse_grid(t_grid);
    if (!n_grid.empty()) cfg.n_grid = class_grid(parse_grid(n_grid), M);
    result = cmd_plan_truncation(cfg);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  } catch (...) {
    return exit_code_for_current_exception(err);
  }
  out << result.dump(2) << '\n';
  return status;
}

}  // namespace srnbound
