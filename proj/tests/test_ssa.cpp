#include <doctest.h>

#include <cmath>
#include <numeric>

#include "srnbound/cme.hpp"
#include "srnbound/errors.hpp"
#include "srnbound/ssa.hpp"
#include "support/fixtures.hpp"

using namespace srnbound;

namespace {

ReactionNetwork poisson(double rate) {
  return ReactionNetwork({"X"}, {Reaction{"birth", {1}, {Term{rate, "", {}}}}}, {});
}

const StopPredicate never = [](const State&) { return false; };

}  // namespace

TEST_CASE("zero-propensity network stays put") {
  const ReactionNetwork net({"X"}, {Reaction{"birth", {1}, {Term{0.0, "", {}}}}}, {});
  const Trajectory t = ssa(net, {3}, 10.0, never, 1);
  REQUIRE(t.jumps.size() == 1);
  CHECK(t.jumps[0].t == 0.0);
  CHECK(t.jumps[0].x == State{3});
  CHECK(t.reason == StopReason::kHorizon);
}

TEST_CASE("Poisson jump counts") {
  const auto net = poisson(1.0);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SsaOptions opt;
    opt.record = false;
    const Trajectory t = ssa(net, {0}, 1000.0, never, seed, opt);
    CHECK(std::abs(static_cast<double>(t.jump_count) - 1000.0) <= 4 * std::sqrt(1000.0));
    CHECK(t.jumps.back().x[0] == static_cast<Count>(t.jump_count));
  }
}

TEST_CASE("trajectories are reproducible and seeds look independent") {
  const auto net = fixtures::toy_network();
  const Trajectory a = ssa(net, {30, 10, 10}, 1.0, never, 9);
  const Trajectory b = ssa(net, {30, 10, 10}, 1.0, never, 9);
  REQUIRE(a.jumps.size() == b.jumps.size());
  for (std::size_t k = 0; k < a.jumps.size(); ++k) {
    CHECK(a.jumps[k].t == b.jumps[k].t);
    CHECK(a.jumps[k].x == b.jumps[k].x);
  }
  // times increase and consecutive states differ by one reaction
  for (std::size_t k = 1; k < a.jumps.size(); ++k) {
    CHECK(a.jumps[k].t > a.jumps[k - 1].t);
    bool matched = false;
    for (const auto& r : net.reactions()) {
      State y = a.jumps[k - 1].x;
      for (std::size_t s = 0; s < y.size(); ++s) y[s] += r.change[s];
      matched = matched || y == a.jumps[k].x;
    }
    CHECK(matched);
  }

  // batch means of Poisson(100) counts: variance of a batch mean is 100 / batch
  const auto pn = poisson(1.0);
  const int batches = 40, per = 50;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0;
    for (int i = 0; i < per; ++i) {
      SsaOptions opt;
      opt.record = false;
      s += static_cast<double>(ssa(pn, {0}, 100.0, never, 1000 + b * per + i, opt).jump_count);
    }
    means.push_back(s / per);
  }
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / batches;
  double var = 0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= batches - 1;
  CHECK(std::abs(mean - 100.0) < 4 * std::sqrt(100.0 / (batches * per)));
  CHECK(var / (100.0 / per) > 0.4);
  CHECK(var / (100.0 / per) < 1.8);
}

TEST_CASE("stop predicate and jump cap") {
  const auto net = poisson(5.0);
  const Trajectory t = ssa(net, {0}, 100.0, [](const State& x) { return x[0] > 7; }, 3);
  CHECK(t.reason == StopReason::kExit);
  CHECK(t.jumps.back().x[0] == 8);
  const Trajectory at_start = ssa(net, {9}, 100.0, [](const State& x) { return x[0] > 7; }, 3);
  CHECK(at_start.reason == StopReason::kExit);
  CHECK(at_start.jumps.size() == 1);
  SsaOptions opt;
  opt.max_jumps = 25;
  const Trajectory capped = ssa(net, {0}, 1e9, never, 3, opt);
  CHECK(capped.reason == StopReason::kCap);
  CHECK(capped.jump_count == 25);
  CHECK_THROWS_AS(ssa(net, {0, 1}, 1.0, never, 3), ValidationError);
}

TEST_CASE("Wilson interval") {
  const Interval i = wilson_interval(0, 100);
  CHECK(i.lower == 0.0);
  CHECK(i.upper == doctest::Approx(0.036994).epsilon(1e-4));
  const Interval h = wilson_interval(50, 100);
  CHECK(h.lower == doctest::Approx(0.403832).epsilon(1e-4));
  CHECK(h.upper == doctest::Approx(0.596168).epsilon(1e-4));
  const Interval all = wilson_interval(100, 100);
  CHECK(all.upper == doctest::Approx(1.0));
}

TEST_CASE("exit estimates at trivial levels") {
  const auto net = fixtures::toy_network();
  const ClassPartition p({2, 1, 1});
  const State x0{30, 10, 10};
  const ExitEstimate below = estimate_exit(net, p, 50, 1.0, x0, 200, 1);
  CHECK(below.estimate == 1.0);
  const ExitEstimate huge = estimate_exit(net, p, 100'000, 0.01, x0, 200, 1);
  CHECK(huge.estimate == 0.0);
  CHECK(huge.wilson.upper < 0.02);
  CHECK_THROWS_AS(estimate_exit(net, p, 100, 1.0, x0, 50, 1), ValidationError);

  const auto many = estimate_exit(net, p, {80, 90, 100, 120}, 1.0, x0, 400, 2);
  for (std::size_t i = 1; i < many.size(); ++i) CHECK(many[i].exits <= many[i - 1].exits);
}

TEST_CASE("chain SSA histogram matches the CME") {
  const auto net = fixtures::birth_death(3.0, 2.0);
  BuildOptions bo;
  bo.l_exact = 40;
  bo.l_total = 200;
  const auto chain = build_bounding_chain(net, ClassPartition({1}), Direction::kUpper, bo);
  const ClassIndex M = 150;
  const double T = 2.0;
  const auto sol = solve_cme(chain_generator(chain, M), delta(5, M), {0.0, T});
  const int n = 20000;
  std::vector<double> hist(static_cast<std::size_t>(M + 1), 0.0);
  for (int i = 0; i < n; ++i) {
    SsaOptions opt;
    opt.record = false;
    opt.stream = static_cast<std::uint64_t>(i);
    const Trajectory t = ssa(chain, 5, T, never, 77, opt);
    hist[static_cast<std::size_t>(t.jumps.back().x[0])] += 1.0 / n;
  }
  double tv = 0, sigma = 0;
  for (std::size_t l = 0; l < hist.size(); ++l) {
    const double p = std::max(0.0, sol.p[1][l]);
    tv += 0.5 * std::abs(hist[l] - p);
    sigma += 0.5 * std::sqrt(p * (1 - p) / n);
  }
  CHECK(tv <= 3 * sigma);
}
