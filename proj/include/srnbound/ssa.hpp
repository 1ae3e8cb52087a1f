#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "srnbound/bounds.hpp"
#include "srnbound/network.hpp"

namespace srnbound {

enum class StopReason { kHorizon, kExit, kCap };

std::string to_string(StopReason r);

struct Jump {
  double t;
  State x;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<Jump> jumps;
  StopReason reason = StopReason::kHorizon;
  std::uint64_t jump_count = 0;
  /** Largest class seen, when a partition was supplied. */
  ClassIndex max_class = 0;
};

struct SsaOptions {
  std::uint64_t max_jumps = 100'000'000;
  std::uint64_t config_hash = 0;
  /** Stream id for the counter-based generator; estimators use the sample index. */
  std::uint64_t stream = 0;
  /** Keep every jump; otherwise only the first and last records. */
  bool record = true;
};

using StopPredicate = std::function<bool(const State&)>;

/** Exact simulation of the network; stop is checked at t = 0 and after each jump. */
Trajectory ssa(const ReactionNetwork& network, const State& x0, double t_final,
               const StopPredicate& stop, std::uint64_t seed, const SsaOptions& options = {});

/** Exact simulation of a one-dimensional chain; states are {y}. */
Trajectory ssa(const BoundingChain& chain, ClassIndex y0, double t_final, const StopPredicate& stop,
               std::uint64_t seed, const SsaOptions& options = {});

constexpr double kWilsonZ95 = 1.959963984540054;

struct Interval {
  double lower;
  double upper;
};

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kWilsonZ95);

struct ExitEstimate {
  ClassIndex N = 0;
  std::uint64_t samples = 0;
  std::uint64_t exits = 0;
  /** Trajectories that hit the jump cap before T without exiting. */
  std::uint64_t capped = 0;
  double estimate = 0.0;
  Interval wilson{0.0, 0.0};
};

/**
 * Fraction of trajectories whose class exceeds N at some t <= T. One batch of
 * trajectories serves every level: each records the largest class reached.
 */
std::vector<ExitEstimate> estimate_exit(const ReactionNetwork& network,
                                        const ClassPartition& partition,
                                        const std::vector<ClassIndex>& levels, double t_final,
                                        const State& x0, std::uint64_t samples, std::uint64_t seed,
                                        const SsaOptions& options = {});

ExitEstimate estimate_exit(const ReactionNetwork& network, const ClassPartition& partition,
                           ClassIndex N, double t_final, const State& x0, std::uint64_t samples,
                           std::uint64_t seed, const SsaOptions& options = {});

}  // namespace srnbound
