#include "srnbound/ssa.hpp"

#include <algorithm>
#include <cmath>

#include "srnbound/errors.hpp"
#include "srnbound/parallel.hpp"
#include "srnbound/rng.hpp"

namespace srnbound {

namespace {

// shared driver: rates(x, out) fills per-channel rates, apply(x, channel) moves x
template <class Rates, class Apply>
Trajectory run(State x, double t_final, const StopPredicate& stop, std::uint64_t seed,
               const SsaOptions& options, Rates&& rates, Apply&& apply) {
  CounterRng rng(seed, options.config_hash, options.stream);
  Trajectory traj;
  traj.seed = seed;
  traj.jumps.push_back({0.0, x});
  if (stop && stop(x)) {
    traj.reason = StopReason::kExit;
    return traj;
  }
  std::vector<double> a;
  double t = 0.0;
  for (;;) {
    rates(x, a);
    long double total = 0;
    for (double v : a) total += v;
    if (total <= 0) break;
    const double dt = rng.exponential(static_cast<double>(total));
    if (t + dt > t_final) break;
    t += dt;
    long double u = rng.uniform() * total;
    std::size_t pick = a.size() - 1;
    for (std::size_t r = 0; r < a.size(); ++r) {
      u -= a[r];
      if (u < 0 && a[r] > 0) {
        pick = r;
        break;
      }
    }
    while (a[pick] <= 0) --pick;
    apply(x, pick);
    ++traj.jump_count;
    if (options.record) {
      traj.jumps.push_back({t, x});
    } else {
      if (traj.jumps.size() < 2) traj.jumps.push_back({t, x});
      traj.jumps.back() = {t, x};
    }
    if (stop && stop(x)) {
      traj.reason = StopReason::kExit;
      return traj;
    }
    if (traj.jump_count >= options.max_jumps) {
      traj.reason = StopReason::kCap;
      return traj;
    }
  }
  traj.reason = StopReason::kHorizon;
  return traj;
}

}  // namespace

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::kHorizon: return "horizon";
    case StopReason::kExit: return "exit";
    case StopReason::kCap: return "cap";
  }
  return "horizon";
}

Trajectory ssa(const ReactionNetwork& network, const State& x0, double t_final,
               const StopPredicate& stop, std::uint64_t seed, const SsaOptions& options) {
  if (x0.size() != network.dimension()) throw ValidationError("x0 has the wrong dimension");
  if (std::any_of(x0.begin(), x0.end(), [](Count c) { return c < 0; })) {
    throw ValidationError("x0 must be nonnegative");
  }
  const auto& rx = network.reactions();
  return run(
      x0, t_final, stop, seed, options,
      [&](const State& x, std::vector<double>& a) {
        a.resize(rx.size());
        for (std::size_t r = 0; r < rx.size(); ++r) a[r] = network.propensity(r, x);
      },
      [&](State& x, std::size_t r) {
        for (std::size_t s = 0; s < x.size(); ++s) x[s] += rx[r].change[s];
        if (std::any_of(x.begin(), x.end(), [](Count c) { return c < 0; })) {
          throw ConsistencyError("reaction '" + rx[r].name + "' produced a negative count");
        }
      });
}

Trajectory ssa(const BoundingChain& chain, ClassIndex y0, double t_final, const StopPredicate& stop,
               std::uint64_t seed, const SsaOptions& options) {
  if (y0 < 0 || y0 > chain.l_total()) throw ValidationError("y0 outside the chain");
  const int J = chain.max_jump();
  bool overflow = false;
  Trajectory t = run(
      State{y0}, t_final, stop, seed, options,
      [&](const State& y, std::vector<double>& a) {
        a.assign(static_cast<std::size_t>(2 * J), 0.0);
        if (y[0] > chain.l_total()) {
          overflow = true;
          return;
        }
        for (int k = -J; k <= J; ++k) {
          if (k != 0 && y[0] + k >= 0) a[BoundingChain::slot(k, J)] = chain.rate(y[0], k);
        }
      },
      [&](State& y, std::size_t s) {
        const int k = static_cast<int>(s) < J ? static_cast<int>(s) - J : static_cast<int>(s) - J + 1;
        y[0] += k;
      });
  if (overflow) throw ValidationError("chain simulation left [0, l_total]");
  return t;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double centre = (p + z2 / (2 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half),
          successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

std::vector<ExitEstimate> estimate_exit(const ReactionNetwork& network,
                                        const ClassPartition& partition,
                                        const std::vector<ClassIndex>& levels, double t_final,
                                        const State& x0, std::uint64_t samples, std::uint64_t seed,
                                        const SsaOptions& options) {
  if (samples < 100) throw ValidationError("estimate_exit needs at least 100 samples");
  if (levels.empty()) throw ValidationError("no exit levels");
  const ClassIndex top = *std::max_element(levels.begin(), levels.end());
  std::vector<ClassIndex> reached(samples);
  std::vector<char> capped(samples, 0);
  parallel_for(samples, [&](std::size_t i) {
    SsaOptions o = options;
    o.record = false;
    o.stream = i;
    ClassIndex best = partition.class_of(x0);
    const Trajectory t = ssa(
        network, x0, t_final,
        [&](const State& x) {
          best = std::max(best, partition.class_of(x));
          return best > top;
        },
        seed, o);
    reached[i] = best;
    capped[i] = t.reason == StopReason::kCap;
  });
  std::vector<ExitEstimate> out;
  for (ClassIndex N : levels) {
    ExitEstimate e;
    e.N = N;
    e.samples = samples;
    for (std::size_t i = 0; i < samples; ++i) {
      if (reached[i] > N) {
        ++e.exits;
      } else if (capped[i]) {
        ++e.capped;
      }
    }
    e.estimate = static_cast<double>(e.exits) / static_cast<double>(samples);
    e.wilson = wilson_interval(e.exits, samples);
    out.push_back(e);
  }
  return out;
}

ExitEstimate estimate_exit(const ReactionNetwork& network, const ClassPartition& partition,
                           ClassIndex N, double t_final, const State& x0, std::uint64_t samples,
                           std::uint64_t seed, const SsaOptions& options) {
  return estimate_exit(network, partition, std::vector<ClassIndex>{N}, t_final, x0, samples, seed,
                       options)
      .front();
}

}  // namespace srnbound
