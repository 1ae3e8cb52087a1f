#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <unordered_map>
#include <vector>

#include "srnbound/bounds.hpp"
#include "srnbound/network.hpp"
#include "srnbound/transport.hpp"

namespace srnbound {

struct CouplingDestination {
  State x;
  ClassIndex y;
  double rate;
};

/** Off-diagonal row of the coupling generator R at (x, y). */
struct CouplingRow {
  State x;
  ClassIndex y = 0;
  std::vector<CouplingDestination> destinations;
  double exit_rate = 0.0;
  /** Total rate M = -Q_{x,x} - Q~_{y,y} used in the construction. */
  double total_rate = 0.0;
};

/**
 * Largest relative deviation of the row's marginals from the Q row of x and
 * the chain row of y; also counts forbidden-block mass when ordered.
 */
double coupling_marginal_defect(const CouplingRow& row, const ReactionNetwork& network,
                                const ClassPartition& partition, const BoundingChain& chain);

/** Builds rows of R for one network, partition and bounding chain. */
class CouplingBuilder {
 public:
  static constexpr double kMarginalTolerance = 1e-10;

  CouplingBuilder(const ReactionNetwork& network, const ClassPartition& partition,
                  const BoundingChain& chain);

  /** Throws ConsistencyError if the marginals are not reproduced. */
  CouplingRow row(const State& x, ClassIndex y) const;

  const ReactionNetwork& network() const { return network_; }
  const ClassPartition& partition() const { return partition_; }
  const BoundingChain& chain() const { return chain_; }

 private:
  const ReactionNetwork& network_;
  const ClassPartition& partition_;
  const BoundingChain& chain_;
};

/** Per-worker LRU cache of coupling rows keyed by (x, y). */
class RowCache {
 public:
  explicit RowCache(std::size_t capacity = 100'000) : capacity_(capacity) {}

  const CouplingRow& get(const CouplingBuilder& builder, const State& x, ClassIndex y);
  std::size_t size() const { return map_.size(); }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  struct Key {
    State x;
    ClassIndex y;
    bool operator==(const Key& o) const { return y == o.y && x == o.x; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  using Item = std::pair<Key, CouplingRow>;

  std::size_t capacity_;
  std::list<Item> order_;
  std::unordered_map<Key, std::list<Item>::iterator, KeyHash> map_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

struct JointJump {
  double t;
  State x;
  ClassIndex y;
};

struct JointTrajectory {
  std::uint64_t seed = 0;
  std::vector<JointJump> jumps;
  bool band_overflow = false;
  bool jump_cap_reached = false;
  std::uint64_t jump_count = 0;
};

struct CoupledOptions {
  std::uint64_t max_jumps = 100'000'000;
  std::size_t cache_rows = 100'000;
  std::uint64_t config_hash = 0;
  /** Called on every row used by the simulation, e.g. for audits. */
  std::function<void(const CouplingRow&)> on_row;
};

/**
 * Exact-jump simulation of the coupled pair (X, Y). Requires cl(x0) <= y0
 * for an upper chain and cl(x0) >= y0 for a lower one; the order is
 * asserted after every jump.
 */
JointTrajectory coupled_ssa(const ReactionNetwork& network, const ClassPartition& partition,
                            const BoundingChain& chain, const State& x0, ClassIndex y0,
                            double t_final, std::uint64_t seed, const CoupledOptions& options = {});

}  // namespace srnbound
