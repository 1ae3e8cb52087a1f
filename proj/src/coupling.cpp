#include "srnbound/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "srnbound/errors.hpp"
#include "srnbound/rng.hpp"

namespace srnbound {

namespace {

std::map<State, double> network_row(const ReactionNetwork& network, const State& x) {
  std::map<State, double> row;
  for (std::size_t r = 0; r < network.reactions().size(); ++r) {
    const auto& nu = network.reactions()[r].change;
    if (std::all_of(nu.begin(), nu.end(), [](Count c) { return c == 0; })) continue;
    const double a = network.propensity(r, x);
    if (a <= 0.0) continue;
    State j = x;
    for (std::size_t s = 0; s < j.size(); ++s) j[s] += nu[s];
    row[j] += a;
  }
  return row;
}

std::map<ClassIndex, double> chain_row(const BoundingChain& chain, ClassIndex y) {
  std::map<ClassIndex, double> row;
  for (int k = -chain.max_jump(); k <= chain.max_jump(); ++k) {
    if (k == 0 || y + k < 0) continue;
    const double v = chain.rate(y, k);
    if (v > 0.0) row[y + k] = v;
  }
  return row;
}

bool ordered(Direction d, ClassIndex cx, ClassIndex y) {
  return d == Direction::kUpper ? cx <= y : cx >= y;
}

}  // namespace

CouplingBuilder::CouplingBuilder(const ReactionNetwork& network, const ClassPartition& partition,
                                 const BoundingChain& chain)
    : network_(network), partition_(partition), chain_(chain) {
  if (network.dimension() != partition.dimension()) {
    throw ValidationError("weights do not match the network dimension");
  }
}

CouplingRow CouplingBuilder::row(const State& x, ClassIndex y) const {
  CouplingRow out;
  out.x = x;
  out.y = y;
  const ClassIndex cx = partition_.class_of(x);
  const auto qrow = network_row(network_, x);
  const auto crow = chain_row(chain_, y);
  long double q_i = 0, q_c = 0;
  for (const auto& [j, v] : qrow) q_i += v;
  for (const auto& [m, v] : crow) q_c += v;
  const double M = static_cast<double>(q_i + q_c);
  out.total_rate = M;
  if (M <= 0.0) return out;

  // Q' grouped by destination class, states in lexicographic order
  std::map<ClassIndex, std::vector<std::pair<State, double>>> groups;
  std::map<ClassIndex, double> a_mass;
  {
    std::map<State, double> qprime(qrow.begin(), qrow.end());
    qprime[x] += static_cast<double>(q_c);
    for (const auto& [j, v] : qprime) {
      if (v <= 0.0) continue;
      const ClassIndex k = partition_.class_of(j);
      groups[k].emplace_back(j, v);
      a_mass[k] += v;
    }
  }
  std::vector<MassSequence::Entry> ae, be;
  for (const auto& [k, v] : a_mass) ae.push_back({k, v});
  for (const auto& [m, v] : crow) be.push_back({m, v});
  be.push_back({y, static_cast<double>(q_i)});
  const MassSequence a(std::move(ae)), b(std::move(be));

  std::vector<PlanEntry> plan;
  if (ordered(chain_.direction(), cx, y)) {
    plan = (chain_.direction() == Direction::kUpper ? pi_bar(a, b) : pi_bar_reflected(a, b))
               .entries();
  } else {
    for (const auto& ea : a.entries()) {
      for (const auto& eb : b.entries()) plan.push_back({ea.index, eb.index, ea.mass * eb.mass / M});
    }
  }

  long double exit = 0;
  for (const PlanEntry& p : plan) {
    const auto& members = groups.at(p.from);
    const double class_mass = a_mass.at(p.from);
    for (const auto& [j, w] : members) {
      if (p.to == y && j == x) continue;
      const double r = p.mass * (w / class_mass);
      if (r <= 0.0) continue;
      out.destinations.push_back({j, p.to, r});
      exit += r;
    }
  }
  out.exit_rate = static_cast<double>(exit);

  const double defect = coupling_marginal_defect(out, network_, partition_, chain_);
  if (defect > kMarginalTolerance) {
    throw ConsistencyError("coupling row at " + format_state(x) + ", y=" + std::to_string(y) +
                           " misses its marginals by " + std::to_string(defect));
  }
  return out;
}

double coupling_marginal_defect(const CouplingRow& row, const ReactionNetwork& network,
                                const ClassPartition& partition, const BoundingChain& chain) {
  const auto qrow = network_row(network, row.x);
  const auto crow = chain_row(chain, row.y);
  std::map<State, long double> by_state;
  std::map<ClassIndex, long double> by_class;
  double forbidden = 0;
  const bool is_ordered = ordered(chain.direction(), partition.class_of(row.x), row.y);
  for (const auto& d : row.destinations) {
    if (d.rate < 0) return std::abs(d.rate);
    if (d.x != row.x) by_state[d.x] += d.rate;
    if (d.y != row.y) by_class[d.y] += d.rate;
    if (is_ordered && !ordered(chain.direction(), partition.class_of(d.x), d.y)) {
      forbidden += d.rate;
    }
  }
  double worst = forbidden;
  auto compare = [&](long double got, double want) {
    worst = std::max(worst, static_cast<double>(std::abs(got - want)) / std::max(1.0, want));
  };
  for (const auto& [j, v] : qrow) compare(by_state.count(j) ? by_state[j] : 0.0L, v);
  for (const auto& [j, v] : by_state) {
    if (!qrow.count(j)) compare(v, 0.0);
  }
  for (const auto& [m, v] : crow) compare(by_class.count(m) ? by_class[m] : 0.0L, v);
  for (const auto& [m, v] : by_class) {
    if (!crow.count(m)) compare(v, 0.0);
  }
  return worst;
}

std::size_t RowCache::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(k.y));
  for (Count c : k.x) h = mix64(h ^ static_cast<std::uint64_t>(c));
  return static_cast<std::size_t>(h);
}

const CouplingRow& RowCache::get(const CouplingBuilder& builder, const State& x, ClassIndex y) {
  Key key{x, y};
  auto it = map_.find(key);
  if (it != map_.end()) {
    ++hits_;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }
  ++misses_;
  order_.emplace_front(key, builder.row(x, y));
  map_[key] = order_.begin();
  if (map_.size() > capacity_) {
    map_.erase(order_.back().first);
    order_.pop_back();
  }
  return order_.front().second;
}

JointTrajectory coupled_ssa(const ReactionNetwork& network, const ClassPartition& partition,
                            const BoundingChain& chain, const State& x0, ClassIndex y0,
                            double t_final, std::uint64_t seed, const CoupledOptions& options) {
  if (x0.size() != network.dimension()) throw ValidationError("x0 has the wrong dimension");
  if (std::any_of(x0.begin(), x0.end(), [](Count c) { return c < 0; })) {
    throw ValidationError("x0 must be nonnegative");
  }
  const Direction dir = chain.direction();
  if (!ordered(dir, partition.class_of(x0), y0)) {
    throw ValidationError("initial pair is not ordered: cl(x0)=" +
                          std::to_string(partition.class_of(x0)) + ", y0=" + std::to_string(y0));
  }
  CouplingBuilder builder(network, partition, chain);
  RowCache cache(options.cache_rows);
  CounterRng rng(seed, options.config_hash);

  JointTrajectory traj;
  traj.seed = seed;
  double t = 0;
  State x = x0;
  ClassIndex y = y0;
  traj.jumps.push_back({t, x, y});
  for (;;) {
    if (y > chain.l_total()) {
      traj.band_overflow = true;
      break;
    }
    const CouplingRow& row = cache.get(builder, x, y);
    if (options.on_row) options.on_row(row);
    if (row.exit_rate <= 0.0) break;
    const double dt = rng.exponential(row.exit_rate);
    if (t + dt > t_final) break;
    t += dt;
    double u = rng.uniform() * row.exit_rate;
    std::size_t pick = row.destinations.size() - 1;
    for (std::size_t k = 0; k < row.destinations.size(); ++k) {
      u -= row.destinations[k].rate;
      if (u < 0) {
        pick = k;
        break;
      }
    }
    x = row.destinations[pick].x;
    y = row.destinations[pick].y;
    if (!ordered(dir, partition.class_of(x), y)) {
      throw ConsistencyError("coupled process lost its order at t=" + std::to_string(t));
    }
    traj.jumps.push_back({t, x, y});
    if (++traj.jump_count >= options.max_jumps) {
      traj.jump_cap_reached = true;
      break;
    }
  }
  return traj;
}

}  // namespace srnbound
