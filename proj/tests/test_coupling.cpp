#include <doctest.h>

#include <random>

#include "srnbound/bounds.hpp"
#include "srnbound/coupling.hpp"
#include "srnbound/errors.hpp"
#include "support/fixtures.hpp"

using namespace srnbound;

namespace {

BoundingChain toy_chain(Direction dir, const ClassPartition& p, ClassIndex l_exact,
                        ClassIndex l_total, int max_degree = 1) {
  BuildOptions opt;
  opt.l_exact = l_exact;
  opt.l_total = l_total;
  opt.max_degree = max_degree;
  return build_bounding_chain(fixtures::toy_network(), p, dir, opt);
}

}  // namespace

TEST_CASE("coupling row at the origin moves both coordinates together") {
  const auto net = fixtures::toy_network();
  const ClassPartition p({2, 1, 1});
  const auto chain = toy_chain(Direction::kUpper, p, 60, 200);
  const CouplingBuilder builder(net, p, chain);
  const CouplingRow row = builder.row({0, 0, 0}, 0);
  CHECK(row.total_rate == doctest::Approx(5.0));
  REQUIRE(row.destinations.size() == 1);
  CHECK(row.destinations[0].x == State{1, 0, 0});
  CHECK(row.destinations[0].y == 2);
  CHECK(row.destinations[0].rate == doctest::Approx(2.5));
  CHECK(row.exit_rate == doctest::Approx(2.5));
}

TEST_CASE("coupling rows reproduce both marginals") {
  const auto net = fixtures::toy_network();
  std::mt19937_64 gen(3);
  for (Direction dir : {Direction::kUpper, Direction::kLower}) {
    const ClassPartition p = dir == Direction::kUpper ? ClassPartition({2, 1, 1})
                                                      : ClassPartition({2, 2, 5});
    const auto chain = toy_chain(dir, p, 80, 400);
    const CouplingBuilder builder(net, p, chain);
    for (int trial = 0; trial < 300; ++trial) {
      State x{static_cast<Count>(gen() % 12), static_cast<Count>(gen() % 12),
              static_cast<Count>(gen() % 12)};
      const ClassIndex cx = p.class_of(x);
      // mostly ordered pairs, some disordered
      ClassIndex y = dir == Direction::kUpper ? cx + static_cast<ClassIndex>(gen() % 8)
                                              : cx - static_cast<ClassIndex>(gen() % 8);
      if (trial % 5 == 0) y = static_cast<ClassIndex>(gen() % 60);
      if (y < 0) y = 0;
      const CouplingRow row = builder.row(x, y);
      CHECK(coupling_marginal_defect(row, net, p, chain) <= 1e-10);
      long double s = 0;
      for (const auto& d : row.destinations) {
        CHECK(d.rate > 0.0);
        CHECK_FALSE((d.x == x && d.y == y));
        s += d.rate;
      }
      CHECK(static_cast<double>(s) == doctest::Approx(row.exit_rate));
      const bool ordered = dir == Direction::kUpper ? cx <= y : cx >= y;
      if (ordered) {
        for (const auto& d : row.destinations) {
          if (dir == Direction::kUpper) CHECK(p.class_of(d.x) <= d.y);
          else CHECK(p.class_of(d.x) >= d.y);
        }
      }
    }
  }
}

TEST_CASE("marginal defect detects a perturbed row") {
  const auto net = fixtures::toy_network();
  const ClassPartition p({2, 1, 1});
  const auto chain = toy_chain(Direction::kUpper, p, 60, 200);
  CouplingRow row = CouplingBuilder(net, p, chain).row({3, 2, 1}, 12);
  REQUIRE_FALSE(row.destinations.empty());
  row.destinations[0].rate *= 1.001;
  CHECK(coupling_marginal_defect(row, net, p, chain) > 1e-10);
}

TEST_CASE("identical chain gives a diagonal coupling") {
  const auto net = fixtures::birth_death(3.0, 0.5);
  const ClassPartition p({1});
  BuildOptions opt;
  opt.l_exact = 40;
  opt.l_total = 400;
  const auto chain = build_bounding_chain(net, p, Direction::kUpper, opt);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto traj = coupled_ssa(net, p, chain, {4}, 4, 5.0, seed);
    CHECK_FALSE(traj.band_overflow);
    for (const auto& j : traj.jumps) CHECK(j.x[0] == j.y);
  }
}

TEST_CASE("coupled simulation keeps the order for both directions") {
  const auto net = fixtures::toy_network();
  for (Direction dir : {Direction::kUpper, Direction::kLower}) {
    const ClassPartition p = dir == Direction::kUpper ? ClassPartition({2, 1, 1})
                                                      : ClassPartition({2, 2, 5});
    const auto chain = toy_chain(dir, p, 80, 2000);
    CoupledOptions opt;
    std::uint64_t rows = 0;
    opt.on_row = [&](const CouplingRow&) { ++rows; };
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const State x0{2, 1, 1};
      const ClassIndex y0 = p.class_of(x0) + (dir == Direction::kUpper ? 3 : -3);
      const auto traj = coupled_ssa(net, p, chain, x0, y0, 2.0, seed, opt);
      CHECK_FALSE(traj.band_overflow);
      CHECK(traj.jumps.size() == traj.jump_count + 1);
      for (const auto& j : traj.jumps) {
        if (dir == Direction::kUpper) CHECK(p.class_of(j.x) <= j.y);
        else CHECK(p.class_of(j.x) >= j.y);
      }
      double t = -1;
      for (const auto& j : traj.jumps) {
        CHECK(j.t > t);
        t = j.t;
      }
    }
    CHECK(rows > 0);
  }
}

TEST_CASE("coupled simulation is reproducible per seed") {
  const auto net = fixtures::toy_network();
  const ClassPartition p({2, 1, 1});
  const auto chain = toy_chain(Direction::kUpper, p, 60, 1000);
  const auto a = coupled_ssa(net, p, chain, {0, 0, 0}, 0, 1.0, 42);
  const auto b = coupled_ssa(net, p, chain, {0, 0, 0}, 0, 1.0, 42);
  REQUIRE(a.jumps.size() == b.jumps.size());
  for (std::size_t k = 0; k < a.jumps.size(); ++k) {
    CHECK(a.jumps[k].t == b.jumps[k].t);
    CHECK(a.jumps[k].x == b.jumps[k].x);
  }
  CoupledOptions other;
  other.config_hash = 99;
  const auto c = coupled_ssa(net, p, chain, {0, 0, 0}, 0, 1.0, 42, other);
  CHECK((c.jumps.size() != a.jumps.size() || c.jumps.back().t != a.jumps.back().t));
}

TEST_CASE("naive chain leaves a short band") {
  const auto net = fixtures::toy_network();
  const ClassPartition p({1, 1, 1});
  const auto chain = toy_chain(Direction::kUpper, p, 40, 80, 2);
  const auto traj = coupled_ssa(net, p, chain, {5, 5, 5}, 20, 50.0, 5);
  CHECK(traj.band_overflow);
  CHECK(traj.jumps.back().y <= chain.l_total() + chain.max_jump());
}

TEST_CASE("coupled simulation validates its start and honours the jump cap") {
  const auto net = fixtures::toy_network();
  const ClassPartition p({2, 1, 1});
  const auto chain = toy_chain(Direction::kUpper, p, 60, 1000);
  CHECK_THROWS_AS(coupled_ssa(net, p, chain, {3, 0, 0}, 2, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(coupled_ssa(net, p, chain, {1, 0}, 2, 1.0, 1), ValidationError);
  CoupledOptions opt;
  opt.max_jumps = 10;
  const auto traj = coupled_ssa(net, p, chain, {0, 0, 0}, 0, 1e6, 1, opt);
  CHECK(traj.jump_cap_reached);
  CHECK(traj.jump_count == 10);
}

TEST_CASE("row cache evicts least recently used rows") {
  const auto net = fixtures::toy_network();
  const ClassPartition p({2, 1, 1});
  const auto chain = toy_chain(Direction::kUpper, p, 60, 200);
  const CouplingBuilder builder(net, p, chain);
  RowCache cache(2);
  cache.get(builder, {0, 0, 0}, 0);
  cache.get(builder, {1, 0, 0}, 2);
  cache.get(builder, {0, 0, 0}, 0);
  cache.get(builder, {0, 1, 0}, 1);
  CHECK(cache.size() == 2);
  CHECK(cache.hits() == 1);
  cache.get(builder, {0, 0, 0}, 0);
  CHECK(cache.hits() == 2);
  cache.get(builder, {1, 0, 0}, 2);
  CHECK(cache.misses() == 4);
}
