#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "support/fixtures.hpp"
#include "srnbound/bounds.hpp"
#include "srnbound/chain_io.hpp"
#include "srnbound/errors.hpp"

using namespace srnbound;

namespace {

// Oracle for f: apply each reaction to the state and classify the landing
// state directly, without class shifts.
double oracle_f(const ReactionNetwork& net, const ClassPartition& p, Direction dir, ClassIndex l,
                ClassIndex m) {
  const bool want_min = (m < l) == (dir == Direction::kUpper);
  double best = want_min ? std::numeric_limits<double>::infinity() : 0.0;
  for_each_in_class(l, p, [&](const State& x) {
    double q = 0;
    for (std::size_t r = 0; r < net.reactions().size(); ++r) {
      State y = x;
      for (std::size_t s = 0; s < y.size(); ++s) y[s] += net.reactions()[r].change[s];
      const ClassIndex c = p.class_of(y);
      if ((m < l && c <= m) || (m > l && c >= m)) q += net.propensity(r, x);
    }
    best = want_min ? std::min(best, q) : std::max(best, q);
  });
  return best;
}

bool rel_eq(double a, double b, double tol = 1e-10) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

}  // namespace

TEST_CASE("compute_f oracles for the structured upper partition") {
  const auto net = fixtures::toy_network();
  ClassPartition p({2, 1, 1});
  const FTable f = compute_f(net, p, Direction::kUpper, 104);
  CHECK(f.up(10, 1) == doctest::Approx(12.5));
  for (ClassIndex l = 2; l <= 104; ++l) {
    CHECK(f.down(l, 2) == 0.0);
    CHECK(f.up(l, 1) == doctest::Approx(1.0 * l + 2.5));
  }
  // exact lattice minimum, attained at x = (0, 100, 0)
  CHECK(f.down(100, 1) == doctest::Approx(250.0).epsilon(1e-12));
  CHECK(oracle_f(net, p, Direction::kUpper, 100, 99) == doctest::Approx(250.0).epsilon(1e-12));
  for (ClassIndex l : {0, 1, 5, 17, 40}) {
    for (int j = 1; j <= 2; ++j) {
      if (l - j >= 0) CHECK(f.down(l, j) == doctest::Approx(oracle_f(net, p, Direction::kUpper, l, l - j)));
      CHECK(f.up(l, j) == doctest::Approx(oracle_f(net, p, Direction::kUpper, l, l + j)));
    }
  }
}

TEST_CASE("compute_f lower direction agrees with the oracle, empty classes neutral") {
  const auto net = fixtures::toy_network();
  ClassPartition p({2, 2, 5});
  const FTable f = compute_f(net, p, Direction::kLower, 40);
  CHECK(f.max_jump() == 5);
  CHECK(f.empty(1));
  CHECK(f.empty(3));
  CHECK_FALSE(f.empty(5));
  CHECK(f.down(1, 1) == 0.0);
  CHECK(std::isinf(f.up(1, 1)));
  for (ClassIndex l : {0, 2, 7, 12, 23}) {
    for (int j = 1; j <= 5; ++j) {
      if (l - j >= 0) CHECK(f.down(l, j) == doctest::Approx(oracle_f(net, p, Direction::kLower, l, l - j)));
      CHECK(f.up(l, j) == doctest::Approx(oracle_f(net, p, Direction::kLower, l, l + j)));
    }
  }
}

TEST_CASE("enumeration budget reaches compute_f") {
  EnumerationBudget budget(1000);
  CHECK_THROWS_AS(compute_f(fixtures::toy_network(), ClassPartition({1, 1, 1}), Direction::kUpper, 40,
                            &budget),
                  BudgetExceeded);
}

TEST_CASE("phi_inverse hand-evaluated row") {
  UTable u(2, 4);
  u.set_lower(2, 0, 1);
  u.set_lower(2, 1, 3);
  u.set_upper(2, 3, 4);
  u.set_upper(2, 4, 1);
  const BoundingChain q = phi_inverse(u, Direction::kUpper);
  CHECK(q.rate(2, -2) == 1);
  CHECK(q.rate(2, -1) == 2);
  CHECK(q.diagonal(2) == -7);
  CHECK(q.rate(2, 1) == 3);
  CHECK(q.rate(2, 2) == 1);

  const BoundingChain zero = phi_inverse(UTable(2, 4), Direction::kUpper);
  for (ClassIndex l = 0; l <= 4; ++l) CHECK(zero.exit_rate(l) == 0.0);

  UTable bad(2, 4);
  bad.set_lower(3, 1, 5);
  bad.set_lower(3, 2, 1);
  try {
    phi_inverse(bad, Direction::kUpper);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("(3,2)") != std::string::npos);
  }
}

TEST_CASE("constant-rate birth-death with singleton classes reproduces itself") {
  const double lambda = 1.5, mu = 0.75;
  FTable f(Direction::kUpper, 1, 30);
  for (ClassIndex l = 0; l <= 30; ++l) {
    f.set_down(l, 1, l >= 1 ? mu : 0.0);
    f.set_up(l, 1, lambda);
  }
  const BoundingChain q = phi_inverse(optimal_u(f, 25), Direction::kUpper);
  for (ClassIndex l = 0; l <= 25; ++l) {
    CHECK(q.rate(l, 1) == lambda);
    CHECK(q.rate(l, -1) == (l >= 1 ? mu : 0.0));
  }
  for (Direction dir : {Direction::kUpper, Direction::kLower}) {
    BuildOptions opt;
    opt.l_exact = 40;
    opt.l_total = 80;
    const BoundingChain built =
        build_bounding_chain(fixtures::birth_death(lambda, mu), ClassPartition({1}), dir, opt);
    for (ClassIndex l = 0; l <= 80; ++l) {
      CHECK(built.rate(l, 1) == lambda);
      CHECK(built.rate(l, -1) == (l >= 1 ? mu : 0.0));
    }
  }
}

TEST_CASE("optimal U vanishes beyond the band") {
  const FTable f = compute_f(fixtures::toy_network(), ClassPartition({2, 1, 1}), Direction::kUpper, 30);
  const UTable u = optimal_u(f, 20);
  for (ClassIndex l = 4; l <= 20; ++l) {
    CHECK(u.lower(l, l - 3) == 0.0);
    CHECK(u.upper(l, l + 3) == 0.0);
  }
}

TEST_CASE("structured upper chain: closed forms, banding and generator validity") {
  BuildOptions opt;
  opt.l_exact = 300;
  opt.l_total = 600;
  const BoundingChain q =
      build_bounding_chain(fixtures::toy_network(), ClassPartition({2, 1, 1}), Direction::kUpper, opt);
  CHECK(q.max_jump() == 2);
  CHECK(q.rate(100, -1) == doctest::Approx(250.0).epsilon(1e-12));
  CHECK(q.rate(100, 2) == doctest::Approx(102.5).epsilon(1e-12));
  CHECK(q.diagonal(100) == doctest::Approx(-352.5).epsilon(1e-12));
  CHECK(q.rate(100, -2) == 0.0);
  CHECK(q.rate(100, 1) == 0.0);
  for (ClassIndex l = 3; l <= 6; ++l) CHECK(rel_eq(q.rate(l, -1), 3.0 * l - 3.5));
  for (ClassIndex l = 7; l <= 600; ++l) {
    CHECK(rel_eq(q.rate(l, -1), 2.5 * l));
    CHECK(rel_eq(q.rate(l, 2), 1.0 * l + 2.5));
  }
  const RateTail* down = q.tail(-1);
  REQUIRE(down != nullptr);
  CHECK(down->period == 1);
  CHECK(down->coefficients[0][1] == doctest::Approx(2.5));
  CHECK(q.tail(2)->coefficients[0][1] == doctest::Approx(1.0));
  for (ClassIndex l = 0; l <= 600; ++l) {
    double sum = q.diagonal(l);
    for (int k = -2; k <= 2; ++k) {
      if (k == 0) continue;
      CHECK(q.rate(l, k) >= 0.0);
      sum += q.rate(l, k);
    }
    CHECK(std::abs(sum) <= 1e-10 * std::max(1.0, q.exit_rate(l)));
  }
}

TEST_CASE("lower chain for the (2,2,5) partition is quasi-affine") {
  BuildOptions opt;
  opt.l_exact = 300;
  opt.l_total = 500;
  const BoundingChain q =
      build_bounding_chain(fixtures::toy_network(), ClassPartition({2, 2, 5}), Direction::kLower, opt);
  CHECK(q.max_jump() == 5);
  const RateTail* t5 = q.tail(-5);
  REQUIRE(t5 != nullptr);
  REQUIRE(t5->common_coefficient(1).has_value());
  CHECK(*t5->common_coefficient(1) == doctest::Approx(3.0 / 5));
  // continuous-relaxation closed form is a lower envelope with the same slope
  const double A = 2.5 - std::pow(2.5 + 0.4 * 1.0, 2) / (4 * 2.5);
  CHECK(A == doctest::Approx(1.659));
  const UTable u = phi(q, 320);
  for (ClassIndex l = 40; l <= 300; ++l) {
    CHECK(u.upper(l, l + 2) >= 0.2 * l + A - 1e-12);
    CHECK(u.upper(l + 10, l + 12) - u.upper(l, l + 2) == doctest::Approx(10 * 1.0 / 5));
  }
}

TEST_CASE("naive partition needs a quadratic tail") {
  const auto net = fixtures::toy_network();
  ClassPartition p({1, 1, 1});
  BuildOptions opt;
  opt.l_exact = 120;
  opt.l_total = 200;
  try {
    build_bounding_chain(net, p, Direction::kUpper, opt);
    FAIL("expected stabilization failure");
  } catch (const StabilizationError& e) {
    CHECK(e.detected_degree() == 2);
    CHECK(e.offset() == 1);
  }
  opt.max_degree = 2;
  const BoundingChain q = build_bounding_chain(net, p, Direction::kUpper, opt);
  for (ClassIndex l = 2; l <= 200; ++l) {
    CHECK(rel_eq(q.rate(l, 1), 2.5 * l * l - 2.5 * l + 2.5));
    CHECK(rel_eq(q.rate(l, -1), 2.5 * l));
  }
  CHECK(q.tail(1)->degree == 2);
}

TEST_CASE("tail extrapolation matches exact values on a held-out range") {
  const auto net = fixtures::toy_network();
  for (auto [w, dir] : {std::pair{std::vector<Count>{2, 1, 1}, Direction::kUpper},
                        std::pair{std::vector<Count>{2, 2, 5}, Direction::kLower}}) {
    ClassPartition p(w);
    BuildOptions small;
    small.l_exact = 150;
    small.l_total = 260;
    BuildOptions big;
    big.l_exact = 260;
    big.l_total = 260;
    const auto a = build_bounding_chain(net, p, dir, small);
    const auto b = build_bounding_chain(net, p, dir, big);
    for (ClassIndex l = 151; l <= 260; ++l) {
      for (int k = -a.max_jump(); k <= a.max_jump(); ++k) {
        if (k != 0) CHECK(rel_eq(a.rate(l, k), b.rate(l, k)));
      }
    }
  }
}

TEST_CASE("fit_tail recognizes periodic and polynomial sequences") {
  std::vector<double> v(100);
  for (int l = 0; l < 100; ++l) v[l] = 0.5 * l + (l % 3 == 1 ? 2.0 : 0.0);
  auto t = fit_tail(v, 1, 1, 6, 8);
  REQUIRE(t.has_value());
  CHECK(t->period == 3);
  CHECK((*t)(999) == doctest::Approx(499.5));
  CHECK((*t)(1000) == doctest::Approx(502.0));
  for (int l = 0; l < 100; ++l) v[l] = 0.25 * l * l * l - l;
  CHECK_FALSE(fit_tail(v, 1, 2, 1, 8).has_value());
  auto cubic = fit_tail(v, 1, 3, 1, 8);
  REQUIRE(cubic.has_value());
  CHECK(cubic->degree == 3);
  CHECK((*cubic)(200) == doctest::Approx(0.25 * 200 * 200 * 200 - 200));
}

TEST_CASE("round trips through phi") {
  const auto net = fixtures::toy_network();
  const FTable f = compute_f(net, ClassPartition({2, 2, 5}), Direction::kLower, 70);
  const UTable u = optimal_u(f, 60);
  const BoundingChain q = phi_inverse(u, Direction::kLower);
  const UTable back = phi(q, 60);
  const BoundingChain again = phi_inverse(back, Direction::kLower);
  for (ClassIndex l = 0; l <= 60; ++l) {
    for (ClassIndex m = std::max<ClassIndex>(0, l - 5); m < l; ++m) {
      CHECK(std::abs(back.lower(l, m) - u.lower(l, m)) <= 1e-12 * std::max(1.0, u.lower(l, m)));
    }
    for (ClassIndex m = l + 1; m <= l + 5; ++m) {
      CHECK(std::abs(back.upper(l, m) - u.upper(l, m)) <= 1e-12 * std::max(1.0, u.upper(l, m)));
    }
    for (int k = -5; k <= 5; ++k) {
      if (k != 0) CHECK(std::abs(again.rate(l, k) - q.rate(l, k)) <= 1e-12 * std::max(1.0, q.rate(l, k)));
    }
  }
}

TEST_CASE("verify_assumptions on built chains and perturbations") {
  const auto net = fixtures::toy_network();
  BuildOptions opt;
  opt.l_exact = 80;
  opt.l_total = 80;
  ClassPartition p211({2, 1, 1});
  const auto upper = build_bounding_chain(net, p211, Direction::kUpper, opt);
  CHECK(verify_assumptions(net, p211, upper, 60).passed);

  ClassPartition p225({2, 2, 5});
  const auto lower = build_bounding_chain(net, p225, Direction::kLower, opt);
  CHECK(verify_assumptions(net, p225, lower, 60).passed);

  ClassPartition p111({1, 1, 1});
  BuildOptions naive = opt;
  naive.max_degree = 2;
  const auto nq = build_bounding_chain(net, p111, Direction::kUpper, naive);
  CHECK(verify_assumptions(net, p111, nq, 40).passed);

  BoundingChain tweaked = upper;
  tweaked.set_rate(30, 2, upper.rate(30, 2) - 1.0);
  const auto rep = verify_assumptions(net, p211, tweaked, 60);
  CHECK_FALSE(rep.passed);
  REQUIRE(rep.first.has_value());
  CHECK(rep.first->assumption == "A1");
  CHECK(rep.first->l == 30);
  CHECK(rep.first->m == 31);
  REQUIRE(rep.first->state.has_value());
  CHECK(p211.class_of(*rep.first->state) == 30);

  const BoundingChain zero(Direction::kUpper, 2, 80, 80, std::vector<double>(81 * 4, 0.0));
  const auto zrep = verify_assumptions(net, p211, zero, 60);
  CHECK_FALSE(zrep.passed);
  CHECK(zrep.first->assumption == "A1");
  CHECK(zrep.first->m > zrep.first->l);
}

TEST_CASE("check_optimality") {
  const auto net = fixtures::toy_network();
  ClassPartition p({2, 1, 1});
  const FTable f = compute_f(net, p, Direction::kUpper, 70);
  const UTable u = optimal_u(f, 61);
  const BoundingChain opt = phi_inverse(u, Direction::kUpper);
  const auto self = check_optimality(opt, opt, 60);
  CHECK(self.dominated);
  CHECK_FALSE(self.strictly);
  CHECK(self.worst_margin == 0.0);

  UTable inflated = u;
  for (ClassIndex l = 0; l <= 61; ++l) {
    for (ClassIndex m = l + 1; m <= l + 2; ++m) inflated.set_upper(l, m, u.upper(l, m) + 1.0);
  }
  const BoundingChain cand = phi_inverse(inflated, Direction::kUpper);
  CHECK(verify_assumptions(net, p, cand, 60).passed);
  const auto rep = check_optimality(cand, opt, 60);
  CHECK(rep.dominated);
  CHECK(rep.strictly);
}

TEST_CASE("chain CSV round trip") {
  BuildOptions opt;
  opt.l_exact = 60;
  opt.l_total = 200;
  const auto q = build_bounding_chain(fixtures::toy_network(), ClassPartition({2, 2, 5}),
                                      Direction::kLower, opt);
  std::stringstream ss;
  write_chain_csv(q, ss);
  CHECK(ss.str().find("ell,offset,rate") != std::string::npos);
  CHECK(ss.str().find("offset,slope,intercept,onset") != std::string::npos);
  const auto r = read_chain_csv(ss);
  CHECK(r.direction() == Direction::kLower);
  CHECK(r.l_total() == 200);
  for (ClassIndex l = 0; l <= 200; ++l) {
    for (int k = -5; k <= 5; ++k) {
      if (k != 0) CHECK(r.rate(l, k) == q.rate(l, k));
    }
  }
  std::stringstream bad("ell,offset,rate\n1,2,3\n");
  CHECK_THROWS_AS(read_chain_csv(bad), ValidationError);
}
