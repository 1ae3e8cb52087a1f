#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace srnbound {

using Count = std::int64_t;
using State = std::vector<Count>;
using ClassIndex = std::int64_t;

enum class FactorKind { kPower, kFalling, kIndicator };

/**
 * x_s^e (kPower), x_s (x_s - 1) ... (x_s - e + 1) (kFalling), or
 * 1 if x_s >= e else 0 (kIndicator).
 */
struct Factor {
  std::size_t species = 0;
  int exponent = 1;
  FactorKind kind = FactorKind::kFalling;
};

/**
 * One monomial of a propensity. The coefficient is either a literal or a
 * named parameter; named parameters are resolved by the owning network.
 */
struct Term {
  double value = 1.0;
  std::string parameter;
  std::vector<Factor> factors;
};

struct Reaction {
  std::string name;
  std::vector<Count> change;
  std::vector<Term> propensity;
};

/**
 * A stochastic reaction network with all parameters bound. Immutable once
 * constructed; use with_parameters() to derive a rebound copy.
 */
class ReactionNetwork {
 public:
  ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions,
                  std::map<std::string, double> parameters = {});

  std::size_t dimension() const { return species_.size(); }
  const std::vector<std::string>& species() const { return species_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  const std::map<std::string, double>& parameters() const { return parameters_; }

  /** Propensity of reaction r at x. */
  double propensity(std::size_t r, std::span<const Count> x) const;

  /** Sum of propensities of reactions with nonzero change. */
  double exit_rate(std::span<const Count> x) const;

  ReactionNetwork with_parameters(const std::map<std::string, double>& overrides) const;

 private:
  std::vector<std::string> species_;
  std::vector<Reaction> reactions_;
  std::map<std::string, double> parameters_;
  std::vector<std::vector<double>> coefficients_;  // resolved, per reaction per term
};

/** Weighted linear partition cl(x) = w . x with positive integer weights. */
class ClassPartition {
 public:
  explicit ClassPartition(std::vector<Count> weights);

  std::size_t dimension() const { return weights_.size(); }
  const std::vector<Count>& weights() const { return weights_; }
  ClassIndex class_of(std::span<const Count> x) const;
  ClassIndex shift_of(std::span<const Count> change) const;

 private:
  std::vector<Count> weights_;
};

/** Largest |w . nu| over reactions, i.e. the band half-width J. */
int max_class_jump(const ReactionNetwork& network, const ClassPartition& partition);

/** Shared cap on the number of states produced by class enumeration. */
class EnumerationBudget {
 public:
  static constexpr std::uint64_t kDefaultCap = 10'000'000;

  explicit EnumerationBudget(std::uint64_t cap = kDefaultCap) : cap_(cap) {}
  /** Throws BudgetExceeded once the cumulative count passes the cap. */
  void charge(std::uint64_t states);
  std::uint64_t used() const { return used_.load(); }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t cap_;
  std::atomic<std::uint64_t> used_{0};
};

/** Calls visit(x) for each x in S_l, in lexicographic ascending order. */
void for_each_in_class(ClassIndex l, const ClassPartition& partition,
                       const std::function<void(const State&)>& visit);

std::vector<State> enumerate_class(ClassIndex l, const ClassPartition& partition,
                                   EnumerationBudget* budget = nullptr);

/** |S_l| without enumerating. */
std::uint64_t class_size(ClassIndex l, const ClassPartition& partition);

struct ClassRange {
  enum class Kind { kUpTo, kFrom };
  Kind kind;
  ClassIndex bound;

  static ClassRange up_to(ClassIndex m) { return {Kind::kUpTo, m}; }
  static ClassRange from(ClassIndex m) { return {Kind::kFrom, m}; }
};

/**
 * Total rate from x into the classes selected by range. kUpTo requires
 * bound < cl(x), kFrom requires bound > cl(x).
 */
double aggregate_rate(std::span<const Count> x, ClassRange range,
                      const ReactionNetwork& network, const ClassPartition& partition);

struct ValidationIssue {
  std::string kind;  // "negative-propensity", "boundary-leak", "non-finite"
  std::size_t reaction = 0;
  State state;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;
  std::vector<std::string> warnings;
};

/**
 * Checks propensities on every class 0..l_max: finite, nonnegative, and
 * zero whenever the reaction would leave the nonnegative orthant.
 */
ValidationReport validate_network(const ReactionNetwork& network, const ClassPartition& partition,
                                  ClassIndex l_max);

/** Throws ValidationError with the first issue if the report is not ok. */
void require_valid(const ValidationReport& report);

std::string format_state(std::span<const Count> x);

}  // namespace srnbound
