#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "srnbound/network.hpp"

namespace srnbound {

enum class Direction { kUpper, kLower };

std::string to_string(Direction d);
Direction parse_direction(const std::string& text);

/**
 * f-table for offsets j in [1, J]: down(l, j) = f_{l,l-j}, up(l, j) = f_{l,l+j}.
 * Empty classes hold the neutral element of the corresponding extremum
 * (+inf for a min, 0 for a max over nonnegative rates); see empty().
 */
class FTable {
 public:
  FTable(Direction direction, int max_jump, ClassIndex horizon);

  Direction direction() const { return direction_; }
  int max_jump() const { return max_jump_; }
  ClassIndex horizon() const { return horizon_; }

  bool empty(ClassIndex l) const { return empty_.at(l) != 0; }
  double down(ClassIndex l, int j) const { return down_[index(l, j)]; }
  double up(ClassIndex l, int j) const { return up_[index(l, j)]; }
  /** f_{l,m} for any m != l; out-of-band entries are 0 for nonempty classes. */
  double at(ClassIndex l, ClassIndex m) const;

  void set_empty(ClassIndex l, bool e) { empty_.at(l) = e ? 1 : 0; }
  void set_down(ClassIndex l, int j, double v) { down_[index(l, j)] = v; }
  void set_up(ClassIndex l, int j, double v) { up_[index(l, j)] = v; }

 private:
  std::size_t index(ClassIndex l, int j) const;

  Direction direction_;
  int max_jump_;
  ClassIndex horizon_;
  std::vector<char> empty_;
  std::vector<double> down_;
  std::vector<double> up_;
};

/**
 * Banded U-table. lower(l, m) holds U^-_{l,m} for m < l, upper(l, m) holds
 * U^+_{l,m} for m > l. Entries outside the stored band are 0.
 */
class UTable {
 public:
  UTable(int max_jump, ClassIndex rows);

  int max_jump() const { return max_jump_; }
  ClassIndex rows() const { return rows_; }

  double lower(ClassIndex l, ClassIndex m) const;
  double upper(ClassIndex l, ClassIndex m) const;
  void set_lower(ClassIndex l, ClassIndex m, double v);
  void set_upper(ClassIndex l, ClassIndex m, double v);

 private:
  int max_jump_;
  ClassIndex rows_;
  std::vector<double> lower_;  // (l, l - j), j in [1, J]
  std::vector<double> upper_;  // (l, l + j), j in [1, J]
};

/**
 * Eventually quasi-polynomial rate for one offset: for l >= onset,
 * rate(l) = sum_d coefficients[l mod period][d] * l^d.
 */
struct RateTail {
  int offset = 0;
  int period = 1;
  int degree = 1;
  ClassIndex onset = 0;
  std::vector<std::array<double, 4>> coefficients;

  double operator()(ClassIndex l) const;
  /** Common leading coefficient of degree d, or nullopt if residues disagree. */
  std::optional<double> common_coefficient(int d) const;
  double mean_coefficient(int d) const;
};

/** Banded one-dimensional transition-rate table, exact on [0, l_exact]. */
class BoundingChain {
 public:
  /** rates has (l_exact + 1) rows of 2J entries, offsets -J..-1, 1..J. */
  BoundingChain(Direction direction, int max_jump, ClassIndex l_exact, ClassIndex l_total,
                std::vector<double> rates, std::vector<RateTail> tails = {});

  Direction direction() const { return direction_; }
  int max_jump() const { return max_jump_; }
  ClassIndex l_exact() const { return l_exact_; }
  ClassIndex l_total() const { return l_total_; }
  const std::vector<RateTail>& tails() const { return tails_; }
  const RateTail* tail(int offset) const;

  /** Q~_{l,l+offset}; zero when l + offset < 0 or |offset| outside the band. */
  double rate(ClassIndex l, int offset) const;
  double exit_rate(ClassIndex l) const;
  double diagonal(ClassIndex l) const { return -exit_rate(l); }
  /** Q~_{l,0:m} including the diagonal when m >= l. */
  double cumulative_below(ClassIndex l, ClassIndex m) const;

  void set_rate(ClassIndex l, int offset, double v);
  const std::vector<double>& exact_rates() const { return rates_; }

  static std::size_t slot(int offset, int max_jump) {
    return offset < 0 ? static_cast<std::size_t>(offset + max_jump)
                      : static_cast<std::size_t>(offset + max_jump - 1);
  }

 private:
  Direction direction_;
  int max_jump_;
  ClassIndex l_exact_;
  ClassIndex l_total_;
  std::vector<double> rates_;
  std::vector<RateTail> tails_;
};

/** Min/max of aggregated rates over each class 0..horizon, by enumeration. */
FTable compute_f(const ReactionNetwork& network, const ClassPartition& partition,
                 Direction direction, ClassIndex horizon, EnumerationBudget* budget = nullptr);

/** Optimal U-table on rows 0..rows. Needs f up to rows + J + 1 and beyond empty gaps. */
UTable optimal_u(const FTable& f, ClassIndex rows);

/** Entrywise membership problems of U in the admissible set. */
std::vector<std::string> u_table_violations(const UTable& u);

/** Phi^{-1}. Throws ValidationError listing the violated entries. */
BoundingChain phi_inverse(const UTable& u, Direction direction);

/** Phi on rows 0..rows. */
UTable phi(const BoundingChain& chain, ClassIndex rows);

struct BuildOptions {
  ClassIndex l_exact = 300;
  ClassIndex l_total = 300;
  int max_degree = 1;
  /** 0 selects lcm of the weights, capped at kMaxAutoPeriod. */
  int max_period = 0;
  static constexpr int kMaxAutoPeriod = 64;
};

/** Fits one eventually quasi-polynomial tail to values on [0, values.size()). */
std::optional<RateTail> fit_tail(const std::vector<double>& values, int offset, int max_degree,
                                 int max_period, int min_window);

BoundingChain build_bounding_chain(const ReactionNetwork& network,
                                   const ClassPartition& partition, Direction direction,
                                   const BuildOptions& options, EnumerationBudget* budget = nullptr);

struct Counterexample {
  std::string assumption;  // "A1", "A2", "B1", "B2", "generator"
  ClassIndex l = 0;
  ClassIndex m = 0;
  std::optional<State> state;
  double chain_value = 0;
  double reference_value = 0;
};

struct AssumptionReport {
  bool passed = true;
  std::optional<Counterexample> first;
  std::uint64_t checks = 0;
};

/**
 * Checks A1/A2 (upper) or B1/B2 (lower) for l <= l_check. Counterexamples
 * are reported as (l, m) in U-index convention: m < l for the down side,
 * m > l for the up side.
 */
AssumptionReport verify_assumptions(const ReactionNetwork& network,
                                    const ClassPartition& partition, const BoundingChain& chain,
                                    ClassIndex l_check);

struct OptimalityReport {
  bool dominated = true;
  bool strictly = false;
  /** Largest signed excess of the candidate beyond the optimum; <= 0 when dominated. */
  double worst_margin = 0;
  ClassIndex worst_l = 0;
  ClassIndex worst_m = 0;
};

OptimalityReport check_optimality(const BoundingChain& candidate, const BoundingChain& optimal,
                                  ClassIndex window);

}  // namespace srnbound
