#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace srnbound {

/** Finitely supported nonnegative sequence over the naturals. */
class MassSequence {
 public:
  struct Entry {
    std::int64_t index;
    double mass;
  };

  MassSequence() = default;
  /** Sorts by index and merges duplicates. Throws ValidationError on negative mass. */
  explicit MassSequence(std::vector<Entry> entries);
  /** Dense constructor: entry k holds the mass at index k. */
  static MassSequence dense(const std::vector<double>& masses);

  const std::vector<Entry>& entries() const { return entries_; }
  double total() const { return total_; }
  double at(std::int64_t index) const;
  /** Sum of masses with index <= k. */
  double prefix(std::int64_t k) const;
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<Entry> entries_;
  double total_ = 0.0;
};

struct PlanEntry {
  std::int64_t from;
  std::int64_t to;
  double mass;
};

/** Sparse transport plan between two mass sequences. */
class TransportPlan {
 public:
  TransportPlan() = default;
  explicit TransportPlan(std::vector<PlanEntry> entries) : entries_(std::move(entries)) {}

  const std::vector<PlanEntry>& entries() const { return entries_; }
  double row_sum(std::int64_t from) const;
  double col_sum(std::int64_t to) const;
  double at(std::int64_t from, std::int64_t to) const;

 private:
  std::vector<PlanEntry> entries_;
};

/** Pi[x, u]: greedy fill of u in index order with total mass x. */
MassSequence pi(double x, const MassSequence& u);

/**
 * Upper-triangular plan with row marginal a and column marginal b. Requires
 * equal totals and a_{0:k} >= b_{0:k} for every k (1e-12 relative slack).
 * Throws TransportError naming the first offending k.
 */
TransportPlan pi_bar(const MassSequence& a, const MassSequence& b);

/** Mirror image of pi_bar: plan supported on from >= to, needs suffix domination. */
TransportPlan pi_bar_reflected(const MassSequence& a, const MassSequence& b);

}  // namespace srnbound
