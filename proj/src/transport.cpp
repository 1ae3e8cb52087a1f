#include "srnbound/transport.hpp"

#include <algorithm>
#include <cmath>

#include "srnbound/errors.hpp"

namespace srnbound {

namespace {

constexpr double kSlack = 1e-12;

}  // namespace

MassSequence::MassSequence(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& x, const Entry& y) { return x.index < y.index; });
  long double total = 0;
  for (const Entry& e : entries) {
    if (!(e.mass >= 0.0) || !std::isfinite(e.mass)) {
      throw ValidationError("mass sequence entry at " + std::to_string(e.index) +
                            " is negative or non-finite");
    }
    if (e.index < 0) throw ValidationError("mass sequence index must be nonnegative");
    if (e.mass == 0.0) continue;
    if (!entries_.empty() && entries_.back().index == e.index) {
      entries_.back().mass += e.mass;
    } else {
      entries_.push_back(e);
    }
    total += e.mass;
  }
  total_ = static_cast<double>(total);
}

MassSequence MassSequence::dense(const std::vector<double>& masses) {
  std::vector<Entry> e;
  for (std::size_t k = 0; k < masses.size(); ++k) {
    e.push_back({static_cast<std::int64_t>(k), masses[k]});
  }
  return MassSequence(std::move(e));
}

double MassSequence::at(std::int64_t index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const Entry& e, std::int64_t k) { return e.index < k; });
  return it != entries_.end() && it->index == index ? it->mass : 0.0;
}

double MassSequence::prefix(std::int64_t k) const {
  long double s = 0;
  for (const Entry& e : entries_) {
    if (e.index > k) break;
    s += e.mass;
  }
  return static_cast<double>(s);
}

double TransportPlan::row_sum(std::int64_t from) const {
  long double s = 0;
  for (const PlanEntry& e : entries_) {
    if (e.from == from) s += e.mass;
  }
  return static_cast<double>(s);
}

double TransportPlan::col_sum(std::int64_t to) const {
  long double s = 0;
  for (const PlanEntry& e : entries_) {
    if (e.to == to) s += e.mass;
  }
  return static_cast<double>(s);
}

double TransportPlan::at(std::int64_t from, std::int64_t to) const {
  double s = 0;
  for (const PlanEntry& e : entries_) {
    if (e.from == from && e.to == to) s += e.mass;
  }
  return s;
}

MassSequence pi(double x, const MassSequence& u) {
  const double total = u.total();
  const double tol = kSlack * std::max(1.0, total);
  if (x < -tol || x > total + tol || !std::isfinite(x)) {
    throw ValidationError("pi: mass " + std::to_string(x) + " outside [0, " +
                          std::to_string(total) + "]");
  }
  x = std::clamp(x, 0.0, total);
  std::vector<MassSequence::Entry> out;
  long double before = 0;
  for (const auto& e : u.entries()) {
    const long double fill = std::min<long double>(std::max<long double>(x - before, 0), e.mass);
    if (fill > 0) out.push_back({e.index, static_cast<double>(fill)});
    before += e.mass;
  }
  return MassSequence(std::move(out));
}

TransportPlan pi_bar(const MassSequence& a, const MassSequence& b) {
  const double scale = std::max({a.total(), b.total(), 0.0});
  const double tol = kSlack * scale;
  if (std::abs(a.total() - b.total()) > tol) {
    throw ValidationError("pi_bar: totals differ (" + std::to_string(a.total()) + " vs " +
                          std::to_string(b.total()) + ")");
  }
  const auto& ae = a.entries();
  const auto& be = b.entries();

  // prefix domination on the joint support
  {
    std::size_t i = 0, j = 0;
    long double pa = 0, pb = 0;
    while (i < ae.size() || j < be.size()) {
      const std::int64_t k = std::min(i < ae.size() ? ae[i].index : INT64_MAX,
                                      j < be.size() ? be[j].index : INT64_MAX);
      while (i < ae.size() && ae[i].index == k) pa += ae[i++].mass;
      while (j < be.size() && be[j].index == k) pb += be[j++].mass;
      if (pa < pb - tol) {
        throw PrefixDominationError(
            "pi_bar: prefix domination violated at k=" + std::to_string(k), k);
      }
    }
  }

  // row k receives the b-mass lying in the cumulative interval (A_{k-1}, A_k]
  std::vector<PlanEntry> plan;
  const long double cap = b.total();
  long double a_lo = 0;
  std::size_t j = 0;
  long double b_lo = 0;
  for (const auto& row : ae) {
    const long double a_hi = std::min<long double>(a_lo + row.mass, cap);
    while (j < be.size() && b_lo + be[j].mass <= a_lo) b_lo += be[j++].mass;
    std::size_t jj = j;
    long double lo = b_lo;
    while (jj < be.size() && lo < a_hi) {
      const long double hi = lo + be[jj].mass;
      const long double m = std::min(a_hi, hi) - std::max(a_lo, lo);
      if (m > 0) {
        if (be[jj].index < row.index) {
          if (m > tol) {
            throw ConsistencyError("pi_bar: mass below the diagonal at (" +
                                   std::to_string(row.index) + "," +
                                   std::to_string(be[jj].index) + ")");
          }
        } else {
          plan.push_back({row.index, be[jj].index, static_cast<double>(m)});
        }
      }
      lo = hi;
      ++jj;
    }
    a_lo = a_hi;
  }
  return TransportPlan(std::move(plan));
}

TransportPlan pi_bar_reflected(const MassSequence& a, const MassSequence& b) {
  std::int64_t top = 0;
  for (const auto& e : a.entries()) top = std::max(top, e.index);
  for (const auto& e : b.entries()) top = std::max(top, e.index);
  auto reflect = [top](const MassSequence& s) {
    std::vector<MassSequence::Entry> r;
    for (const auto& e : s.entries()) r.push_back({top - e.index, e.mass});
    return MassSequence(std::move(r));
  };
  TransportPlan p;
  try {
    p = pi_bar(reflect(a), reflect(b));
  } catch (const PrefixDominationError& e) {
    throw PrefixDominationError(
        "pi_bar: suffix domination violated at k=" + std::to_string(top - e.index()),
        top - e.index());
  }
  std::vector<PlanEntry> out;
  for (const auto& e : p.entries()) out.push_back({top - e.from, top - e.to, e.mass});
  return TransportPlan(std::move(out));
}

}  // namespace srnbound
