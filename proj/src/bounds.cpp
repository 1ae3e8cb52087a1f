#include "srnbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "srnbound/errors.hpp"
#include "srnbound/parallel.hpp"

namespace srnbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFitTolerance = 1e-10;
constexpr double kAssumptionSlack = 1e-12;

double slack(double reference) { return kAssumptionSlack * std::max(1.0, std::abs(reference)); }

/** Per-reaction class shifts, with zero-change reactions marked inert. */
struct ShiftMap {
  std::vector<ClassIndex> shift;
  std::vector<char> moves;
  int max_jump = 0;
};

ShiftMap shift_map(const ReactionNetwork& network, const ClassPartition& partition) {
  ShiftMap s;
  s.max_jump = max_class_jump(network, partition);
  for (const Reaction& r : network.reactions()) {
    s.shift.push_back(partition.shift_of(r.change));
    bool moves = false;
    for (Count c : r.change) moves = moves || c != 0;
    s.moves.push_back(moves ? 1 : 0);
  }
  return s;
}

/** bucket[d + J] = total rate of reactions with class shift d. */
void shift_buckets(const ReactionNetwork& network, const ShiftMap& sm, const State& x, int J,
                   std::vector<double>& bucket) {
  bucket.assign(2 * static_cast<std::size_t>(J) + 1, 0.0);
  for (std::size_t r = 0; r < sm.shift.size(); ++r) {
    if (!sm.moves[r]) continue;
    const double a = network.propensity(r, x);
    if (a != 0.0) bucket[static_cast<std::size_t>(sm.shift[r] + J)] += a;
  }
}

long double eval_power(const std::array<long double, 4>& c, int degree, long double x) {
  long double v = 0;
  for (int d = degree; d >= 0; --d) v = v * x + c[d];
  return v;
}

/** Interpolating polynomial through (xs[k], ys[k]) in power basis. */
std::array<long double, 4> interpolate(const std::vector<long double>& xs,
                                       const std::vector<long double>& ys) {
  const std::size_t n = xs.size();
  std::vector<long double> dd(ys);
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t k = n - 1; k >= j; --k) {
      dd[k] = (dd[k] - dd[k - 1]) / (xs[k] - xs[k - j]);
    }
  }
  std::array<long double, 4> power{};
  std::array<long double, 4> basis{};
  basis[0] = 1;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t d = 0; d < 4; ++d) power[d] += dd[j] * basis[d];
    std::array<long double, 4> next{};
    for (std::size_t d = 0; d < 4; ++d) {
      if (d + 1 < 4) next[d + 1] += basis[d];
      next[d] -= xs[j] * basis[d];
    }
    basis = next;
  }
  return power;
}

}  // namespace

std::string to_string(Direction d) { return d == Direction::kUpper ? "upper" : "lower"; }

Direction parse_direction(const std::string& text) {
  if (text == "upper") return Direction::kUpper;
  if (text == "lower") return Direction::kLower;
  throw ValidationError("direction must be 'upper' or 'lower', got '" + text + "'");
}

// ---------------------------------------------------------------- FTable

FTable::FTable(Direction direction, int max_jump, ClassIndex horizon)
    : direction_(direction),
      max_jump_(max_jump),
      horizon_(horizon),
      empty_(static_cast<std::size_t>(horizon + 1), 0),
      down_(static_cast<std::size_t>(horizon + 1) * max_jump, 0.0),
      up_(static_cast<std::size_t>(horizon + 1) * max_jump, 0.0) {}

std::size_t FTable::index(ClassIndex l, int j) const {
  if (l < 0 || l > horizon_ || j < 1 || j > max_jump_) {
    throw std::out_of_range("FTable index (" + std::to_string(l) + "," + std::to_string(j) + ")");
  }
  return static_cast<std::size_t>(l) * max_jump_ + (j - 1);
}

double FTable::at(ClassIndex l, ClassIndex m) const {
  if (m == l) throw std::out_of_range("FTable::at on the diagonal");
  const ClassIndex j = m < l ? l - m : m - l;
  if (j <= max_jump_) return m < l ? down(l, static_cast<int>(j)) : up(l, static_cast<int>(j));
  if (!empty(l)) return 0.0;
  const bool min_side = (m < l) == (direction_ == Direction::kUpper);
  return min_side ? kInf : 0.0;
}

// ---------------------------------------------------------------- UTable

UTable::UTable(int max_jump, ClassIndex rows)
    : max_jump_(max_jump),
      rows_(rows),
      lower_(static_cast<std::size_t>(rows + 1) * max_jump, 0.0),
      upper_(static_cast<std::size_t>(rows + 1) * max_jump, 0.0) {}

double UTable::lower(ClassIndex l, ClassIndex m) const {
  if (m >= l) throw std::out_of_range("U^- needs m < l");
  if (l - m > max_jump_ || m < 0) return 0.0;
  return lower_.at(static_cast<std::size_t>(l) * max_jump_ + (l - m - 1));
}

double UTable::upper(ClassIndex l, ClassIndex m) const {
  if (m <= l) throw std::out_of_range("U^+ needs m > l");
  if (m - l > max_jump_) return 0.0;
  return upper_.at(static_cast<std::size_t>(l) * max_jump_ + (m - l - 1));
}

void UTable::set_lower(ClassIndex l, ClassIndex m, double v) {
  if (m >= l || l - m > max_jump_ || m < 0) throw std::out_of_range("U^- entry outside band");
  lower_.at(static_cast<std::size_t>(l) * max_jump_ + (l - m - 1)) = v;
}

void UTable::set_upper(ClassIndex l, ClassIndex m, double v) {
  if (m <= l || m - l > max_jump_) throw std::out_of_range("U^+ entry outside band");
  upper_.at(static_cast<std::size_t>(l) * max_jump_ + (m - l - 1)) = v;
}

// ---------------------------------------------------------------- RateTail

double RateTail::operator()(ClassIndex l) const {
  const auto& c = coefficients.at(static_cast<std::size_t>(l % period));
  const auto x = static_cast<long double>(l);
  long double v = 0;
  for (int d = degree; d >= 0; --d) v = v * x + c[d];
  return static_cast<double>(v);
}

std::optional<double> RateTail::common_coefficient(int d) const {
  if (d > degree) return 0.0;
  const double first = coefficients.front()[d];
  for (const auto& c : coefficients) {
    if (std::abs(c[d] - first) > kFitTolerance * std::max(1.0, std::abs(first))) {
      return std::nullopt;
    }
  }
  return first;
}

double RateTail::mean_coefficient(int d) const {
  if (d > degree) return 0.0;
  double s = 0;
  for (const auto& c : coefficients) s += c[d];
  return s / static_cast<double>(coefficients.size());
}

// ---------------------------------------------------------------- BoundingChain

BoundingChain::BoundingChain(Direction direction, int max_jump, ClassIndex l_exact,
                             ClassIndex l_total, std::vector<double> rates,
                             std::vector<RateTail> tails)
    : direction_(direction),
      max_jump_(max_jump),
      l_exact_(l_exact),
      l_total_(l_total),
      rates_(std::move(rates)),
      tails_(std::move(tails)) {
  if (max_jump_ < 1) throw ValidationError("bounding chain needs band half-width >= 1");
  if (l_exact_ < 0 || l_total_ < l_exact_) throw ValidationError("need 0 <= l_exact <= l_total");
  if (rates_.size() != static_cast<std::size_t>(l_exact_ + 1) * 2 * max_jump_) {
    throw ValidationError("rate table has wrong size");
  }
  if (l_total_ > l_exact_) {
    for (int k = -max_jump_; k <= max_jump_; ++k) {
      if (k != 0 && tail(k) == nullptr) {
        throw ValidationError("missing tail for offset " + std::to_string(k) +
                              " while l_total exceeds l_exact");
      }
    }
  }
}

const RateTail* BoundingChain::tail(int offset) const {
  for (const RateTail& t : tails_) {
    if (t.offset == offset) return &t;
  }
  return nullptr;
}

double BoundingChain::rate(ClassIndex l, int offset) const {
  if (offset == 0 || offset > max_jump_ || offset < -max_jump_ || l + offset < 0) return 0.0;
  if (l < 0) throw std::out_of_range("negative class");
  if (l <= l_exact_) {
    return rates_[static_cast<std::size_t>(l) * 2 * max_jump_ + slot(offset, max_jump_)];
  }
  if (l > l_total_) {
    throw std::out_of_range("class " + std::to_string(l) + " beyond chain range " +
                            std::to_string(l_total_));
  }
  return (*tail(offset))(l);
}

double BoundingChain::exit_rate(ClassIndex l) const {
  double s = 0;
  for (int k = -max_jump_; k <= max_jump_; ++k) {
    if (k != 0) s += rate(l, k);
  }
  return s;
}

double BoundingChain::cumulative_below(ClassIndex l, ClassIndex m) const {
  double s = 0;
  if (m < l) {
    for (ClassIndex k = std::max<ClassIndex>(0, l - max_jump_); k <= m; ++k) {
      s += rate(l, static_cast<int>(k - l));
    }
    return s;
  }
  for (ClassIndex k = m + 1; k <= l + max_jump_; ++k) s += rate(l, static_cast<int>(k - l));
  return -s;
}

void BoundingChain::set_rate(ClassIndex l, int offset, double v) {
  if (l < 0 || l > l_exact_ || offset == 0 || std::abs(offset) > max_jump_) {
    throw std::out_of_range("set_rate outside exact band");
  }
  rates_[static_cast<std::size_t>(l) * 2 * max_jump_ + slot(offset, max_jump_)] = v;
}

// ---------------------------------------------------------------- f and U

FTable compute_f(const ReactionNetwork& network, const ClassPartition& partition,
                 Direction direction, ClassIndex horizon, EnumerationBudget* budget) {
  const ShiftMap sm = shift_map(network, partition);
  const int J = std::max(1, sm.max_jump);
  FTable f(direction, J, horizon);
  const bool upper = direction == Direction::kUpper;
  const double down_init = upper ? kInf : 0.0;
  const double up_init = upper ? 0.0 : kInf;

  if (budget != nullptr) {
    std::uint64_t total = 0;
    for (ClassIndex l = 0; l <= horizon; ++l) total += class_size(l, partition);
    budget->charge(total);
  }

  parallel_for(static_cast<std::size_t>(horizon + 1), [&](std::size_t li) {
    const auto l = static_cast<ClassIndex>(li);
    std::vector<double> down(J + 1, down_init), up(J + 1, up_init), bucket;
    bool empty = true;
    for_each_in_class(l, partition, [&](const State& x) {
      empty = false;
      shift_buckets(network, sm, x, J, bucket);
      double acc_down = 0, acc_up = 0;
      for (int j = J; j >= 1; --j) {
        acc_down += bucket[J - j];
        acc_up += bucket[J + j];
        if (upper) {
          down[j] = std::min(down[j], acc_down);
          up[j] = std::max(up[j], acc_up);
        } else {
          down[j] = std::max(down[j], acc_down);
          up[j] = std::min(up[j], acc_up);
        }
      }
    });
    f.set_empty(l, empty);
    for (int j = 1; j <= J; ++j) {
      f.set_down(l, j, down[j]);
      f.set_up(l, j, up[j]);
    }
  });
  return f;
}

UTable optimal_u(const FTable& f, ClassIndex rows) {
  const int J = f.max_jump();
  const bool upper = f.direction() == Direction::kUpper;
  if (f.horizon() < rows + J) {
    throw ValidationError("f-table horizon " + std::to_string(f.horizon()) +
                          " too short for " + std::to_string(rows) + " rows");
  }
  auto nonempty_at_or_above = [&](ClassIndex l) {
    while (l <= f.horizon() && f.empty(l)) ++l;
    if (l > f.horizon()) throw ValidationError("f-table horizon ends inside an empty gap");
    return l;
  };
  auto nonempty_at_or_below = [&](ClassIndex l) {
    while (l >= 0 && f.empty(l)) --l;
    if (l < 0) throw ValidationError("no nonempty class at or below");
    return l;
  };

  UTable u(J, rows);
  for (ClassIndex l = 0; l <= rows; ++l) {
    for (ClassIndex m = std::max<ClassIndex>(0, l - J); m < l; ++m) {
      double v;
      if (upper) {
        v = kInf;
        const ClassIndex top = nonempty_at_or_above(l);
        for (ClassIndex lp = m + 1; lp <= top; ++lp) {
          if (f.empty(lp)) continue;
          v = std::min(v, lp - m > J ? 0.0 : f.down(lp, static_cast<int>(lp - m)));
        }
      } else {
        v = 0.0;
        for (ClassIndex lp = l; lp <= m + J; ++lp) {
          if (!f.empty(lp)) v = std::max(v, f.down(lp, static_cast<int>(lp - m)));
        }
        if (f.horizon() >= m + J + 1 && f.at(m + J + 1, m) != 0.0) {
          throw ConsistencyError("band reduction violated: nonzero drop beyond the band");
        }
      }
      u.set_lower(l, m, v);
    }
    for (ClassIndex m = l + 1; m <= l + J; ++m) {
      double v;
      if (upper) {
        v = 0.0;
        for (ClassIndex lp = std::max<ClassIndex>(0, m - J); lp <= l; ++lp) {
          if (!f.empty(lp)) v = std::max(v, f.up(lp, static_cast<int>(m - lp)));
        }
      } else {
        v = kInf;
        for (ClassIndex lp = nonempty_at_or_below(l); lp < m; ++lp) {
          if (f.empty(lp)) continue;
          v = std::min(v, m - lp > J ? 0.0 : f.up(lp, static_cast<int>(m - lp)));
        }
      }
      u.set_upper(l, m, v);
    }
  }
  return u;
}

std::vector<std::string> u_table_violations(const UTable& u) {
  std::vector<std::string> out;
  const int J = u.max_jump();
  auto report = [&](const char* what, ClassIndex l, ClassIndex m, double v) {
    std::ostringstream os;
    os << what << " at (" << l << "," << m << "), value " << v;
    out.push_back(os.str());
  };
  for (ClassIndex l = 0; l <= u.rows(); ++l) {
    double prev = 0.0;
    for (ClassIndex m = std::max<ClassIndex>(0, l - J); m < l; ++m) {
      const double v = u.lower(l, m);
      if (!std::isfinite(v)) {
        report("non-finite U-", l, m, v);
      } else if (v < prev - slack(prev)) {
        report("U- decreasing in m", l, m, v);
      }
      prev = v;
    }
    double next = 0.0;
    for (ClassIndex m = l + J; m > l; --m) {
      const double v = u.upper(l, m);
      if (!std::isfinite(v)) {
        report("non-finite U+", l, m, v);
      } else if (v < next - slack(next)) {
        report("U+ increasing in m", l, m, v);
      }
      next = v;
    }
  }
  return out;
}

BoundingChain phi_inverse(const UTable& u, Direction direction) {
  const auto violations = u_table_violations(u);
  if (!violations.empty()) {
    std::string msg = "U-table outside the admissible set:";
    for (std::size_t k = 0; k < std::min<std::size_t>(violations.size(), 8); ++k) {
      msg += "\n  " + violations[k];
    }
    throw ValidationError(msg);
  }
  const int J = u.max_jump();
  std::vector<double> rates(static_cast<std::size_t>(u.rows() + 1) * 2 * J, 0.0);
  for (ClassIndex l = 0; l <= u.rows(); ++l) {
    double* row = &rates[static_cast<std::size_t>(l) * 2 * J];
    for (ClassIndex m = std::max<ClassIndex>(0, l - J); m < l; ++m) {
      const double below = m - 1 < 0 ? 0.0 : u.lower(l, m - 1);
      row[BoundingChain::slot(static_cast<int>(m - l), J)] = std::max(0.0, u.lower(l, m) - below);
    }
    for (ClassIndex m = l + 1; m <= l + J; ++m) {
      row[BoundingChain::slot(static_cast<int>(m - l), J)] =
          std::max(0.0, u.upper(l, m) - u.upper(l, m + 1));
    }
  }
  return BoundingChain(direction, J, u.rows(), u.rows(), std::move(rates));
}

UTable phi(const BoundingChain& chain, ClassIndex rows) {
  const int J = chain.max_jump();
  UTable u(J, rows);
  for (ClassIndex l = 0; l <= rows; ++l) {
    double acc = 0;
    for (ClassIndex m = std::max<ClassIndex>(0, l - J); m < l; ++m) {
      acc += chain.rate(l, static_cast<int>(m - l));
      u.set_lower(l, m, acc);
    }
    acc = 0;
    for (ClassIndex m = l + J; m > l; --m) {
      acc += chain.rate(l, static_cast<int>(m - l));
      u.set_upper(l, m, acc);
    }
  }
  return u;
}

// ---------------------------------------------------------------- tails

std::optional<RateTail> fit_tail(const std::vector<double>& values, int offset, int max_degree,
                                 int max_period, int min_window) {
  const auto n = static_cast<ClassIndex>(values.size());
  for (int period = 1; period <= max_period; ++period) {
    for (int degree = 0; degree <= std::min(max_degree, 3); ++degree) {
      const ClassIndex width = std::max<ClassIndex>(min_window, period * (degree + 3));
      if (width > n) continue;
      const ClassIndex onset = n - width;
      double scale = 0;
      for (ClassIndex l = onset; l < n; ++l) scale = std::max(scale, std::abs(values[l]));
      const double tol = kFitTolerance * scale;

      RateTail tail;
      tail.offset = offset;
      tail.period = period;
      tail.degree = degree;
      tail.onset = onset;
      tail.coefficients.assign(period, {0, 0, 0, 0});
      bool ok = true;
      for (int r = 0; r < period && ok; ++r) {
        std::vector<long double> xs, ys;
        ClassIndex first = onset + ((r - onset % period) % period + period) % period;
        for (ClassIndex l = first; l < n; l += period) {
          xs.push_back(static_cast<long double>(l));
          ys.push_back(values[l]);
        }
        if (xs.size() < static_cast<std::size_t>(degree + 2)) {
          ok = false;
          break;
        }
        std::vector<long double> fx(xs.begin(), xs.begin() + degree + 1);
        std::vector<long double> fy(ys.begin(), ys.begin() + degree + 1);
        const auto c = interpolate(fx, fy);
        for (std::size_t k = 0; k < xs.size(); ++k) {
          if (std::abs(static_cast<double>(eval_power(c, degree, xs[k]) - ys[k])) > tol) {
            ok = false;
            break;
          }
        }
        for (int d = 0; d <= degree; ++d) tail.coefficients[r][d] = static_cast<double>(c[d]);
      }
      if (ok) return tail;
    }
  }
  return std::nullopt;
}

namespace {

int auto_period(const ClassPartition& partition, int requested) {
  if (requested > 0) return requested;
  long long p = 1;
  for (Count w : partition.weights()) {
    p = std::lcm(p, static_cast<long long>(w));
    if (p > BuildOptions::kMaxAutoPeriod) return BuildOptions::kMaxAutoPeriod;
  }
  return static_cast<int>(p);
}

void check_extrapolated(const BoundingChain& chain) {
  const int J = chain.max_jump();
  const ClassIndex start = std::max<ClassIndex>(0, chain.l_exact() - J);
  for (ClassIndex l = chain.l_exact() + 1; l <= chain.l_total(); ++l) {
    for (int k = -J; k <= J; ++k) {
      if (k == 0) continue;
      const double v = chain.rate(l, k);
      if (!std::isfinite(v) || v < -slack(v)) {
        throw ConsistencyError("extrapolated rate at class " + std::to_string(l) + ", offset " +
                               std::to_string(k) + " is negative");
      }
    }
  }
  for (ClassIndex l = start; l < chain.l_total(); ++l) {
    for (ClassIndex m = std::max<ClassIndex>(0, l - J); m < l; ++m) {
      const double a = chain.cumulative_below(l + 1, m), b = chain.cumulative_below(l, m);
      if (a > b + slack(b)) {
        throw ConsistencyError("extrapolated chain loses monotonicity in the first index at (" +
                               std::to_string(l) + "," + std::to_string(m) + ")");
      }
    }
    for (ClassIndex m = l + 1; m <= l + J; ++m) {
      const double a = chain.cumulative_below(l + 1, m), b = chain.cumulative_below(l, m);
      if (a > b + slack(b)) {
        throw ConsistencyError("extrapolated chain loses monotonicity in the first index at (" +
                               std::to_string(l) + "," + std::to_string(m + 1) + ")");
      }
    }
  }
}

}  // namespace

BoundingChain build_bounding_chain(const ReactionNetwork& network,
                                   const ClassPartition& partition, Direction direction,
                                   const BuildOptions& options, EnumerationBudget* budget) {
  const int J = std::max(1, max_class_jump(network, partition));
  if (options.l_exact < 2 * J + 2) {
    throw ValidationError("l_exact must be at least 2*J+2 = " + std::to_string(2 * J + 2));
  }
  if (options.l_total < options.l_exact) throw ValidationError("l_total must be >= l_exact");
  if (options.max_degree < 0 || options.max_degree > 3) {
    throw ValidationError("tail degree must be in [0, 3]");
  }
  const Count w_min = *std::min_element(partition.weights().begin(), partition.weights().end());
  const ClassIndex horizon = options.l_exact + J + w_min;

  const FTable f = compute_f(network, partition, direction, horizon, budget);
  const UTable u = optimal_u(f, options.l_exact);
  BoundingChain exact = phi_inverse(u, direction);

  const int period = auto_period(partition, options.max_period);
  const int window = 4 * J + 4;
  std::vector<RateTail> tails;
  for (int k = -J; k <= J; ++k) {
    if (k == 0) continue;
    std::vector<double> values(static_cast<std::size_t>(options.l_exact + 1));
    for (ClassIndex l = 0; l <= options.l_exact; ++l) values[l] = exact.rate(l, k);
    auto tail = fit_tail(values, k, options.max_degree, period, window);
    if (!tail) {
      int detected = -1;
      if (auto probe = fit_tail(values, k, 3, period, window)) detected = probe->degree;
      std::ostringstream os;
      os << "offset " << (k > 0 ? "+" : "") << k
         << ": rates do not settle to a polynomial of degree <= " << options.max_degree
         << " (period <= " << period << ") on the trailing window";
      if (detected >= 0) {
        os << "; degree " << detected << " detected, rerun with max degree >= " << detected;
      }
      throw StabilizationError(os.str(), k, detected);
    }
    tails.push_back(*tail);
  }
  BoundingChain chain(direction, J, options.l_exact, options.l_total, exact.exact_rates(),
                      std::move(tails));
  check_extrapolated(chain);
  return chain;
}

// ---------------------------------------------------------------- verification

AssumptionReport verify_assumptions(const ReactionNetwork& network,
                                    const ClassPartition& partition, const BoundingChain& chain,
                                    ClassIndex l_check) {
  AssumptionReport rep;
  const ShiftMap sm = shift_map(network, partition);
  const int Jn = std::max(1, sm.max_jump);
  const int J = std::max(Jn, chain.max_jump());
  const bool upper = chain.direction() == Direction::kUpper;
  const std::string a1 = upper ? "A1" : "B1";
  const std::string a2 = upper ? "A2" : "B2";
  if (chain.l_total() < l_check + 1) {
    throw ValidationError("candidate chain must be defined on [0, l_check + 1]");
  }
  auto fail = [&](const std::string& kind, ClassIndex l, ClassIndex m, std::optional<State> x,
                  double cv, double rv) {
    rep.passed = false;
    rep.first = Counterexample{kind, l, m, std::move(x), cv, rv};
  };
  auto u_plus = [&](ClassIndex l, ClassIndex m) { return -chain.cumulative_below(l, m - 1); };

  std::vector<double> bucket;
  for (ClassIndex l = 0; l <= l_check && rep.passed; ++l) {
    for (int k = -J; k <= J && rep.passed; ++k) {
      if (k == 0 || l + k < 0) continue;
      const double v = chain.rate(l, k);
      ++rep.checks;
      if (!(v >= 0.0)) fail("generator", l, l + k, std::nullopt, v, 0.0);
    }
    if (!rep.passed) break;

    std::vector<double> chain_down(J + 1), chain_up(J + 1);
    for (int j = 1; j <= J; ++j) {
      if (l - j >= 0) chain_down[j] = chain.cumulative_below(l, l - j);
      chain_up[j] = u_plus(l, l + j);
    }
    for_each_in_class(l, partition, [&](const State& x) {
      if (!rep.passed) return;
      shift_buckets(network, sm, x, Jn, bucket);
      for (int j = J; j >= 1 && rep.passed; --j) {
        if (l - j < 0) continue;
        double q = 0;
        for (int d = -Jn; d <= -j; ++d) q += bucket[d + Jn];
        ++rep.checks;
        const bool ok = upper ? chain_down[j] <= q + slack(q) : chain_down[j] >= q - slack(q);
        if (!ok) fail(a1, l, l - j, x, chain_down[j], q);
      }
      for (int j = 1; j <= J && rep.passed; ++j) {
        double q = 0;
        for (int d = j; d <= Jn; ++d) q += bucket[d + Jn];
        ++rep.checks;
        const bool ok = upper ? chain_up[j] >= q - slack(q) : chain_up[j] <= q + slack(q);
        if (!ok) fail(a1, l, l + j, x, chain_up[j], q);
      }
    });
    if (!rep.passed) break;

    for (ClassIndex m = std::max<ClassIndex>(0, l - J); m < l && rep.passed; ++m) {
      const double next = chain.cumulative_below(l + 1, m), here = chain.cumulative_below(l, m);
      ++rep.checks;
      if (next > here + slack(here)) fail(a2, l, m, std::nullopt, next, here);
    }
    for (ClassIndex m = l + 1; m <= l + J && rep.passed; ++m) {
      const double next = u_plus(l + 1, m + 1), here = u_plus(l, m + 1);
      ++rep.checks;
      if (next < here - slack(here)) fail(a2, l, m, std::nullopt, next, here);
    }
  }
  return rep;
}

OptimalityReport check_optimality(const BoundingChain& candidate, const BoundingChain& optimal,
                                  ClassIndex window) {
  OptimalityReport rep;
  const int J = std::max(candidate.max_jump(), optimal.max_jump());
  const double sign = optimal.direction() == Direction::kUpper ? 1.0 : -1.0;
  rep.worst_margin = -kInf;
  double best = kInf;
  for (ClassIndex l = 0; l <= window; ++l) {
    for (ClassIndex m = std::max<ClassIndex>(0, l - J); m <= std::min(window, l + J - 1); ++m) {
      const double c = candidate.cumulative_below(l, m);
      const double o = optimal.cumulative_below(l, m);
      const double margin = sign * (c - o);
      if (margin > rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_l = l;
        rep.worst_m = m;
      }
      best = std::min(best, margin);
      if (margin > 1e-10 * std::max(1.0, std::abs(o))) rep.dominated = false;
    }
  }
  rep.strictly = rep.dominated && best < -1e-10;
  return rep;
}

}  // namespace srnbound
