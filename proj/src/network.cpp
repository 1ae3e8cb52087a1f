#include "srnbound/network.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "srnbound/errors.hpp"

namespace srnbound {

namespace {

double factor_value(const Factor& f, Count x) {
  if (f.kind == FactorKind::kIndicator) return x >= f.exponent ? 1.0 : 0.0;
  double v = 1.0;
  const auto xd = static_cast<double>(x);
  for (int k = 0; k < f.exponent; ++k) {
    v *= f.kind == FactorKind::kFalling ? xd - k : xd;
  }
  return v;
}

}  // namespace

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions,
                                 std::map<std::string, double> parameters)
    : species_(std::move(species)),
      reactions_(std::move(reactions)),
      parameters_(std::move(parameters)) {
  if (species_.empty()) throw ValidationError("network has no species");
  for (std::size_t a = 0; a < species_.size(); ++a) {
    for (std::size_t b = a + 1; b < species_.size(); ++b) {
      if (species_[a] == species_[b]) throw ValidationError("duplicate species '" + species_[a] + "'");
    }
  }
  coefficients_.reserve(reactions_.size());
  for (std::size_t r = 0; r < reactions_.size(); ++r) {
    const Reaction& rx = reactions_[r];
    if (rx.change.size() != species_.size()) {
      throw ValidationError("reaction " + std::to_string(r) + ": change vector has " +
                            std::to_string(rx.change.size()) + " entries, expected " +
                            std::to_string(species_.size()));
    }
    std::vector<double> coeffs;
    for (const Term& t : rx.propensity) {
      double c = t.value;
      if (!t.parameter.empty()) {
        auto it = parameters_.find(t.parameter);
        if (it == parameters_.end()) {
          throw ValidationError("reaction " + std::to_string(r) + ": unbound parameter '" +
                                t.parameter + "'");
        }
        c *= it->second;
      }
      if (!std::isfinite(c)) {
        throw ValidationError("reaction " + std::to_string(r) + ": non-finite coefficient");
      }
      for (const Factor& f : t.factors) {
        if (f.species >= species_.size()) {
          throw ValidationError("reaction " + std::to_string(r) + ": factor species out of range");
        }
        if (f.exponent < 0) {
          throw ValidationError("reaction " + std::to_string(r) + ": negative exponent");
        }
      }
      coeffs.push_back(c);
    }
    coefficients_.push_back(std::move(coeffs));
  }
}

double ReactionNetwork::propensity(std::size_t r, std::span<const Count> x) const {
  const Reaction& rx = reactions_[r];
  double total = 0.0;
  for (std::size_t k = 0; k < rx.propensity.size(); ++k) {
    double v = coefficients_[r][k];
    for (const Factor& f : rx.propensity[k].factors) {
      v *= factor_value(f, x[f.species]);
      if (v == 0.0) break;
    }
    total += v;
  }
  return total;
}

double ReactionNetwork::exit_rate(std::span<const Count> x) const {
  double total = 0.0;
  for (std::size_t r = 0; r < reactions_.size(); ++r) {
    bool moves = false;
    for (Count c : reactions_[r].change) moves = moves || c != 0;
    if (moves) total += propensity(r, x);
  }
  return total;
}

ReactionNetwork ReactionNetwork::with_parameters(
    const std::map<std::string, double>& overrides) const {
  auto params = parameters_;
  for (const auto& [k, v] : overrides) params[k] = v;
  return ReactionNetwork(species_, reactions_, std::move(params));
}

ClassPartition::ClassPartition(std::vector<Count> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ValidationError("empty weight vector");
  for (Count w : weights_) {
    if (w <= 0) throw ValidationError("weights must be positive integers");
  }
}

ClassIndex ClassPartition::class_of(std::span<const Count> x) const {
  ClassIndex c = 0;
  for (std::size_t s = 0; s < weights_.size(); ++s) c += weights_[s] * x[s];
  return c;
}

ClassIndex ClassPartition::shift_of(std::span<const Count> change) const {
  return class_of(change);
}

int max_class_jump(const ReactionNetwork& network, const ClassPartition& partition) {
  if (network.dimension() != partition.dimension()) {
    throw ValidationError("weight vector length " + std::to_string(partition.dimension()) +
                          " does not match species count " +
                          std::to_string(network.dimension()));
  }
  ClassIndex j = 0;
  for (const Reaction& rx : network.reactions()) {
    j = std::max(j, std::abs(partition.shift_of(rx.change)));
  }
  return static_cast<int>(j);
}

void EnumerationBudget::charge(std::uint64_t states) {
  std::uint64_t now = used_.fetch_add(states) + states;
  if (now > cap_) {
    throw BudgetExceeded("class enumeration exceeded state budget of " + std::to_string(cap_));
  }
}

namespace {

void enumerate_rec(std::size_t s, ClassIndex remaining, const std::vector<Count>& w, State& x,
                   const std::function<void(const State&)>& visit) {
  const std::size_t d = w.size();
  if (s + 1 == d) {
    if (remaining % w[s] == 0) {
      x[s] = remaining / w[s];
      visit(x);
    }
    return;
  }
  for (Count v = 0; v * w[s] <= remaining; ++v) {
    x[s] = v;
    enumerate_rec(s + 1, remaining - v * w[s], w, x, visit);
  }
  x[s] = 0;
}

}  // namespace

void for_each_in_class(ClassIndex l, const ClassPartition& partition,
                       const std::function<void(const State&)>& visit) {
  if (l < 0) return;
  State x(partition.dimension(), 0);
  enumerate_rec(0, l, partition.weights(), x, visit);
}

std::vector<State> enumerate_class(ClassIndex l, const ClassPartition& partition,
                                   EnumerationBudget* budget) {
  if (budget != nullptr) budget->charge(class_size(l, partition));
  std::vector<State> out;
  for_each_in_class(l, partition, [&](const State& x) { out.push_back(x); });
  return out;
}

std::uint64_t class_size(ClassIndex l, const ClassPartition& partition) {
  if (l < 0) return 0;
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(l) + 1, 0);
  ways[0] = 1;
  for (Count w : partition.weights()) {
    for (ClassIndex c = w; c <= l; ++c) ways[c] += ways[c - w];
  }
  return ways[l];
}

double aggregate_rate(std::span<const Count> x, ClassRange range, const ReactionNetwork& network,
                      const ClassPartition& partition) {
  const ClassIndex l = partition.class_of(x);
  if (range.kind == ClassRange::Kind::kUpTo && range.bound >= l) {
    throw ValidationError("aggregate_rate: up-to bound must be below the class of x");
  }
  if (range.kind == ClassRange::Kind::kFrom && range.bound <= l) {
    throw ValidationError("aggregate_rate: from bound must be above the class of x");
  }
  double total = 0.0;
  for (std::size_t r = 0; r < network.reactions().size(); ++r) {
    const ClassIndex dest = l + partition.shift_of(network.reactions()[r].change);
    const bool hit = range.kind == ClassRange::Kind::kUpTo ? dest <= range.bound
                                                           : dest >= range.bound;
    if (hit) total += network.propensity(r, x);
  }
  return total;
}

ValidationReport validate_network(const ReactionNetwork& network, const ClassPartition& partition,
                                  ClassIndex l_max) {
  ValidationReport report;
  max_class_jump(network, partition);
  const auto& rxs = network.reactions();
  for (std::size_t r = 0; r < rxs.size(); ++r) {
    bool moves = false;
    for (Count c : rxs[r].change) moves = moves || c != 0;
    bool zero = true;
    for (const Term& t : rxs[r].propensity) zero = zero && t.value == 0.0;
    if (!moves && !zero) {
      report.warnings.push_back("reaction " + std::to_string(r) +
                                " has zero net change and is ignored");
    }
  }
  for (ClassIndex l = 0; l <= l_max; ++l) {
    for_each_in_class(l, partition, [&](const State& x) {
      for (std::size_t r = 0; r < rxs.size(); ++r) {
        const double a = network.propensity(r, x);
        std::string kind;
        if (!std::isfinite(a)) {
          kind = "non-finite";
        } else if (a < 0) {
          kind = "negative-propensity";
        } else if (a > 0) {
          for (std::size_t s = 0; s < x.size(); ++s) {
            if (x[s] + rxs[r].change[s] < 0) kind = "boundary-leak";
          }
        }
        if (!kind.empty()) {
          report.ok = false;
          if (report.issues.size() < 64) report.issues.push_back({kind, r, x});
        }
      }
    });
  }
  return report;
}

void require_valid(const ValidationReport& report) {
  if (report.ok) return;
  const ValidationIssue& first = report.issues.front();
  throw ValidationError("network validation failed: " + first.kind + " in reaction " +
                        std::to_string(first.reaction) + " at state " +
                        format_state(first.state));
}

std::string format_state(std::span<const Count> x) {
  std::ostringstream os;
  os << '(';
  for (std::size_t s = 0; s < x.size(); ++s) os << (s ? "," : "") << x[s];
  os << ')';
  return os.str();
}

}  // namespace srnbound
