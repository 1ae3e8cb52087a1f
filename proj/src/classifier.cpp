#include "srnbound/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace srnbound {

namespace {

constexpr double kSignTolerance = 1e-9;

int sign_of(double v, double tol) {
  if (std::abs(v) <= tol) return 0;
  return v > 0 ? 1 : -1;
}

double max_abs_coefficient(const RateTail& t) {
  double m = 0;
  for (const auto& c : t.coefficients) {
    for (int d = 0; d <= t.degree; ++d) m = std::max(m, std::abs(c[d]));
  }
  return m;
}

// highest degree whose coefficient is nonzero in some residue
OffsetDegree leading_term(const RateTail& t, double tol) {
  OffsetDegree od;
  od.offset = t.offset;
  for (int d = t.degree; d >= 0; --d) {
    double largest = 0;
    for (const auto& c : t.coefficients) {
      if (std::abs(c[d]) > std::abs(largest)) largest = c[d];
    }
    if (std::abs(largest) > tol) {
      od.degree = d;
      od.leading = largest;
      break;
    }
  }
  return od;
}

// every residue eventually positive
bool eventually_positive(const RateTail& t, double tol) {
  for (const auto& c : t.coefficients) {
    bool positive = false;
    for (int d = t.degree; d >= 0; --d) {
      if (std::abs(c[d]) > tol) {
        positive = c[d] > 0;
        break;
      }
    }
    if (!positive) return false;
  }
  return true;
}

// possible behaviors of X as a bit set
enum : unsigned { kE = 1, kT = 2, kN = 4, kP = 8, kAll = 15 };

unsigned from_lower(ChainClass z) {
  switch (z) {
    case ChainClass::kExplosive: return kE;
    case ChainClass::kTransientNonexplosive: return kE | kT;
    case ChainClass::kNullRecurrent: return kE | kT | kN;
    default: return kAll;
  }
}

unsigned from_upper(ChainClass y) {
  switch (y) {
    case ChainClass::kTransientNonexplosive: return kT | kN | kP;
    case ChainClass::kNullRecurrent:
    case ChainClass::kRecurrentUnrefined: return kN | kP;
    case ChainClass::kPositiveRecurrent: return kP;
    default: return kAll;
  }
}

}  // namespace

DriftStats drift_stats(const BoundingChain& chain) {
  const int J = chain.max_jump();
  std::vector<const RateTail*> tails;
  DriftStats s;
  for (int k = -J; k <= J; ++k) {
    if (k == 0) continue;
    const RateTail* t = chain.tail(k);
    if (!t) throw ValidationError("chain has no tail for offset " + std::to_string(k));
    tails.push_back(t);
    s.scale = std::max(s.scale, max_abs_coefficient(*t));
  }
  const double tol = kSignTolerance * std::max(s.scale, 1e-300);
  s.valid = true;
  for (const RateTail* t : tails) {
    const OffsetDegree od = leading_term(*t, tol);
    s.degrees.push_back(od);
    if (od.degree > 1) s.valid = false;
    int& side = t->offset > 0 ? s.up_degree : s.down_degree;
    if (od.leading > 0) side = std::max(side, od.degree);
  }
  if (!s.valid) return s;
  for (const RateTail* t : tails) {
    const double k = t->offset;
    const double slope = t->mean_coefficient(1);
    const double intercept = t->mean_coefficient(0);
    if (!t->common_coefficient(0) || !t->common_coefficient(1)) s.periodic_intercepts = true;
    s.b1 += k * slope;
    s.b2 += k * intercept;
    s.b3 -= 0.5 * k * k * slope;
  }
  s.b3 += s.b2;
  return s;
}

std::string to_string(ChainClass c) {
  switch (c) {
    case ChainClass::kExplosive: return "explosive";
    case ChainClass::kTransientNonexplosive: return "transient-nonexplosive";
    case ChainClass::kNullRecurrent: return "null-recurrent";
    case ChainClass::kPositiveRecurrent: return "positive-recurrent";
    case ChainClass::kRecurrentUnrefined: return "recurrent-unrefined";
    case ChainClass::kUnknown: return "unknown";
  }
  return "unknown";
}

ChainClass parse_chain_class(const std::string& s) {
  for (ChainClass c : {ChainClass::kExplosive, ChainClass::kTransientNonexplosive,
                       ChainClass::kNullRecurrent, ChainClass::kPositiveRecurrent,
                       ChainClass::kRecurrentUnrefined, ChainClass::kUnknown}) {
    if (to_string(c) == s) return c;
  }
  throw ValidationError("unknown chain class '" + s + "'");
}

Classification classify(const DriftStats& s) {
  if (!s.valid) {
    if (s.up_degree >= 2 && s.up_degree > s.down_degree) {
      return {ChainClass::kExplosive, "superlinear up-drift: up degree " +
                                          std::to_string(s.up_degree) + " > down degree " +
                                          std::to_string(s.down_degree)};
    }
    return {ChainClass::kUnknown, "non-affine tails outside the explosion rule (up degree " +
                                      std::to_string(s.up_degree) + ", down degree " +
                                      std::to_string(s.down_degree) + ")"};
  }
  const double tol = kSignTolerance * std::max(s.scale, 1e-300);
  const int s1 = sign_of(s.b1, tol), s2 = sign_of(s.b2, tol), s3 = sign_of(s.b3, tol);
  if (s1 > 0) return {ChainClass::kTransientNonexplosive, "B1 > 0"};
  if (s1 < 0) {
    return {ChainClass::kPositiveRecurrent, "B1 < 0 (coarser upper-process label: recurrent)"};
  }
  if (s3 > 0) return {ChainClass::kTransientNonexplosive, "B1 = 0, B3 > 0"};
  if (s2 >= 0) return {ChainClass::kNullRecurrent, "B1 = 0, B2 >= 0, B3 <= 0"};
  return {ChainClass::kPositiveRecurrent, "B1 = 0, B2 < 0"};
}

std::string to_string(XBehavior b) {
  switch (b) {
    case XBehavior::kExplosive: return "explosive";
    case XBehavior::kTransientMaybeExplosive: return "transient (explosive or not)";
    case XBehavior::kTransientNonexplosive: return "transient and non-explosive";
    case XBehavior::kTransientOrNullRecurrent: return "transient or null-recurrent";
    case XBehavior::kNonexplosive: return "non-explosive";
    case XBehavior::kNullRecurrent: return "null-recurrent";
    case XBehavior::kRecurrent: return "recurrent";
    case XBehavior::kPositiveRecurrent: return "positive recurrent";
    case XBehavior::kNoInformation: return "no information";
  }
  return "no information";
}

std::vector<ClassIndex> empty_classes(const ClassPartition& partition, ClassIndex horizon) {
  std::vector<ClassIndex> out;
  for (ClassIndex l = 0; l <= horizon; ++l) {
    if (class_size(l, partition) == 0) out.push_back(l);
  }
  return out;
}

IrreducibilityReport check_irreducible(const BoundingChain& chain, ClassIndex horizon,
                                       const std::vector<ClassIndex>& ignored) {
  if (horizon < 0 || horizon > chain.l_total()) {
    throw ValidationError("irreducibility horizon must lie in [0, " +
                          std::to_string(chain.l_total()) + "]");
  }
  const int J = chain.max_jump();
  const auto n = static_cast<std::size_t>(horizon + 1);
  std::vector<char> skip(n, 0);
  for (ClassIndex l : ignored) {
    if (l >= 0 && l <= horizon) skip[static_cast<std::size_t>(l)] = 1;
  }
  if (skip[0]) throw ValidationError("class 0 cannot be ignored");
  auto search = [&](bool forward) {
    std::vector<char> seen(skip);
    std::deque<ClassIndex> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
      const ClassIndex l = queue.front();
      queue.pop_front();
      for (int k = -J; k <= J; ++k) {
        const ClassIndex m = l + k;
        if (k == 0 || m < 0 || m > horizon || seen[m]) continue;
        const double r = forward ? chain.rate(l, k) : chain.rate(m, -k);
        if (r > 0) {
          seen[m] = 1;
          queue.push_back(m);
        }
      }
    }
    return seen;
  };
  IrreducibilityReport rep;
  const auto reach = search(true);
  if (std::find(reach.begin(), reach.end(), 0) != reach.end()) {
    for (std::size_t l = 0; l < n; ++l) {
      if (reach[l] && !skip[l]) rep.witness.push_back(static_cast<ClassIndex>(l));
    }
    rep.reason = "classes reachable from 0 form a closed proper subset";
    return rep;
  }
  const auto back = search(false);
  if (std::find(back.begin(), back.end(), 0) != back.end()) {
    for (std::size_t l = 0; l < n; ++l) {
      if (!back[l]) rep.witness.push_back(static_cast<ClassIndex>(l));
    }
    rep.reason = "some classes cannot return to 0";
    return rep;
  }
  if (chain.tails().empty()) {
    rep.reason = "chain has no tails beyond the exact range";
    return rep;
  }
  double scale = 0;
  for (const RateTail& t : chain.tails()) scale = std::max(scale, max_abs_coefficient(t));
  const double tol = kSignTolerance * std::max(scale, 1e-300);
  bool up = false, down = false;
  for (const RateTail& t : chain.tails()) {
    if (!eventually_positive(t, tol)) continue;
    (t.offset > 0 ? up : down) = true;
  }
  if (!up || !down) {
    rep.reason = up ? "no eventually positive down rate" : "no eventually positive up rate";
    return rep;
  }
  rep.attested = true;
  rep.reason = "strongly connected on [0, " + std::to_string(horizon) + "] with positive tails";
  return rep;
}

InconsistentClassesError::InconsistentClassesError(ChainClass lower, ChainClass upper)
    : ConsistencyError("impossible combination: lower " + to_string(lower) + ", upper " +
                       to_string(upper)),
      lower_(lower),
      upper_(upper) {}

XBehavior combine(ChainClass z, ChainClass y) {
  switch (from_lower(z) & from_upper(y)) {
    case 0: throw InconsistentClassesError(z, y);
    case kE: return XBehavior::kExplosive;
    case kE | kT: return XBehavior::kTransientMaybeExplosive;
    case kT: return XBehavior::kTransientNonexplosive;
    case kE | kT | kN: return XBehavior::kTransientOrNullRecurrent;
    case kT | kN:
    case kT | kN | kP: return XBehavior::kNonexplosive;
    case kN: return XBehavior::kNullRecurrent;
    case kN | kP: return XBehavior::kRecurrent;
    case kP: return XBehavior::kPositiveRecurrent;
    default: return XBehavior::kNoInformation;
  }
}

XBehavior combine(const Classification& z, const IrreducibilityReport& z_irreducible,
                  const Classification& y, const IrreducibilityReport& y_irreducible) {
  if (!z_irreducible.attested || !y_irreducible.attested) {
    throw ValidationError("refusing to combine: " +
                          std::string(!z_irreducible.attested ? "lower" : "upper") +
                          " chain not attested irreducible");
  }
  return combine(z.kind, y.kind);
}

}  // namespace srnbound
