#pragma once

#include <string>
#include <vector>

#include "srnbound/bounds.hpp"
#include "srnbound/errors.hpp"

namespace srnbound {

/** Per-offset tail summary used by the classifier. */
struct OffsetDegree {
  int offset = 0;
  /** Highest degree with a nonzero coefficient, -1 for a vanishing tail. */
  int degree = -1;
  double leading = 0.0;
};

/**
 * Drift statistics of a banded chain with affine tails:
 * B1 = sum_k k a_k, B2 = sum_k k b_k, B3 = B2 - 1/2 sum_k k^2 a_k
 * for rates a_k l + b_k at offset k.
 */
struct DriftStats {
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
  bool valid = false;
  /** True when some intercept depends on l mod period; b2 is then the residue mean. */
  bool periodic_intercepts = false;
  std::vector<OffsetDegree> degrees;
  int up_degree = -1;
  int down_degree = -1;
  /** Magnitude of the largest tail coefficient; sign tests are relative to it. */
  double scale = 0.0;
};

/** Requires a tail for every offset of the band; throws ValidationError otherwise. */
DriftStats drift_stats(const BoundingChain& chain);

enum class ChainClass {
  kExplosive,
  kTransientNonexplosive,
  kNullRecurrent,
  kPositiveRecurrent,
  kRecurrentUnrefined,
  kUnknown,
};

std::string to_string(ChainClass c);
ChainClass parse_chain_class(const std::string& s);

struct Classification {
  ChainClass kind = ChainClass::kUnknown;
  std::string provenance;
};

Classification classify(const DriftStats& stats);

enum class XBehavior {
  kExplosive,
  kTransientMaybeExplosive,
  kTransientNonexplosive,
  kTransientOrNullRecurrent,
  kNonexplosive,
  kNullRecurrent,
  kRecurrent,
  kPositiveRecurrent,
  kNoInformation,
};

std::string to_string(XBehavior b);

struct IrreducibilityReport {
  bool attested = false;
  /** Closed set of classes that cannot be left, or cannot reach 0, when not attested. */
  std::vector<ClassIndex> witness;
  std::string reason;
};

/**
 * Strong connectivity of the nonzero-rate graph on [0, horizon], plus
 * eventual positivity of at least one up and one down tail. Classes in
 * `ignored` (e.g. empty classes of the partition) are left out of the graph.
 */
IrreducibilityReport check_irreducible(const BoundingChain& chain, ClassIndex horizon,
                                       const std::vector<ClassIndex>& ignored = {});

/** Classes in [0, horizon] with no state; these are never visited. */
std::vector<ClassIndex> empty_classes(const ClassPartition& partition, ClassIndex horizon);

/** Lower/upper classes that cannot occur together. */
class InconsistentClassesError : public ConsistencyError {
 public:
  InconsistentClassesError(ChainClass lower, ChainClass upper);
  ChainClass lower() const { return lower_; }
  ChainClass upper() const { return upper_; }

 private:
  ChainClass lower_;
  ChainClass upper_;
};

/** Behavior of X given the lower class z and upper class y. */
XBehavior combine(ChainClass z, ChainClass y);

/** As above, but refuses (ValidationError) unless both chains were attested irreducible. */
XBehavior combine(const Classification& z, const IrreducibilityReport& z_irreducible,
                  const Classification& y, const IrreducibilityReport& y_irreducible);

}  // namespace srnbound
