#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace srnbound {

/** Base class for all library errors. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** Malformed input: bad network, bad weights, bad CSV, violated precondition. */
class ValidationError : public Error {
 public:
  using Error::Error;
};

/** A requested computation has no admissible answer (e.g. no truncation level). */
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/** pi_bar inputs violate prefix domination; k is the first offending index. */
class PrefixDominationError : public ValidationError {
 public:
  PrefixDominationError(const std::string& what, std::int64_t k) : ValidationError(what), k_(k) {}
  std::int64_t index() const { return k_; }

 private:
  std::int64_t k_;
};

/** An internal invariant failed (marginals, ordering, mass accounting). */
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/** A class enumeration exceeded the configured state budget. */
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/** Rates did not settle into a recognizable polynomial tail. */
class StabilizationError : public Error {
 public:
  StabilizationError(const std::string& what, int offset, int detected_degree)
      : Error(what), offset_(offset), detected_degree_(detected_degree) {}
  int offset() const { return offset_; }
  /** Smallest degree for which a fit was locally consistent, or -1. */
  int detected_degree() const { return detected_degree_; }

 private:
  int offset_;
  int detected_degree_;
};

/** The ODE integrator could not make progress. */
class StiffnessError : public Error {
 public:
  using Error::Error;
};

}  // namespace srnbound
