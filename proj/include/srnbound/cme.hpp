#pragma once

#include <cstdint>
#include <vector>

#include "srnbound/bounds.hpp"
#include "srnbound/network.hpp"

namespace srnbound {

/**
 * Generator restricted to a finite index set. Transitions leaving the set are
 * absorbed: they stay in `exit` but have no off-diagonal entry, and their
 * total per row is `leak`.
 */
struct SparseGenerator {
  std::size_t size = 0;
  std::vector<double> exit;
  std::vector<double> leak;
  std::vector<std::size_t> row_start;  // size + 1 entries
  std::vector<std::uint32_t> target;
  std::vector<double> rate;

  /** dp = p Q. */
  void apply(const std::vector<double>& p, std::vector<double>& dp) const;
};

/** Chain restricted to classes [0, M]. */
SparseGenerator chain_generator(const BoundingChain& chain, ClassIndex M);

struct NetworkGenerator {
  SparseGenerator generator;
  /** Class-major, lexicographic within a class. */
  std::vector<State> states;
  std::vector<ClassIndex> classes;
  /** Indices into states, sorted lexicographically by state. */
  std::vector<std::size_t> lookup;
  std::size_t index_of(const State& x) const;
};

/** Network restricted to {x : cl(x) <= N}; at most max_states states. */
NetworkGenerator network_generator(const ReactionNetwork& network, const ClassPartition& partition,
                                   ClassIndex N, std::uint64_t max_states = 1'000'000);

struct SolveOptions {
  /** Global error budget; also the local tolerance scale. */
  double budget = 1e-8;
  std::uint64_t max_steps = 50'000'000;
};

/** Solution at the requested output times, with occupancy integrals from 0. */
struct CmeSolution {
  std::vector<double> initial;
  std::vector<double> times;
  std::vector<std::vector<double>> p;
  std::vector<std::vector<double>> occupancy;
  double budget = 0.0;
  std::uint64_t steps = 0;
  /** |mass lost - integrated leak| at the final time. */
  double mass_defect = 0.0;

  double mass(std::size_t k) const;
  /** Initial mass minus the mass at output k. */
  double loss(std::size_t k) const;
};

/**
 * Adaptive Dormand-Prince integration of dp/dt = p Q. Occupancy integrals
 * use composite Simpson on the dense output of each step, doubled until
 * converged. Throws StiffnessError if the step size collapses.
 */
CmeSolution solve_cme(const SparseGenerator& q, const std::vector<double>& p0,
                      std::vector<double> times, const SolveOptions& options = {});

/** p0 as a point mass at l on [0, M]. */
std::vector<double> delta(ClassIndex l, ClassIndex M);

/** Flux from classes <= N to classes in (N, M], and its time integral, per output time. */
struct ExitFlux {
  std::vector<double> flux;
  std::vector<double> integral;
};
ExitFlux exit_flux(const CmeSolution& solution, const BoundingChain& chain, ClassIndex N);

struct TruncationCertificate {
  ClassIndex N = 0;
  ClassIndex M = 0;
  double t_final = 0.0;
  double retained_loss = 0.0;   // 1 - p_{0:M}(T)
  double initial_above = 0.0;   // p_{N+1:M}(0)
  double exit_integral = 0.0;   // F
  double solver_budget = 0.0;
  double bound = 0.0;
  double clipped() const { return bound < 1.0 ? bound : 1.0; }
};

/** Certificate for level N from a chain solution on [0, M] at output k. */
TruncationCertificate certificate_from(const CmeSolution& solution, const BoundingChain& chain,
                                       ClassIndex N, std::size_t k);

TruncationCertificate truncation_certificate(const BoundingChain& chain,
                                             const std::vector<double>& p0, ClassIndex N,
                                             ClassIndex M, double t_final,
                                             const SolveOptions& options = {});

/**
 * Smallest N in [0, M] with clipped E^T(N) <= epsilon at output k. Throws
 * InfeasibleError when the retained-mass loss is not below epsilon or no N
 * qualifies.
 */
ClassIndex min_truncation(const CmeSolution& solution, const BoundingChain& chain, double epsilon,
                          std::size_t k);

ClassIndex min_truncation(const BoundingChain& chain, const std::vector<double>& p0, ClassIndex M,
                          double t_final, double epsilon, const SolveOptions& options = {});

/** Clipped E^T(N) for every output time and every N in `levels`. */
std::vector<std::vector<double>> truncation_heatmap(const CmeSolution& solution,
                                                    const BoundingChain& chain,
                                                    const std::vector<ClassIndex>& levels);

/** CDF over classes, cdf[k][l] = P(class <= l) at output k, with its truncation loss. */
struct ClassCdf {
  std::vector<double> times;
  std::vector<std::vector<double>> cdf;
  std::vector<double> loss;
  double budget = 0.0;
};

ClassCdf chain_cdf(const CmeSolution& solution);
ClassCdf network_class_cdf(const CmeSolution& solution, const NetworkGenerator& generator,
                           ClassIndex max_class);

struct DominanceReport {
  bool holds = true;
  /** Largest upper - member - slack; nonpositive when the dominance holds. */
  double max_violation = -1e300;
  std::size_t worst_member = 0;
  double worst_t = 0.0;
  ClassIndex worst_l = 0;
  std::uint64_t checks = 0;
};

/**
 * Checks upper.cdf <= member.cdf + slack for every member, output time and
 * class in [0, levels]; slack is both truncation losses plus both budgets.
 */
DominanceReport cdf_dominance(const ClassCdf& upper, const std::vector<ClassCdf>& family,
                              ClassIndex levels);

}  // namespace srnbound
