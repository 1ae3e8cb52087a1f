#include "srnbound/cme.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include <boost/numeric/odeint.hpp>

#include "srnbound/errors.hpp"
#include "srnbound/rng.hpp"

namespace srnbound {

namespace odeint = boost::numeric::odeint;

namespace {

using Vec = std::vector<double>;

// local tolerance relative to the global budget
constexpr double kLocalFraction = 1e-2;
// per-step occupancy tolerance, in flux units, relative to the step's share of [0, T]
constexpr double kQuadratureTolerance = 1e-10;
constexpr int kMaxSimpsonPanels = 1 << 12;

double sum(const Vec& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s);
}

struct StateHash {
  std::size_t operator()(const State& x) const {
    std::uint64_t h = 0x243F6A8885A308D3ULL;
    for (Count c : x) h = mix64(h ^ static_cast<std::uint64_t>(c));
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

void SparseGenerator::apply(const Vec& p, Vec& dp) const {
  for (std::size_t m = 0; m < size; ++m) dp[m] = -exit[m] * p[m];
  for (std::size_t l = 0; l < size; ++l) {
    const double pl = p[l];
    if (pl == 0.0) continue;
    for (std::size_t e = row_start[l]; e < row_start[l + 1]; ++e) dp[target[e]] += pl * rate[e];
  }
}

SparseGenerator chain_generator(const BoundingChain& chain, ClassIndex M) {
  if (M < 0 || M > chain.l_total()) {
    throw ValidationError("truncation level M=" + std::to_string(M) + " outside [0, " +
                          std::to_string(chain.l_total()) + "]");
  }
  SparseGenerator q;
  q.size = static_cast<std::size_t>(M + 1);
  q.exit.assign(q.size, 0.0);
  q.leak.assign(q.size, 0.0);
  q.row_start.push_back(0);
  const int J = chain.max_jump();
  for (ClassIndex l = 0; l <= M; ++l) {
    for (int k = -J; k <= J; ++k) {
      if (k == 0 || l + k < 0) continue;
      const double v = chain.rate(l, k);
      if (v == 0.0) continue;
      q.exit[l] += v;
      if (l + k <= M) {
        q.target.push_back(static_cast<std::uint32_t>(l + k));
        q.rate.push_back(v);
      } else {
        q.leak[l] += v;
      }
    }
    q.row_start.push_back(q.target.size());
  }
  return q;
}

std::size_t NetworkGenerator::index_of(const State& x) const {
  auto it = std::lower_bound(lookup.begin(), lookup.end(), x,
                             [&](std::size_t i, const State& y) { return states[i] < y; });
  if (it == lookup.end() || states[*it] != x) {
    throw ValidationError("state " + format_state(x) + " is outside the truncation");
  }
  return *it;
}

NetworkGenerator network_generator(const ReactionNetwork& network, const ClassPartition& partition,
                                   ClassIndex N, std::uint64_t max_states) {
  if (network.dimension() != partition.dimension()) {
    throw ValidationError("weights do not match the network dimension");
  }
  NetworkGenerator g;
  EnumerationBudget budget(max_states);
  for (ClassIndex l = 0; l <= N; ++l) {
    for (State& x : enumerate_class(l, partition, &budget)) {
      g.states.push_back(std::move(x));
      g.classes.push_back(l);
    }
  }
  const std::size_t n = g.states.size();
  g.lookup.resize(n);
  std::iota(g.lookup.begin(), g.lookup.end(), std::size_t{0});
  std::sort(g.lookup.begin(), g.lookup.end(),
            [&](std::size_t a, std::size_t b) { return g.states[a] < g.states[b]; });

  SparseGenerator& q = g.generator;
  q.size = n;
  q.exit.assign(n, 0.0);
  q.leak.assign(n, 0.0);
  q.row_start.push_back(0);
  const auto& rx = network.reactions();
  for (std::size_t i = 0; i < n; ++i) {
    const State& x = g.states[i];
    std::map<std::size_t, double> row;
    for (std::size_t r = 0; r < rx.size(); ++r) {
      const auto& nu = rx[r].change;
      if (std::all_of(nu.begin(), nu.end(), [](Count c) { return c == 0; })) continue;
      const double a = network.propensity(r, x);
      if (a <= 0.0) continue;
      State y = x;
      for (std::size_t s = 0; s < y.size(); ++s) y[s] += nu[s];
      if (std::any_of(y.begin(), y.end(), [](Count c) { return c < 0; })) {
        throw ValidationError("reaction '" + rx[r].name + "' leaves the state space at " +
                              format_state(x));
      }
      q.exit[i] += a;
      if (partition.class_of(y) <= N) {
        row[g.index_of(y)] += a;
      } else {
        q.leak[i] += a;
      }
    }
    for (const auto& [j, v] : row) {
      q.target.push_back(static_cast<std::uint32_t>(j));
      q.rate.push_back(v);
    }
    q.row_start.push_back(q.target.size());
  }
  return g;
}

double CmeSolution::mass(std::size_t k) const { return sum(p.at(k)); }

double CmeSolution::loss(std::size_t k) const { return sum(initial) - mass(k); }

std::vector<double> delta(ClassIndex l, ClassIndex M) {
  if (l < 0 || l > M) throw ValidationError("point mass outside [0, M]");
  std::vector<double> p(static_cast<std::size_t>(M + 1), 0.0);
  p[static_cast<std::size_t>(l)] = 1.0;
  return p;
}

CmeSolution solve_cme(const SparseGenerator& q, const std::vector<double>& p0,
                      std::vector<double> times, const SolveOptions& options) {
  if (p0.size() != q.size) throw ValidationError("p0 does not match the generator size");
  for (double v : p0) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("p0 must be nonnegative");
  }
  if (sum(p0) > 1.0 + 1e-12) throw ValidationError("p0 has mass above 1");
  if (times.empty()) throw ValidationError("no output times");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || (k > 0 && times[k] < times[k - 1])) {
      throw ValidationError("output times must be nonnegative and sorted");
    }
  }
  if (!(options.budget > 0.0)) throw ValidationError("error budget must be positive");

  CmeSolution sol;
  sol.initial = p0;
  sol.times = times;
  sol.budget = options.budget;
  const std::size_t n = q.size;
  const double t_end = times.back();
  Vec occupancy(n, 0.0);

  std::size_t next = 0;
  auto record = [&](const Vec& p, const Vec& occ) {
    sol.p.push_back(p);
    sol.occupancy.push_back(occ);
    ++next;
  };
  while (next < times.size() && times[next] == 0.0) record(p0, occupancy);
  if (next == times.size()) return sol;

  const double max_exit = q.exit.empty() ? 0.0 : *std::max_element(q.exit.begin(), q.exit.end());
  if (max_exit == 0.0) {
    // nothing moves
    while (next < times.size()) {
      Vec occ(n);
      for (std::size_t l = 0; l < n; ++l) occ[l] = p0[l] * times[next];
      record(p0, occ);
    }
    return sol;
  }

  const double tol = options.budget * kLocalFraction;
  auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<Vec>());
  auto rhs = [&q](const Vec& x, Vec& dxdt, double) { q.apply(x, dxdt); };
  const double dt0 = std::min(t_end, 0.1 / max_exit);
  stepper.initialize(p0, 0.0, dt0);

  Vec pa(n), pb(n), pm(n), odd(n), even(n), ends(n), s_old(n), s_new(n);
  // Simpson on [a, b] inside the current step; adds the integral to acc
  auto simpson = [&](double a, double b, const Vec& fa, const Vec& fb, Vec& acc) {
    if (b <= a) return;
    const double quad_tol = kQuadratureTolerance * (b - a) / t_end;
    for (std::size_t l = 0; l < n; ++l) {
      ends[l] = fa[l] + fb[l];
      even[l] = 0.0;
    }
    stepper.calc_state(0.5 * (a + b), pm);
    odd = pm;
    int panels = 2;
    for (std::size_t l = 0; l < n; ++l) s_old[l] = (b - a) / 6.0 * (ends[l] + 4 * odd[l]);
    for (;;) {
      panels *= 2;
      const double d = (b - a) / panels;
      for (std::size_t l = 0; l < n; ++l) {
        even[l] += odd[l];
        odd[l] = 0.0;
      }
      for (int j = 1; j < panels; j += 2) {
        stepper.calc_state(a + j * d, pm);
        for (std::size_t l = 0; l < n; ++l) odd[l] += pm[l];
      }
      long double change = 0;
      for (std::size_t l = 0; l < n; ++l) {
        s_new[l] = d / 3.0 * (ends[l] + 4 * odd[l] + 2 * even[l]);
        change += std::abs(s_new[l] - s_old[l]) * q.exit[l];
      }
      s_old.swap(s_new);
      if (change <= quad_tol || panels >= kMaxSimpsonPanels) break;
    }
    for (std::size_t l = 0; l < n; ++l) acc[l] += s_old[l];
  };

  Vec p_prev = p0;
  try {
    while (next < times.size()) {
      if (sol.steps >= options.max_steps) {
        throw StiffnessError("step cap of " + std::to_string(options.max_steps) +
                             " reached at t=" + std::to_string(stepper.current_time()));
      }
      const auto [t0, t1] = stepper.do_step(rhs);
      ++sol.steps;
      if (t1 - t0 < 1e-14 * std::max(1.0, t_end)) {
        throw StiffnessError("step size underflow at t=" + std::to_string(t0));
      }
      const double upper = std::min(t1, t_end);
      stepper.calc_state(upper, pb);
      double a = t0;
      Vec fa = p_prev;
      while (next < times.size() && times[next] <= upper) {
        const double tk = times[next];
        stepper.calc_state(tk, pa);
        simpson(a, tk, fa, pa, occupancy);
        a = tk;
        fa = pa;
        record(pa, occupancy);
      }
      simpson(a, upper, fa, pb, occupancy);
      p_prev = pb;
    }
  } catch (const odeint::odeint_error& e) {
    throw StiffnessError(std::string("integrator failed at t=") +
                         std::to_string(stepper.current_time()) + ": " + e.what());
  }

  long double leaked = 0;
  for (std::size_t l = 0; l < n; ++l) leaked += q.leak[l] * sol.occupancy.back()[l];
  sol.mass_defect = std::abs(sol.loss(times.size() - 1) - static_cast<double>(leaked));
  return sol;
}

namespace {

// upward rate from l into (N, M]
double rate_across(const BoundingChain& chain, ClassIndex l, ClassIndex N, ClassIndex M) {
  double r = 0;
  for (int k = 1; k <= chain.max_jump(); ++k) {
    if (l + k > N && l + k <= M) r += chain.rate(l, k);
  }
  return r;
}

struct CertificateContext {
  const CmeSolution& sol;
  const BoundingChain& chain;
  ClassIndex M;
  std::vector<double> suffix;  // suffix[N] = p0 mass above N

  CertificateContext(const CmeSolution& s, const BoundingChain& c) : sol(s), chain(c) {
    M = static_cast<ClassIndex>(s.initial.size()) - 1;
    suffix.assign(s.initial.size() + 1, 0.0);
    long double acc = 0;
    for (ClassIndex l = M; l >= 0; --l) {
      suffix[static_cast<std::size_t>(l)] = static_cast<double>(acc);
      acc += s.initial[static_cast<std::size_t>(l)];
    }
  }

  double integral(ClassIndex N, std::size_t k) const {
    if (N >= M) return 0.0;
    long double f = 0;
    for (ClassIndex l = std::max<ClassIndex>(0, N - chain.max_jump() + 1); l <= N; ++l) {
      f += sol.occupancy[k][static_cast<std::size_t>(l)] * rate_across(chain, l, N, M);
    }
    return static_cast<double>(f);
  }

  TruncationCertificate at(ClassIndex N, std::size_t k) const {
    if (N < 0 || N > M) throw ValidationError("N must lie in [0, M]");
    TruncationCertificate c;
    c.N = N;
    c.M = M;
    c.t_final = sol.times.at(k);
    c.retained_loss = std::max(0.0, sol.loss(k));
    c.initial_above = suffix[static_cast<std::size_t>(N)];
    c.exit_integral = std::max(0.0, integral(N, k));
    c.solver_budget = sol.budget;
    c.bound = c.retained_loss + c.initial_above + c.exit_integral + c.solver_budget;
    return c;
  }
};

}  // namespace

ExitFlux exit_flux(const CmeSolution& solution, const BoundingChain& chain, ClassIndex N) {
  const ClassIndex M = static_cast<ClassIndex>(solution.initial.size()) - 1;
  ExitFlux out;
  for (std::size_t k = 0; k < solution.times.size(); ++k) {
    long double flux = 0, integral = 0;
    if (N < M) {
      for (ClassIndex l = std::max<ClassIndex>(0, N - chain.max_jump() + 1); l <= N; ++l) {
        const double r = rate_across(chain, l, N, M);
        flux += solution.p[k][static_cast<std::size_t>(l)] * r;
        integral += solution.occupancy[k][static_cast<std::size_t>(l)] * r;
      }
    }
    out.flux.push_back(static_cast<double>(flux));
    out.integral.push_back(static_cast<double>(integral));
  }
  return out;
}

TruncationCertificate certificate_from(const CmeSolution& solution, const BoundingChain& chain,
                                       ClassIndex N, std::size_t k) {
  return CertificateContext(solution, chain).at(N, k);
}

TruncationCertificate truncation_certificate(const BoundingChain& chain,
                                             const std::vector<double>& p0, ClassIndex N,
                                             ClassIndex M, double t_final,
                                             const SolveOptions& options) {
  const CmeSolution s = solve_cme(chain_generator(chain, M), p0, {0.0, t_final}, options);
  return certificate_from(s, chain, N, 1);
}

ClassIndex min_truncation(const CmeSolution& solution, const BoundingChain& chain, double epsilon,
                          std::size_t k) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  const CertificateContext ctx(solution, chain);
  const double loss = solution.loss(k);
  if (!(loss < epsilon)) {
    throw InfeasibleError("increase M: mass lost beyond M is " + std::to_string(loss) +
                          ", not below epsilon=" + std::to_string(epsilon));
  }
  for (ClassIndex N = 0; N <= ctx.M; ++N) {
    if (ctx.at(N, k).clipped() <= epsilon) return N;
  }
  throw InfeasibleError("no N in [0, " + std::to_string(ctx.M) +
                        "] meets epsilon=" + std::to_string(epsilon));
}

ClassIndex min_truncation(const BoundingChain& chain, const std::vector<double>& p0, ClassIndex M,
                          double t_final, double epsilon, const SolveOptions& options) {
  const CmeSolution s = solve_cme(chain_generator(chain, M), p0, {0.0, t_final}, options);
  return min_truncation(s, chain, epsilon, 1);
}

std::vector<std::vector<double>> truncation_heatmap(const CmeSolution& solution,
                                                    const BoundingChain& chain,
                                                    const std::vector<ClassIndex>& levels) {
  const CertificateContext ctx(solution, chain);
  std::vector<std::vector<double>> out(solution.times.size());
  for (std::size_t k = 0; k < solution.times.size(); ++k) {
    for (ClassIndex N : levels) out[k].push_back(ctx.at(N, k).clipped());
  }
  return out;
}

ClassCdf chain_cdf(const CmeSolution& solution) {
  ClassCdf c;
  c.times = solution.times;
  c.budget = solution.budget;
  for (std::size_t k = 0; k < solution.times.size(); ++k) {
    std::vector<double> cdf;
    long double acc = 0;
    for (double v : solution.p[k]) {
      acc += v;
      cdf.push_back(static_cast<double>(acc));
    }
    c.cdf.push_back(std::move(cdf));
    c.loss.push_back(std::max(0.0, solution.loss(k)));
  }
  return c;
}

ClassCdf network_class_cdf(const CmeSolution& solution, const NetworkGenerator& generator,
                           ClassIndex max_class) {
  ClassCdf c;
  c.times = solution.times;
  c.budget = solution.budget;
  for (std::size_t k = 0; k < solution.times.size(); ++k) {
    std::vector<long double> by_class(static_cast<std::size_t>(max_class + 1), 0.0L);
    for (std::size_t i = 0; i < generator.states.size(); ++i) {
      const ClassIndex l = generator.classes[i];
      if (l <= max_class) by_class[static_cast<std::size_t>(l)] += solution.p[k][i];
    }
    std::vector<double> cdf;
    long double acc = 0;
    for (long double v : by_class) {
      acc += v;
      cdf.push_back(static_cast<double>(acc));
    }
    c.cdf.push_back(std::move(cdf));
    c.loss.push_back(std::max(0.0, solution.loss(k)));
  }
  return c;
}

DominanceReport cdf_dominance(const ClassCdf& upper, const std::vector<ClassCdf>& family,
                              ClassIndex levels) {
  DominanceReport r;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const ClassCdf& member = family[i];
    if (member.times != upper.times) throw ValidationError("dominance needs shared output times");
    for (std::size_t k = 0; k < upper.times.size(); ++k) {
      const double slack = upper.loss[k] + member.loss[k] + upper.budget + member.budget;
      const auto top = std::min<std::size_t>(
          {static_cast<std::size_t>(levels) + 1, upper.cdf[k].size(), member.cdf[k].size()});
      for (std::size_t l = 0; l < top; ++l) {
        const double v = upper.cdf[k][l] - member.cdf[k][l] - slack;
        ++r.checks;
        if (v > r.max_violation) {
          r.max_violation = v;
          r.worst_member = i;
          r.worst_t = upper.times[k];
          r.worst_l = static_cast<ClassIndex>(l);
        }
      }
    }
  }
  r.holds = r.max_violation <= 0.0;
  return r;
}

}  // namespace srnbound
