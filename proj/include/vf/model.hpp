#pragma once

// The two-population Poisson point process prior on variant frequency pairs
// and its predictive distributions for a follow-up study.
//
// Rate measure on (0,1)^2:
//
//   nu(theta) = alpha * (t1 + t2^(s2/s1))^(-s1) / (t1 + t2)^(p1 + p2)
//             * Beta(t1; p1, c1) * Beta(t2; p2, c2)
//
// with s = rate, p = correlation and c = concentration parameters. Given a
// pilot of N = (N1, N2) samples, the number of new variants seen exactly
// k = (k1, k2) times in M = (M1, M2) follow-up samples is Poisson; its mean
// has a beta-function prefactor times a 2-D expectation that is evaluated
// with tanh-sinh quadrature.

#include <array>
#include <compare>
#include <vector>

#include "vf/numerics.hpp"
#include "vf/parallel.hpp"

namespace vf {

struct Hyperparams {
  double alpha = 1.0;
  double sigma1 = 0.5;
  double sigma2 = 0.5;
  double phi1 = 1.0;
  double phi2 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;

  /// Throws InvalidArgument unless alpha, phi, c > 0 and sigma in (0,1).
  void validate() const;
  /// Parameters with the population labels exchanged.
  Hyperparams swapped() const;
  std::array<double, 7> as_array() const { return {alpha, sigma1, sigma2, phi1, phi2, c1, c2}; }
  static Hyperparams from_array(const std::array<double, 7>& v);
};

/// Per-population nonnegative counts (pilot sizes, follow-up sizes, k).
struct CountPair {
  long p1 = 0;
  long p2 = 0;

  long operator[](int pop) const { return pop == 0 ? p1 : p2; }
  long total() const { return p1 + p2; }
  CountPair swapped() const { return {p2, p1}; }
  friend auto operator<=>(const CountPair&, const CountPair&) = default;
};

struct PredictiveMean {
  double lambda = 0.0;
  double quad_error = 0.0;
};

struct Point2 {
  double t1;
  double t2;
};

/// nu(theta). Throws DomainError unless theta lies strictly inside (0,1)^2.
double rate_density(Point2 theta, const Hyperparams& phi);

/// ln nu(theta) from the logarithms of theta and 1 - theta, so callers that
/// already hold them (quadrature nodes, samplers) keep full precision.
double log_rate_density(double log_t1, double log_t2, double log1m_t1, double log1m_t2,
                        const Hyperparams& phi);

/// ln of the non-separable factor (t1 + t2^(s2/s1))^(-s1) (t1 + t2)^(-(p1 + p2)),
/// which decreases in both coordinates.
double log_rate_coupling(double log_t1, double log_t2, const Hyperparams& phi);

/// Poisson mean of the number of new variants seen exactly k times in the
/// follow-up. Requires k1 <= M1, k2 <= M2 and k1 + k2 >= 1 (InvalidArgument).
/// Throws ConvergenceError (with the partial estimate) if the quadrature
/// misses tolerance.
PredictiveMean kton_predictive_mean(CountPair pilot, CountPair followup, CountPair k,
                                    const Hyperparams& phi, const QuadratureConfig& cfg = {});

enum class RecursionOrder { pop1_first, pop2_first };

/// Poisson mean of the total number of new variants in the follow-up, built
/// one follow-up sample at a time (M1 + M2 single-sample k-ton terms).
/// M = (0,0) gives zero.
PredictiveMean total_predictive_mean(CountPair pilot, CountPair followup, const Hyperparams& phi,
                                     const QuadratureConfig& cfg = {},
                                     RecursionOrder order = RecursionOrder::pop1_first);

/// Total-count means for a list of follow-up sizes. Single-sample terms are
/// shared between sweep points, so a path like (1,0),(2,0),...,(M1,M2)
/// costs M1 + M2 quadratures overall.
std::vector<PredictiveMean> total_predictive_sweep(CountPair pilot, const std::vector<CountPair>& followups,
                                                   const Hyperparams& phi, const QuadratureConfig& cfg = {},
                                                   Execution ex = Execution::parallel);

/// k-ton means on the grid 0 <= k1, k2 <= v (cell (0,0) is zero), row-major
/// with index k1 * (v + 1) + k2. Cells with k_p > M_p are zero.
std::vector<PredictiveMean> kton_predictive_grid(CountPair pilot, CountPair followup, int v,
                                                 const Hyperparams& phi, const QuadratureConfig& cfg = {},
                                                 Execution ex = Execution::parallel);

struct GridCell : PredictiveMean {
  bool converged = true;
};

/// kton_predictive_grid without the ConvergenceError: a cell that misses
/// tolerance keeps its partial estimate and is flagged instead.
std::vector<GridCell> kton_predictive_grid_partial(CountPair pilot, CountPair followup, int v,
                                                  const Hyperparams& phi, const QuadratureConfig& cfg = {},
                                                  Execution ex = Execution::parallel);

/// Unnormalized log posterior density of one variant's frequency pair after
/// observing it s_p times among N_p samples in each population.
double posterior_log_density(Point2 theta, CountPair pilot, CountPair occurrences, const Hyperparams& phi);

struct IntegralReport {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

struct TruncatedMass {
  double eps;
  IntegralReport mass;
};

struct RateMeasureDiagnostics {
  /// integral of theta_p nu(d theta) over (0,1)^2 for p = 1, 2
  std::array<IntegralReport, 2> first_moment;
  /// integral of nu over [eps, 1)^2, one entry per requested eps
  std::vector<TruncatedMass> truncated_mass;
  /// m(eps_{i+1}) / m(eps_i)
  std::vector<double> growth_ratio;
  bool first_moments_finite = false;
  bool mass_strictly_increasing = false;
};

/// Integrability diagnostics: finite first moments (every sample carries
/// finitely many variants) and truncated masses that keep growing as the
/// truncation shrinks (infinitely many variants overall). eps_grid must be
/// strictly decreasing inside (0, 0.5].
RateMeasureDiagnostics rate_measure_diagnostics(const Hyperparams& phi, const QuadratureConfig& cfg,
                                                const std::vector<double>& eps_grid);

/// Integral of nu over [lo, 1)^2.
IntegralReport truncated_mass(const Hyperparams& phi, double lo, const QuadratureConfig& cfg = {});

/// Integral of theta_pop nu over [lo, 1)^2 (pop 0 or 1); lo = 0 gives the
/// whole square.
IntegralReport truncated_first_moment(const Hyperparams& phi, double lo, int pop,
                                      const QuadratureConfig& cfg = {});

}  // namespace vf
