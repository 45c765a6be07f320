#include "vf/model.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace vf {

namespace {

// ln(e^a + e^b)
double log_add(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

void require_valid_k(CountPair followup, CountPair k) {
  if (followup.p1 < 0 || followup.p2 < 0 || k.p1 < 0 || k.p2 < 0) {
    throw InvalidArgument("counts must be nonnegative");
  }
  if (k.p1 > followup.p1 || k.p2 > followup.p2) {
    throw InvalidArgument("k-ton index exceeds the follow-up size");
  }
  if (k.total() < 1) throw InvalidArgument("k-ton index must satisfy k1 + k2 >= 1");
}

void require_nonnegative(CountPair c, const char* what) {
  if (c.p1 < 0 || c.p2 < 0) throw InvalidArgument(std::string(what) + " must be nonnegative");
}

double log_coupling(double log_t1, double log_t2, const Hyperparams& phi) {
  const double r = phi.sigma2 / phi.sigma1;
  return -phi.sigma1 * log_add(log_t1, r * log_t2) - (phi.phi1 + phi.phi2) * log_add(log_t1, log_t2);
}

void require_interior(Point2 theta) {
  if (!(theta.t1 > 0.0 && theta.t1 < 1.0 && theta.t2 > 0.0 && theta.t2 < 1.0)) {
    throw DomainError("frequency pair must lie strictly inside (0,1)^2");
  }
}

double rate_log_norm(const Hyperparams& phi) {
  return std::log(phi.alpha) - log_beta(phi.phi1, phi.c1) - log_beta(phi.phi2, phi.c2);
}

// Integral over (lo,1)^2 of theta_1^e1 theta_2^e2 nu(theta), with lo = 0
// for the whole square.
IntegralReport weighted_mass(const Hyperparams& phi, double lo, double e1, double e2,
                             const QuadratureConfig& cfg) {
  const double span = 1.0 - lo;
  const double log_span = std::log1p(-lo);
  auto to_theta = [&](const UnitNode& u, double& log_t, double& log1m_t) {
    log_t = lo == 0.0 ? u.log_x : std::log(lo + span * u.x);
    log1m_t = log_span + u.log_xc;
  };
  auto r = tanh_sinh_integrate_2d(
      [&](const UnitNode& x, const UnitNode& y) {
        double l1, m1, l2, m2;
        to_theta(x, l1, m1);
        to_theta(y, l2, m2);
        return LogValue{e1 * l1 + e2 * l2 + log_rate_density(l1, l2, m1, m2, phi)};
      },
      cfg);
  const double jac = span * span;
  return {r.value * jac, r.error * jac, r.converged};
}

}  // namespace

void Hyperparams::validate() const {
  auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
  auto unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!pos(alpha) || !unit(sigma1) || !unit(sigma2) || !pos(phi1) || !pos(phi2) || !pos(c1) || !pos(c2)) {
    throw InvalidArgument("hyperparameters require alpha, phi, c > 0 and sigma in (0,1)");
  }
}

Hyperparams Hyperparams::swapped() const { return {alpha, sigma2, sigma1, phi2, phi1, c2, c1}; }

Hyperparams Hyperparams::from_array(const std::array<double, 7>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

double log_rate_coupling(double log_t1, double log_t2, const Hyperparams& phi) {
  return log_coupling(log_t1, log_t2, phi);
}

double log_rate_density(double log_t1, double log_t2, double log1m_t1, double log1m_t2,
                        const Hyperparams& phi) {
  return rate_log_norm(phi) + log_coupling(log_t1, log_t2, phi) + (phi.phi1 - 1.0) * log_t1 +
         (phi.c1 - 1.0) * log1m_t1 + (phi.phi2 - 1.0) * log_t2 + (phi.c2 - 1.0) * log1m_t2;
}

double rate_density(Point2 theta, const Hyperparams& phi) {
  phi.validate();
  require_interior(theta);
  return std::exp(log_rate_density(std::log(theta.t1), std::log(theta.t2), std::log1p(-theta.t1),
                                   std::log1p(-theta.t2), phi));
}

double posterior_log_density(Point2 theta, CountPair pilot, CountPair occurrences, const Hyperparams& phi) {
  phi.validate();
  require_interior(theta);
  require_nonnegative(pilot, "pilot sizes");
  require_nonnegative(occurrences, "occurrence counts");
  if (occurrences.p1 > pilot.p1 || occurrences.p2 > pilot.p2) {
    throw InvalidArgument("occurrence counts exceed the pilot sizes");
  }
  const double l1 = std::log(theta.t1), l2 = std::log(theta.t2);
  const double m1 = std::log1p(-theta.t1), m2 = std::log1p(-theta.t2);
  return log_rate_density(l1, l2, m1, m2, phi) + static_cast<double>(occurrences.p1) * l1 +
         static_cast<double>(pilot.p1 - occurrences.p1) * m1 + static_cast<double>(occurrences.p2) * l2 +
         static_cast<double>(pilot.p2 - occurrences.p2) * m2;
}

namespace {

// Beta-kernel exponents for one k-ton cell. Pilot and follow-up sizes and k
// enter only through these, and the population-2 pair alone fixes the inner
// integral, so cells in one k2 column share it.
struct KtonKernel {
  double a1, b1, a2, b2, log_pref;
};

KtonKernel kton_kernel(CountPair pilot, CountPair followup, CountPair k, const Hyperparams& phi) {
  // Unnormalized beta kernels of Z and W; their normalizers cancel against
  // the beta-function prefactor.
  return {phi.phi1 + static_cast<double>(k.p1), phi.c1 + static_cast<double>(pilot.p1 + followup.p1 - k.p1),
          phi.phi2 + static_cast<double>(k.p2), phi.c2 + static_cast<double>(pilot.p2 + followup.p2 - k.p2),
          std::log(phi.alpha) + log_binomial(followup.p1, k.p1) + log_binomial(followup.p2, k.p2) -
              log_beta(phi.phi1, phi.c1) - log_beta(phi.phi2, phi.c2)};
}

// `cache` must only be shared between calls with the same a2, b2, phi and cfg.
GridCell kton_cell(const KtonKernel& kk, const Hyperparams& phi, const QuadratureConfig& cfg,
                   InnerIntegralCache& cache) {
  auto r = tanh_sinh_integrate_2d_factored(
      [&](const UnitNode& z) { return (kk.a1 - 1.0) * z.log_x + (kk.b1 - 1.0) * z.log_xc; },
      [&](const UnitNode& z, const UnitNode& w) {
        return LogValue{(kk.a2 - 1.0) * w.log_x + (kk.b2 - 1.0) * w.log_xc + log_coupling(z.log_x, w.log_x, phi)};
      },
      cfg, cache);
  GridCell c;
  c.lambda = std::exp(kk.log_pref + r.log_value);
  c.quad_error = r.rel_error * c.lambda;
  c.converged = r.converged;
  return c;
}

}  // namespace

PredictiveMean kton_predictive_mean(CountPair pilot, CountPair followup, CountPair k, const Hyperparams& phi,
                                    const QuadratureConfig& cfg) {
  phi.validate();
  require_nonnegative(pilot, "pilot sizes");
  require_valid_k(followup, k);
  InnerIntegralCache cache;
  auto c = kton_cell(kton_kernel(pilot, followup, k, phi), phi, cfg, cache);
  if (!c.converged) throw ConvergenceError("k-ton quadrature did not reach tolerance", c.lambda, c.quad_error);
  return {c.lambda, c.quad_error};
}

namespace {

// One follow-up sample added to population `pop` on top of `pilot`.
struct SingleTerm {
  CountPair pilot;
  int pop;
  auto operator<=>(const SingleTerm&) const = default;
};

PredictiveMean single_term(const SingleTerm& t, const Hyperparams& phi, const QuadratureConfig& cfg) {
  CountPair one = t.pop == 0 ? CountPair{1, 0} : CountPair{0, 1};
  return kton_predictive_mean(t.pilot, one, one, phi, cfg);
}

// The M1 + M2 terms whose sum is the total mean, in summation order.
std::vector<SingleTerm> total_terms(CountPair pilot, CountPair followup, RecursionOrder order) {
  std::vector<SingleTerm> terms;
  terms.reserve(static_cast<std::size_t>(followup.total()));
  const int first = order == RecursionOrder::pop1_first ? 0 : 1;
  const int second = 1 - first;
  CountPair at = pilot;
  auto bump = [](CountPair& c, int pop) { (pop == 0 ? c.p1 : c.p2) += 1; };
  for (long j = 0; j < followup[first]; ++j) {
    terms.push_back({at, first});
    bump(at, first);
  }
  for (long j = 0; j < followup[second]; ++j) {
    terms.push_back({at, second});
    bump(at, second);
  }
  return terms;
}

}  // namespace

PredictiveMean total_predictive_mean(CountPair pilot, CountPair followup, const Hyperparams& phi,
                                     const QuadratureConfig& cfg, RecursionOrder order) {
  phi.validate();
  require_nonnegative(pilot, "pilot sizes");
  require_nonnegative(followup, "follow-up sizes");
  PredictiveMean out;
  auto terms = total_terms(pilot, followup, order);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    try {
      auto m = single_term(terms[i], phi, cfg);
      out.lambda += m.lambda;
      out.quad_error += m.quad_error;
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(e.what(), out.lambda + e.estimate(), out.quad_error + e.error(),
                             static_cast<long>(i));
    }
  }
  return out;
}

std::vector<PredictiveMean> total_predictive_sweep(CountPair pilot, const std::vector<CountPair>& followups,
                                                   const Hyperparams& phi, const QuadratureConfig& cfg,
                                                   Execution ex) {
  phi.validate();
  require_nonnegative(pilot, "pilot sizes");
  std::map<SingleTerm, std::size_t> slot;
  std::vector<SingleTerm> unique;
  std::vector<std::vector<SingleTerm>> per_point;
  per_point.reserve(followups.size());
  for (const auto& m : followups) {
    require_nonnegative(m, "follow-up sizes");
    per_point.push_back(total_terms(pilot, m, RecursionOrder::pop1_first));
    for (const auto& t : per_point.back()) {
      if (slot.emplace(t, unique.size()).second) unique.push_back(t);
    }
  }
  std::vector<PredictiveMean> values(unique.size());
  for_each_index(unique.size(), ex, [&](std::size_t i) {
    try {
      values[i] = single_term(unique[i], phi, cfg);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(e.what(), e.estimate(), e.error(), static_cast<long>(i));
    }
  });
  std::vector<PredictiveMean> out(followups.size());
  for (std::size_t p = 0; p < followups.size(); ++p) {
    for (const auto& t : per_point[p]) {
      const auto& v = values[slot.at(t)];
      out[p].lambda += v.lambda;
      out[p].quad_error += v.quad_error;
    }
  }
  return out;
}

std::vector<GridCell> kton_predictive_grid_partial(CountPair pilot, CountPair followup, int v,
                                                  const Hyperparams& phi, const QuadratureConfig& cfg,
                                                  Execution ex) {
  phi.validate();
  cfg.validate();
  require_nonnegative(pilot, "pilot sizes");
  require_nonnegative(followup, "follow-up sizes");
  if (v < 1) throw InvalidArgument("k-ton grid bound must be at least 1");
  const auto side = static_cast<std::size_t>(v) + 1;
  std::vector<GridCell> out(side * side);
  for_each_index(side, ex, [&](std::size_t k2) {
    if (static_cast<long>(k2) > followup.p2) return;
    InnerIntegralCache cache;
    for (std::size_t k1 = 0; k1 < side; ++k1) {
      CountPair k{static_cast<long>(k1), static_cast<long>(k2)};
      if (k.total() == 0 || k.p1 > followup.p1) continue;
      out[k1 * side + k2] = kton_cell(kton_kernel(pilot, followup, k, phi), phi, cfg, cache);
    }
  });
  return out;
}

std::vector<PredictiveMean> kton_predictive_grid(CountPair pilot, CountPair followup, int v,
                                                 const Hyperparams& phi, const QuadratureConfig& cfg,
                                                 Execution ex) {
  auto cells = kton_predictive_grid_partial(pilot, followup, v, phi, cfg, ex);
  std::vector<PredictiveMean> out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].converged) {
      throw ConvergenceError("k-ton quadrature did not reach tolerance", cells[i].lambda, cells[i].quad_error,
                             static_cast<long>(i));
    }
    out[i] = {cells[i].lambda, cells[i].quad_error};
  }
  return out;
}

IntegralReport truncated_mass(const Hyperparams& phi, double lo, const QuadratureConfig& cfg) {
  phi.validate();
  if (!(lo > 0.0 && lo < 1.0)) throw InvalidArgument("truncation must lie in (0,1)");
  return weighted_mass(phi, lo, 0.0, 0.0, cfg);
}

IntegralReport truncated_first_moment(const Hyperparams& phi, double lo, int pop, const QuadratureConfig& cfg) {
  phi.validate();
  if (!(lo >= 0.0 && lo < 1.0)) throw InvalidArgument("truncation must lie in [0,1)");
  if (pop != 0 && pop != 1) throw InvalidArgument("population index must be 0 or 1");
  return weighted_mass(phi, lo, pop == 0 ? 1.0 : 0.0, pop == 1 ? 1.0 : 0.0, cfg);
}

RateMeasureDiagnostics rate_measure_diagnostics(const Hyperparams& phi, const QuadratureConfig& cfg,
                                                const std::vector<double>& eps_grid) {
  phi.validate();
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0 && eps_grid[i] <= 0.5) || (i > 0 && !(eps_grid[i] < eps_grid[i - 1]))) {
      throw InvalidArgument("eps grid must be strictly decreasing inside (0, 0.5]");
    }
  }
  RateMeasureDiagnostics d;
  d.first_moment[0] = weighted_mass(phi, 0.0, 1.0, 0.0, cfg);
  d.first_moment[1] = weighted_mass(phi, 0.0, 0.0, 1.0, cfg);
  d.first_moments_finite = true;
  for (const auto& m : d.first_moment) {
    d.first_moments_finite = d.first_moments_finite && m.converged && std::isfinite(m.value);
  }
  d.mass_strictly_increasing = true;
  for (double eps : eps_grid) {
    d.truncated_mass.push_back({eps, weighted_mass(phi, eps, 0.0, 0.0, cfg)});
    const auto& cur = d.truncated_mass.back().mass;
    d.mass_strictly_increasing = d.mass_strictly_increasing && cur.converged;
    if (d.truncated_mass.size() > 1) {
      const auto& prev = d.truncated_mass[d.truncated_mass.size() - 2].mass;
      d.growth_ratio.push_back(cur.value / prev.value);
      d.mass_strictly_increasing = d.mass_strictly_increasing && cur.value > prev.value;
    }
  }
  return d;
}

}  // namespace vf
