#pragma once

// Special functions in log space and tanh-sinh (double exponential)
// quadrature on the open unit interval and unit square.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vf/error.hpp"

namespace vf {

struct QuadratureConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
  int max_level = 12;

  /// Throws InvalidArgument unless rel_tol > 0, abs_tol >= 0, 1 <= max_level <= 20.
  void validate() const;
};

/// ln B(a, b). Throws DomainError unless a > 0 and b > 0.
double log_beta(double a, double b);

/// ln of Gamma(a+b) / Gamma(a+1); the rising-factorial convention as it is
/// written in the d3BP k-ton formula of the source model. Throws DomainError
/// for a <= 0 or b < 0.
double log_rising_factorial(double a, long b);

/// ln of the Pochhammer symbol (a)_b = Gamma(a+b) / Gamma(a). This is the
/// convention the baseline predictors actually use (see baselines.hpp).
double log_pochhammer(double a, long b);

/// ln C(n, k) for 0 <= k <= n.
double log_binomial(long n, long k);

/// A point of (0,1) together with its exact complement and both logarithms.
/// Tanh-sinh nodes cluster at the endpoints at distances far below machine
/// epsilon, so 1 - x cannot be recovered from x.
struct UnitNode {
  double x;
  double xc;
  double log_x;
  double log_xc;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  int level = 0;
  std::size_t evaluations = 0;
  /// ln(value); only meaningful for integrands given as LogValue, where it
  /// stays finite even when value itself over- or underflows.
  double log_value = 0.0;
  /// error / value, computed without forming either for LogValue integrands.
  double rel_error = 0.0;
};

/// Integrand value given by its logarithm, for nonnegative integrands whose
/// pointwise values exceed the double range near the endpoints while the
/// weighted terms stay finite. rel_error is an optional relative error of
/// the value itself (set when the integrand is an inner quadrature).
struct LogValue {
  double log;
  double rel_error = 0.0;
};

namespace detail {

struct TanhSinhNode {
  double t;
  double weight;  // dx/dt, excluding the step h
  double log_weight;
  UnitNode at;
};

inline constexpr int kMaxCachedLevel = 14;

TanhSinhNode make_tanh_sinh_node(double t);

/// Largest |t| whose node is still representable (x >= ~1e-304).
double tanh_sinh_t_max();

/// Node positions of one refinement level: t_i = first + i * step.
struct LevelGrid {
  double first;
  double step;
  long count;
};

/// Level 0 holds the integer t; level l >= 1 adds the odd multiples of 2^-l.
LevelGrid level_grid(int level);

/// Nodes first introduced at `level`, sorted by t. Cached up to
/// kMaxCachedLevel; built once and shared between threads.
std::span<const TanhSinhNode> tanh_sinh_level(int level);

/// Calls fn(node) for every node of `level` with lo <= t <= hi.
template <class Fn>
void for_each_node(int level, double lo, double hi, Fn&& fn) {
  const LevelGrid g = level_grid(level);
  long i_lo = static_cast<long>(std::ceil(std::max(lo - g.first, -1.0) / g.step));
  long i_hi = static_cast<long>(std::floor(std::min(hi - g.first, g.step * static_cast<double>(g.count)) / g.step));
  i_lo = std::max(i_lo, 0L);
  i_hi = std::min(i_hi, g.count - 1);
  if (level <= kMaxCachedLevel) {
    auto nodes = tanh_sinh_level(level);
    for (long i = i_lo; i <= i_hi; ++i) fn(nodes[static_cast<std::size_t>(i)]);
  } else {
    for (long i = i_lo; i <= i_hi; ++i) fn(make_tanh_sinh_node(g.first + static_cast<double>(i) * g.step));
  }
}

/// Integrand value carrying its own error estimate (used by the outer rule of
/// the 2-D integral, whose integrand is itself a quadrature).
struct ValueWithError {
  double value;
  double error;
};

inline constexpr double kWindowFloor = 1e-30;
inline constexpr double kLogWindowFloor = -69.0776;  // ln 1e-30

/// Tanh-sinh rule refined level by level until two successive estimates
/// agree. Nodes are skipped when they lie outside the window of t where the
/// previous level found non-negligible terms (widened by one previous step),
/// which is what keeps sharply concentrated beta integrands affordable.
///
/// LogValue integrands are summed relative to a running maximum, the same
/// way a log-sum-exp is.
template <class F>
QuadratureResult integrate_unit(F&& f, const QuadratureConfig& cfg) {
  using R = std::decay_t<decltype(f(std::declval<const UnitNode&>()))>;
  constexpr bool kLog = std::is_same_v<R, LogValue>;

  QuadratureResult out;
  double sum = 0.0;      // log mode: scaled by exp(-scale)
  double err_sum = 0.0;  // same scaling as sum
  double scale = -std::numeric_limits<double>::infinity();
  double max_term = 0.0;  // log mode: log of the largest term
  if constexpr (kLog) max_term = -std::numeric_limits<double>::infinity();
  double lo = -1e300, hi = 1e300;  // window of significant t
  double sig_lo = 1e300, sig_hi = -1e300;
  double prev = 0.0;
  std::vector<std::pair<double, double>> seen;

  auto visit = [&](const TanhSinhNode& n) {
    ++out.evaluations;
    if constexpr (kLog) {
      LogValue r = f(n.at);
      if (std::isnan(r.log) || r.log == std::numeric_limits<double>::infinity()) {
        throw IntegrationError("non-finite log integrand at interior node x=" + std::to_string(n.at.x));
      }
      double lt = n.log_weight + r.log;
      if (lt > scale) {
        double shrink = std::exp(scale - lt);
        sum *= shrink;
        err_sum *= shrink;
        scale = lt;
      }
      double term = std::exp(lt - scale);
      sum += term;
      err_sum += term * r.rel_error;
      max_term = std::max(max_term, lt);
      seen.emplace_back(n.t, lt);
    } else {
      double fx;
      if constexpr (std::is_same_v<R, ValueWithError>) {
        ValueWithError r = f(n.at);
        fx = r.value;
        err_sum += n.weight * r.error;
      } else {
        fx = f(n.at);
      }
      if (!std::isfinite(fx)) {
        throw IntegrationError("non-finite integrand at interior node x=" + std::to_string(n.at.x));
      }
      double term = n.weight * fx;
      sum += term;
      double a = std::fabs(term);
      if (a > max_term) max_term = a;
      seen.emplace_back(n.t, a);
    }
  };

  for (int level = 0; level <= cfg.max_level; ++level) {
    double h = std::ldexp(1.0, -level);
    seen.clear();
    for_each_node(level, lo, hi, visit);
    const double threshold = kLog ? max_term + kLogWindowFloor : kWindowFloor * max_term;
    for (auto [t, a] : seen) {
      if (a > threshold) {
        sig_lo = std::min(sig_lo, t);
        sig_hi = std::max(sig_hi, t);
      }
    }
    if (sig_lo <= sig_hi) {
      lo = sig_lo - h;
      hi = sig_hi + h;
    }
    out.level = level;
    double diff;  // relative in log mode
    if constexpr (kLog) {
      double est = sum > 0.0 ? scale + std::log(h * sum) : -std::numeric_limits<double>::infinity();
      diff = level == 0 ? 1.0 : (std::isinf(est) && std::isinf(prev) ? 0.0 : std::fabs(std::expm1(est - prev)));
      out.log_value = est;
      out.value = std::exp(est);
      out.rel_error = diff + (sum > 0.0 ? err_sum / sum : 0.0);
      out.error = out.rel_error * out.value;
      prev = est;
      if (level >= 3 && diff <= cfg.rel_tol) {
        out.converged = true;
        return out;
      }
    } else {
      double est = h * sum;
      diff = std::fabs(est - prev);
      out.value = est;
      out.log_value = std::log(est);
      out.error = diff + h * err_sum;
      out.rel_error = est != 0.0 ? out.error / std::fabs(est) : 0.0;
      prev = est;
      if (level >= 3 && diff <= std::max(cfg.rel_tol * std::fabs(est), cfg.abs_tol)) {
        out.converged = true;
        return out;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Integrates f over (0,1). `f` receives a UnitNode and returns either a
/// double or a LogValue.
template <class F>
QuadratureResult tanh_sinh_integrate(F&& f, const QuadratureConfig& cfg) {
  cfg.validate();
  return detail::integrate_unit(std::forward<F>(f), cfg);
}

/// Iterated tanh-sinh over (0,1)^2: the inner integral over the second
/// coordinate is computed to a tenth of the outer tolerance at every outer
/// node. The reported error is the outer level-difference estimate plus the
/// outer rule applied to the inner error estimates. `converged` is false if
/// the outer rule missed tolerance, or if an inner integral did and its
/// propagated error pushes the total past tolerance (inner failures at nodes
/// whose weight is negligible do not count).
template <class F>
QuadratureResult tanh_sinh_integrate_2d(F&& f, const QuadratureConfig& cfg) {
  cfg.validate();
  QuadratureConfig inner_cfg = cfg;
  inner_cfg.rel_tol = cfg.rel_tol * 0.1;
  using R = std::decay_t<decltype(f(std::declval<const UnitNode&>(), std::declval<const UnitNode&>()))>;
  bool inner_ok = true;
  std::size_t evals = 0;
  auto outer = detail::integrate_unit(
      [&](const UnitNode& x) {
        auto r = detail::integrate_unit([&](const UnitNode& y) { return f(x, y); }, inner_cfg);
        inner_ok = inner_ok && r.converged;
        evals += r.evaluations;
        if constexpr (std::is_same_v<R, LogValue>) {
          return LogValue{r.log_value, r.value > 0.0 ? r.error / r.value : 0.0};
        } else {
          return detail::ValueWithError{r.value, r.error};
        }
      },
      cfg);
  outer.evaluations = evals;
  const double allowed = std::max(cfg.rel_tol * std::fabs(outer.value), cfg.abs_tol);
  outer.converged = outer.converged && (inner_ok || outer.error <= allowed);
  return outer;
}

/// Inner integrals of tanh_sinh_integrate_2d_factored, keyed by outer node.
/// A cache is only meaningful for one inner integrand and one config.
class InnerIntegralCache {
 public:
  struct Entry {
    double log_value;
    double rel_error;
    bool converged;
    std::size_t evaluations;
  };

  template <class Compute>
  const Entry& get(const UnitNode& x, Compute&& compute) {
    Key key{x.log_x, x.log_xc};
    auto it = map_.find(key);
    if (it == map_.end()) it = map_.emplace(key, compute()).first;
    return it->second;
  }
  std::size_t size() const { return map_.size(); }

 private:
  struct Key {
    double a, b;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      const std::size_t h = std::hash<double>{}(k.a);
      return h ^ (std::hash<double>{}(k.b) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }
  };
  std::unordered_map<Key, Entry, KeyHash> map_;
};

/// tanh_sinh_integrate_2d for the log-space integrand g(x) + h(x, y), where
/// `g` returns a double and `h` a LogValue. The inner integral of exp(h) at
/// each outer node goes through `cache`, so integrands that differ only in
/// g share that work. Error and convergence follow tanh_sinh_integrate_2d.
template <class G, class H>
QuadratureResult tanh_sinh_integrate_2d_factored(G&& g, H&& h, const QuadratureConfig& cfg,
                                                 InnerIntegralCache& cache) {
  cfg.validate();
  QuadratureConfig inner_cfg = cfg;
  inner_cfg.rel_tol = cfg.rel_tol * 0.1;
  bool inner_ok = true;
  std::size_t evals = 0;
  auto outer = detail::integrate_unit(
      [&](const UnitNode& x) {
        const auto& e = cache.get(x, [&] {
          auto r = detail::integrate_unit([&](const UnitNode& y) { return h(x, y); }, inner_cfg);
          return InnerIntegralCache::Entry{r.log_value, r.rel_error, r.converged, r.evaluations};
        });
        inner_ok = inner_ok && e.converged;
        evals += e.evaluations;
        return LogValue{g(x) + e.log_value, e.rel_error};
      },
      cfg);
  outer.evaluations = evals;
  const double allowed = std::max(cfg.rel_tol * std::fabs(outer.value), cfg.abs_tol);
  outer.converged = outer.converged && (inner_ok || outer.error <= allowed);
  return outer;
}

}  // namespace vf
