#include "vf/numerics.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

namespace vf {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2*pi)/2
constexpr double kStirlingCutoff = 10.0;

double lgamma_safe(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

// ln Gamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2] for x >= 10.
double stirling_remainder(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  return r * (1.0 / 12 + r2 * (-1.0 / 360 + r2 * (1.0 / 1260 + r2 * (-1.0 / 1680 +
         r2 * (1.0 / 1188 + r2 * (-691.0 / 360360 + r2 * (1.0 / 156)))))));
}

// ln Gamma(a + b) - ln Gamma(a) for a > 0, b >= 0 without the cancellation
// that direct lgamma differences suffer when a is large and b is small.
double log_gamma_ratio(double a, double b) {
  if (b == 0.0) return 0.0;
  if (a < kStirlingCutoff) return lgamma_safe(a + b) - lgamma_safe(a);
  const double ab = a + b;
  return (a - 0.5) * std::log1p(b / a) + b * std::log(ab) - b + stirling_remainder(ab) -
         stirling_remainder(a);
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_level < 1 || max_level > 20) {
    throw InvalidArgument("QuadratureConfig requires rel_tol > 0, abs_tol >= 0, 1 <= max_level <= 20");
  }
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("log_beta requires positive arguments");
  }
  const double big = std::max(a, b);
  const double small = std::min(a, b);
  if (big < kStirlingCutoff) {
    return lgamma_safe(a) + lgamma_safe(b) - lgamma_safe(a + b);
  }
  if (small < kStirlingCutoff) {
    return lgamma_safe(small) - log_gamma_ratio(big, small);
  }
  const double sum = big + small;
  return kHalfLog2Pi - (big - 0.5) * std::log1p(small / big) + (small - 0.5) * std::log(small / sum) -
         0.5 * std::log(sum) + stirling_remainder(big) + stirling_remainder(small) -
         stirling_remainder(sum);
}

double log_pochhammer(double a, long b) {
  if (!(a > 0.0) || b < 0) {
    throw DomainError("log_pochhammer requires a > 0 and b >= 0");
  }
  return log_gamma_ratio(a, static_cast<double>(b));
}

double log_rising_factorial(double a, long b) {
  if (!(a > 0.0) || b < 0) {
    throw DomainError("log_rising_factorial requires a > 0 and b >= 0");
  }
  return log_gamma_ratio(a, static_cast<double>(b)) - std::log(a);
}

double log_binomial(long n, long k) {
  if (k < 0 || k > n) throw DomainError("log_binomial requires 0 <= k <= n");
  if (k == 0 || k == n) return 0.0;
  return -std::log(static_cast<double>(n) + 1.0) -
         log_beta(static_cast<double>(n - k) + 1.0, static_cast<double>(k) + 1.0);
}

namespace detail {

double tanh_sinh_t_max() {
  static const double t = std::asinh(700.0 / std::numbers::pi);
  return t;
}

LevelGrid level_grid(int level) {
  const double tmax = tanh_sinh_t_max();
  if (level == 0) {
    const double m = std::floor(tmax);
    return {-m, 1.0, 2 * static_cast<long>(m) + 1};
  }
  const double h = std::ldexp(1.0, -level);
  const long m = static_cast<long>(std::floor((tmax / h - 1.0) / 2.0));
  return {-static_cast<double>(2 * m + 1) * h, 2.0 * h, 2 * m + 2};
}

TanhSinhNode make_tanh_sinh_node(double t) {
  const double u = std::numbers::pi * std::sinh(t);
  TanhSinhNode n;
  n.t = t;
  // x = 1 / (1 + e^-u), 1 - x = 1 / (1 + e^u); both forms are exact-ish
  // at either end, unlike 1 - x.
  n.at.x = 1.0 / (1.0 + std::exp(-u));
  n.at.xc = 1.0 / (1.0 + std::exp(u));
  n.at.log_x = u > -30.0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
  n.at.log_xc = u < 30.0 ? -std::log1p(std::exp(u)) : -u - std::log1p(std::exp(-u));
  n.weight = std::numbers::pi * std::cosh(t) * n.at.x * n.at.xc;
  n.log_weight = std::log(std::numbers::pi * std::cosh(t)) + n.at.log_x + n.at.log_xc;
  return n;
}

std::span<const TanhSinhNode> tanh_sinh_level(int level) {
  static std::array<std::vector<TanhSinhNode>, kMaxCachedLevel + 1> tables;
  static std::array<std::once_flag, kMaxCachedLevel + 1> flags;
  if (level < 0 || level > kMaxCachedLevel) {
    throw InvalidArgument("tanh_sinh_level: level out of cached range");
  }
  auto idx = static_cast<std::size_t>(level);
  std::call_once(flags[idx], [&] {
    const LevelGrid g = level_grid(level);
    auto& v = tables[idx];
    v.reserve(static_cast<std::size_t>(g.count));
    for (long i = 0; i < g.count; ++i) v.push_back(make_tanh_sinh_node(g.first + static_cast<double>(i) * g.step));
  });
  return tables[idx];
}

}  // namespace detail

}  // namespace vf
