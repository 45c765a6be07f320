#include "vf/baselines.hpp"

#include <cmath>

namespace vf {

namespace {

double log_rising(double a, long b, RisingConvention conv) {
  return conv == RisingConvention::standard ? log_pochhammer(a, b) : log_rising_factorial(a, b);
}

void check_counts(CountPair pilot, CountPair followup) {
  if (pilot.p1 < 0 || pilot.p2 < 0 || followup.p1 < 0 || followup.p2 < 0) {
    throw InvalidArgument("sample counts must be nonnegative");
  }
}

void check_k(CountPair followup, CountPair k) {
  if (k.p1 < 0 || k.p2 < 0 || k.p1 > followup.p1 || k.p2 > followup.p2) {
    throw InvalidArgument("k-ton index must satisfy 0 <= k_p <= M_p");
  }
  if (k.total() < 1) throw InvalidArgument("k-ton index must satisfy k1 + k2 >= 1");
}

// Mean number of variants first seen in a follow-up sample that arrives
// after n earlier ones.
double log_new_per_sample(long n, const Bp3Params& p, RisingConvention conv) {
  return log_rising(p.c + p.sigma, n, conv) - log_rising(p.c + 1.0, n, conv);
}

}  // namespace

void Bp3Params::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha) || !(sigma >= 0.0 && sigma < 1.0) || !(c > -sigma) ||
      !std::isfinite(c)) {
    throw InvalidArgument("3BP parameters require alpha > 0, 0 <= sigma < 1, c > -sigma");
  }
}

double d3bp_kton_mean(CountPair pilot, CountPair followup, CountPair k, const Bp3Params& p,
                      RisingConvention conv) {
  p.validate();
  check_counts(pilot, followup);
  check_k(followup, k);
  const long n = pilot.total(), m = followup.total(), kk = k.total();
  const double log_mean = std::log(p.alpha) + log_binomial(followup.p1, k.p1) + log_binomial(followup.p2, k.p2) +
                          log_rising(p.c + p.sigma, n + m - kk, conv) + log_rising(1.0 - p.sigma, kk - 1, conv) -
                          log_rising(p.c + 1.0, n + m - 1, conv);
  return std::exp(log_mean);
}

double d3bp_total_mean(CountPair pilot, CountPair followup, const Bp3Params& p, RisingConvention conv) {
  p.validate();
  check_counts(pilot, followup);
  const long n = pilot.total();
  double sum = 0.0;
  for (long j = 0; j < followup.total(); ++j) sum += std::exp(log_new_per_sample(n + j, p, conv));
  return p.alpha * sum;
}

double bp3_total_mean(long n, long m, const Bp3Params& p) {
  return d3bp_total_mean({n, 0}, {m, 0}, p);
}

double i3bp_total_mean(CountPair pilot, CountPair followup, const I3bpParams& p) {
  p.validate();
  check_counts(pilot, followup);
  return bp3_total_mean(pilot.p1, followup.p1, p.pop1) + bp3_total_mean(pilot.p2, followup.p2, p.pop2);
}

double i3bp_kton_mean(CountPair pilot, CountPair followup, CountPair k, const I3bpParams& p) {
  p.validate();
  check_counts(pilot, followup);
  check_k(followup, k);
  if (k.p1 > 0 && k.p2 > 0) return 0.0;
  if (k.p2 == 0) return d3bp_kton_mean({pilot.p1, 0}, {followup.p1, 0}, {k.p1, 0}, p.pop1);
  return d3bp_kton_mean({0, pilot.p2}, {0, followup.p2}, {0, k.p2}, p.pop2);
}

}  // namespace vf
