#include "vf/baselines.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace vf {
namespace {

// Single-population k-ton mean by direct quadrature of the 3BP rate measure
// alpha Gamma(1+c) / (Gamma(1-s) Gamma(c+s)) t^(-1-s) (1-t)^(c+s-1),
// thinned by the binomial probability of k hits in m follow-ups and none in
// the n pilot samples.
double bp3_kton_by_quadrature(long n, long m, long k, const Bp3Params& p) {
  const double log_norm = std::lgamma(1.0 + p.c) - std::lgamma(1.0 - p.sigma) - std::lgamma(p.c + p.sigma);
  auto r = tanh_sinh_integrate(
      [&](const UnitNode& t) {
        return LogValue{(static_cast<double>(k) - 1.0 - p.sigma) * t.log_x +
                        (static_cast<double>(n + m - k) + p.c + p.sigma - 1.0) * t.log_xc};
      },
      QuadratureConfig{1e-12, 0.0, 12});
  return p.alpha * std::exp(log_norm + log_binomial(m, k) + r.log_value);
}

TEST(Bp3Params, Validation) {
  EXPECT_NO_THROW((Bp3Params{1.0, -0.2, 0.5}.validate()));
  EXPECT_NO_THROW((Bp3Params{1.0, 1.0, 0.0}.validate()));
  EXPECT_THROW((Bp3Params{1.0, -0.6, 0.5}.validate()), InvalidArgument);
  EXPECT_THROW((Bp3Params{1.0, 1.0, 1.0}.validate()), InvalidArgument);
  EXPECT_THROW((Bp3Params{0.0, 1.0, 0.5}.validate()), InvalidArgument);
}

TEST(D3bp, EmptyRisingFactorials) {
  Bp3Params p{7.0, 2.0, 0.3};
  EXPECT_NEAR(d3bp_kton_mean({0, 0}, {1, 0}, {1, 0}, p), 7.0, 1e-13);
  // The quoted convention has Gamma(a)/Gamma(a+1) = 1/a for empty factors.
  double quoted = 7.0 * (p.c + 1.0) / ((p.c + p.sigma) * (1.0 - p.sigma));
  EXPECT_NEAR(d3bp_kton_mean({0, 0}, {1, 0}, {1, 0}, p, RisingConvention::quoted), quoted, 1e-12);
}

TEST(D3bp, PoolingMatchesSinglePopulationQuadrature) {
  for (Bp3Params p : {Bp3Params{20, 1, 0.5}, Bp3Params{3, 0.2, 0.1}, Bp3Params{50, -0.3, 0.6}}) {
    for (long n : {0L, 3L, 40L}) {
      for (long m : {1L, 4L, 25L}) {
        for (long k = 1; k <= std::min(m, 4L); ++k) {
          double closed = d3bp_kton_mean({n, 0}, {m, 0}, {k, 0}, p);
          EXPECT_NEAR(closed / bp3_kton_by_quadrature(n, m, k, p), 1.0, 1e-10) << n << " " << m << " " << k;
        }
      }
    }
  }
}

TEST(D3bp, LabelInvariance) {
  Bp3Params p{20, 1.5, 0.4};
  for (CountPair k : {CountPair{1, 0}, CountPair{2, 3}, CountPair{0, 4}}) {
    CountPair n{3, 8}, m{6, 5};
    EXPECT_EQ(d3bp_kton_mean(n, m, k, p), d3bp_kton_mean(n.swapped(), m.swapped(), k.swapped(), p));
  }
}

TEST(D3bp, TotalIsKtonSum) {
  for (Bp3Params p : {Bp3Params{4, 1, 0.0}, Bp3Params{20, 1, 0.5}, Bp3Params{9, -0.1, 0.3}}) {
    for (CountPair n : {CountPair{0, 0}, CountPair{2, 1}}) {
      for (CountPair m : {CountPair{1, 0}, CountPair{3, 2}, CountPair{4, 4}}) {
        double naive = 0.0;
        for (long k1 = 0; k1 <= m.p1; ++k1) {
          for (long k2 = 0; k2 <= m.p2; ++k2) {
            if (k1 + k2 > 0) naive += d3bp_kton_mean(n, m, {k1, k2}, p);
          }
        }
        EXPECT_NEAR(d3bp_total_mean(n, m, p) / naive, 1.0, 1e-12);
      }
    }
  }
  EXPECT_EQ(d3bp_total_mean({4, 4}, {0, 0}, Bp3Params{}), 0.0);
}

TEST(D3bp, LinearInAlpha) {
  Bp3Params p{3, 1, 0.4}, q{6, 1, 0.4};
  EXPECT_NEAR(d3bp_total_mean({2, 3}, {5, 5}, q) / d3bp_total_mean({2, 3}, {5, 5}, p), 2.0, 1e-14);
  EXPECT_NEAR(d3bp_kton_mean({2, 3}, {5, 5}, {1, 2}, q) / d3bp_kton_mean({2, 3}, {5, 5}, {1, 2}, p), 2.0, 1e-14);
}

TEST(D3bp, ClassicIbpTotal) {
  // sigma = 0, c = 1: the j-th sample brings alpha / j new dishes.
  Bp3Params p{5, 1, 0.0};
  double harmonic = 0.0;
  for (int j = 1; j <= 30; ++j) harmonic += 1.0 / j;
  EXPECT_NEAR(d3bp_total_mean({0, 0}, {10, 20}, p), 5.0 * harmonic, 1e-12);
}

TEST(D3bp, RejectsBadK) {
  EXPECT_THROW(d3bp_kton_mean({0, 0}, {1, 1}, {2, 0}, Bp3Params{}), InvalidArgument);
  EXPECT_THROW(d3bp_kton_mean({0, 0}, {1, 1}, {0, 0}, Bp3Params{}), InvalidArgument);
}

TEST(I3bp, TotalIsAdditive) {
  I3bpParams p{{10, 1, 0.3}, {4, 2, 0.6}};
  CountPair n{5, 7}, m{9, 3};
  double expect = d3bp_total_mean({n.p1, 0}, {m.p1, 0}, p.pop1) + d3bp_total_mean({0, n.p2}, {0, m.p2}, p.pop2);
  EXPECT_EQ(i3bp_total_mean(n, m, p), expect);
  EXPECT_EQ(i3bp_total_mean(n, {0, 3}, p), bp3_total_mean(n.p2, 3, p.pop2));
}

TEST(I3bp, Ktons) {
  I3bpParams p{{10, 1, 0.3}, {4, 2, 0.6}};
  EXPECT_EQ(i3bp_kton_mean({3, 3}, {5, 5}, {2, 3}, p), 0.0);
  EXPECT_EQ(i3bp_kton_mean({3, 3}, {5, 5}, {2, 0}, p), d3bp_kton_mean({3, 0}, {5, 0}, {2, 0}, p.pop1));
  EXPECT_EQ(i3bp_kton_mean({3, 3}, {5, 5}, {0, 1}, p), d3bp_kton_mean({0, 3}, {0, 5}, {0, 1}, p.pop2));
  EXPECT_THROW(i3bp_kton_mean({3, 3}, {5, 5}, {6, 0}, p), InvalidArgument);
}

}  // namespace
}  // namespace vf
