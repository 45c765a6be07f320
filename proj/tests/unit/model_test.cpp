#include "vf/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles/frozen.hpp"

namespace vf {
namespace {

const Hyperparams kFlat{1.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0};

TEST(Hyperparams, Validation) {
  EXPECT_NO_THROW(kFlat.validate());
  Hyperparams bad = kFlat;
  bad.sigma1 = 1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = kFlat;
  bad.alpha = 0.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = kFlat;
  bad.c2 = -0.1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  Hyperparams p{3, 0.2, 0.7, 0.4, 0.9, 2, 5};
  EXPECT_EQ(Hyperparams::from_array(p.as_array()).as_array(), p.as_array());
  EXPECT_EQ(p.swapped().swapped().as_array(), p.as_array());
}

TEST(RateDensity, FlatKernels) {
  EXPECT_NEAR(rate_density({0.5, 0.5}, kFlat), 1.0, 1e-15);
  Hyperparams two = kFlat;
  two.alpha = 2.0;
  EXPECT_NEAR(rate_density({0.5, 0.5}, two), 2.0, 1e-15);
}

TEST(RateDensity, ArbitraryPrecisionOracle) {
  Hyperparams p{1.0, 0.2, 0.2, 1.0, 1.0, 1.0, 1.0};
  EXPECT_NEAR(rate_density({0.1, 0.3}, p) / oracle::kRateDensityFig1, 1.0, 1e-14);
}

TEST(RateDensity, RejectsBoundary) {
  EXPECT_THROW(rate_density({0.0, 0.5}, kFlat), DomainError);
  EXPECT_THROW(rate_density({0.5, 1.0}, kFlat), DomainError);
}

TEST(Posterior, NoDataIsPrior) {
  Hyperparams p{2.0, 0.3, 0.6, 0.5, 0.8, 1.5, 2.0};
  Point2 th{0.03, 0.4};
  EXPECT_NEAR(posterior_log_density(th, {0, 0}, {0, 0}, p), std::log(rate_density(th, p)), 1e-13);
}

TEST(Posterior, UnobservedVariantAddsSurvivalTerms) {
  Hyperparams p{2.0, 0.3, 0.6, 0.5, 0.8, 1.5, 2.0};
  Point2 th{0.03, 0.4};
  double expect = std::log(rate_density(th, p)) + 7 * std::log1p(-th.t1) + 4 * std::log1p(-th.t2);
  EXPECT_NEAR(posterior_log_density(th, {7, 4}, {0, 0}, p), expect, 1e-12);
}

TEST(Posterior, ArbitraryPrecisionOracle) {
  EXPECT_NEAR(posterior_log_density({0.2, 0.4}, {3, 2}, {1, 0}, kFlat), oracle::kPosteriorLog, 1e-13);
  EXPECT_THROW(posterior_log_density({0.2, 0.4}, {1, 2}, {2, 0}, kFlat), InvalidArgument);
}

TEST(Kton, Preconditions) {
  EXPECT_THROW(kton_predictive_mean({0, 0}, {1, 0}, {2, 0}, kFlat), InvalidArgument);
  EXPECT_THROW(kton_predictive_mean({0, 0}, {1, 1}, {0, 0}, kFlat), InvalidArgument);
  EXPECT_THROW(kton_predictive_mean({-1, 0}, {1, 1}, {1, 0}, kFlat), InvalidArgument);
}

// Reference from QUADPACK and mpmath on the explicit thinned-rate integrand.
TEST(Kton, IndependentQuadratureOracle) {
  auto m = kton_predictive_mean({0, 0}, {1, 1}, {1, 0}, kFlat);
  EXPECT_NEAR(m.lambda / oracle::kKtonN0M11k10, 1.0, 1e-9);
  EXPECT_LT(m.quad_error, 1e-9);
}

TEST(Kton, LinearInAlpha) {
  Hyperparams p{3.0, 0.3, 0.6, 0.5, 0.5, 1.0, 2.0};
  Hyperparams q = p;
  q.alpha *= 2.0;
  for (CountPair k : {CountPair{1, 0}, CountPair{2, 3}, CountPair{0, 1}}) {
    double a = kton_predictive_mean({4, 2}, {5, 5}, k, p).lambda;
    double b = kton_predictive_mean({4, 2}, {5, 5}, k, q).lambda;
    EXPECT_NEAR(b / a, 2.0, 1e-14);
  }
}

TEST(Kton, SwapSymmetryWithEqualRates) {
  Hyperparams p{5.0, 0.4, 0.4, 0.3, 0.9, 1.0, 3.0};
  for (CountPair k : {CountPair{1, 0}, CountPair{2, 1}, CountPair{0, 3}}) {
    CountPair n{3, 6}, m{4, 5};
    double a = kton_predictive_mean(n, m, k, p).lambda;
    double b = kton_predictive_mean(n.swapped(), m.swapped(), k.swapped(), p.swapped()).lambda;
    EXPECT_NEAR(a / b, 1.0, 1e-9);
  }
}

TEST(Kton, NonIncreasingInPilotSize) {
  Hyperparams p{10.0, 0.4, 0.6, 0.5, 0.5, 1.0, 1.0};
  for (CountPair k : {CountPair{1, 0}, CountPair{1, 1}, CountPair{0, 2}}) {
    for (long n1 = 0; n1 <= 4; ++n1) {
      for (long n2 = 0; n2 <= 4; ++n2) {
        double here = kton_predictive_mean({n1, n2}, {3, 3}, k, p).lambda;
        EXPECT_LE(kton_predictive_mean({n1 + 1, n2}, {3, 3}, k, p).lambda, here * (1 + 1e-10));
        EXPECT_LE(kton_predictive_mean({n1, n2 + 1}, {3, 3}, k, p).lambda, here * (1 + 1e-10));
      }
    }
  }
}

TEST(Kton, ConcentratedBetasAtLargeSizes) {
  Hyperparams p{1000.0, 0.5, 0.5, 0.5, 0.5, 1.0, 1.0};
  auto m = kton_predictive_mean({2000, 3000}, {4000, 4000}, {3, 0}, p);
  EXPECT_GT(m.lambda, 0.0);
  EXPECT_TRUE(std::isfinite(m.lambda));
  EXPECT_LE(m.quad_error, 1e-8 * m.lambda);
}

TEST(Total, EmptyFollowupIsZero) {
  auto m = total_predictive_mean({3, 4}, {0, 0}, kFlat);
  EXPECT_EQ(m.lambda, 0.0);
  EXPECT_EQ(m.quad_error, 0.0);
}

TEST(Total, SingleSampleEqualsSingleKton) {
  auto t = total_predictive_mean({0, 0}, {1, 0}, kFlat);
  auto k = kton_predictive_mean({0, 0}, {1, 0}, {1, 0}, kFlat);
  EXPECT_EQ(t.lambda, k.lambda);
}

TEST(Total, MatchesExhaustiveKtonSum) {
  for (long m1 = 0; m1 <= 4; ++m1) {
    for (long m2 = 0; m2 <= 4; ++m2) {
      double naive = 0.0;
      for (long k1 = 0; k1 <= m1; ++k1) {
        for (long k2 = 0; k2 <= m2; ++k2) {
          if (k1 + k2 > 0) naive += kton_predictive_mean({0, 0}, {m1, m2}, {k1, k2}, kFlat).lambda;
        }
      }
      double total = total_predictive_mean({0, 0}, {m1, m2}, kFlat).lambda;
      if (m1 + m2 == 0) {
        EXPECT_EQ(total, 0.0);
      } else {
        EXPECT_NEAR(total / naive, 1.0, 1e-8) << m1 << "," << m2;
      }
    }
  }
}

TEST(Total, RecursionOrderInvariance) {
  Hyperparams p{20.0, 0.3, 0.7, 0.4, 0.6, 1.0, 2.0};
  for (CountPair m : {CountPair{3, 5}, CountPair{7, 1}}) {
    auto a = total_predictive_mean({2, 1}, m, p, {}, RecursionOrder::pop1_first);
    auto b = total_predictive_mean({2, 1}, m, p, {}, RecursionOrder::pop2_first);
    EXPECT_NEAR(a.lambda / b.lambda, 1.0, 1e-9);
  }
}

TEST(Total, SweepMatchesPointwiseAndParallelMatchesSerial) {
  Hyperparams p{20.0, 0.3, 0.7, 0.4, 0.6, 1.0, 2.0};
  std::vector<CountPair> sweep{{0, 0}, {1, 0}, {3, 0}, {3, 2}, {2, 2}};
  auto ser = total_predictive_sweep({2, 1}, sweep, p, {}, Execution::serial);
  auto par = total_predictive_sweep({2, 1}, sweep, p, {}, Execution::parallel);
  ASSERT_EQ(ser.size(), sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    EXPECT_EQ(ser[i].lambda, par[i].lambda);
    EXPECT_EQ(ser[i].lambda, total_predictive_mean({2, 1}, sweep[i], p).lambda);
  }
}

TEST(KtonGrid, LayoutAndZeroCells) {
  Hyperparams p{20.0, 0.3, 0.7, 0.4, 0.6, 1.0, 2.0};
  const int v = 3;
  auto g = kton_predictive_grid({2, 2}, {2, 5}, v, p, {}, Execution::serial);
  ASSERT_EQ(g.size(), 16u);
  EXPECT_EQ(g[0].lambda, 0.0);
  for (long k1 = 0; k1 <= v; ++k1) {
    for (long k2 = 0; k2 <= v; ++k2) {
      double cell = g[static_cast<std::size_t>(k1 * (v + 1) + k2)].lambda;
      if (k1 + k2 == 0 || k1 > 2) {
        EXPECT_EQ(cell, 0.0);
      } else {
        EXPECT_EQ(cell, kton_predictive_mean({2, 2}, {2, 5}, {k1, k2}, p).lambda);
      }
    }
  }
  auto par = kton_predictive_grid({2, 2}, {2, 5}, v, p, {}, Execution::parallel);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g[i].lambda, par[i].lambda);
}

TEST(KtonGrid, PartialGridFlagsShallowCellsInsteadOfThrowing) {
  Hyperparams p{20.0, 0.3, 0.7, 0.4, 0.6, 1.0, 2.0};
  QuadratureConfig shallow{1e-14, 0.0, 3};
  auto cells = kton_predictive_grid_partial({2, 2}, {3, 3}, 2, p, shallow, Execution::serial);
  EXPECT_THROW(kton_predictive_grid({2, 2}, {3, 3}, 2, p, shallow, Execution::serial), ConvergenceError);
  int flagged = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    flagged += !cells[i].converged;
    EXPECT_GT(cells[i].lambda, 0.0);
  }
  EXPECT_GT(flagged, 0);
  auto full = kton_predictive_grid_partial({2, 2}, {3, 3}, 2, p, {}, Execution::serial);
  for (const auto& c : full) EXPECT_TRUE(c.converged);
}

TEST(Diagnostics, FirstMomentsMatchOracle) {
  auto d = rate_measure_diagnostics(kFlat, {}, {1e-1, 1e-2, 1e-3, 1e-4});
  ASSERT_TRUE(d.first_moments_finite);
  EXPECT_NEAR(d.first_moment[0].value / oracle::kFirstMomentTheta1, 1.0, 1e-9);
  EXPECT_NEAR(d.first_moment[1].value / oracle::kFirstMomentTheta2, 1.0, 1e-9);
  EXPECT_TRUE(d.mass_strictly_increasing);
  ASSERT_EQ(d.growth_ratio.size(), 3u);
  for (double r : d.growth_ratio) EXPECT_GT(r, 1.0);
}

TEST(Diagnostics, LinearInAlpha) {
  Hyperparams p{1.5, 0.3, 0.6, 0.7, 0.4, 2.0, 0.8};
  Hyperparams q = p;
  q.alpha *= 2.0;
  auto a = rate_measure_diagnostics(p, {}, {1e-2, 1e-3});
  auto b = rate_measure_diagnostics(q, {}, {1e-2, 1e-3});
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(b.first_moment[i].value / a.first_moment[i].value, 2.0, 1e-13);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(b.truncated_mass[i].mass.value / a.truncated_mass[i].mass.value, 2.0, 1e-13);
  }
}

TEST(Diagnostics, TruncatedFirstMomentApproachesFullMoment) {
  auto d = rate_measure_diagnostics(kFlat, {}, {1e-1});
  for (int pop = 0; pop < 2; ++pop) {
    EXPECT_EQ(truncated_first_moment(kFlat, 0.0, pop).value, d.first_moment[pop].value);
    double prev = 0.0;
    for (double lo : {1e-1, 1e-3, 1e-5, 1e-8}) {
      const double m = truncated_first_moment(kFlat, lo, pop).value;
      EXPECT_GT(m, prev);
      EXPECT_LT(m, d.first_moment[pop].value);
      prev = m;
    }
    EXPECT_NEAR(prev / d.first_moment[pop].value, 1.0, 1e-3);
  }
  EXPECT_THROW(truncated_first_moment(kFlat, 1e-3, 2), InvalidArgument);
}

TEST(Diagnostics, RejectsBadGrid) {
  EXPECT_THROW(rate_measure_diagnostics(kFlat, {}, {1e-2, 1e-1}), InvalidArgument);
  EXPECT_THROW(rate_measure_diagnostics(kFlat, {}, {0.7}), InvalidArgument);
}

}  // namespace
}  // namespace vf
