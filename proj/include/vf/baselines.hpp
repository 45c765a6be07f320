#pragma once

// Single-population three-parameter beta process (3BP) predictors applied to
// two populations, either pooled into one (d3BP) or treated as unrelated
// processes (i3BP).
//
// Under a 3BP with mass alpha, concentration c and discount sigma, the mean
// number of new variants seen exactly k times in m follow-up samples after a
// pilot of n is
//
//   alpha C(m,k) (1-sigma)_(k-1) (c+sigma)_(n+m-k) / (c+1)_(n+m-1)
//
// with (a)_b = Gamma(a+b)/Gamma(a).

#include "vf/model.hpp"

namespace vf {

struct Bp3Params {
  double alpha = 1.0;
  double c = 1.0;
  double sigma = 0.5;

  /// Throws InvalidArgument unless alpha > 0, 0 <= sigma < 1, c > -sigma.
  void validate() const;
};

struct I3bpParams {
  Bp3Params pop1;
  Bp3Params pop2;

  void validate() const {
    pop1.validate();
    pop2.validate();
  }
};

/// Rising-factorial convention used in the closed forms. `standard` is the
/// Pochhammer symbol and is what the 3BP integrals produce; `quoted`
/// (Gamma(a+b)/Gamma(a+1)) is kept so the two can be compared against
/// simulation.
enum class RisingConvention { standard, quoted };

/// Pooled k-ton mean: both populations share one frequency per variant.
/// Requires k_p <= M_p and k1 + k2 >= 1 (InvalidArgument).
double d3bp_kton_mean(CountPair pilot, CountPair followup, CountPair k, const Bp3Params& p,
                      RisingConvention conv = RisingConvention::standard);

/// Pooled total mean: one population of N1 + N2 pilot and M1 + M2 follow-up
/// samples.
double d3bp_total_mean(CountPair pilot, CountPair followup, const Bp3Params& p,
                       RisingConvention conv = RisingConvention::standard);

/// Single-population total mean after n pilot samples, for m follow-ups.
double bp3_total_mean(long n, long m, const Bp3Params& p);

/// Sum of two independent single-population totals.
double i3bp_total_mean(CountPair pilot, CountPair followup, const I3bpParams& p);

/// Zero whenever both k components are positive (unrelated processes never
/// share a variant); otherwise the single-population k-ton mean of the
/// population with the nonzero component.
double i3bp_kton_mean(CountPair pilot, CountPair followup, CountPair k, const I3bpParams& p);

}  // namespace vf
