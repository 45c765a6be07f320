#pragma once

// Synthetic data: truncated Poisson point process draws of frequency pairs,
// Bernoulli-process samples given those frequencies, the three-parameter
// Indian buffet process for the pooled baseline, and semi-synthetic draws
// from frequency tables.

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "vf/baselines.hpp"
#include "vf/data.hpp"
#include "vf/io.hpp"
#include "vf/model.hpp"
#include "vf/parallel.hpp"
#include "vf/rng.hpp"

namespace vf {

struct Atom {
  std::uint64_t id;
  double theta[2];
};

struct FrequencyAtoms {
  std::vector<Atom> atoms;
};

struct SimConfig {
  /// Smallest retained frequency on either axis.
  double truncation_floor = 1e-10;
  /// Mesh cells per decade; 1 gives the plain decade mesh. Any mesh gives
  /// the same distribution, finer ones reject fewer proposals.
  int cells_per_decade = 4;
  std::uint64_t seed = 0;
  CountPair n_samples{0, 0};

  /// Throws InvalidArgument unless 0 < floor < 0.5 and cells_per_decade >= 1.
  void validate() const;
};

/// Axis-aligned mesh cell [lo1,hi1] x [lo2,hi2].
struct Cell {
  double lo[2];
  double hi[2];
};

/// Target intensity for the rejection sampler: its log density on the
/// interior and an upper bound of the log density over a mesh cell.
struct RateTarget {
  std::function<double(double t1, double t2)> log_density;
  std::function<double(const Cell&)> log_cell_bound;
};

/// Cell edges per axis for the proposed-model rate. An axis whose beta
/// factor grows toward 1 (c < 1) gets a mesh mirrored toward 1 and is
/// truncated at 1 - floor as well.
std::array<std::vector<double>, 2> proposed_mesh(const Hyperparams& phi, const SimConfig& cfg);

/// Rate-measure target for the proposed model with per-cell bounds built
/// from the monotonicity of each factor of the density.
RateTarget proposed_target(const Hyperparams& phi);

/// Rejection sampler for a Poisson point process on a rectangular mesh. The
/// proposal is piecewise constant at each cell's bound; the total proposal
/// count is drawn once and spread over cells in proportion to bound x area,
/// which is the same process as independent per-cell draws.
class TruncatedPppSampler {
 public:
  TruncatedPppSampler(RateTarget target, std::array<std::vector<double>, 2> edges);

  /// One realization. Throws std::logic_error if an accepted point's density
  /// exceeds its cell bound (the bound is then invalid).
  FrequencyAtoms sample(Rng& rng) const;
  double proposal_mass() const { return total_; }
  std::size_t cells() const { return cells_.size(); }

 private:
  RateTarget target_;
  std::vector<Cell> cells_;
  std::vector<double> log_bound_;
  double total_ = 0.0;
  mutable std::discrete_distribution<std::size_t> pick_;
};

/// Truncated proposed-model realization.
FrequencyAtoms sample_proposed_atoms(const Hyperparams& phi, const SimConfig& cfg);

/// Samples n.p1 and n.p2 individuals; each includes each atom independently
/// with its population's frequency. Variant labels are "v<atom id>"; sample
/// ids are "p<pop>_<index>".
VariantDataset sample_bernoulli_process(const FrequencyAtoms& atoms, CountPair n, std::uint64_t seed,
                                        Execution ex = Execution::parallel);

/// 1-based sample index of each atom's first appearance in each population
/// when individuals are drawn one at a time (geometric with the atom's
/// frequency). Frequencies of zero give the largest long.
std::vector<std::array<long, 2>> first_appearances(const FrequencyAtoms& atoms, std::uint64_t seed);

/// Growth-curve schemes: only one population sampled, or both with
/// N2 = ceil(rho N1).
struct GrowthScheme {
  enum Kind { projection1, projection2, proportional } kind = projection1;
  double rho = 1.0;
};

/// Number of distinct atoms seen after 1..length steps of the scheme (steps
/// count population-1 samples except under projection2).
GrowthCurve scheme_growth_curve(const std::vector<std::array<long, 2>>& first, const GrowthScheme& scheme,
                                long length);

/// Sequential three-parameter Indian buffet process for n_total customers,
/// all in population 1 of the result.
VariantDataset sample_ibp_3bp(const Bp3Params& p, long n_total, std::uint64_t seed);

/// Random partition of a single-population dataset into populations of the
/// given sizes. Variant ids and the registry are preserved.
VariantDataset split_pooled(const VariantDataset& data, CountPair sizes, std::uint64_t seed);

/// Independent Bernoulli draws at tabulated frequencies. Throws DataError
/// (with the 1-based row) for frequencies outside [0,1].
VariantDataset sample_semisynthetic(const std::vector<FrequencyRow>& table, CountPair n, std::uint64_t seed);

}  // namespace vf
