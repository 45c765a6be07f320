#pragma once

// Presence/absence data for two populations over a shared variant registry,
// plus the statistics the predictors are scored against: new-variant k-ton
// tables, totals, growth curves and cross-validation folds.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vf/model.hpp"

namespace vf {

using VariantId = std::uint32_t;

/// Interned variant labels. Datasets derived from one another share a
/// registry, which is what makes their variant ids comparable.
class VariantRegistry {
 public:
  VariantId intern(std::string_view label);
  const std::string& label(VariantId id) const { return labels_.at(id); }
  std::size_t size() const { return labels_.size(); }

 private:
  std::unordered_map<std::string, VariantId> ids_;
  std::vector<std::string> labels_;
};

struct Sample {
  std::string id;
  std::vector<VariantId> variants;  // sorted, unique
};

/// Reference to sample `index` of population `pop` (0 or 1).
struct SampleRef {
  int pop;
  std::size_t index;
};

class VariantDataset {
 public:
  VariantDataset() : registry_(std::make_shared<VariantRegistry>()) {}
  explicit VariantDataset(std::shared_ptr<VariantRegistry> registry);

  const std::shared_ptr<VariantRegistry>& registry() const { return registry_; }
  bool shares_registry(const VariantDataset& other) const { return registry_ == other.registry_; }

  /// Appends a sample; ids are sorted and deduplicated. Throws
  /// InvalidArgument on a duplicate sample id within the population or an id
  /// outside the registry.
  void add_sample(int pop, std::string id, std::vector<VariantId> variants);

  const std::vector<Sample>& samples(int pop) const { return pops_.at(static_cast<std::size_t>(pop)); }
  const Sample& sample(SampleRef r) const;
  CountPair sizes() const {
    return {static_cast<long>(pops_[0].size()), static_cast<long>(pops_[1].size())};
  }
  /// Index of a sample id within a population, -1 if absent.
  long find_sample(int pop, const std::string& id) const;

  /// Distinct variants present in at least one sample.
  std::size_t distinct_variants() const;

  /// New dataset on the same registry holding the listed samples, in order.
  VariantDataset subset(const std::array<std::vector<std::size_t>, 2>& indices) const;

 private:
  std::shared_ptr<VariantRegistry> registry_;
  std::array<std::vector<Sample>, 2> pops_;
  std::array<std::unordered_map<std::string, std::size_t>, 2> index_;
};

/// Counts (observed or expected) on the grid 0 <= k1, k2 <= v. Cell (0,0)
/// is always 0.
class KtonTable {
 public:
  explicit KtonTable(int v = 1);
  int v() const { return v_; }
  double& at(long k1, long k2);
  double at(long k1, long k2) const;
  const std::vector<double>& cells() const { return cells_; }

 private:
  int v_;
  std::vector<double> cells_;
};

/// Number of distinct variants after each sample; counts[i] covers the first
/// i + 1 samples.
struct GrowthCurve {
  std::vector<double> counts;
};

struct FoldPlan {
  int n_folds = 0;
  std::uint64_t seed = 0;
  /// blocks[f][pop]: sample indices of population pop held in block f.
  std::vector<std::array<std::vector<std::size_t>, 2>> blocks;
};

/// Variants absent from every pilot sample, tallied by their follow-up
/// counts; variants with either count above v are left out.
KtonTable count_new_ktons(const VariantDataset& pilot, const VariantDataset& followup, int v);

/// Variants absent from every pilot sample and present in the follow-up.
long count_new_total(const VariantDataset& pilot, const VariantDataset& followup);

/// Cumulative distinct-variant counts along `order`.
GrowthCurve growth_curve(const VariantDataset& data, const std::vector<SampleRef>& order);

/// Growth curve of new variants (absent from the pilot) along the
/// follow-up samples in `order`.
GrowthCurve new_variant_curve(const VariantDataset& pilot, const VariantDataset& followup,
                              const std::vector<SampleRef>& order);

/// Seeded partition of each population into n_folds blocks whose sizes
/// differ by at most one.
FoldPlan make_folds(const VariantDataset& data, int n_folds, std::uint64_t seed);

/// Pilot (block f) and follow-up (all other blocks) datasets of fold f.
VariantDataset fold_pilot(const VariantDataset& data, const FoldPlan& plan, int fold);
VariantDataset fold_followup(const VariantDataset& data, const FoldPlan& plan, int fold);

/// Least-squares slope of ln(count) against ln(index) over the final third
/// of the curve (the last floor(n/3) points, 1-based indices).
double fit_power_law_slope(const GrowthCurve& curve);

}  // namespace vf
