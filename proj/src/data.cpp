#include "vf/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vf/rng.hpp"

namespace vf {

VariantId VariantRegistry::intern(std::string_view label) {
  auto [it, inserted] = ids_.try_emplace(std::string(label), static_cast<VariantId>(labels_.size()));
  if (inserted) labels_.emplace_back(label);
  return it->second;
}

VariantDataset::VariantDataset(std::shared_ptr<VariantRegistry> registry) : registry_(std::move(registry)) {
  if (!registry_) throw InvalidArgument("dataset needs a registry");
}

void VariantDataset::add_sample(int pop, std::string id, std::vector<VariantId> variants) {
  if (pop != 0 && pop != 1) throw InvalidArgument("population index must be 0 or 1");
  auto p = static_cast<std::size_t>(pop);
  if (index_[p].count(id)) throw InvalidArgument("duplicate sample id '" + id + "'");
  std::sort(variants.begin(), variants.end());
  variants.erase(std::unique(variants.begin(), variants.end()), variants.end());
  if (!variants.empty() && variants.back() >= registry_->size()) {
    throw InvalidArgument("variant id outside the registry");
  }
  index_[p].emplace(id, pops_[p].size());
  pops_[p].push_back({std::move(id), std::move(variants)});
}

const Sample& VariantDataset::sample(SampleRef r) const {
  if (r.pop != 0 && r.pop != 1) throw InvalidArgument("population index must be 0 or 1");
  const auto& v = pops_[static_cast<std::size_t>(r.pop)];
  if (r.index >= v.size()) throw InvalidArgument("sample reference out of range");
  return v[r.index];
}

long VariantDataset::find_sample(int pop, const std::string& id) const {
  const auto& m = index_.at(static_cast<std::size_t>(pop));
  auto it = m.find(id);
  return it == m.end() ? -1 : static_cast<long>(it->second);
}

std::size_t VariantDataset::distinct_variants() const {
  std::vector<char> seen(registry_->size(), 0);
  std::size_t n = 0;
  for (const auto& pop : pops_) {
    for (const auto& s : pop) {
      for (VariantId v : s.variants) {
        if (!seen[v]) {
          seen[v] = 1;
          ++n;
        }
      }
    }
  }
  return n;
}

VariantDataset VariantDataset::subset(const std::array<std::vector<std::size_t>, 2>& indices) const {
  VariantDataset out(registry_);
  for (int pop = 0; pop < 2; ++pop) {
    for (std::size_t i : indices[static_cast<std::size_t>(pop)]) {
      const Sample& s = sample({pop, i});
      out.add_sample(pop, s.id, s.variants);
    }
  }
  return out;
}

KtonTable::KtonTable(int v) : v_(v) {
  if (v < 1) throw InvalidArgument("k-ton table bound must be at least 1");
  cells_.assign(static_cast<std::size_t>(v + 1) * static_cast<std::size_t>(v + 1), 0.0);
}

double& KtonTable::at(long k1, long k2) {
  if (k1 < 0 || k2 < 0 || k1 > v_ || k2 > v_) throw InvalidArgument("k-ton cell outside the table");
  return cells_[static_cast<std::size_t>(k1 * (v_ + 1) + k2)];
}

double KtonTable::at(long k1, long k2) const { return const_cast<KtonTable*>(this)->at(k1, k2); }

namespace {

void require_shared(const VariantDataset& a, const VariantDataset& b) {
  if (!a.shares_registry(b)) throw InvalidArgument("pilot and follow-up use different variant registries");
}

std::vector<char> pilot_mask(const VariantDataset& pilot) {
  std::vector<char> in_pilot(pilot.registry()->size(), 0);
  for (int pop = 0; pop < 2; ++pop) {
    for (const auto& s : pilot.samples(pop)) {
      for (VariantId v : s.variants) in_pilot[v] = 1;
    }
  }
  return in_pilot;
}

// Per-variant follow-up counts for variants missing from the pilot.
std::vector<std::array<long, 2>> new_variant_counts(const VariantDataset& pilot, const VariantDataset& followup) {
  require_shared(pilot, followup);
  auto in_pilot = pilot_mask(pilot);
  std::vector<std::array<long, 2>> counts(in_pilot.size(), {0, 0});
  for (int pop = 0; pop < 2; ++pop) {
    for (const auto& s : followup.samples(pop)) {
      for (VariantId v : s.variants) {
        if (!in_pilot[v]) ++counts[v][static_cast<std::size_t>(pop)];
      }
    }
  }
  return counts;
}

}  // namespace

KtonTable count_new_ktons(const VariantDataset& pilot, const VariantDataset& followup, int v) {
  KtonTable t(v);
  for (const auto& c : new_variant_counts(pilot, followup)) {
    if (c[0] + c[1] == 0 || c[0] > v || c[1] > v) continue;
    t.at(c[0], c[1]) += 1.0;
  }
  return t;
}

long count_new_total(const VariantDataset& pilot, const VariantDataset& followup) {
  long n = 0;
  for (const auto& c : new_variant_counts(pilot, followup)) n += (c[0] + c[1] > 0);
  return n;
}

namespace {

GrowthCurve accumulate(const VariantDataset& data, const std::vector<SampleRef>& order, std::vector<char> seen) {
  GrowthCurve g;
  g.counts.reserve(order.size());
  double n = 0.0;
  for (const auto& r : order) {
    for (VariantId v : data.sample(r).variants) {
      if (!seen[v]) {
        seen[v] = 1;
        n += 1.0;
      }
    }
    g.counts.push_back(n);
  }
  return g;
}

}  // namespace

GrowthCurve growth_curve(const VariantDataset& data, const std::vector<SampleRef>& order) {
  return accumulate(data, order, std::vector<char>(data.registry()->size(), 0));
}

GrowthCurve new_variant_curve(const VariantDataset& pilot, const VariantDataset& followup,
                              const std::vector<SampleRef>& order) {
  require_shared(pilot, followup);
  return accumulate(followup, order, pilot_mask(pilot));
}

FoldPlan make_folds(const VariantDataset& data, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw InvalidArgument("at least two folds are needed");
  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  plan.blocks.resize(static_cast<std::size_t>(n_folds));
  for (int pop = 0; pop < 2; ++pop) {
    const std::size_t n = data.samples(pop).size();
    if (n < static_cast<std::size_t>(n_folds)) {
      throw InsufficientData("population " + std::to_string(pop + 1) + " has fewer samples than folds");
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = substream(seed, 0xf01d, static_cast<std::uint64_t>(pop));
    std::shuffle(perm.begin(), perm.end(), rng);
    // Block f takes positions [f n / F, (f+1) n / F) of the permutation.
    for (int f = 0; f < n_folds; ++f) {
      std::size_t lo = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(n_folds);
      std::size_t hi = n * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(n_folds);
      auto& block = plan.blocks[static_cast<std::size_t>(f)][static_cast<std::size_t>(pop)];
      block.assign(perm.begin() + static_cast<long>(lo), perm.begin() + static_cast<long>(hi));
      std::sort(block.begin(), block.end());
    }
  }
  return plan;
}

VariantDataset fold_pilot(const VariantDataset& data, const FoldPlan& plan, int fold) {
  if (fold < 0 || fold >= plan.n_folds) throw InvalidArgument("fold index out of range");
  return data.subset(plan.blocks[static_cast<std::size_t>(fold)]);
}

VariantDataset fold_followup(const VariantDataset& data, const FoldPlan& plan, int fold) {
  if (fold < 0 || fold >= plan.n_folds) throw InvalidArgument("fold index out of range");
  std::array<std::vector<std::size_t>, 2> rest;
  for (int pop = 0; pop < 2; ++pop) {
    auto p = static_cast<std::size_t>(pop);
    std::vector<char> held(data.samples(pop).size(), 0);
    for (std::size_t i : plan.blocks[static_cast<std::size_t>(fold)][p]) held[i] = 1;
    for (std::size_t i = 0; i < held.size(); ++i) {
      if (!held[i]) rest[p].push_back(i);
    }
  }
  return data.subset(rest);
}

double fit_power_law_slope(const GrowthCurve& curve) {
  const std::size_t n = curve.counts.size();
  if (n < 6) throw InvalidArgument("power-law fit needs at least 6 points");
  const std::size_t start = n - n / 3;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(n - start);
  for (std::size_t i = start; i < n; ++i) {
    if (!(curve.counts[i] > 0.0)) throw DomainError("power-law fit needs positive counts in the final third");
    const double x = std::log(static_cast<double>(i + 1));
    const double y = std::log(curve.counts[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (sxy - sx * sy / m) / (sxx - sx * sx / m);
}

}  // namespace vf
