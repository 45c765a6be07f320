#include "vf/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace vf {

namespace {

constexpr std::size_t kAtomChunk = 8192;
constexpr long kNever = std::numeric_limits<long>::max();

std::vector<double> geometric_edges(double lo, double hi, int per_decade) {
  const double decades = std::log10(hi / lo);
  const int n = std::max(1, static_cast<int>(std::ceil(decades * per_decade - 1e-9)));
  std::vector<double> e(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) e[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / n);
  e.front() = lo;
  e.back() = hi;
  return e;
}

// Index of the next sample (from `from`) that includes an item of frequency
// theta; values >= n mean none.
long next_hit(long from, double theta, Rng& rng) {
  if (theta >= 1.0) return from;
  if (theta <= 0.0) return kNever;
  // Inversion with log1p: std::geometric_distribution divides by
  // log(1 - theta), which rounds to 0 for theta below about 1e-16.
  const double u = std::generate_canonical<double, std::numeric_limits<double>::digits>(rng);
  const double s = std::floor(std::log1p(-u) / std::log1p(-theta));
  return s >= static_cast<double>(kNever - from) ? kNever : from + static_cast<long>(s);
}

}  // namespace

void SimConfig::validate() const {
  if (!(truncation_floor > 0.0 && truncation_floor < 0.5) || cells_per_decade < 1) {
    throw InvalidArgument("simulation config requires 0 < truncation_floor < 0.5 and cells_per_decade >= 1");
  }
  if (n_samples.p1 < 0 || n_samples.p2 < 0) throw InvalidArgument("sample counts must be nonnegative");
}

std::array<std::vector<double>, 2> proposed_mesh(const Hyperparams& phi, const SimConfig& cfg) {
  phi.validate();
  cfg.validate();
  std::array<std::vector<double>, 2> out;
  const double c[2] = {phi.c1, phi.c2};
  for (int p = 0; p < 2; ++p) {
    if (c[p] >= 1.0) {
      out[p] = geometric_edges(cfg.truncation_floor, 1.0, cfg.cells_per_decade);
    } else {
      auto lower = geometric_edges(cfg.truncation_floor, 0.5, cfg.cells_per_decade);
      out[p] = lower;
      for (auto it = lower.rbegin() + 1; it != lower.rend(); ++it) out[p].push_back(1.0 - *it);
    }
  }
  return out;
}

RateTarget proposed_target(const Hyperparams& phi) {
  phi.validate();
  RateTarget t;
  t.log_density = [phi](double t1, double t2) {
    return log_rate_density(std::log(t1), std::log(t2), std::log1p(-t1), std::log1p(-t2), phi);
  };
  // Every factor of the density is monotone in each coordinate, so the
  // product of the per-factor maxima over the cell corners bounds it.
  const double log_norm = std::log(phi.alpha) - log_beta(phi.phi1, phi.c1) - log_beta(phi.phi2, phi.c2);
  t.log_cell_bound = [phi, log_norm](const Cell& g) {
    const double ph[2] = {phi.phi1, phi.phi2};
    const double c[2] = {phi.c1, phi.c2};
    double b = log_norm + log_rate_coupling(std::log(g.lo[0]), std::log(g.lo[1]), phi);
    for (int p = 0; p < 2; ++p) {
      b += (ph[p] - 1.0) * std::log(ph[p] < 1.0 ? g.lo[p] : g.hi[p]);
      b += (c[p] - 1.0) * std::log1p(-(c[p] < 1.0 ? g.hi[p] : g.lo[p]));
    }
    return b;
  };
  return t;
}

TruncatedPppSampler::TruncatedPppSampler(RateTarget target, std::array<std::vector<double>, 2> edges)
    : target_(std::move(target)) {
  for (const auto& e : edges) {
    if (e.size() < 2 || !(e.front() > 0.0) || !(e.back() <= 1.0) || !std::is_sorted(e.begin(), e.end()) ||
        std::adjacent_find(e.begin(), e.end()) != e.end()) {
      throw InvalidArgument("mesh edges must be strictly increasing inside (0,1]");
    }
  }
  std::vector<double> weights;
  for (std::size_t i = 0; i + 1 < edges[0].size(); ++i) {
    for (std::size_t j = 0; j + 1 < edges[1].size(); ++j) {
      Cell g{{edges[0][i], edges[1][j]}, {edges[0][i + 1], edges[1][j + 1]}};
      const double lb = target_.log_cell_bound(g);
      const double w = std::exp(lb + std::log(g.hi[0] - g.lo[0]) + std::log(g.hi[1] - g.lo[1]));
      if (!std::isfinite(w)) throw InvalidArgument("cell bound is not finite");
      cells_.push_back(g);
      log_bound_.push_back(lb);
      weights.push_back(w);
      total_ += w;
    }
  }
  pick_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
}

FrequencyAtoms TruncatedPppSampler::sample(Rng& rng) const {
  FrequencyAtoms out;
  if (!(total_ > 0.0)) return out;
  std::discrete_distribution<std::size_t> pick(pick_.param());
  const long n = std::poisson_distribution<long>(total_)(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uint64_t next_id = 0;
  for (long i = 0; i < n; ++i) {
    const std::size_t k = pick(rng);
    const Cell& g = cells_[k];
    const double t1 = g.lo[0] + (g.hi[0] - g.lo[0]) * u(rng);
    const double t2 = g.lo[1] + (g.hi[1] - g.lo[1]) * u(rng);
    const double v = u(rng);
    if (t1 >= 1.0 || t2 >= 1.0) continue;  // measure zero
    const double excess = target_.log_density(t1, t2) - log_bound_[k];
    if (excess > 1e-9) {
      std::ostringstream msg;
      msg << "rate density exceeds its cell bound at (" << t1 << ", " << t2 << ") in cell [" << g.lo[0] << ","
          << g.hi[0] << "]x[" << g.lo[1] << "," << g.hi[1] << "], log excess " << excess;
      throw std::logic_error(msg.str());
    }
    if (std::log(v) < excess) out.atoms.push_back({next_id++, {t1, t2}});
  }
  return out;
}

FrequencyAtoms sample_proposed_atoms(const Hyperparams& phi, const SimConfig& cfg) {
  TruncatedPppSampler s(proposed_target(phi), proposed_mesh(phi, cfg));
  Rng rng = substream(cfg.seed, 0xa70);
  return s.sample(rng);
}

VariantDataset sample_bernoulli_process(const FrequencyAtoms& atoms, CountPair n, std::uint64_t seed,
                                        Execution ex) {
  if (n.p1 < 0 || n.p2 < 0) throw InvalidArgument("sample counts must be nonnegative");
  struct Hit {
    int pop;
    long sample;
    std::size_t atom;
  };
  const std::size_t n_atoms = atoms.atoms.size();
  const std::size_t chunks = (n_atoms + kAtomChunk - 1) / kAtomChunk;
  std::vector<std::vector<Hit>> hits(chunks);
  for_each_index(chunks, ex, [&](std::size_t c) {
    Rng rng = substream(seed, 0xbe1, c);
    const std::size_t end = std::min(n_atoms, (c + 1) * kAtomChunk);
    for (std::size_t a = c * kAtomChunk; a < end; ++a) {
      for (int pop = 0; pop < 2; ++pop) {
        const long size = n[pop];
        const double theta = atoms.atoms[a].theta[pop];
        for (long s = next_hit(0, theta, rng); s < size; s = next_hit(s + 1, theta, rng)) {
          hits[c].push_back({pop, s, a});
        }
      }
    }
  });
  VariantDataset out;
  auto& reg = *out.registry();
  std::vector<VariantId> label(n_atoms, 0);
  std::vector<char> labelled(n_atoms, 0);
  std::array<std::vector<std::vector<VariantId>>, 2> per_sample;
  per_sample[0].resize(static_cast<std::size_t>(n.p1));
  per_sample[1].resize(static_cast<std::size_t>(n.p2));
  for (const auto& chunk : hits) {
    for (const Hit& h : chunk) {
      if (!labelled[h.atom]) {
        label[h.atom] = reg.intern("v" + std::to_string(atoms.atoms[h.atom].id));
        labelled[h.atom] = 1;
      }
      per_sample[static_cast<std::size_t>(h.pop)][static_cast<std::size_t>(h.sample)].push_back(label[h.atom]);
    }
  }
  for (int pop = 0; pop < 2; ++pop) {
    auto& ps = per_sample[static_cast<std::size_t>(pop)];
    for (std::size_t s = 0; s < ps.size(); ++s) {
      out.add_sample(pop, "p" + std::to_string(pop + 1) + "_" + std::to_string(s), std::move(ps[s]));
    }
  }
  return out;
}

std::vector<std::array<long, 2>> first_appearances(const FrequencyAtoms& atoms, std::uint64_t seed) {
  const std::size_t n_atoms = atoms.atoms.size();
  std::vector<std::array<long, 2>> out(n_atoms);
  const std::size_t chunks = (n_atoms + kAtomChunk - 1) / kAtomChunk;
  for_each_index(chunks, Execution::parallel, [&](std::size_t c) {
    Rng rng = substream(seed, 0xf1a, c);
    const std::size_t end = std::min(n_atoms, (c + 1) * kAtomChunk);
    for (std::size_t a = c * kAtomChunk; a < end; ++a) {
      for (int pop = 0; pop < 2; ++pop) {
        long s = next_hit(0, atoms.atoms[a].theta[pop], rng);
        out[a][static_cast<std::size_t>(pop)] = s == kNever ? kNever : s + 1;
      }
    }
  });
  return out;
}

GrowthCurve scheme_growth_curve(const std::vector<std::array<long, 2>>& first, const GrowthScheme& scheme,
                                long length) {
  if (length < 1) throw InvalidArgument("growth curve length must be positive");
  if (scheme.kind == GrowthScheme::proportional && !(scheme.rho > 0.0)) {
    throw InvalidArgument("proportional scheme needs rho > 0");
  }
  std::vector<double> born(static_cast<std::size_t>(length) + 1, 0.0);
  for (const auto& f : first) {
    long step = kNever;
    switch (scheme.kind) {
      case GrowthScheme::projection1:
        step = f[0];
        break;
      case GrowthScheme::projection2:
        step = f[1];
        break;
      case GrowthScheme::proportional: {
        // Smallest n1 with ceil(rho n1) >= f2.
        long via2 = kNever;
        if (f[1] != kNever) {
          double guess = std::floor(static_cast<double>(f[1] - 1) / scheme.rho);
          via2 = guess >= static_cast<double>(length) ? kNever : static_cast<long>(guess) + 1;
          while (via2 != kNever && via2 > 1 && std::ceil(scheme.rho * static_cast<double>(via2 - 1)) >= f[1]) --via2;
          while (via2 != kNever && std::ceil(scheme.rho * static_cast<double>(via2)) < f[1]) ++via2;
        }
        step = std::min(f[0], via2);
        break;
      }
    }
    if (step <= length) born[static_cast<std::size_t>(step)] += 1.0;
  }
  GrowthCurve g;
  g.counts.resize(static_cast<std::size_t>(length));
  double run = 0.0;
  for (long i = 1; i <= length; ++i) {
    run += born[static_cast<std::size_t>(i)];
    g.counts[static_cast<std::size_t>(i - 1)] = run;
  }
  return g;
}

VariantDataset sample_ibp_3bp(const Bp3Params& p, long n_total, std::uint64_t seed) {
  p.validate();
  if (n_total < 1) throw InvalidArgument("the buffet needs at least one customer");
  Rng rng = substream(seed, 0x1b9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VariantDataset out;
  auto& reg = *out.registry();
  std::vector<long> taken;  // m_k
  for (long n = 1; n <= n_total; ++n) {
    std::vector<VariantId> dishes;
    const double denom = static_cast<double>(n - 1) + p.c;
    for (std::size_t k = 0; k < taken.size(); ++k) {
      if (u(rng) < (static_cast<double>(taken[k]) - p.sigma) / denom) dishes.push_back(static_cast<VariantId>(k));
    }
    const double rate =
        p.alpha * std::exp(log_pochhammer(p.c + p.sigma, n - 1) - log_pochhammer(p.c + 1.0, n - 1));
    const long fresh = std::poisson_distribution<long>(rate)(rng);
    for (long j = 0; j < fresh; ++j) {
      dishes.push_back(reg.intern("d" + std::to_string(taken.size())));
      taken.push_back(0);
    }
    for (VariantId d : dishes) ++taken[d];
    out.add_sample(0, "s" + std::to_string(n), std::move(dishes));
  }
  return out;
}

VariantDataset split_pooled(const VariantDataset& data, CountPair sizes, std::uint64_t seed) {
  const auto& all = data.samples(0);
  if (sizes.p1 < 0 || sizes.p2 < 0 || static_cast<std::size_t>(sizes.total()) != all.size() ||
      !data.samples(1).empty()) {
    throw InvalidArgument("split sizes must add up to the pooled sample count");
  }
  std::vector<std::size_t> perm(all.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = substream(seed, 0x5b1);
  std::shuffle(perm.begin(), perm.end(), rng);
  VariantDataset out(data.registry());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const Sample& s = all[perm[i]];
    out.add_sample(i < static_cast<std::size_t>(sizes.p1) ? 0 : 1, s.id, s.variants);
  }
  return out;
}

VariantDataset sample_semisynthetic(const std::vector<FrequencyRow>& table, CountPair n, std::uint64_t seed) {
  if (n.p1 < 0 || n.p2 < 0) throw InvalidArgument("sample counts must be nonnegative");
  VariantDataset out;
  auto& reg = *out.registry();
  std::array<std::vector<std::vector<VariantId>>, 2> per_sample;
  per_sample[0].resize(static_cast<std::size_t>(n.p1));
  per_sample[1].resize(static_cast<std::size_t>(n.p2));
  Rng rng = substream(seed, 0x5e3);
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (int pop = 0; pop < 2; ++pop) {
      const double f = table[r].freq[pop];
      if (!(f >= 0.0 && f <= 1.0)) throw DataError("frequency outside [0,1]", r + 1);
    }
    const VariantId id = reg.intern(table[r].variant);
    for (int pop = 0; pop < 2; ++pop) {
      const long size = n[pop];
      const double f = table[r].freq[pop];
      for (long s = next_hit(0, f, rng); s < size; s = next_hit(s + 1, f, rng)) {
        per_sample[static_cast<std::size_t>(pop)][static_cast<std::size_t>(s)].push_back(id);
      }
    }
  }
  for (int pop = 0; pop < 2; ++pop) {
    auto& ps = per_sample[static_cast<std::size_t>(pop)];
    for (std::size_t s = 0; s < ps.size(); ++s) {
      out.add_sample(pop, "p" + std::to_string(pop + 1) + "_" + std::to_string(s), std::move(ps[s]));
    }
  }
  return out;
}

}  // namespace vf
