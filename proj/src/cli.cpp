#include "vf/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "vf/fitting.hpp"
#include "vf/io.hpp"
#include "vf/rng.hpp"

namespace vf {

namespace {

long parse_count(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("bad " + what + " '" + s + "'");
  }
  if (used != s.size() || v < 0) throw InvalidArgument("bad " + what + " '" + s + "'");
  return v;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

CountPair parse_pair(const std::string& text) {
  auto f = split_on(text, ':');
  if (f.size() != 2) throw InvalidArgument("expected N1:N2, got '" + text + "'");
  return {parse_count(f[0], "count"), parse_count(f[1], "count")};
}

std::vector<CountPair> parse_sweep(const std::string& text) {
  if (text.empty()) throw InvalidArgument("empty sweep");
  std::vector<CountPair> out;
  CountPair at{0, 0};
  for (const auto& seg : split_on(text, ',')) {
    auto f = split_on(seg, ':');
    if (f.size() != 2 && f.size() != 3) throw InvalidArgument("sweep segment '" + seg + "' is not M1:M2[:step]");
    CountPair to{parse_count(f[0], "sweep size"), parse_count(f[1], "sweep size")};
    if (to.p1 < at.p1 || to.p2 < at.p2) throw InvalidArgument("sweep segment '" + seg + "' moves backwards");
    if (f.size() == 2) {
      out.push_back(to);
    } else {
      const long step = parse_count(f[2], "sweep step");
      if (step < 1) throw InvalidArgument("sweep step must be positive");
      if (to == at) out.push_back(to);
      while (at.p1 < to.p1) {
        at.p1 = std::min(at.p1 + step, to.p1);
        out.push_back(at);
      }
      while (at.p2 < to.p2) {
        at.p2 = std::min(at.p2 + step, to.p2);
        out.push_back(at);
      }
    }
    at = to;
  }
  return out;
}

GrowthScheme parse_scheme(const std::string& text) {
  if (text == "projection1" || text == "projection-1") return {GrowthScheme::projection1, 1.0};
  if (text == "projection2" || text == "projection-2") return {GrowthScheme::projection2, 1.0};
  const std::string prefix = "proportional:";
  if (text.rfind(prefix, 0) == 0) {
    double rho = 0.0;
    try {
      rho = std::stod(text.substr(prefix.size()));
    } catch (const std::exception&) {
      throw InvalidArgument("bad proportional ratio in '" + text + "'");
    }
    if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("proportional ratio must be positive");
    return {GrowthScheme::proportional, rho};
  }
  throw InvalidArgument("unknown scheme '" + text + "' (projection1, projection2, proportional:rho)");
}

namespace {

using nlohmann::json;

struct Options {
  std::string input;
  std::string output;
  std::string model = "proposed";
  std::string params;
  std::string phi;
  std::string sweep;
  std::string scheme = "projection1";
  std::string pilot_size;
  std::string sizes;
  std::uint64_t seed = 0;
  int folds = 20;
  int v = 10;
  int predict_v = 1;
  int replicates = 100;
  int cells = 4;
  int max_iter = 200;
  long max_samples = 1000;
  double rel_tol = 1e-10;
  double floor = 1e-10;
};

QuadratureConfig quad_config(const Options& o) {
  QuadratureConfig q;
  q.rel_tol = o.rel_tol;
  q.validate();
  return q;
}

FitConfig fit_config(const Options& o) {
  FitConfig c;
  c.v = o.v;
  c.seed = o.seed;
  c.optimizer_max_iter = o.max_iter;
  c.validate();
  return c;
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  for (const auto& f : split_on(s, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(f, &used));
      if (used != f.size()) throw std::invalid_argument(f);
    } catch (const std::exception&) {
      throw InvalidArgument("bad number '" + f + "' in parameter list");
    }
  }
  return out;
}

// Parameters from --params (a fit file) or --phi (inline list in the order
// alpha,sigma1,sigma2,phi1,phi2,c1,c2 / alpha,c,sigma / pop1 then pop2).
ModelParams load_params(const Options& o, ModelKind model) {
  if (o.params.empty() == o.phi.empty()) throw InvalidArgument("give exactly one of --params and --phi");
  if (!o.params.empty()) {
    std::ifstream in(o.params);
    if (!in) throw DataError("cannot open '" + o.params + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    FitResult r = FitResult::from_json(buf.str());
    if (r.model != model) {
      throw InvalidArgument("parameter file holds a " + model_name(r.model) + " fit, not " + model_name(model));
    }
    return r.params;
  }
  auto x = parse_numbers(o.phi);
  switch (model) {
    case ModelKind::proposed: {
      if (x.size() != 7) throw InvalidArgument("--phi needs 7 values for the proposed model");
      Hyperparams h = Hyperparams::from_array({x[0], x[1], x[2], x[3], x[4], x[5], x[6]});
      h.validate();
      return h;
    }
    case ModelKind::d3bp: {
      if (x.size() != 3) throw InvalidArgument("--phi needs alpha,c,sigma for d3bp");
      Bp3Params b{x[0], x[1], x[2]};
      b.validate();
      return b;
    }
    case ModelKind::i3bp: {
      if (x.size() != 6) throw InvalidArgument("--phi needs 6 values for i3bp");
      I3bpParams i{{x[0], x[1], x[2]}, {x[3], x[4], x[5]}};
      i.validate();
      return i;
    }
  }
  throw InvalidArgument("unknown model");
}

json params_json(const ModelParams& p) {
  return json::parse(FitResult{ModelKind::proposed, p, 0, 0, 0, false, 0}.to_json()).at("params");
}

// Writes to --output when given, else to the command's stdout stream.
template <class Fn>
void emit(const Options& o, std::ostream& out, Fn&& fn) {
  if (o.output.empty()) {
    fn(out);
    return;
  }
  std::ofstream f(o.output);
  if (!f) throw DataError("cannot write '" + o.output + "'");
  fn(f);
  if (!f) throw DataError("write to '" + o.output + "' failed");
}

Header common_header(const std::string& command, const Options& o) {
  return {{"command", command}, {"model", o.model}, {"seed", std::to_string(o.seed)}};
}

std::string fmt(double x) { return format_double(x); }

// Split of a dataset into its first N_p samples per population (pilot) and
// the rest (follow-up).
std::pair<VariantDataset, VariantDataset> head_split(const VariantDataset& data, CountPair pilot) {
  std::array<std::vector<std::size_t>, 2> a, b;
  for (int pop = 0; pop < 2; ++pop) {
    const auto n = data.samples(pop).size();
    if (static_cast<std::size_t>(pilot[pop]) > n) {
      throw InsufficientData("pilot size exceeds population " + std::to_string(pop + 1));
    }
    for (std::size_t i = 0; i < n; ++i) {
      (i < static_cast<std::size_t>(pilot[pop]) ? a : b)[static_cast<std::size_t>(pop)].push_back(i);
    }
  }
  return {data.subset(a), data.subset(b)};
}

// ---- prediction helpers shared by predict and crossval ----

struct Prediction {
  PredictiveMean mean;
  bool exact = true;
};

std::vector<Prediction> totals(const ModelParams& p, CountPair n, const std::vector<CountPair>& sweep,
                               const QuadratureConfig& q, Execution ex) {
  std::vector<Prediction> out(sweep.size());
  if (const auto* h = std::get_if<Hyperparams>(&p)) {
    try {
      auto means = total_predictive_sweep(n, sweep, *h, q, ex);
      for (std::size_t i = 0; i < means.size(); ++i) out[i].mean = means[i];
    } catch (const ConvergenceError&) {
      for_each_index(sweep.size(), ex, [&](std::size_t i) {
        try {
          out[i].mean = total_predictive_mean(n, sweep[i], *h, q);
        } catch (const ConvergenceError& e) {
          out[i] = {{e.estimate(), e.error()}, false};
        }
      });
    }
    return out;
  }
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (const auto* b = std::get_if<Bp3Params>(&p)) {
      out[i].mean.lambda = d3bp_total_mean(n, sweep[i], *b);
    } else {
      out[i].mean.lambda = i3bp_total_mean(n, sweep[i], std::get<I3bpParams>(p));
    }
  }
  return out;
}

// Row-major (v+1)^2 grid; cells with k = 0 or k_p > M_p are zero.
std::vector<Prediction> kton_grid(const ModelParams& p, CountPair n, CountPair m, int v, const QuadratureConfig& q,
                                  Execution ex) {
  const auto side = static_cast<std::size_t>(v) + 1;
  std::vector<Prediction> out(side * side);
  if (const auto* h = std::get_if<Hyperparams>(&p)) {
    auto g = kton_predictive_grid_partial(n, m, v, *h, q, ex);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = {{g[i].lambda, g[i].quad_error}, g[i].converged};
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    CountPair k{static_cast<long>(i / side), static_cast<long>(i % side)};
    if (k.total() == 0 || k.p1 > m.p1 || k.p2 > m.p2) continue;
    if (const auto* b = std::get_if<Bp3Params>(&p)) {
      out[i].mean.lambda = d3bp_kton_mean(n, m, k, *b);
    } else {
      out[i].mean.lambda = i3bp_kton_mean(n, m, k, std::get<I3bpParams>(p));
    }
  }
  return out;
}

FitResult fit_model(ModelKind model, const VariantDataset& data, const FitConfig& cfg, const QuadratureConfig& q) {
  switch (model) {
    case ModelKind::proposed:
      return fit_proposed(data, cfg, q);
    case ModelKind::d3bp:
      return fit_d3bp(data, cfg);
    case ModelKind::i3bp:
      return fit_i3bp(data, cfg);
  }
  throw InvalidArgument("unknown model");
}

// ---- subcommands ----

int cmd_fit(const Options& o, std::ostream& out) {
  const ModelKind model = parse_model(o.model);
  FitConfig cfg = fit_config(o);
  QuadratureConfig q = quad_config(o);
  VariantDataset data = load_tsv(o.input);
  FitResult r = fit_model(model, data, cfg, q);
  json j = json::parse(r.to_json());
  j["config"] = {{"input", o.input},        {"v", cfg.v},         {"train_fraction", cfg.train_fraction},
                 {"max_iter", cfg.optimizer_max_iter}, {"fd_step", cfg.fd_step}, {"grad_tol", cfg.grad_tol},
                 {"rel_tol", q.rel_tol}};
  emit(o, out, [&](std::ostream& s) { s << j.dump(2) << "\n"; });
  return r.converged ? kExitOk : kExitBestEffort;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const ModelKind model = parse_model(o.model);
  const ModelParams params = load_params(o, model);
  QuadratureConfig q = quad_config(o);
  if (o.input.empty() == o.pilot_size.empty()) throw InvalidArgument("give exactly one of --input and --pilot-size");
  const CountPair n = o.input.empty() ? parse_pair(o.pilot_size) : load_tsv(o.input).sizes();
  if (o.predict_v < 0) throw InvalidArgument("--v must be nonnegative");
  const auto sweep = parse_sweep(o.sweep);

  auto tot = totals(params, n, sweep, q, Execution::parallel);
  std::vector<std::vector<Prediction>> grids(sweep.size());
  if (o.predict_v > 0) {
    for (std::size_t i = 0; i < sweep.size(); ++i) grids[i] = kton_grid(params, n, sweep[i], o.predict_v, q, Execution::parallel);
  }
  bool exact = true;
  Header h = common_header("predict", o);
  h.push_back({"pilot", std::to_string(n.p1) + ":" + std::to_string(n.p2)});
  h.push_back({"sweep", o.sweep});
  h.push_back({"v", std::to_string(o.predict_v)});
  h.push_back({"rel_tol", fmt(q.rel_tol)});
  h.push_back({"params", params_json(params).dump()});
  emit(o, out, [&](std::ostream& s) {
    write_header(s, h);
    s << "m1,m2,quantity,k1,k2,lambda,quad_error\n";
    const auto side = static_cast<std::size_t>(o.predict_v) + 1;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      const CountPair m = sweep[i];
      s << m.p1 << ',' << m.p2 << ",total,,," << fmt(tot[i].mean.lambda) << ',' << fmt(tot[i].mean.quad_error)
        << '\n';
      exact = exact && tot[i].exact;
      for (std::size_t c = 0; c < grids[i].size(); ++c) {
        CountPair k{static_cast<long>(c / side), static_cast<long>(c % side)};
        if (k.total() == 0 || k.p1 > m.p1 || k.p2 > m.p2) continue;
        const auto& g = grids[i][c];
        exact = exact && g.exact;
        s << m.p1 << ',' << m.p2 << ",kton," << k.p1 << ',' << k.p2 << ',' << fmt(g.mean.lambda) << ','
          << fmt(g.mean.quad_error) << '\n';
      }
    }
  });
  return exact ? kExitOk : kExitBestEffort;
}

int cmd_ktons(const Options& o, std::ostream& out) {
  if (o.v < 1) throw InvalidArgument("--v must be at least 1");
  VariantDataset data = load_tsv(o.input);
  auto [pilot, followup] = head_split(data, parse_pair(o.pilot_size));
  KtonTable t = count_new_ktons(pilot, followup, o.v);
  Header h = {{"command", "ktons"}, {"input", o.input}, {"pilot", o.pilot_size}, {"v", std::to_string(o.v)},
              {"total_new", std::to_string(count_new_total(pilot, followup))}};
  emit(o, out, [&](std::ostream& s) { write_kton_csv(s, t, h); });
  return kExitOk;
}

VariantDataset merge_independent(const VariantDataset& a, const VariantDataset& b) {
  VariantDataset out;
  auto& reg = *out.registry();
  const VariantDataset* parts[2] = {&a, &b};
  for (int pop = 0; pop < 2; ++pop) {
    for (const auto& smp : parts[pop]->samples(0)) {
      std::vector<VariantId> ids;
      for (VariantId v : smp.variants) {
        ids.push_back(reg.intern("p" + std::to_string(pop + 1) + "_" + parts[pop]->registry()->label(v)));
      }
      out.add_sample(pop, smp.id, ids);
    }
  }
  return out;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const ModelKind model = parse_model(o.model);
  const ModelParams params = load_params(o, model);
  const CountPair n = parse_pair(o.sizes);
  json prov = {{"model", o.model}, {"params", params_json(params)}, {"seed", o.seed}, {"sizes", {n.p1, n.p2}}};
  VariantDataset data;
  if (const auto* h = std::get_if<Hyperparams>(&params)) {
    SimConfig cfg;
    cfg.truncation_floor = o.floor;
    cfg.cells_per_decade = o.cells;
    cfg.seed = o.seed;
    cfg.n_samples = n;
    auto atoms = sample_proposed_atoms(*h, cfg);
    data = sample_bernoulli_process(atoms, n, o.seed);
    prov["truncation_floor"] = o.floor;
    prov["cells_per_decade"] = o.cells;
    prov["atoms"] = atoms.atoms.size();
  } else if (const auto* b = std::get_if<Bp3Params>(&params)) {
    if (n.total() < 1) throw InvalidArgument("need at least one sample");
    data = split_pooled(sample_ibp_3bp(*b, n.total(), o.seed), n, o.seed);
  } else {
    const auto& i = std::get<I3bpParams>(params);
    if (n.p1 < 1 || n.p2 < 1) throw InvalidArgument("i3bp simulation needs samples in both populations");
    data = merge_independent(sample_ibp_3bp(i.pop1, n.p1, mix64(o.seed)), sample_ibp_3bp(i.pop2, n.p2, mix64(o.seed + 1)));
  }
  Header h = common_header("simulate", o);
  h.push_back({"sizes", o.sizes});
  h.push_back({"params", params_json(params).dump()});
  if (model == ModelKind::proposed) h.push_back({"truncation_floor", fmt(o.floor)});
  emit(o, out, [&](std::ostream& s) { write_tsv(s, data, h); });
  if (!o.output.empty()) {
    std::ofstream p(o.output + ".json");
    if (!p) throw DataError("cannot write provenance file");
    p << prov.dump(2) << "\n";
  }
  return kExitOk;
}

// Follow-up sweep of the fold protocol: population 1 one sample at a time,
// then population 2.
std::vector<CountPair> fold_sweep(CountPair m) {
  std::vector<CountPair> s;
  for (long j = 1; j <= m.p1; ++j) s.push_back({j, 0});
  for (long j = 1; j <= m.p2; ++j) s.push_back({m.p1, j});
  return s;
}

double relative_residual(double pred, double obs) { return obs == 0.0 ? NAN : (pred - obs) / obs; }

struct FoldOutcome {
  FitResult fit;
  std::vector<CountPair> sweep;
  std::vector<Prediction> total_pred;
  GrowthCurve total_obs;
  std::vector<Prediction> kton_pred;
  KtonTable kton_obs;
};

int cmd_crossval(const Options& o, std::ostream& out) {
  const ModelKind model = parse_model(o.model);
  FitConfig cfg = fit_config(o);
  QuadratureConfig q = quad_config(o);
  VariantDataset data = load_tsv(o.input);
  const FoldPlan plan = make_folds(data, o.folds, o.seed);

  std::vector<FoldOutcome> folds(static_cast<std::size_t>(o.folds));
  for_each_index(folds.size(), Execution::parallel, [&](std::size_t f) {
    const int fi = static_cast<int>(f);
    VariantDataset pilot = fold_pilot(data, plan, fi);
    VariantDataset followup = fold_followup(data, plan, fi);
    FitConfig fc = cfg;
    fc.seed = mix64(o.seed + f);
    fc.execution = Execution::serial;
    FoldOutcome r{fit_model(model, pilot, fc, q), {}, {}, {}, {}, KtonTable(o.v)};
    const CountPair n = pilot.sizes(), m = followup.sizes();
    r.sweep = fold_sweep(m);
    r.total_pred = totals(r.fit.params, n, r.sweep, q, Execution::serial);
    std::vector<SampleRef> order;
    for (int pop = 0; pop < 2; ++pop) {
      for (std::size_t i = 0; i < followup.samples(pop).size(); ++i) order.push_back({pop, i});
    }
    r.total_obs = new_variant_curve(pilot, followup, order);
    r.kton_pred = kton_grid(r.fit.params, n, m, o.v, q, Execution::serial);
    r.kton_obs = count_new_ktons(pilot, followup, o.v);
    folds[f] = std::move(r);
  });

  // k-ton cells observed fewer than twice in some fold are flagged.
  const auto side = static_cast<std::size_t>(o.v) + 1;
  std::vector<char> suppressed(side * side, 0);
  for (const auto& f : folds) {
    for (std::size_t c = 1; c < side * side; ++c) suppressed[c] |= f.kton_obs.cells()[c] < 2.0;
  }
  bool exact = true;
  std::size_t common = folds.front().sweep.size();
  for (const auto& f : folds) {
    common = std::min(common, f.sweep.size());
    exact = exact && f.fit.converged;
  }

  Header h = common_header("crossval", o);
  h.push_back({"input", o.input});
  h.push_back({"folds", std::to_string(o.folds)});
  h.push_back({"v", std::to_string(cfg.v)});
  h.push_back({"max_iter", std::to_string(cfg.optimizer_max_iter)});
  h.push_back({"rel_tol", fmt(q.rel_tol)});
  for (std::size_t f = 0; f < folds.size(); ++f) {
    h.push_back({"fold" + std::to_string(f) + "_params", params_json(folds[f].fit.params).dump()});
  }

  auto summary = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };

  emit(o, out, [&](std::ostream& s) {
    write_header(s, h);
    s << "fold,kind,index,m1,m2,k1,k2,predicted,observed,residual,suppressed\n";
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto& r = folds[f];
      for (std::size_t i = 0; i < r.sweep.size(); ++i) {
        const double p = r.total_pred[i].mean.lambda, ob = r.total_obs.counts[i];
        s << f << ",total," << i << ',' << r.sweep[i].p1 << ',' << r.sweep[i].p2 << ",,," << fmt(p) << ','
          << fmt(ob) << ',' << fmt(relative_residual(p, ob)) << ",0\n";
      }
      const CountPair m = r.sweep.empty() ? CountPair{} : r.sweep.back();
      for (std::size_t c = 1; c < side * side; ++c) {
        const double p = r.kton_pred[c].mean.lambda, ob = r.kton_obs.cells()[c];
        s << f << ",kton,," << m.p1 << ',' << m.p2 << ',' << c / side << ',' << c % side << ',' << fmt(p) << ','
          << fmt(ob) << ',' << fmt(relative_residual(p, ob)) << ',' << int(suppressed[c]) << '\n';
      }
    }
    for (std::size_t i = 0; i < common; ++i) {
      std::vector<double> res;
      for (const auto& r : folds) res.push_back(relative_residual(r.total_pred[i].mean.lambda, r.total_obs.counts[i]));
      auto [mean, sd] = summary(res);
      s << "mean,total," << i << ",,,,,,," << fmt(mean) << ",0\n";
      s << "sd,total," << i << ",,,,,,," << fmt(sd) << ",0\n";
    }
    for (std::size_t c = 1; c < side * side; ++c) {
      std::vector<double> res;
      for (const auto& r : folds) res.push_back(relative_residual(r.kton_pred[c].mean.lambda, r.kton_obs.cells()[c]));
      auto [mean, sd] = summary(res);
      for (const char* which : {"mean", "sd"}) {
        s << which << ",kton,,,," << c / side << ',' << c % side << ",,," << fmt(which[0] == 'm' ? mean : sd) << ','
          << int(suppressed[c]) << '\n';
      }
    }
  });
  return exact ? kExitOk : kExitBestEffort;
}

int cmd_powerlaw(const Options& o, std::ostream& out) {
  if (o.model != "proposed") throw InvalidArgument("powerlaw simulates the proposed model only");
  const Hyperparams phi = std::get<Hyperparams>(load_params(o, ModelKind::proposed));
  const GrowthScheme scheme = parse_scheme(o.scheme);
  if (o.replicates < 1) throw InvalidArgument("--replicates must be at least 1");
  if (o.max_samples < 6) throw InvalidArgument("--max-samples must be at least 6");
  SimConfig base;
  base.truncation_floor = o.floor;
  base.cells_per_decade = o.cells;
  base.validate();
  const TruncatedPppSampler sampler(proposed_target(phi), proposed_mesh(phi, base));

  std::vector<GrowthCurve> curves(static_cast<std::size_t>(o.replicates));
  for_each_index(curves.size(), Execution::parallel, [&](std::size_t r) {
    Rng rng = substream(o.seed, 0x9041, r);
    FrequencyAtoms atoms = sampler.sample(rng);
    curves[r] = scheme_growth_curve(first_appearances(atoms, mix64(o.seed ^ mix64(r + 1))), scheme, o.max_samples);
  });
  GrowthCurve mean;
  mean.counts.assign(static_cast<std::size_t>(o.max_samples), 0.0);
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.counts.size(); ++i) mean.counts[i] += c.counts[i];
  }
  for (double& x : mean.counts) x /= static_cast<double>(o.replicates);
  const double slope = fit_power_law_slope(mean);

  Header h = common_header("powerlaw", o);
  h.push_back({"params", params_json(phi).dump()});
  h.push_back({"scheme", o.scheme});
  h.push_back({"replicates", std::to_string(o.replicates)});
  h.push_back({"max_samples", std::to_string(o.max_samples)});
  h.push_back({"truncation_floor", fmt(o.floor)});
  h.push_back({"slope", fmt(slope)});
  emit(o, out, [&](std::ostream& s) { write_growth_csv(s, mean, h); });
  if (!o.output.empty()) out << "slope=" << fmt(slope) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Predict new genetic variants in a two-population follow-up study", "vfcast"};
  app.require_subcommand(1);
  Options o;

  auto add_model = [&](CLI::App* c) {
    c->add_option("--model", o.model, "proposed, d3bp or i3bp")->check(CLI::IsMember({"proposed", "d3bp", "i3bp"}));
  };
  auto add_params = [&](CLI::App* c) {
    c->add_option("--params", o.params, "parameter JSON (a fit output)");
    c->add_option("--phi", o.phi, "inline comma-separated parameters");
  };

  auto* fit = app.add_subcommand("fit", "fit hyperparameters on a pilot dataset");
  fit->add_option("--input", o.input, "dataset TSV")->required();
  fit->add_option("--output", o.output, "fit JSON (stdout if absent)");
  add_model(fit);
  fit->add_option("--seed", o.seed, "split seed");
  fit->add_option("--v", o.v, "k-ton trimming bound");
  fit->add_option("--rel-tol", o.rel_tol, "quadrature relative tolerance");
  fit->add_option("--max-iter", o.max_iter, "optimizer iteration cap");

  auto* predict = app.add_subcommand("predict", "predictive means over a follow-up sweep");
  predict->add_option("--input", o.input, "pilot dataset TSV (sets the pilot sizes)");
  predict->add_option("--pilot-size", o.pilot_size, "pilot sizes N1:N2");
  predict->add_option("--output", o.output, "CSV (stdout if absent)");
  add_model(predict);
  add_params(predict);
  predict->add_option("--sweep", o.sweep, "follow-up sizes, e.g. 10:0:2,10:10:5")->required();
  predict->add_option("--v", o.predict_v, "k-ton cells up to v per sweep point (0 for totals only)")->capture_default_str();
  predict->add_option("--rel-tol", o.rel_tol, "quadrature relative tolerance");
  predict->add_option("--seed", o.seed, "recorded in the output");

  auto* ktons = app.add_subcommand("ktons", "observed new-variant k-ton table");
  ktons->add_option("--input", o.input, "dataset TSV")->required();
  ktons->add_option("--pilot-size", o.pilot_size, "first N1:N2 samples form the pilot")->required();
  ktons->add_option("--v", o.v, "table bound");
  ktons->add_option("--output", o.output, "CSV (stdout if absent)");

  auto* simulate = app.add_subcommand("simulate", "simulate a dataset");
  add_model(simulate);
  add_params(simulate);
  simulate->add_option("--sizes", o.sizes, "samples per population N1:N2")->required();
  simulate->add_option("--seed", o.seed, "random seed");
  simulate->add_option("--floor", o.floor, "truncation floor of the frequency draws");
  simulate->add_option("--cells", o.cells, "sampler mesh cells per decade");
  simulate->add_option("--output", o.output, "dataset TSV (stdout if absent); provenance goes to <output>.json");

  auto* crossval = app.add_subcommand("crossval", "fold-based evaluation");
  crossval->add_option("--input", o.input, "dataset TSV")->required();
  crossval->add_option("--output", o.output, "CSV (stdout if absent)");
  add_model(crossval);
  crossval->add_option("--folds", o.folds, "number of blocks");
  crossval->add_option("--seed", o.seed, "fold seed");
  crossval->add_option("--v", o.v, "k-ton bound for fitting and evaluation");
  crossval->add_option("--rel-tol", o.rel_tol, "quadrature relative tolerance");
  crossval->add_option("--max-iter", o.max_iter, "optimizer iteration cap");

  auto* powerlaw = app.add_subcommand("powerlaw", "growth-curve power-law slope");
  add_params(powerlaw);
  powerlaw->add_option("--model", o.model, "proposed");
  powerlaw->add_option("--scheme", o.scheme, "projection1, projection2 or proportional:rho");
  powerlaw->add_option("--replicates", o.replicates, "independent realizations");
  powerlaw->add_option("--max-samples", o.max_samples, "curve length");
  powerlaw->add_option("--seed", o.seed, "random seed");
  powerlaw->add_option("--floor", o.floor, "truncation floor");
  powerlaw->add_option("--cells", o.cells, "sampler mesh cells per decade");
  powerlaw->add_option("--output", o.output, "CSV (stdout if absent)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fit) return cmd_fit(o, out);
    if (*predict) return cmd_predict(o, out);
    if (*ktons) return cmd_ktons(o, out);
    if (*simulate) return cmd_simulate(o, out);
    if (*crossval) return cmd_crossval(o, out);
    if (*powerlaw) return cmd_powerlaw(o, out);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBestEffort;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace vf
