#include "vf/fitting.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <memory>
#include <numeric>

#include "vf/rng.hpp"

namespace vf {

void FitConfig::validate() const {
  if (v < 1) throw InvalidArgument("v must be at least 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("train fraction must lie in (0,1)");
  if (!(fd_step > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  if (!(grad_tol > 0.0)) throw InvalidArgument("gradient tolerance must be positive");
  if (!(stall_tol >= 0.0)) throw InvalidArgument("stall tolerance must be nonnegative");
  if (optimizer_max_iter < 1) throw InvalidArgument("iteration cap must be at least 1");
  if (quad_max_level < 1 || quad_max_level > 20) throw InvalidArgument("quadrature depth cap must lie in 1..20");
}

std::string model_name(ModelKind m) {
  switch (m) {
    case ModelKind::proposed:
      return "proposed";
    case ModelKind::d3bp:
      return "d3bp";
    case ModelKind::i3bp:
      return "i3bp";
  }
  return "proposed";
}

ModelKind parse_model(const std::string& name) {
  if (name == "proposed") return ModelKind::proposed;
  if (name == "d3bp") return ModelKind::d3bp;
  if (name == "i3bp") return ModelKind::i3bp;
  throw InvalidArgument("unknown model '" + name + "' (expected proposed, d3bp or i3bp)");
}

namespace {

using nlohmann::json;

json bp3_json(const Bp3Params& p) { return {{"alpha", p.alpha}, {"c", p.c}, {"sigma", p.sigma}}; }

Bp3Params bp3_from(const json& j) { return {j.at("alpha").get<double>(), j.at("c").get<double>(), j.at("sigma").get<double>()}; }

}  // namespace

std::string FitResult::to_json() const {
  json params_json;
  if (const auto* h = std::get_if<Hyperparams>(&params)) {
    params_json = {{"alpha", h->alpha}, {"sigma1", h->sigma1}, {"sigma2", h->sigma2}, {"phi1", h->phi1},
                   {"phi2", h->phi2},   {"c1", h->c1},         {"c2", h->c2}};
  } else if (const auto* b = std::get_if<Bp3Params>(&params)) {
    params_json = bp3_json(*b);
  } else {
    const auto& i = std::get<I3bpParams>(params);
    params_json = {{"pop1", bp3_json(i.pop1)}, {"pop2", bp3_json(i.pop2)}};
  }
  json j = {{"model", model_name(model)},
            {"params", params_json},
            {"objective_init", objective_init},
            {"objective_final", objective_final},
            {"iterations", iterations},
            {"converged", converged},
            {"seed", seed}};
  return j.dump(2);
}

FitResult FitResult::from_json(const std::string& text) {
  FitResult r;
  try {
    json j = json::parse(text);
    r.model = parse_model(j.at("model").get<std::string>());
    const json& p = j.at("params");
    switch (r.model) {
      case ModelKind::proposed: {
        Hyperparams h{p.at("alpha").get<double>(), p.at("sigma1").get<double>(), p.at("sigma2").get<double>(),
                      p.at("phi1").get<double>(),  p.at("phi2").get<double>(),   p.at("c1").get<double>(),
                      p.at("c2").get<double>()};
        h.validate();
        r.params = h;
        break;
      }
      case ModelKind::d3bp: {
        Bp3Params b = bp3_from(p);
        b.validate();
        r.params = b;
        break;
      }
      case ModelKind::i3bp: {
        I3bpParams i{bp3_from(p.at("pop1")), bp3_from(p.at("pop2"))};
        i.validate();
        r.params = i;
        break;
      }
    }
    r.objective_init = j.value("objective_init", 0.0);
    r.objective_final = j.value("objective_final", 0.0);
    r.iterations = j.value("iterations", 0);
    r.converged = j.value("converged", false);
    r.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed parameter file: ") + e.what());
  }
  return r;
}

double poisson_log_pmf(double u, double lambda) {
  if (lambda <= 0.0) return u > 0.0 ? kLogZeroSentinel : 0.0;
  return u * std::log(lambda) - lambda - std::lgamma(u + 1.0);
}

PilotSplit split_pilot(const VariantDataset& data, const FitConfig& cfg) {
  cfg.validate();
  std::array<std::vector<std::size_t>, 2> train, test;
  for (int pop = 0; pop < 2; ++pop) {
    const auto p = static_cast<std::size_t>(pop);
    const std::size_t n = data.samples(pop).size();
    if (n < 2) throw InsufficientData("population " + std::to_string(pop + 1) + " needs at least 2 samples to split");
    const auto n_train = static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n) {
      throw InsufficientData("train fraction leaves an empty part in population " + std::to_string(pop + 1));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = substream(cfg.seed, 0x5911, p);
    std::shuffle(perm.begin(), perm.end(), rng);
    train[p].assign(perm.begin(), perm.begin() + static_cast<long>(n_train));
    test[p].assign(perm.begin() + static_cast<long>(n_train), perm.end());
  }
  return {data.subset(train), data.subset(test)};
}

namespace {

void require_table(const KtonTable& observed, int v) {
  if (v < 1) throw InvalidArgument("v must be at least 1");
  if (observed.v() != v) throw InvalidArgument("observed k-ton table must cover exactly 0..v");
}

double proposed_loglik(CountPair train_n, CountPair test_m, const KtonTable& observed, const Hyperparams& phi, int v,
                       const QuadratureConfig& qcfg, Execution ex, bool tolerant) {
  require_table(observed, v);
  phi.validate();
  const auto side = static_cast<std::size_t>(v) + 1;
  auto cells = kton_predictive_grid_partial(train_n, test_m, v, phi, qcfg, ex);
  for (std::size_t i = 0; i < cells.size() && !tolerant; ++i) {
    if (cells[i].converged) continue;
    throw ConvergenceError("objective cell (" + std::to_string(i / side) + "," + std::to_string(i % side) +
                               "): k-ton quadrature did not reach tolerance",
                           cells[i].lambda, cells[i].quad_error, static_cast<long>(i));
  }
  double total = 0.0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    total += poisson_log_pmf(observed.cells()[i], cells[i].lambda);
  }
  return total;
}

double logit(double s) { return std::log(s) - std::log1p(-s); }
double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

using Objective = std::function<double(const std::vector<double>&)>;

// Objective that maps parameter-invariant violations and non-finite values
// to the sentinel, so line searches that wander off simply back up.
double guarded(const Objective& f, const std::vector<double>& x) {
  try {
    double v = f(x);
    return std::isfinite(v) ? std::max(v, kLogZeroSentinel) : kLogZeroSentinel;
  } catch (const InvalidArgument&) {
    return kLogZeroSentinel;
  } catch (const DomainError&) {
    return kLogZeroSentinel;
  }
}

struct Optimum {
  std::vector<double> x;
  double value = 0.0;
  double init_value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct GslContext {
  const Objective* f;
  double h;
  std::vector<double> best_x;
  double best = -HUGE_VAL;
};

std::vector<double> to_vec(const gsl_vector* v) {
  std::vector<double> out(v->size);
  for (std::size_t i = 0; i < v->size; ++i) out[i] = gsl_vector_get(v, i);
  return out;
}

// GSL minimizes, so the callbacks work with the negated objective.
double gsl_f(const gsl_vector* x, void* params) {
  auto* ctx = static_cast<GslContext*>(params);
  auto xv = to_vec(x);
  double val = guarded(*ctx->f, xv);
  if (val > ctx->best) {
    ctx->best = val;
    ctx->best_x = xv;
  }
  return -val;
}

void gsl_df(const gsl_vector* x, void* params, gsl_vector* g) {
  auto* ctx = static_cast<GslContext*>(params);
  Objective safe = [ctx](const std::vector<double>& z) { return guarded(*ctx->f, z); };
  auto grad = numeric_gradient(safe, to_vec(x), ctx->h, 2);
  for (std::size_t i = 0; i < grad.size(); ++i) gsl_vector_set(g, i, -grad[i]);
}

void gsl_fdf(const gsl_vector* x, void* params, double* f, gsl_vector* g) {
  *f = gsl_f(x, params);
  gsl_df(x, params, g);
}

// Relative objective change below which the search is treated as settled.
constexpr double kRelativeImprovementTol = 2.2e-9;

Optimum maximize(const Objective& f, const std::vector<double>& x0, const FitConfig& cfg) {
  const std::size_t n = x0.size();
  GslContext ctx{&f, cfg.fd_step, x0, -HUGE_VAL};
  gsl_multimin_function_fdf fn{&gsl_f, &gsl_df, &gsl_fdf, n, &ctx};

  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> start(gsl_vector_alloc(n), &gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(start.get(), i, x0[i]);
  std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> s(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n), &gsl_multimin_fdfminimizer_free);

  gsl_error_handler_t* old = gsl_set_error_handler_off();
  Optimum out;
  gsl_multimin_fdfminimizer_set(s.get(), &fn, start.get(), 0.1, 0.1);
  out.init_value = -s->f;
  double prev = s->f;
  std::vector<double> history{s->f};
  if (gsl_multimin_test_gradient(s->gradient, cfg.grad_tol) == GSL_SUCCESS) out.converged = true;
  while (!out.converged && out.iterations < cfg.optimizer_max_iter) {
    ++out.iterations;
    if (gsl_multimin_fdfminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    history.push_back(s->f);
    const bool stalled = history.size() > static_cast<std::size_t>(kStallWindow) &&
                         history[history.size() - 1 - kStallWindow] - s->f < cfg.stall_tol;
    if (gsl_multimin_test_gradient(s->gradient, cfg.grad_tol) == GSL_SUCCESS || stalled ||
        prev - s->f <= kRelativeImprovementTol * std::max({std::fabs(prev), std::fabs(s->f), 1.0})) {
      out.converged = true;
    }
    prev = s->f;
  }
  gsl_set_error_handler(old);
  out.x = ctx.best_x;
  out.value = ctx.best;
  return out;
}

template <std::size_t D>
std::array<double, D> to_array(const std::vector<double>& v) {
  std::array<double, D> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

}  // namespace

double proposed_objective(CountPair train_n, CountPair test_m, const KtonTable& observed, const Hyperparams& phi,
                          int v, const QuadratureConfig& qcfg, Execution ex) {
  return proposed_loglik(train_n, test_m, observed, phi, v, qcfg, ex, false);
}

double d3bp_objective(CountPair train_n, CountPair test_m, const KtonTable& observed, const Bp3Params& p, int v) {
  require_table(observed, v);
  p.validate();
  double total = 0.0;
  for (long k1 = 0; k1 <= v; ++k1) {
    for (long k2 = 0; k2 <= v; ++k2) {
      if (k1 + k2 == 0) continue;
      double lambda = (k1 > test_m.p1 || k2 > test_m.p2) ? 0.0 : d3bp_kton_mean(train_n, test_m, {k1, k2}, p);
      total += poisson_log_pmf(observed.at(k1, k2), lambda);
    }
  }
  return total;
}

double i3bp_curve_loss(long n_train, const GrowthCurve& observed, const Bp3Params& p) {
  p.validate();
  // Running sum of the per-sample terms; alpha * partial reproduces
  // bp3_total_mean(n_train, j + 1, p) exactly.
  const Bp3Params unit{1.0, p.c, p.sigma};
  double partial = 0.0, loss = 0.0;
  for (std::size_t j = 0; j < observed.counts.size(); ++j) {
    partial += bp3_total_mean(n_train + static_cast<long>(j), 1, unit);
    const double d = p.alpha * partial - observed.counts[j];
    loss += d * d;
  }
  return loss;
}

std::array<double, 7> encode(const Hyperparams& phi) {
  return {std::log(phi.alpha), logit(phi.sigma1), logit(phi.sigma2), std::log(phi.phi1),
          std::log(phi.phi2),  std::log(phi.c1),  std::log(phi.c2)};
}

Hyperparams decode_proposed(const std::array<double, 7>& z) {
  return {std::exp(z[0]), logistic(z[1]), logistic(z[2]), std::exp(z[3]),
          std::exp(z[4]), std::exp(z[5]), std::exp(z[6])};
}

std::array<double, 3> encode(const Bp3Params& p) { return {std::log(p.alpha), std::log(p.c), logit(p.sigma)}; }

Bp3Params decode_bp3(const std::array<double, 3>& z) { return {std::exp(z[0]), std::exp(z[1]), logistic(z[2])}; }

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     const std::vector<double>& x, double h, int order) {
  if (order != 2 && order != 4) throw InvalidArgument("stencil order must be 2 or 4");
  std::vector<double> g(x.size());
  std::vector<double> y = x;
  auto at = [&](std::size_t i, double offset) {
    y[i] = x[i] + offset;
    double v = f(y);
    y[i] = x[i];
    return v;
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (order == 2) {
      g[i] = (at(i, h) - at(i, -h)) / (2.0 * h);
    } else {
      g[i] = (-at(i, 2 * h) + 8 * at(i, h) - 8 * at(i, -h) + at(i, -2 * h)) / (12.0 * h);
    }
  }
  return g;
}

Hyperparams proposed_init() { return {1000.0, 0.5, 0.5, 0.5, 0.5, 1.0, 1.0}; }
Bp3Params d3bp_init() { return {1000.0, 1.0, 0.5}; }

FitResult fit_proposed(const VariantDataset& data, const FitConfig& cfg, const QuadratureConfig& qcfg) {
  qcfg.validate();
  cfg.validate();
  QuadratureConfig capped = qcfg;
  capped.max_level = std::min(qcfg.max_level, cfg.quad_max_level);
  PilotSplit split = split_pilot(data, cfg);
  const CountPair n = split.train.sizes();
  const CountPair m = split.test.sizes();
  const KtonTable observed = count_new_ktons(split.train, split.test, cfg.v);
  Objective f = [&](const std::vector<double>& z) {
    return proposed_loglik(n, m, observed, decode_proposed(to_array<7>(z)), cfg.v, capped, cfg.execution, true);
  };
  auto z0 = encode(proposed_init());
  Optimum opt = maximize(f, {z0.begin(), z0.end()}, cfg);
  return {ModelKind::proposed, decode_proposed(to_array<7>(opt.x)), opt.init_value, opt.value, opt.iterations,
          opt.converged, cfg.seed};
}

FitResult fit_d3bp(const VariantDataset& data, const FitConfig& cfg) {
  PilotSplit split = split_pilot(data, cfg);
  const CountPair n = split.train.sizes();
  const CountPair m = split.test.sizes();
  const KtonTable observed = count_new_ktons(split.train, split.test, cfg.v);
  Objective f = [&](const std::vector<double>& z) {
    return d3bp_objective(n, m, observed, decode_bp3(to_array<3>(z)), cfg.v);
  };
  auto z0 = encode(d3bp_init());
  Optimum opt = maximize(f, {z0.begin(), z0.end()}, cfg);
  return {ModelKind::d3bp, decode_bp3(to_array<3>(opt.x)), opt.init_value, opt.value, opt.iterations, opt.converged,
          cfg.seed};
}

FitResult fit_i3bp(const VariantDataset& data, const FitConfig& cfg) {
  cfg.validate();
  I3bpParams params;
  FitResult r;
  r.model = ModelKind::i3bp;
  r.seed = cfg.seed;
  r.converged = true;
  for (int pop = 0; pop < 2; ++pop) {
    const std::size_t n = data.samples(pop).size();
    if (n < 3) throw InsufficientData("population " + std::to_string(pop + 1) + " needs at least 3 samples");
    const std::size_t n_mini = 2 * n / 3;
    // One stream for both populations: identical populations get identical fits.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = substream(cfg.seed, 0x13b);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::array<std::vector<std::size_t>, 2> mini, valid;
    mini[static_cast<std::size_t>(pop)].assign(perm.begin(), perm.begin() + static_cast<long>(n_mini));
    valid[static_cast<std::size_t>(pop)].assign(perm.begin() + static_cast<long>(n_mini), perm.end());
    VariantDataset pilot = data.subset(mini);
    VariantDataset followup = data.subset(valid);
    std::vector<SampleRef> order;
    for (std::size_t i = 0; i < n - n_mini; ++i) order.push_back({pop, i});
    const GrowthCurve observed = new_variant_curve(pilot, followup, order);
    const long n_train = static_cast<long>(n_mini);

    // Start at sigma = 0.5, c = 1 with the least-squares alpha (the curve is
    // linear in alpha).
    Bp3Params init{1.0, 1.0, 0.5};
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < observed.counts.size(); ++j) {
      const double g = bp3_total_mean(n_train, static_cast<long>(j + 1), init);
      num += g * observed.counts[j];
      den += g * g;
    }
    init.alpha = std::max(num / den, 1e-8);

    Objective f = [&](const std::vector<double>& z) {
      return -i3bp_curve_loss(n_train, observed, decode_bp3(to_array<3>(z)));
    };
    auto z0 = encode(init);
    Optimum opt = maximize(f, {z0.begin(), z0.end()}, cfg);
    (pop == 0 ? params.pop1 : params.pop2) = decode_bp3(to_array<3>(opt.x));
    r.objective_init += opt.init_value;
    r.objective_final += opt.value;
    r.iterations += opt.iterations;
    r.converged = r.converged && opt.converged;
  }
  r.params = params;
  return r;
}

}  // namespace vf
