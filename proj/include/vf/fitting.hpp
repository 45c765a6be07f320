#pragma once

// Empirical-Bayes hyperparameter fits. The proposed model and the pooled
// baseline maximize the Poisson likelihood of the k-ton table a held-out
// half of the pilot shows relative to the other half. The independent
// baseline is fit per population by least squares on a new-variant growth
// curve.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "vf/baselines.hpp"
#include "vf/data.hpp"
#include "vf/model.hpp"
#include "vf/parallel.hpp"

namespace vf {

struct FitConfig {
  /// k-ton cells with both components in 0..v enter the likelihood.
  int v = 10;
  /// Per-population share of the pilot used as the conditioning set.
  double train_fraction = 0.5;
  int optimizer_max_iter = 200;
  /// Central-difference step in the unconstrained parameterization.
  double fd_step = 1e-4;
  /// Gradient-norm stopping threshold.
  double grad_tol = 1e-5;
  /// The search also stops once the objective has gained less than this
  /// over the last kStallWindow iterations.
  double stall_tol = 1e-2;
  /// Tanh-sinh depth cap for k-ton cells inside the optimizer. Cells still
  /// short of tolerance there enter with their partial estimate, which keeps
  /// evaluations near degenerate parameters (phi or sigma close to 0) cheap.
  int quad_max_level = 8;
  std::uint64_t seed = 0;
  Execution execution = Execution::parallel;

  /// Throws InvalidArgument unless v >= 1, 0 < train_fraction < 1,
  /// fd_step > 0, grad_tol > 0, stall_tol >= 0, optimizer_max_iter >= 1 and
  /// 1 <= quad_max_level <= 20.
  void validate() const;
};

inline constexpr int kStallWindow = 5;

enum class ModelKind { proposed, d3bp, i3bp };

std::string model_name(ModelKind m);
/// Inverse of model_name. Throws InvalidArgument for unknown names.
ModelKind parse_model(const std::string& name);

using ModelParams = std::variant<Hyperparams, Bp3Params, I3bpParams>;

struct FitResult {
  ModelKind model = ModelKind::proposed;
  ModelParams params;
  double objective_init = 0.0;
  double objective_final = 0.0;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;

  /// JSON object with fields model, params, objective_init, objective_final,
  /// iterations, converged, seed.
  std::string to_json() const;
  /// Parses to_json output. Throws DataError on malformed input and
  /// InvalidArgument on parameters that violate their invariants.
  static FitResult from_json(const std::string& text);
};

/// Value recorded in place of ln 0 (a positive count under a zero mean).
inline constexpr double kLogZeroSentinel = -1e12;

/// ln Poisson(u; lambda), with kLogZeroSentinel for lambda = 0 < u.
double poisson_log_pmf(double u, double lambda);

struct PilotSplit {
  VariantDataset train;
  VariantDataset test;
};

/// Seeded per-population shuffle; the first floor(train_fraction N_p)
/// samples train, the rest test. Throws InsufficientData if a population
/// has fewer than 2 samples or either part would be empty.
PilotSplit split_pilot(const VariantDataset& data, const FitConfig& cfg);

/// Log-likelihood of the observed test k-tons under the proposed model with
/// pilot train_n and follow-up test_m. Throws ConvergenceError whose index()
/// is the failing cell k1 * (v + 1) + k2.
double proposed_objective(CountPair train_n, CountPair test_m, const KtonTable& observed, const Hyperparams& phi,
                          int v, const QuadratureConfig& qcfg = {}, Execution ex = Execution::parallel);

/// Same likelihood with pooled-3BP means.
double d3bp_objective(CountPair train_n, CountPair test_m, const KtonTable& observed, const Bp3Params& p, int v);

/// Squared-error loss between the single-population total-mean curve after
/// n_train samples and an observed new-variant curve (entry j covers j + 1
/// follow-up samples).
double i3bp_curve_loss(long n_train, const GrowthCurve& observed, const Bp3Params& p);

/// Unconstrained coordinates: log for alpha, phi and c, logit for sigma.
std::array<double, 7> encode(const Hyperparams& phi);
Hyperparams decode_proposed(const std::array<double, 7>& z);
std::array<double, 3> encode(const Bp3Params& p);
Bp3Params decode_bp3(const std::array<double, 3>& z);

/// Finite-difference gradient with the 2-point (order 2) or 4-point
/// (order 4) central stencil.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     const std::vector<double>& x, double h, int order = 2);

/// Starting points of the likelihood fits.
Hyperparams proposed_init();
Bp3Params d3bp_init();

/// Fits start from the init points and return the best iterate seen;
/// converged is false when the line search fails or the iteration cap is
/// reached first.
FitResult fit_proposed(const VariantDataset& data, const FitConfig& cfg, const QuadratureConfig& qcfg = {});
FitResult fit_d3bp(const VariantDataset& data, const FitConfig& cfg);
/// Requires at least 3 samples per population (InsufficientData).
FitResult fit_i3bp(const VariantDataset& data, const FitConfig& cfg);

}  // namespace vf
