#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poocox/cox.hpp"
#include "poocox/inference.hpp"
#include "poocox/pedigree.hpp"

namespace poocox {

struct EMConfig {
  double q = 0.2;
  double epsilon = 0.01;
  double eta = 0.001;
  std::vector<double> test_ages{20.0, 40.0, 60.0, 80.0};
  double tol = 1e-4;  // on baseline survival at test_ages
  int max_iter = 1000;
  std::uint64_t seed = 1;
  bool proband_correction = false;
  std::optional<int> bootstrap_B;
  int jobs = 1;  // bootstrap workers

  /// Throws ValidationError on out-of-range settings.
  void check() const;
};

struct EMIteration {
  int iteration = 0;  // 0 is the M-step on the random initial weights
  double beta = 0.0;
  std::vector<double> gamma;
  std::vector<double> baseline_survival;  // exp(-Lambda0) at test_ages
  // Evidence under the parameters that produced this iteration's weights
  // (NaN for iteration 0). The full value adds log dLambda0 at observed events.
  double log_evidence = 0.0;
  double full_log_likelihood = 0.0;
  double max_change = 0.0;  // max |S0_new - S0_old| over test_ages
};

struct EMTrace {
  std::vector<EMIteration> iterations;
  std::vector<std::string> warnings;
};

struct BootstrapReplicate {
  bool ok = false;
  std::string error;
  bool converged = false;
  int iterations = 0;
  double beta = 0.0;
  std::vector<double> gamma;
  BaselineHazard baseline;
};

struct BootstrapSummary {
  int requested = 0;
  std::vector<BootstrapReplicate> replicates;
  double beta_lower = 0.0;  // 2.5% percentile
  double beta_upper = 0.0;  // 97.5% percentile
  int failures = 0;
};

struct FitResult {
  CoxFit fit;
  std::vector<std::vector<PosteriorWeights>> weights;  // per family, per individual
  EMTrace trace;
  bool converged = false;
  int iterations = 0;  // completed E/M cycles
  std::vector<std::string> warnings;
  std::optional<BootstrapSummary> bootstrap;
};

/// Two rows per individual: (T, delta, pat, Z, w_pat) then (T, delta, mat, Z,
/// w_mat); all pat rows first, each block in pedigree order. Individuals with
/// a suppressed phenotype contribute no rows.
std::vector<WeightedObservation> build_weighted_dataset(std::span<const Pedigree> families,
                                                        std::span<const std::vector<PosteriorWeights>> weights);

struct ProbandCorrection {
  std::vector<Pedigree> families;
  std::vector<std::string> warnings;
};

/// Suppresses the phenotype of every proband. Families without a proband are
/// passed through unchanged with a warning.
ProbandCorrection apply_proband_correction(std::span<const Pedigree> families);

/// Random initial weights: three uniforms normalized to sum to one.
std::vector<std::vector<PosteriorWeights>> random_initial_weights(std::span<const Pedigree> families,
                                                                  std::uint64_t seed);

/// EM with M-step first on random weights. Max-iteration exhaustion returns
/// converged = false; M-step failures throw EMStepError nested over the cause.
FitResult em_fit(std::span<const Pedigree> families, const EMConfig& config);

/// Family-level nonparametric bootstrap of the full EM fit.
BootstrapSummary bootstrap_fit(std::span<const Pedigree> families, const EMConfig& config, int replicates);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double prob);

}  // namespace poocox
