#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "poocox/baseline_hazard.hpp"

namespace poocox {

enum class Poo { Pat, Mat };

struct WeightedObservation {
  double time = 0.0;
  int status = 0;  // 1 = event
  Poo poo = Poo::Mat;
  std::vector<double> covariates;
  double weight = 0.0;
};

/// Coefficient vector layout: index 0 is the POO indicator (1 for pat),
/// indices 1..k the covariates.
struct CoxFit {
  double beta_hat = 0.0;
  std::vector<double> gamma_hat;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;  // inverse observed information
  double log_partial_likelihood = 0.0;
  int iterations = 0;
  BaselineHazard baseline;
};

struct PartialLikelihood {
  double log_likelihood = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};

/// Weighted Breslow partial likelihood with its analytic score and observed
/// information at `coefficients`.
PartialLikelihood partial_likelihood(std::span<const WeightedObservation> data, const Eigen::VectorXd& coefficients);

struct CoxOptions {
  int max_iterations = 50;
  double score_tolerance = 1e-8;
  double loglik_tolerance = 1e-10;  // relative change
  double divergence_bound = 20.0;
  // A stop is only accepted once the Newton step itself is this small;
  // monotone likelihoods flatten the score without the step shrinking.
  double step_tolerance = 1e-4;
};

/// Newton-Raphson with step-halving. `init` may be empty (zeros). Throws
/// RankDeficiency, SingularInformation, NonConvergence or MonotoneLikelihood.
CoxFit cox_fit(std::span<const WeightedObservation> data, const Eigen::VectorXd& init = {},
               const CoxOptions& options = {});

/// Weighted Breslow estimator of the baseline cumulative hazard at `coefficients`.
BaselineHazard breslow_baseline(std::span<const WeightedObservation> data, const Eigen::VectorXd& coefficients);
BaselineHazard breslow_baseline(std::span<const WeightedObservation> data, const CoxFit& fit);

/// S(t) = exp(-Lambda0(t) exp(beta [pat] + z gamma)).
class SurvivalCurve {
 public:
  SurvivalCurve(BaselineHazard baseline, double linear_predictor)
      : baseline_(std::move(baseline)), risk_(std::exp(linear_predictor)) {}
  double operator()(double t) const { return std::exp(-baseline_.cumulative(t) * risk_); }
  /// Values just after each jump of the baseline.
  std::vector<double> at_jumps() const;
  std::span<const double> jump_times() const noexcept { return baseline_.times(); }

 private:
  BaselineHazard baseline_;
  double risk_;
};

SurvivalCurve survival_curve(const BaselineHazard& baseline, double beta, std::span<const double> gamma, Poo group,
                             std::span<const double> z = {});

struct WaldResult {
  double z = 0.0;
  double p_value = 1.0;
};

/// Two-sided Wald test on coefficient `index`. Throws NumericalError on zero variance.
WaldResult wald_test(const CoxFit& fit, std::size_t index = 0);

}  // namespace poocox
