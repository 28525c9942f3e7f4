#include "poocox/em.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include <fmt/format.h>

#include "poocox/errors.hpp"
#include "poocox/parallel.hpp"
#include "poocox/rng.hpp"

namespace poocox {

namespace {

std::vector<double> baseline_survival(const BaselineHazard& h, std::span<const double> ages) {
  std::vector<double> out;
  out.reserve(ages.size());
  for (double a : ages) out.push_back(std::exp(-h.cumulative(a)));
  return out;
}

CoxFit m_step(std::span<const Pedigree> families, std::span<const std::vector<PosteriorWeights>> weights,
              const Eigen::VectorXd& warm_start, int iteration) {
  const auto data = build_weighted_dataset(families, weights);
  try {
    return cox_fit(data, warm_start);
  } catch (const NumericalError& e) {
    std::throw_with_nested(EMStepError(iteration, e.what()));
  }
}

}  // namespace

void EMConfig::check() const {
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("q must lie in [0, 1]");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in [0, 1)");
  if (!(eta >= 0.0 && eta < 1.0)) throw ValidationError("eta must lie in [0, 1)");
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
  if (max_iter < 1) throw ValidationError("max_iter must be at least 1");
  if (test_ages.empty()) throw ValidationError("test_ages must not be empty");
  for (std::size_t i = 1; i < test_ages.size(); ++i)
    if (!(test_ages[i] > test_ages[i - 1])) throw ValidationError("test_ages must be increasing");
  if (bootstrap_B && *bootstrap_B < 1) throw ValidationError("bootstrap replicate count must be positive");
  if (jobs < 1) throw ValidationError("jobs must be positive");
}

std::vector<WeightedObservation> build_weighted_dataset(std::span<const Pedigree> families,
                                                        std::span<const std::vector<PosteriorWeights>> weights) {
  if (weights.size() != families.size()) throw ValidationError("weights missing for some families");
  std::size_t n = 0;
  for (std::size_t f = 0; f < families.size(); ++f) {
    if (weights[f].size() != families[f].size()) throw ValidationError("weights missing for some individuals");
    n += families[f].size();
  }
  std::vector<WeightedObservation> rows;
  rows.reserve(2 * n);
  for (Poo group : {Poo::Pat, Poo::Mat})
    for (std::size_t f = 0; f < families.size(); ++f)
      for (std::size_t i = 0; i < families[f].size(); ++i) {
        const auto& rec = families[f][i];
        if (rec.phenotype_suppressed) continue;
        const auto& w = weights[f][i];
        rows.push_back({rec.age, rec.affected() ? 1 : 0, group, rec.covariates,
                        group == Poo::Pat ? w.w_pat : w.w_mat});
      }
  return rows;
}

ProbandCorrection apply_proband_correction(std::span<const Pedigree> families) {
  ProbandCorrection out;
  out.families.assign(families.begin(), families.end());
  for (auto& ped : out.families) {
    bool any = false;
    for (std::size_t i = 0; i < ped.size(); ++i)
      if (ped[i].proband) {
        ped.record(i).phenotype_suppressed = true;
        any = true;
      }
    if (!any) out.warnings.push_back("family " + ped.family_id() + " has no proband; passed through uncorrected");
  }
  return out;
}

std::vector<std::vector<PosteriorWeights>> random_initial_weights(std::span<const Pedigree> families,
                                                                  std::uint64_t seed) {
  const Rng root = Rng(seed).split(streams::kEmInit);
  std::vector<std::vector<PosteriorWeights>> out(families.size());
  for (std::size_t f = 0; f < families.size(); ++f) {
    Rng rng = root.split(f);
    out[f].resize(families[f].size());
    for (auto& w : out[f]) {
      const double a = rng.uniform();
      const double b = rng.uniform();
      const double c = rng.uniform();
      const double s = a + b + c;
      if (s > 0.0)
        w = {a / s, b / s, c / s};
      else
        w = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    }
  }
  return out;
}

FitResult em_fit(std::span<const Pedigree> input, const EMConfig& config) {
  config.check();
  FitResult result;
  std::vector<Pedigree> families;
  if (config.proband_correction) {
    auto corrected = apply_proband_correction(input);
    families = std::move(corrected.families);
    result.warnings = std::move(corrected.warnings);
  } else {
    families.assign(input.begin(), input.end());
  }
  for (const auto& ped : families)
    if (ped.size() == 0) throw ValidationError("family " + ped.family_id() + " is empty");

  std::vector<CliqueTree> trees;
  trees.reserve(families.size());
  for (const auto& ped : families) trees.push_back(CliqueTree::build(ped));

  auto weights = random_initial_weights(families, config.seed);
  ModelParams params;
  params.q = config.q;
  params.epsilon = config.epsilon;
  params.eta = config.eta;
  params.check();

  CoxFit fit = m_step(families, weights, {}, 0);
  auto survival = baseline_survival(fit.baseline, config.test_ages);
  result.trace.iterations.push_back({0, fit.beta_hat, fit.gamma_hat, survival, std::numeric_limits<double>::quiet_NaN(),
                                     std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()});

  double previous_full = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= config.max_iter; ++it) {
    params.beta = fit.beta_hat;
    params.gamma = fit.gamma_hat;
    params.baseline = fit.baseline;

    double log_evidence = 0.0;
    double event_terms = 0.0;
    for (std::size_t f = 0; f < families.size(); ++f) {
      auto post = posterior_marginals(families[f], trees[f], params);
      log_evidence += post.log_evidence;
      weights[f] = std::move(post.weights);
      for (const auto& rec : families[f].individuals())
        if (rec.affected() && !rec.phenotype_suppressed) event_terms += std::log(params.baseline.increment_at(rec.age));
    }
    const double full = log_evidence + event_terms;
    if (full < previous_full - 1e-6)
      result.trace.warnings.push_back(
          fmt::format("iteration {}: observed-data log-likelihood decreased by {:.3g}", it, previous_full - full));
    previous_full = full;

    fit = m_step(families, weights, fit.coefficients, it);
    auto next = baseline_survival(fit.baseline, config.test_ages);
    double change = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) change = std::max(change, std::abs(next[k] - survival[k]));
    survival = std::move(next);
    result.trace.iterations.push_back({it, fit.beta_hat, fit.gamma_hat, survival, log_evidence, full, change});
    result.iterations = it;
    if (change < config.tol) {
      result.converged = true;
      break;
    }
  }

  result.fit = std::move(fit);
  result.weights = std::move(weights);
  if (config.bootstrap_B) result.bootstrap = bootstrap_fit(input, config, *config.bootstrap_B);
  return result;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BootstrapSummary bootstrap_fit(std::span<const Pedigree> families, const EMConfig& config, int replicates) {
  BootstrapSummary out;
  out.requested = replicates;
  out.replicates.resize(static_cast<std::size_t>(replicates));
  const Rng root = Rng(config.seed).split(streams::kBootstrap);

  parallel_for(out.replicates.size(), static_cast<std::size_t>(config.jobs), [&](std::size_t b) {
    auto& rep = out.replicates[b];
    Rng rng = root.split(b);
    std::vector<Pedigree> sample;
    sample.reserve(families.size());
    for (std::size_t f = 0; f < families.size(); ++f) sample.push_back(families[rng.below(families.size())]);
    EMConfig inner = config;
    inner.bootstrap_B.reset();
    inner.seed = rng();
    try {
      auto r = em_fit(sample, inner);
      rep.ok = true;
      rep.converged = r.converged;
      rep.iterations = r.iterations;
      rep.beta = r.fit.beta_hat;
      rep.gamma = r.fit.gamma_hat;
      rep.baseline = r.fit.baseline;
    } catch (const std::exception& e) {
      rep.ok = false;
      rep.error = e.what();
    }
  });

  std::vector<double> betas;
  for (const auto& r : out.replicates) {
    if (r.ok)
      betas.push_back(r.beta);
    else
      ++out.failures;
  }
  out.beta_lower = quantile(betas, 0.025);
  out.beta_upper = quantile(betas, 0.975);
  return out;
}

}  // namespace poocox
