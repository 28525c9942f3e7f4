#include "poocox/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "poocox/errors.hpp"
#include "poocox/kernels.hpp"

namespace poocox {

namespace {

// Observations sorted by decreasing time, design stored column-wise.
struct RiskSetDesign {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> time;
  std::vector<double> weight;
  std::vector<double> event_weight;  // weight * status
  std::vector<std::vector<double>> column;

  explicit RiskSetDesign(std::span<const WeightedObservation> data) : n(data.size()) {
    p = 1 + (data.empty() ? 0 : data.front().covariates.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return data[a].time > data[b].time; });
    time.resize(n);
    weight.resize(n);
    event_weight.resize(n);
    column.assign(p, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
      const auto& obs = data[order[r]];
      if (obs.covariates.size() + 1 != p) throw ValidationError("inconsistent covariate length in Cox data");
      if (!(obs.weight >= 0.0) || !std::isfinite(obs.weight)) throw ValidationError("Cox weights must be finite and >= 0");
      if (!(obs.time >= 0.0) || !std::isfinite(obs.time)) throw ValidationError("Cox times must be finite and >= 0");
      time[r] = obs.time;
      weight[r] = obs.weight;
      event_weight[r] = obs.status ? obs.weight : 0.0;
      column[0][r] = obs.poo == Poo::Pat ? 1.0 : 0.0;
      for (std::size_t k = 1; k < p; ++k) column[k][r] = obs.covariates[k - 1];
    }
  }

  std::vector<double> linear_predictor(const Eigen::VectorXd& b) const {
    std::vector<double> lp(n, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
      const double bk = b[static_cast<Eigen::Index>(k)];
      if (bk == 0.0) continue;
      const auto& x = column[k];
      for (std::size_t r = 0; r < n; ++r) lp[r] += bk * x[r];
    }
    return lp;
  }

  std::vector<double> risk(const std::vector<double>& lp) const {
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = weight[j] * std::exp(lp[j]);
    return r;
  }
};

}  // namespace

PartialLikelihood partial_likelihood(std::span<const WeightedObservation> data, const Eigen::VectorXd& coefficients) {
  const RiskSetDesign d(data);
  const auto p = static_cast<Eigen::Index>(d.p);
  if (coefficients.size() != p) throw ValidationError("coefficient vector has wrong length");
  const auto lp = d.linear_predictor(coefficients);
  const auto r = d.risk(lp);

  // Per-row first and second moments of the design, weighted by risk.
  std::vector<std::vector<double>> rx(d.p, std::vector<double>(d.n));
  for (std::size_t k = 0; k < d.p; ++k) kernels::multiply(rx[k], r, d.column[k]);
  std::vector<std::vector<double>> rxx(d.p * d.p);
  for (std::size_t k = 0; k < d.p; ++k)
    for (std::size_t l = k; l < d.p; ++l) {
      rxx[k * d.p + l].resize(d.n);
      kernels::multiply(rxx[k * d.p + l], rx[k], d.column[l]);
    }

  PartialLikelihood out;
  out.score = Eigen::VectorXd::Zero(p);
  out.information = Eigen::MatrixXd::Zero(p, p);
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd ex(p);

  std::size_t start = 0;
  while (start < d.n) {
    std::size_t end = start + 1;
    while (end < d.n && d.time[end] == d.time[start]) ++end;
    const std::size_t len = end - start;
    // Breslow ties: the whole tie group enters the risk set first.
    s0 += kernels::sum({r.data() + start, len});
    for (std::size_t k = 0; k < d.p; ++k) {
      s1[static_cast<Eigen::Index>(k)] += kernels::sum({rx[k].data() + start, len});
      for (std::size_t l = k; l < d.p; ++l) {
        const double v = kernels::sum({rxx[k * d.p + l].data() + start, len});
        s2(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) += v;
      }
    }
    const std::span<const double> ew{d.event_weight.data() + start, len};
    const double dw = kernels::sum(ew);
    if (dw > 0.0) {
      for (std::size_t k = 0; k < d.p; ++k) ex[static_cast<Eigen::Index>(k)] = kernels::dot(ew, {d.column[k].data() + start, len});
      const double elp = kernels::dot(ew, {lp.data() + start, len});
      out.log_likelihood += elp - dw * std::log(s0);
      const Eigen::VectorXd mean = s1 / s0;
      out.score += ex - dw * mean;
      Eigen::MatrixXd second = s2.selfadjointView<Eigen::Upper>();
      out.information += dw * (second / s0 - mean * mean.transpose());
    }
    start = end;
  }
  return out;
}

CoxFit cox_fit(std::span<const WeightedObservation> data, const Eigen::VectorXd& init, const CoxOptions& options) {
  if (data.empty()) throw RankDeficiency("Cox fit on empty data");
  const std::size_t p = 1 + data.front().covariates.size();
  double pat_events = 0.0;
  double mat_events = 0.0;
  for (const auto& obs : data) {
    if (!obs.status) continue;
    (obs.poo == Poo::Pat ? pat_events : mat_events) += obs.weight;
  }
  if (!(pat_events > 0.0) || !(mat_events > 0.0))
    throw RankDeficiency("POO effect is inestimable: each POO group needs positive event weight");

  Eigen::VectorXd b = init.size() == 0 ? Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p)) : init;
  if (b.size() != static_cast<Eigen::Index>(p)) throw ValidationError("initial coefficient vector has wrong length");

  auto eval = partial_likelihood(data, b);
  bool have_previous = false;
  double previous_ll = 0.0;
  int iter = 0;
  bool converged = false;
  for (iter = 1; iter <= options.max_iterations; ++iter) {
    Eigen::LLT<Eigen::MatrixXd> llt(eval.information);
    if (llt.info() != Eigen::Success || !(eval.information.diagonal().minCoeff() > 0.0))
      throw SingularInformation("Cox information matrix is singular at iteration " + std::to_string(iter));
    const Eigen::VectorXd step = llt.solve(eval.score);
    const double max_score = eval.score.cwiseAbs().maxCoeff();
    const bool ll_flat = have_previous && std::abs(eval.log_likelihood - previous_ll) <=
                                              options.loglik_tolerance * std::abs(eval.log_likelihood);
    if ((max_score < options.score_tolerance || ll_flat) && step.cwiseAbs().maxCoeff() < options.step_tolerance) {
      // One last full Newton step; from here it lands at machine precision.
      const Eigen::VectorXd polished = b + step;
      auto final_eval = partial_likelihood(data, polished);
      if (final_eval.log_likelihood >= eval.log_likelihood - 1e-12 * std::abs(eval.log_likelihood)) {
        b = polished;
        eval = std::move(final_eval);
      }
      converged = true;
      break;
    }

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    PartialLikelihood cand_eval;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      candidate = b + t * step;
      cand_eval = partial_likelihood(data, candidate);
      if (std::isfinite(cand_eval.log_likelihood) && cand_eval.log_likelihood >= eval.log_likelihood) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (max_score < options.score_tolerance) {
        converged = true;
        break;
      }
      throw NonConvergence("Cox step-halving failed to increase the partial likelihood");
    }
    if (candidate.cwiseAbs().maxCoeff() > options.divergence_bound)
      throw MonotoneLikelihood("coefficient diverged beyond |" + std::to_string(options.divergence_bound) +
                               "|: monotone partial likelihood");
    previous_ll = eval.log_likelihood;
    have_previous = true;
    b = std::move(candidate);
    eval = std::move(cand_eval);
  }
  if (!converged)
    throw NonConvergence("Cox fit did not converge in " + std::to_string(options.max_iterations) + " Newton steps");

  Eigen::LLT<Eigen::MatrixXd> llt(eval.information);
  if (llt.info() != Eigen::Success) throw SingularInformation("Cox information matrix is singular at the solution");
  CoxFit fit;
  fit.coefficients = b;
  fit.beta_hat = b[0];
  fit.gamma_hat.assign(b.data() + 1, b.data() + b.size());
  fit.covariance = llt.solve(Eigen::MatrixXd::Identity(b.size(), b.size()));
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
  fit.log_partial_likelihood = eval.log_likelihood;
  fit.iterations = iter;
  fit.baseline = breslow_baseline(data, b);
  return fit;
}

BaselineHazard breslow_baseline(std::span<const WeightedObservation> data, const Eigen::VectorXd& coefficients) {
  const RiskSetDesign d(data);
  if (coefficients.size() != static_cast<Eigen::Index>(d.p)) throw ValidationError("coefficient vector has wrong length");
  const auto r = d.risk(d.linear_predictor(coefficients));
  std::vector<double> times;
  std::vector<double> increments;
  double at_risk = 0.0;
  std::size_t start = 0;
  while (start < d.n) {
    std::size_t end = start + 1;
    while (end < d.n && d.time[end] == d.time[start]) ++end;
    const std::size_t len = end - start;
    at_risk += kernels::sum({r.data() + start, len});
    const double dw = kernels::sum({d.event_weight.data() + start, len});
    if (dw > 0.0) {
      if (!(at_risk > 0.0)) throw NumericalError("empty risk set with positive event weight");
      times.push_back(d.time[start]);
      increments.push_back(dw / at_risk);
    }
    start = end;
  }
  std::reverse(times.begin(), times.end());
  std::reverse(increments.begin(), increments.end());
  return BaselineHazard(std::move(times), std::move(increments));
}

BaselineHazard breslow_baseline(std::span<const WeightedObservation> data, const CoxFit& fit) {
  return breslow_baseline(data, fit.coefficients);
}

std::vector<double> SurvivalCurve::at_jumps() const {
  std::vector<double> out;
  out.reserve(baseline_.size());
  for (double c : baseline_.cumulative_values()) out.push_back(std::exp(-c * risk_));
  return out;
}

SurvivalCurve survival_curve(const BaselineHazard& baseline, double beta, std::span<const double> gamma, Poo group,
                             std::span<const double> z) {
  double lp = group == Poo::Pat ? beta : 0.0;
  if (!z.empty()) {
    if (z.size() != gamma.size()) throw ValidationError("covariate length does not match gamma");
    lp += std::inner_product(z.begin(), z.end(), gamma.begin(), 0.0);
  }
  return SurvivalCurve(baseline, lp);
}

WaldResult wald_test(const CoxFit& fit, std::size_t index) {
  const auto i = static_cast<Eigen::Index>(index);
  if (i >= fit.coefficients.size()) throw ValidationError("Wald test index out of range");
  const double var = fit.covariance(i, i);
  if (!(var > 0.0)) throw NumericalError("Wald test on a coefficient with zero variance");
  WaldResult out;
  out.z = fit.coefficients[i] / std::sqrt(var);
  out.p_value = std::erfc(std::abs(out.z) / std::sqrt(2.0));
  return out;
}

}  // namespace poocox
