#include "poocox/report.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "poocox/errors.hpp"

namespace poocox {

namespace {

using nlohmann::json;

json baseline_json(const BaselineHazard& h) {
  return {{"times", std::vector<double>(h.times().begin(), h.times().end())},
          {"increments", std::vector<double>(h.increments().begin(), h.increments().end())}};
}

BaselineHazard baseline_from_json(const json& j) {
  return BaselineHazard(j.at("times").get<std::vector<double>>(), j.at("increments").get<std::vector<double>>());
}

std::string csv_number(double v) { return std::isnan(v) ? std::string("NA") : fmt::format("{}", v); }

}  // namespace

json to_json(const EMConfig& c) {
  json j = {{"q", c.q},
            {"epsilon", c.epsilon},
            {"eta", c.eta},
            {"test_ages", c.test_ages},
            {"tol", c.tol},
            {"max_iter", c.max_iter},
            {"seed", c.seed},
            {"proband_correction", c.proband_correction},
            {"jobs", c.jobs}};
  j["bootstrap"] = c.bootstrap_B ? json(*c.bootstrap_B) : json(nullptr);
  return j;
}

EMConfig em_config_from_json(const json& j) {
  EMConfig c;
  c.q = j.value("q", c.q);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.eta = j.value("eta", c.eta);
  c.test_ages = j.value("test_ages", c.test_ages);
  c.tol = j.value("tol", c.tol);
  c.max_iter = j.value("max_iter", c.max_iter);
  c.seed = j.value("seed", c.seed);
  c.proband_correction = j.value("proband_correction", c.proband_correction);
  c.jobs = j.value("jobs", c.jobs);
  if (j.contains("bootstrap") && !j["bootstrap"].is_null()) c.bootstrap_B = j["bootstrap"].get<int>();
  return c;
}

json fit_report(const FitResult& r, const EMConfig& config) {
  const auto& fit = r.fit;
  const auto p = fit.coefficients.size();
  json j;
  j["version"] = kVersion;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["beta_hat"] = fit.beta_hat;
  j["se_naive"] = std::sqrt(fit.covariance(0, 0));
  try {
    const auto w = wald_test(fit, 0);
    j["z_wald"] = w.z;
    j["p_wald"] = w.p_value;
  } catch (const NumericalError&) {
    j["z_wald"] = nullptr;
    j["p_wald"] = nullptr;
  }
  j["gamma"] = fit.gamma_hat;
  std::vector<double> gamma_se;
  for (Eigen::Index k = 1; k < p; ++k) gamma_se.push_back(std::sqrt(fit.covariance(k, k)));
  j["gamma_se"] = gamma_se;
  json cov = json::array();
  for (Eigen::Index a = 0; a < p; ++a) {
    json row = json::array();
    for (Eigen::Index b = 0; b < p; ++b) row.push_back(fit.covariance(a, b));
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["log_partial_likelihood"] = fit.log_partial_likelihood;
  j["baseline"] = baseline_json(fit.baseline);

  json trace = json::array();
  for (const auto& it : r.trace.iterations)
    trace.push_back({{"iteration", it.iteration},
                     {"beta", it.beta},
                     {"gamma", it.gamma},
                     {"baseline_survival", it.baseline_survival},
                     {"log_evidence", std::isfinite(it.log_evidence) ? json(it.log_evidence) : json(nullptr)},
                     {"full_log_likelihood",
                      std::isfinite(it.full_log_likelihood) ? json(it.full_log_likelihood) : json(nullptr)},
                     {"max_change", std::isfinite(it.max_change) ? json(it.max_change) : json(nullptr)}});
  j["trace"] = trace;
  const auto& last = r.trace.iterations.back();
  j["trace_summary"] = {{"iterations", r.iterations},
                        {"final_max_change", std::isfinite(last.max_change) ? json(last.max_change) : json(nullptr)},
                        {"final_log_evidence", std::isfinite(last.log_evidence) ? json(last.log_evidence) : json(nullptr)},
                        {"test_ages", config.test_ages},
                        {"final_baseline_survival", last.baseline_survival},
                        {"warnings", r.trace.warnings}};
  j["warnings"] = r.warnings;

  if (r.bootstrap) {
    const auto& b = *r.bootstrap;
    json reps = json::array();
    for (const auto& rep : b.replicates) {
      if (rep.ok)
        reps.push_back({{"ok", true},
                        {"converged", rep.converged},
                        {"iterations", rep.iterations},
                        {"beta", rep.beta},
                        {"gamma", rep.gamma},
                        {"baseline", baseline_json(rep.baseline)}});
      else
        reps.push_back({{"ok", false}, {"error", rep.error}});
    }
    j["bootstrap"] = {{"B", b.requested},
                      {"failures", b.failures},
                      {"beta_ci", {b.beta_lower, b.beta_upper}},
                      {"replicates", reps}};
  }
  j["config"] = to_json(config);
  return j;
}

FitSummary fit_summary_from_report(const json& report) {
  FitSummary s;
  try {
    s.beta = report.at("beta_hat").get<double>();
    s.gamma = report.at("gamma").get<std::vector<double>>();
    s.baseline = baseline_from_json(report.at("baseline"));
    if (report.contains("bootstrap"))
      for (const auto& rep : report["bootstrap"].at("replicates")) {
        if (!rep.value("ok", false)) continue;
        BootstrapReplicate b;
        b.ok = true;
        b.beta = rep.at("beta").get<double>();
        b.gamma = rep.at("gamma").get<std::vector<double>>();
        b.baseline = baseline_from_json(rep.at("baseline"));
        s.bootstrap.push_back(std::move(b));
      }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed fit report: ") + e.what());
  }
  return s;
}

std::vector<CurveRow> survival_table(const FitSummary& fit, std::span<const double> z, double max_age, double step,
                                     double level) {
  if (!(step > 0.0) || !(max_age >= 0.0)) throw ValidationError("curve grid needs step > 0 and max_age >= 0");
  if (!z.empty() && z.size() != fit.gamma.size()) throw ValidationError("covariate profile length does not match gamma");
  const auto pat = survival_curve(fit.baseline, fit.beta, fit.gamma, Poo::Pat, z);
  const auto mat = survival_curve(fit.baseline, fit.beta, fit.gamma, Poo::Mat, z);
  std::vector<SurvivalCurve> boot_pat;
  std::vector<SurvivalCurve> boot_mat;
  for (const auto& b : fit.bootstrap) {
    boot_pat.push_back(survival_curve(b.baseline, b.beta, b.gamma, Poo::Pat, z));
    boot_mat.push_back(survival_curve(b.baseline, b.beta, b.gamma, Poo::Mat, z));
  }
  const double alpha = 0.5 * (1.0 - level);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<CurveRow> rows;
  const auto count = static_cast<std::size_t>(std::floor(max_age / step + 1e-9)) + 1;
  std::vector<double> values;
  for (std::size_t k = 0; k < count; ++k) {
    const double age = static_cast<double>(k) * step;
    CurveRow row{age, pat(age), mat(age), nan, nan, nan, nan};
    if (!boot_pat.empty()) {
      auto band = [&](const std::vector<SurvivalCurve>& curves, double point, double& lo, double& hi) {
        values.clear();
        for (const auto& c : curves) values.push_back(c(age));
        lo = std::min(quantile(values, alpha), point);
        hi = std::max(quantile(values, 1.0 - alpha), point);
      };
      band(boot_pat, row.survival_pat, row.lower_pat, row.upper_pat);
      band(boot_mat, row.survival_mat, row.lower_mat, row.upper_mat);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
  out << "age,survival_pat,survival_mat,lower_pat,upper_pat,lower_mat,upper_mat\n";
  for (const auto& r : rows)
    out << csv_number(r.age) << ',' << csv_number(r.survival_pat) << ',' << csv_number(r.survival_mat) << ','
        << csv_number(r.lower_pat) << ',' << csv_number(r.upper_pat) << ',' << csv_number(r.lower_mat) << ','
        << csv_number(r.upper_mat) << '\n';
}

}  // namespace poocox
