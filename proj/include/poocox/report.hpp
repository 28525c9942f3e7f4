#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "poocox/em.hpp"

namespace poocox {

inline constexpr const char* kVersion = "0.1.0";

nlohmann::json to_json(const EMConfig& config);
EMConfig em_config_from_json(const nlohmann::json& j);

/// Machine-readable fit report: estimates, naive standard errors, Wald test,
/// baseline steps, trace, and bootstrap replicates when present.
nlohmann::json fit_report(const FitResult& result, const EMConfig& config);

/// The parts of a fit report needed to draw survival curves.
struct FitSummary {
  double beta = 0.0;
  std::vector<double> gamma;
  BaselineHazard baseline;
  std::vector<BootstrapReplicate> bootstrap;  // successful replicates only
};

FitSummary fit_summary_from_report(const nlohmann::json& report);

struct CurveRow {
  double age = 0.0;
  double survival_pat = 1.0;
  double survival_mat = 1.0;
  // Percentile bootstrap band widened to contain the point curve; NaN
  // without bootstrap replicates.
  double lower_pat, upper_pat, lower_mat, upper_mat;
};

/// Curves for both POO groups on ages 0, step, ..., max_age.
std::vector<CurveRow> survival_table(const FitSummary& fit, std::span<const double> z, double max_age = 100.0,
                                     double step = 1.0, double level = 0.95);

/// `age,survival_pat,survival_mat,lower_pat,upper_pat,lower_mat,upper_mat`; NaN written as NA.
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);

}  // namespace poocox
