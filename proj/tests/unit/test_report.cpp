#include <doctest.h>

#include <cmath>
#include <sstream>

#include "poocox/errors.hpp"
#include "poocox/report.hpp"
#include "poocox/simulator.hpp"

using namespace poocox;

namespace {

FitResult small_fit(std::optional<int> bootstrap, EMConfig& cfg) {
  SimulationConfig sim;
  sim.families = 50;
  const auto fams = simulate_families(sim, Scenario::S2, 19).families;
  cfg.bootstrap_B = bootstrap;
  return em_fit(fams, cfg);
}

}  // namespace

TEST_CASE("EM config round trips through JSON") {
  EMConfig c;
  c.q = 0.04;
  c.epsilon = 0.02;
  c.eta = 0.0;
  c.test_ages = {30, 50};
  c.tol = 1e-5;
  c.max_iter = 77;
  c.seed = 123456789012345ull;
  c.proband_correction = true;
  c.bootstrap_B = 40;
  c.jobs = 3;
  const auto back = em_config_from_json(to_json(c));
  CHECK(back.q == c.q);
  CHECK(back.epsilon == c.epsilon);
  CHECK(back.test_ages == c.test_ages);
  CHECK(back.tol == c.tol);
  CHECK(back.max_iter == c.max_iter);
  CHECK(back.seed == c.seed);
  CHECK(back.proband_correction);
  CHECK(back.bootstrap_B == 40);
  CHECK(back.jobs == 3);
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("fit report contents") {
  EMConfig cfg;
  const auto r = small_fit(std::nullopt, cfg);
  const auto j = fit_report(r, cfg);
  CHECK(j["version"] == kVersion);
  CHECK(j["beta_hat"].get<double>() == r.fit.beta_hat);
  const double se = std::sqrt(r.fit.covariance(0, 0));
  CHECK(j["se_naive"].get<double>() == doctest::Approx(se));
  CHECK(j["z_wald"].get<double>() == doctest::Approx(r.fit.beta_hat / se));
  CHECK(j["p_wald"].get<double>() == doctest::Approx(wald_test(r.fit).p_value));
  CHECK(j["iterations"] == r.iterations);
  CHECK(j["converged"] == r.converged);
  CHECK(j["trace"].size() == r.trace.iterations.size());
  CHECK(j["baseline"]["times"].size() == r.fit.baseline.size());
  CHECK_FALSE(j.contains("bootstrap"));
  CHECK(em_config_from_json(j["config"]).q == cfg.q);
  // The report text parses back identically.
  CHECK(nlohmann::json::parse(j.dump()) == j);

  const auto s = fit_summary_from_report(j);
  CHECK(s.beta == r.fit.beta_hat);
  CHECK(s.baseline == r.fit.baseline);
  CHECK(s.bootstrap.empty());
  CHECK_THROWS_AS(fit_summary_from_report(nlohmann::json::object()), ValidationError);
  auto broken = j;
  broken["baseline"]["times"] = {1.0};
  CHECK_THROWS_AS(fit_summary_from_report(broken), ValidationError);
}

TEST_CASE("survival table without bootstrap") {
  FitSummary f;
  f.beta = -0.6;
  f.baseline = BaselineHazard({25, 45, 65}, {0.2, 0.5, 0.4});
  const auto rows = survival_table(f, {}, 80, 5);
  REQUIRE(rows.size() == 17);
  CHECK(rows.front().age == 0.0);
  CHECK(rows.back().age == 80.0);
  double prev = 1.0;
  for (const auto& r : rows) {
    CHECK(r.survival_pat >= r.survival_mat);
    CHECK(r.survival_mat <= prev);
    CHECK(r.survival_mat == doctest::Approx(std::exp(-f.baseline.cumulative(r.age))));
    CHECK(std::isnan(r.lower_pat));
    CHECK(std::isnan(r.upper_mat));
    prev = r.survival_mat;
  }
  f.baseline = BaselineHazard();
  for (const auto& r : survival_table(f, {}, 50, 10)) {
    CHECK(r.survival_mat == 1.0);
    CHECK(r.survival_pat == 1.0);
  }
  std::ostringstream out;
  write_curve_csv(out, survival_table(f, {}, 1, 1));
  CHECK(out.str() ==
        "age,survival_pat,survival_mat,lower_pat,upper_pat,lower_mat,upper_mat\n"
        "0,1,1,NA,NA,NA,NA\n"
        "1,1,1,NA,NA,NA,NA\n");
}

TEST_CASE("bootstrap bands contain the point curve") {
  EMConfig cfg;
  cfg.seed = 4;
  const auto r = small_fit(12, cfg);
  const auto j = fit_report(r, cfg);
  REQUIRE(j["bootstrap"]["replicates"].size() == 12);
  const auto s = fit_summary_from_report(nlohmann::json::parse(j.dump()));
  CHECK(s.bootstrap.size() == static_cast<std::size_t>(12 - r.bootstrap->failures));
  for (const auto& row : survival_table(s, {}, 100, 2)) {
    CHECK(row.lower_pat <= row.survival_pat);
    CHECK(row.survival_pat <= row.upper_pat);
    CHECK(row.lower_mat <= row.survival_mat);
    CHECK(row.survival_mat <= row.upper_mat);
    CHECK(row.lower_mat >= 0.0);
    CHECK(row.upper_pat <= 1.0);
  }
}
