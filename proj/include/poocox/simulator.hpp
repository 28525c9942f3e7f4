#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poocox/em.hpp"
#include "poocox/genotype.hpp"
#include "poocox/pedigree.hpp"

namespace poocox {

/// Piecewise-constant hazard. `starts[k]` opens interval k; the last interval
/// extends to infinity.
class HazardSpec {
 public:
  HazardSpec(std::vector<double> starts, std::vector<double> rates);

  /// 0 on [0,20), 0.02 on [20,40), 0.10 on [40,60), 0.05 beyond.
  static HazardSpec reference();

  double cumulative(double t) const;
  /// Smallest t with cumulative(t) = target, or nullopt if never reached.
  std::optional<double> inverse_cumulative(double target) const;

  const std::vector<double>& starts() const noexcept { return starts_; }
  const std::vector<double>& rates() const noexcept { return rates_; }

 private:
  std::vector<double> starts_;
  std::vector<double> rates_;
};

enum class Scenario { S0, S1, S2, Oracle };

std::string_view scenario_label(Scenario s) noexcept;
std::optional<Scenario> parse_scenario(std::string_view s) noexcept;
inline constexpr Scenario kAllScenarios[] = {Scenario::S0, Scenario::S1, Scenario::S2, Scenario::Oracle};

/// Ten-person, three-generation family: grandparents 1 x 2; their children
/// 3 (m), 4 (f), 5 (m); spouses 6 (f, with 3) and 7 (m, with 4);
/// grandchildren 8, 9 (of 3 x 6) and 10 (of 7 x 4).
struct TemplateMember {
  const char* id;
  const char* father;  // nullptr for founders
  const char* mother;
  Sex sex;
};
inline constexpr TemplateMember kFamilyTemplate[] = {
    {"1", nullptr, nullptr, Sex::Male},  {"2", nullptr, nullptr, Sex::Female}, {"3", "1", "2", Sex::Male},
    {"4", "1", "2", Sex::Female},        {"5", "1", "2", Sex::Male},          {"6", nullptr, nullptr, Sex::Female},
    {"7", nullptr, nullptr, Sex::Male},  {"8", "3", "6", Sex::Female},        {"9", "3", "6", Sex::Male},
    {"10", "7", "4", Sex::Female},
};
inline constexpr std::size_t kFamilySize = std::size(kFamilyTemplate);

struct TruthRecord {
  std::string family_id;
  std::string individual_id;
  OrderedGenotype genotype = OrderedGenotype::NonCarrier;
  double event_time = 0.0;  // +inf when the disease never develops
  double censor_time = 0.0;
};

struct SimulationConfig {
  int families = 100;
  double beta = -0.6;
  double q = 0.2;
  HazardSpec hazard = HazardSpec::reference();
  double censor_min = 15.0;
  double censor_max = 80.0;
};

/// Families with phenotypes filled in and every gene test Missing, plus the
/// hidden truth. No ascertainment is simulated: the proband flag goes to one
/// member drawn uniformly, independently of phenotype.
struct SimulatedTruth {
  std::vector<Pedigree> families;
  std::vector<std::vector<TruthRecord>> truth;
};

SimulatedTruth simulate_truth(const SimulationConfig& config, std::uint64_t seed);

/// Observed gene tests per scenario (error-free). Oracle also pins the
/// ordered genotype of every carrier.
std::vector<Pedigree> apply_scenario_mask(const SimulatedTruth& truth, Scenario scenario, std::uint64_t seed);

struct SimulatedData {
  std::vector<Pedigree> families;
  SimulatedTruth truth;
};

/// Truth from stream (seed, truth) and mask from stream (seed, mask, scenario):
/// scenarios sharing a seed share the same underlying families.
SimulatedData simulate_families(const SimulationConfig& config, Scenario scenario, std::uint64_t seed);

/// `family_id individual_id true_genotype true_poo`
void write_truth(std::ostream& out, const SimulatedTruth& truth);
/// `family_id individual_id poo` for every carrier with a pinned genotype.
void write_origin_sidecar(std::ostream& out, const std::vector<Pedigree>& families);

struct StudyCase {
  std::string label;
  int families = 100;
  double beta = -0.6;
};

/// The three published cases: A (100, -0.6), B (400, -0.6), C (100, -1.2).
std::vector<StudyCase> reference_cases();

struct StudyConfig {
  std::vector<StudyCase> cases;
  std::vector<Scenario> scenarios{std::begin(kAllScenarios), std::end(kAllScenarios)};
  int replicates = 200;
  std::uint64_t seed = 1;
  SimulationConfig simulation;  // families and beta are overridden per case
  EMConfig em;                  // seed is overridden per replicate
  double epsilon = 0.0;         // test error rates assumed by the fit
  double eta = 0.0;
  int jobs = 1;
};

struct StudyRow {
  std::string case_label;
  Scenario scenario = Scenario::S0;
  int replicate = 0;
  double beta_hat = 0.0;
  double se = 0.0;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  std::string error;  // empty on success
};

/// EM settings used by the study: q from the simulation, test error rates
/// from the study config.
EMConfig study_em_config(const StudyConfig& config);

/// Rows ordered by (case, scenario, replicate) whatever `jobs` is. A failed
/// replicate becomes a row carrying the failure reason.
std::vector<StudyRow> replicate_study(const StudyConfig& config);
void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows);

/// Seed of replicate r in case c; the same seed reproduces the replicate via
/// simulate_families + em_fit.
std::uint64_t replicate_seed(std::uint64_t study_seed, std::size_t case_index, int replicate) noexcept;

}  // namespace poocox
