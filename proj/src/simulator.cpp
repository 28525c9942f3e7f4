#include "poocox/simulator.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "poocox/errors.hpp"
#include "poocox/parallel.hpp"
#include "poocox/rng.hpp"

namespace poocox {

HazardSpec::HazardSpec(std::vector<double> starts, std::vector<double> rates)
    : starts_(std::move(starts)), rates_(std::move(rates)) {
  if (starts_.empty() || starts_.size() != rates_.size()) throw ValidationError("hazard: need one rate per interval");
  if (starts_.front() != 0.0) throw ValidationError("hazard: first interval must start at 0");
  for (std::size_t k = 0; k < starts_.size(); ++k) {
    if (k > 0 && !(starts_[k] > starts_[k - 1])) throw ValidationError("hazard: cut points must increase");
    if (!(rates_[k] >= 0.0) || !std::isfinite(rates_[k])) throw ValidationError("hazard: rates must be finite and >= 0");
  }
}

HazardSpec HazardSpec::reference() { return HazardSpec({0.0, 20.0, 40.0, 60.0}, {0.0, 0.02, 0.10, 0.05}); }

double HazardSpec::cumulative(double t) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < starts_.size() && t > starts_[k]; ++k) {
    const double end = k + 1 < starts_.size() ? std::min(t, starts_[k + 1]) : t;
    acc += rates_[k] * (end - starts_[k]);
  }
  return acc;
}

std::optional<double> HazardSpec::inverse_cumulative(double target) const {
  if (target <= 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < starts_.size(); ++k) {
    const bool last = k + 1 == starts_.size();
    const double r = rates_[k];
    if (last) {
      if (r == 0.0) return std::nullopt;
      return starts_[k] + (target - acc) / r;
    }
    const double mass = r * (starts_[k + 1] - starts_[k]);
    if (r > 0.0 && acc + mass >= target) return starts_[k] + (target - acc) / r;
    acc += mass;
  }
  return std::nullopt;
}

std::string_view scenario_label(Scenario s) noexcept {
  switch (s) {
    case Scenario::S0: return "S0";
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::Oracle: return "Oracle";
  }
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view s) noexcept {
  for (auto sc : kAllScenarios)
    if (scenario_label(sc) == s) return sc;
  return std::nullopt;
}

SimulatedTruth simulate_truth(const SimulationConfig& config, std::uint64_t seed) {
  if (config.families < 1) throw ValidationError("need at least one family");
  if (!(config.q >= 0.0 && config.q <= 1.0)) throw ValidationError("q must lie in [0, 1]");
  if (!(config.censor_max >= config.censor_min)) throw ValidationError("censoring interval is empty");
  const Rng root = Rng(seed).split(streams::kTruth);
  const double pat_multiplier = std::exp(config.beta);

  SimulatedTruth out;
  out.families.reserve(static_cast<std::size_t>(config.families));
  out.truth.resize(static_cast<std::size_t>(config.families));
  for (int f = 0; f < config.families; ++f) {
    Rng rng = root.split(static_cast<std::uint64_t>(f));
    const std::string fam = "F" + std::to_string(f + 1);
    std::vector<OrderedGenotype> genotype(kFamilySize);
    auto position = [](const char* id) {
      for (std::size_t k = 0; k < kFamilySize; ++k)
        if (std::string_view(kFamilyTemplate[k].id) == id) return k;
      return kFamilySize;
    };
    // Template order lists parents before their children.
    for (std::size_t k = 0; k < kFamilySize; ++k) {
      const auto& m = kFamilyTemplate[k];
      if (!m.father) {
        const bool pat = rng.bernoulli(config.q);
        const bool mat = rng.bernoulli(config.q);
        genotype[k] = make_genotype(pat, mat);
        continue;
      }
      const auto gf = genotype[position(m.father)];
      const auto gm = genotype[position(m.mother)];
      const bool from_father = rng.bernoulli(0.5) ? paternal_mutated(gf) : maternal_mutated(gf);
      const bool from_mother = rng.bernoulli(0.5) ? paternal_mutated(gm) : maternal_mutated(gm);
      genotype[k] = make_genotype(from_father, from_mother);
    }

    std::vector<IndividualRecord> records;
    records.reserve(kFamilySize);
    for (std::size_t k = 0; k < kFamilySize; ++k) {
      const auto& m = kFamilyTemplate[k];
      const double e = rng.exponential();
      const double censor = rng.uniform(config.censor_min, config.censor_max);
      double event = std::numeric_limits<double>::infinity();
      if (is_carrier(genotype[k])) {
        // Homozygotes follow the maternal-origin (baseline) hazard.
        const double mult = genotype[k] == OrderedGenotype::HetPaternal ? pat_multiplier : 1.0;
        if (auto t = config.hazard.inverse_cumulative(e / mult)) event = *t;
      }
      IndividualRecord rec;
      rec.family_id = fam;
      rec.individual_id = m.id;
      if (m.father) {
        rec.father_id = m.father;
        rec.mother_id = m.mother;
      }
      rec.sex = m.sex;
      rec.status = event <= censor ? Status::Affected : Status::Censored;
      rec.age = std::min(event, censor);
      rec.gene_test = GeneTest::Missing;
      out.truth[static_cast<std::size_t>(f)].push_back({fam, m.id, genotype[k], event, censor});
      records.push_back(std::move(rec));
    }
    records[rng.below(kFamilySize)].proband = true;
    out.families.emplace_back(fam, std::move(records));
  }
  return out;
}

std::vector<Pedigree> apply_scenario_mask(const SimulatedTruth& truth, Scenario scenario, std::uint64_t seed) {
  const Rng root = Rng(seed).split({streams::kMask, static_cast<std::uint64_t>(scenario)});
  std::vector<Pedigree> out = truth.families;
  for (std::size_t f = 0; f < out.size(); ++f) {
    Rng rng = root.split(f);
    auto& ped = out[f];
    for (std::size_t i = 0; i < ped.size(); ++i) {
      const double u = rng.uniform();
      auto& rec = ped.record(i);
      const auto g = truth.truth[f][i].genotype;
      bool observed = false;
      switch (scenario) {
        case Scenario::S0: observed = false; break;
        case Scenario::S1: observed = u < (rec.affected() ? 0.8 : 0.1); break;
        case Scenario::S2:
        case Scenario::Oracle: observed = true; break;
      }
      rec.gene_test = observed ? (is_carrier(g) ? GeneTest::Positive : GeneTest::Negative) : GeneTest::Missing;
      if (scenario == Scenario::Oracle && is_carrier(g)) rec.pinned_genotype = g;
    }
  }
  return out;
}

SimulatedData simulate_families(const SimulationConfig& config, Scenario scenario, std::uint64_t seed) {
  SimulatedData out;
  out.truth = simulate_truth(config, seed);
  out.families = apply_scenario_mask(out.truth, scenario, seed);
  return out;
}

void write_truth(std::ostream& out, const SimulatedTruth& truth) {
  for (const auto& fam : truth.truth)
    for (const auto& t : fam)
      out << t.family_id << ' ' << t.individual_id << ' ' << genotype_label(t.genotype) << ' '
          << origin_label(t.genotype) << '\n';
}

void write_origin_sidecar(std::ostream& out, const std::vector<Pedigree>& families) {
  for (const auto& ped : families)
    for (const auto& rec : ped.individuals())
      if (rec.pinned_genotype)
        out << rec.family_id << ' ' << rec.individual_id << ' ' << origin_label(*rec.pinned_genotype) << '\n';
}

std::vector<StudyCase> reference_cases() { return {{"A", 100, -0.6}, {"B", 400, -0.6}, {"C", 100, -1.2}}; }

std::uint64_t replicate_seed(std::uint64_t study_seed, std::size_t case_index, int replicate) noexcept {
  return Rng(study_seed).split({streams::kStudy, case_index, static_cast<std::uint64_t>(replicate)}).key();
}

EMConfig study_em_config(const StudyConfig& config) {
  EMConfig em = config.em;
  em.q = config.simulation.q;
  em.epsilon = config.epsilon;
  em.eta = config.eta;
  em.bootstrap_B.reset();
  return em;
}

std::vector<StudyRow> replicate_study(const StudyConfig& config) {
  if (config.replicates < 1) throw ValidationError("replicate count must be at least 1");
  if (config.cases.empty() || config.scenarios.empty()) throw ValidationError("study needs cases and scenarios");
  const EMConfig em = study_em_config(config);
  em.check();

  const std::size_t per_case = config.scenarios.size() * static_cast<std::size_t>(config.replicates);
  std::vector<StudyRow> rows(config.cases.size() * per_case);
  parallel_for(rows.size(), static_cast<std::size_t>(std::max(1, config.jobs)), [&](std::size_t task) {
    const std::size_t c = task / per_case;
    const std::size_t s = (task % per_case) / static_cast<std::size_t>(config.replicates);
    const int r = static_cast<int>(task % static_cast<std::size_t>(config.replicates));
    const auto& study_case = config.cases[c];
    StudyRow& row = rows[task];
    row.case_label = study_case.label;
    row.scenario = config.scenarios[s];
    row.replicate = r;
    row.seed = replicate_seed(config.seed, c, r);
    try {
      SimulationConfig sim = config.simulation;
      sim.families = study_case.families;
      sim.beta = study_case.beta;
      const auto data = simulate_families(sim, row.scenario, row.seed);
      EMConfig cfg = em;
      cfg.seed = row.seed;
      const auto fit = em_fit(data.families, cfg);
      row.beta_hat = fit.fit.beta_hat;
      row.se = std::sqrt(fit.fit.covariance(0, 0));
      row.iterations = fit.iterations;
      row.converged = fit.converged;
    } catch (const std::exception& e) {
      row.error = e.what();
      row.beta_hat = std::numeric_limits<double>::quiet_NaN();
      row.se = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return rows;
}

void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
  out << "case,scenario,replicate,beta_hat,se,iterations,converged,seed,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    for (auto& ch : err)
      if (ch == '"' || ch == '\n' || ch == '\r') ch = ' ';
    out << fmt::format("{},{},{},{},{},{},{},{},", r.case_label, scenario_label(r.scenario), r.replicate,
                       r.beta_hat, r.se, r.iterations, r.converged ? 1 : 0, r.seed);
    if (!err.empty()) out << '"' << err << '"';
    out << '\n';
  }
}

}  // namespace poocox
