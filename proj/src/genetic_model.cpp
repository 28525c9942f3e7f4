#include "poocox/genetic_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "poocox/errors.hpp"

namespace poocox {

BaselineHazard::BaselineHazard(std::vector<double> times, std::vector<double> increments)
    : times_(std::move(times)), increments_(std::move(increments)) {
  if (times_.size() != increments_.size()) throw ValidationError("baseline hazard: size mismatch");
  cumulative_.resize(times_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (k > 0 && !(times_[k] > times_[k - 1])) throw ValidationError("baseline hazard: times must increase");
    if (!(increments_[k] > 0.0)) throw ValidationError("baseline hazard: increments must be positive");
    acc += increments_[k];
    cumulative_[k] = acc;
  }
}

double BaselineHazard::cumulative(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double BaselineHazard::increment_at(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end() || *it != t) return 0.0;
  return increments_[static_cast<std::size_t>(it - times_.begin())];
}

void ModelParams::check() const {
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("allele frequency q must lie in [0, 1]");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in [0, 1)");
  if (!(eta >= 0.0 && eta < 1.0)) throw ValidationError("eta must lie in [0, 1)");
  if (!std::isfinite(beta)) throw ValidationError("beta must be finite");
}

GenotypeDistribution founder_prior(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("allele frequency q must lie in [0, 1]");
  const double p = 1.0 - q;
  return {p * p, q * p, q * p, q * q};
}

GenotypeDistribution transmission(OrderedGenotype father, OrderedGenotype mother) {
  const double from_father = 0.5 * mutated_alleles(father);
  const double from_mother = 0.5 * mutated_alleles(mother);
  GenotypeDistribution out{};
  for (auto child : kAllGenotypes) {
    const double pf = paternal_mutated(child) ? from_father : 1.0 - from_father;
    const double pm = maternal_mutated(child) ? from_mother : 1.0 - from_mother;
    out[index(child)] = pf * pm;
  }
  return out;
}

double penetrance_factor(double t, Status delta, OrderedGenotype x, std::span<const double> z,
                         const ModelParams& params) {
  if (!(t >= 0.0)) throw ValidationError("penetrance evaluated at negative time");
  if (x == OrderedGenotype::NonCarrier) return delta == Status::Affected ? 0.0 : 1.0;
  if (z.size() != params.gamma.size()) throw ValidationError("covariate length does not match gamma");
  double lp = std::inner_product(z.begin(), z.end(), params.gamma.begin(), 0.0);
  if (x == OrderedGenotype::HetPaternal) lp += params.beta;
  const double risk = std::exp(lp);
  const double surv = std::exp(-params.baseline.cumulative(t) * risk);
  return delta == Status::Affected ? surv * risk : surv;
}

double test_factor(GeneTest g, OrderedGenotype x, double epsilon, double eta) {
  switch (g) {
    case GeneTest::Missing: return 1.0;
    case GeneTest::Positive: return is_carrier(x) ? 1.0 - epsilon : eta;
    case GeneTest::Negative: return is_carrier(x) ? epsilon : 1.0 - eta;
  }
  return 1.0;
}

GenotypeDistribution evidence_values(const IndividualRecord& record, const ModelParams& params,
                                     bool suppress_phenotype) {
  GenotypeDistribution phi{};
  for (auto x : kAllGenotypes) {
    double v = test_factor(record.gene_test, x, params.epsilon, params.eta);
    if (!suppress_phenotype) v *= penetrance_factor(record.age, record.status, x, record.covariates, params);
    if (record.pinned_genotype && *record.pinned_genotype != x) v = 0.0;
    phi[index(x)] = v;
  }
  return phi;
}

GenotypeFactor evidence_factor(const IndividualRecord& record, int self, const ModelParams& params,
                               bool suppress_phenotype) {
  auto phi = evidence_values(record, params, suppress_phenotype);
  return {{self}, std::vector<double>(phi.begin(), phi.end())};
}

GenotypeFactor genotype_factor(const Pedigree& ped, int i, double q) {
  const int f = ped.father(static_cast<std::size_t>(i));
  const int m = ped.mother(static_cast<std::size_t>(i));
  if (f < 0) {
    auto prior = founder_prior(q);
    return {{i}, std::vector<double>(prior.begin(), prior.end())};
  }
  GenotypeFactor out{{i, f, m}, std::vector<double>(64)};
  for (auto gm : kAllGenotypes)
    for (auto gf : kAllGenotypes) {
      auto t = transmission(gf, gm);
      for (auto c : kAllGenotypes) out.table[index(c) + 4 * index(gf) + 16 * index(gm)] = t[index(c)];
    }
  return out;
}

std::vector<GenotypeFactor> family_factors(const Pedigree& ped, const ModelParams& params) {
  std::vector<GenotypeFactor> out;
  out.reserve(2 * ped.size());
  for (std::size_t i = 0; i < ped.size(); ++i) {
    out.push_back(genotype_factor(ped, static_cast<int>(i), params.q));
    out.push_back(evidence_factor(ped[i], static_cast<int>(i), params, ped[i].phenotype_suppressed));
  }
  return out;
}

}  // namespace poocox
