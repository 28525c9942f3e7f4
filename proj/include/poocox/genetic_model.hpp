#pragma once

#include <array>
#include <span>
#include <vector>

#include "poocox/baseline_hazard.hpp"
#include "poocox/genotype.hpp"
#include "poocox/pedigree.hpp"

namespace poocox {

using GenotypeDistribution = std::array<double, kGenotypeStates>;

struct ModelParams {
  double q = 0.0;
  double beta = 0.0;           // log hazard ratio of 1p relative to {1m, 2}
  std::vector<double> gamma;   // covariate coefficients
  double epsilon = 0.01;
  double eta = 0.001;
  BaselineHazard baseline;

  /// Throws ValidationError if q, epsilon or eta is out of range.
  void check() const;
};

/// Local factor of the genotype network. Entry index is
/// sum_k state(scope[k]) * 4^k, so scope[0] varies fastest.
struct GenotypeFactor {
  std::vector<int> scope;
  std::vector<double> table;
};

/// Hardy-Weinberg prior with the heterozygote mass split evenly over 1p/1m.
GenotypeDistribution founder_prior(double q);

/// Mendelian transmission P(child | father, mother) for ordered genotypes.
GenotypeDistribution transmission(OrderedGenotype father, OrderedGenotype mother);

/// P(T = t, delta | X = x, Z = z) with the baseline hazard lambda0(t) dropped
/// from the affected branch. Throws ValidationError on negative t.
double penetrance_factor(double t, Status delta, OrderedGenotype x, std::span<const double> z,
                         const ModelParams& params);

/// P(G = g | X = x). Missing tests contribute 1.
double test_factor(GeneTest g, OrderedGenotype x, double epsilon, double eta);

/// phi_i over {self}: penetrance times test likelihood, times the pin mask when
/// the record carries a known ordered genotype. With `suppress_phenotype` the
/// penetrance part is replaced by 1.
GenotypeFactor evidence_factor(const IndividualRecord& record, int self, const ModelParams& params,
                               bool suppress_phenotype);

/// phi_i values only, in genotype order.
GenotypeDistribution evidence_values(const IndividualRecord& record, const ModelParams& params,
                                     bool suppress_phenotype);

/// The genotype factor of individual i: founder prior over {i}, or the
/// transmission table over {i, father, mother}.
GenotypeFactor genotype_factor(const Pedigree& ped, int i, double q);

/// All factors of a family: one genotype factor and one evidence factor per
/// individual. Phenotypes are suppressed for records flagged by proband
/// correction.
std::vector<GenotypeFactor> family_factors(const Pedigree& ped, const ModelParams& params);

}  // namespace poocox
