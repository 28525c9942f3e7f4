#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "poocox/errors.hpp"
#include "poocox/genetic_model.hpp"

using namespace poocox;
using poocox::testing::person;
using G = OrderedGenotype;

namespace {

ModelParams params_with_baseline(std::vector<double> times, std::vector<double> inc) {
  ModelParams p;
  p.q = 0.2;
  p.baseline = BaselineHazard(std::move(times), std::move(inc));
  return p;
}

}  // namespace

TEST_CASE("founder prior follows Hardy-Weinberg") {
  const auto p0 = founder_prior(0.0);
  CHECK(p0 == GenotypeDistribution{1.0, 0.0, 0.0, 0.0});
  const auto p2 = founder_prior(0.2);
  CHECK(p2[0] == doctest::Approx(0.64).epsilon(1e-15));
  CHECK(p2[index(G::HetPaternal)] == doctest::Approx(0.16).epsilon(1e-15));
  CHECK(p2[index(G::HetMaternal)] == doctest::Approx(0.16).epsilon(1e-15));
  CHECK(p2[3] == doctest::Approx(0.04).epsilon(1e-15));
  const auto p4 = founder_prior(0.04);
  CHECK(p4[0] == doctest::Approx(0.9216).epsilon(1e-14));
  CHECK(p4[1] == doctest::Approx(0.0384).epsilon(1e-14));
  CHECK(p4[3] == doctest::Approx(0.0016).epsilon(1e-14));
  for (int k = 0; k <= 100; ++k) {
    const auto p = founder_prior(k / 100.0);
    CHECK(p[0] + p[1] + p[2] + p[3] == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(founder_prior(-0.1), ValidationError);
  CHECK_THROWS_AS(founder_prior(1.5), ValidationError);
}

TEST_CASE("Mendelian transmission") {
  CHECK(transmission(G::NonCarrier, G::NonCarrier) == GenotypeDistribution{1, 0, 0, 0});
  const auto t20 = transmission(G::Homozygous, G::NonCarrier);
  CHECK(t20[index(G::HetPaternal)] == 1.0);
  CHECK(t20[0] + t20[2] + t20[3] == 0.0);
  const auto het = transmission(G::HetMaternal, G::HetPaternal);
  for (double v : het) CHECK(v == 0.25);

  for (auto f : kAllGenotypes)
    for (auto m : kAllGenotypes) {
      const auto t = transmission(f, m);
      CHECK(t[0] + t[1] + t[2] + t[3] == doctest::Approx(1.0).epsilon(1e-15));
      // Swapping parents with relabelling 1p <-> 1m everywhere is a symmetry.
      const auto s = transmission(swap_origin(m), swap_origin(f));
      for (auto c : kAllGenotypes) CHECK(t[static_cast<std::size_t>(index(c))] == s[static_cast<std::size_t>(index(swap_origin(c)))]);
      // Independent oracle: product of per-parent allele probabilities.
      for (auto c : kAllGenotypes)
        CHECK(t[static_cast<std::size_t>(index(c))] ==
              doctest::Approx(testing::oracle_transmit(f, paternal_mutated(c)) *
                              testing::oracle_transmit(m, maternal_mutated(c))));
    }
}

TEST_CASE("penetrance branches") {
  // Reference hazard: Lambda0(40) = 0.02 * 20.
  auto p = params_with_baseline({40.0}, {0.4});
  p.beta = -0.6;
  const std::vector<double> none;
  CHECK(penetrance_factor(40, Status::Affected, G::NonCarrier, none, p) == 0.0);
  CHECK(penetrance_factor(40, Status::Censored, G::NonCarrier, none, p) == 1.0);
  CHECK(penetrance_factor(40, Status::Censored, G::HetMaternal, none, p) == doctest::Approx(0.670320046035639));
  CHECK(penetrance_factor(40, Status::Censored, G::Homozygous, none, p) == doctest::Approx(std::exp(-0.4)));
  CHECK(penetrance_factor(40, Status::Censored, G::HetPaternal, none, p) ==
        doctest::Approx(std::exp(-0.4 * std::exp(-0.6))));
  CHECK(penetrance_factor(40, Status::Affected, G::HetPaternal, none, p) ==
        doctest::Approx(std::exp(-0.4 * std::exp(-0.6)) * std::exp(-0.6)));
  CHECK(penetrance_factor(39.9, Status::Censored, G::HetMaternal, none, p) == 1.0);
  CHECK_THROWS_AS(penetrance_factor(-1, Status::Censored, G::HetMaternal, none, p), ValidationError);

  // Covariates enter as exp(z gamma).
  p.gamma = {0.5};
  const std::vector<double> z{2.0};
  CHECK(penetrance_factor(50, Status::Affected, G::HetMaternal, z, p) ==
        doctest::Approx(std::exp(-0.4 * std::exp(1.0)) * std::exp(1.0)));

  // Non-increasing in t for carriers, flat extension past the last jump.
  auto q = params_with_baseline({10, 20, 30}, {0.1, 0.2, 0.3});
  double prev = 1.0;
  for (double t = 0; t <= 60; t += 0.5) {
    const double v = penetrance_factor(t, Status::Censored, G::HetPaternal, none, q);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(penetrance_factor(1000, Status::Censored, G::HetMaternal, none, q) == doctest::Approx(std::exp(-0.6)));
}

TEST_CASE("test factor follows the displayed error model") {
  CHECK(test_factor(GeneTest::Positive, G::HetPaternal, 0.0, 0.001) == 1.0);
  CHECK(test_factor(GeneTest::Positive, G::NonCarrier, 0.01, 0.001) == 0.001);
  CHECK(test_factor(GeneTest::Negative, G::Homozygous, 0.01, 0.001) == 0.01);
  CHECK(test_factor(GeneTest::Negative, G::NonCarrier, 0.01, 0.001) == doctest::Approx(0.999));
  CHECK(test_factor(GeneTest::Positive, G::HetMaternal, 0.01, 0.001) == doctest::Approx(0.99));
  for (auto x : kAllGenotypes) CHECK(test_factor(GeneTest::Missing, x, 0.3, 0.2) == 1.0);
}

TEST_CASE("evidence factor") {
  auto p = params_with_baseline({30.0, 50.0}, {0.1, 0.2});
  p.beta = 0.7;
  auto affected = person("F", "a", Sex::Male, 45, Status::Affected);
  const auto phi = evidence_values(affected, p, false);
  CHECK(phi[0] == 0.0);
  CHECK(phi[1] > 0.0);
  CHECK(phi[2] > 0.0);
  CHECK(phi[2] == phi[3]);

  auto proband = person("F", "p", Sex::Female, 45, Status::Affected, GeneTest::Positive);
  p.epsilon = 0.0;
  p.eta = 0.001;
  const auto sup = evidence_values(proband, p, true);
  CHECK(sup[0] == 0.001);
  CHECK(sup[1] == 1.0);
  CHECK(sup[2] == 1.0);
  CHECK(sup[3] == 1.0);

  auto censored = person("F", "c", Sex::Female, 60, Status::Censored);
  const auto c = evidence_values(censored, p, false);
  CHECK(c[0] == 1.0);
  CHECK(c[2] == doctest::Approx(std::exp(-0.3)));
  CHECK(c[1] == doctest::Approx(std::exp(-0.3 * std::exp(0.7))));

  const auto f = evidence_factor(censored, 4, p, false);
  CHECK(f.scope == std::vector<int>{4});
  CHECK(f.table == std::vector<double>(c.begin(), c.end()));

  censored.pinned_genotype = G::HetMaternal;
  const auto pinned = evidence_values(censored, p, false);
  CHECK(pinned[0] == 0.0);
  CHECK(pinned[1] == 0.0);
  CHECK(pinned[2] == c[2]);
  CHECK(pinned[3] == 0.0);

  // Matches the independent restatement on random records.
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto params = testing::random_params(rng, 2);
    auto r = person("F", "x", Sex::Male, rng.uniform(0, 90), rng.bernoulli(0.5) ? Status::Affected : Status::Censored,
                    static_cast<GeneTest>(static_cast<int>(rng.below(2))));
    if (rng.bernoulli(0.3)) r.gene_test = GeneTest::Missing;
    r.covariates = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const bool suppress = rng.bernoulli(0.2);
    r.phenotype_suppressed = suppress;
    const auto v = evidence_values(r, params, suppress);
    for (auto x : kAllGenotypes)
      CHECK(v[static_cast<std::size_t>(index(x))] == doctest::Approx(testing::oracle_phi(r, x, params)).epsilon(1e-13));
  }
}

TEST_CASE("genotype factor tables") {
  std::vector<IndividualRecord> recs{person("F", "1", Sex::Male, 50, Status::Censored),
                                     person("F", "2", Sex::Female, 50, Status::Censored),
                                     testing::child("F", "3", "1", "2", Sex::Male, 20, Status::Censored)};
  const Pedigree ped("F", recs);
  const auto f0 = genotype_factor(ped, 0, 0.2);
  CHECK(f0.scope == std::vector<int>{0});
  CHECK(f0.table[0] == doctest::Approx(0.64));
  const auto f2 = genotype_factor(ped, 2, 0.2);
  CHECK(f2.scope == std::vector<int>{2, 0, 1});
  REQUIRE(f2.table.size() == 64);
  for (auto fa : kAllGenotypes)
    for (auto mo : kAllGenotypes) {
      const auto t = transmission(fa, mo);
      double sum = 0;
      for (auto c : kAllGenotypes) {
        const auto idx = static_cast<std::size_t>(index(c) + 4 * index(fa) + 16 * index(mo));
        CHECK(f2.table[idx] == t[static_cast<std::size_t>(index(c))]);
        sum += f2.table[idx];
      }
      CHECK(sum == doctest::Approx(1.0));
    }
  CHECK(family_factors(ped, ModelParams{0.2}).size() == 6);
}

TEST_CASE("parameter checks") {
  ModelParams p;
  p.q = 0.2;
  CHECK_NOTHROW(p.check());
  p.epsilon = 1.0;
  CHECK_THROWS_AS(p.check(), ValidationError);
  p.epsilon = 0.0;
  p.eta = -0.1;
  CHECK_THROWS_AS(p.check(), ValidationError);
  CHECK_THROWS_AS(BaselineHazard({1.0, 1.0}, {0.1, 0.1}), ValidationError);
  CHECK_THROWS_AS(BaselineHazard({1.0}, {0.0}), ValidationError);
  const BaselineHazard h({1.0, 3.0}, {0.5, 0.25});
  CHECK(h.cumulative(0.999) == 0.0);
  CHECK(h.cumulative(1.0) == 0.5);
  CHECK(h.cumulative(3.0) == 0.75);
  CHECK(h.cumulative(99.0) == 0.75);
  CHECK(h.increment_at(3.0) == 0.25);
  CHECK(h.increment_at(2.0) == 0.0);
}
