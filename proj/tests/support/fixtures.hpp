#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "poocox/cox.hpp"
#include "poocox/genetic_model.hpp"
#include "poocox/pedigree.hpp"
#include "poocox/rng.hpp"

namespace poocox::testing {

inline IndividualRecord person(std::string fam, std::string id, Sex sex, double age, Status status,
                               GeneTest test = GeneTest::Missing) {
  IndividualRecord r;
  r.family_id = std::move(fam);
  r.individual_id = std::move(id);
  r.sex = sex;
  r.age = age;
  r.status = status;
  r.gene_test = test;
  return r;
}

inline IndividualRecord child(std::string fam, std::string id, std::string father, std::string mother, Sex sex,
                              double age, Status status, GeneTest test = GeneTest::Missing) {
  auto r = person(std::move(fam), std::move(id), sex, age, status, test);
  r.father_id = std::move(father);
  r.mother_id = std::move(mother);
  return r;
}

/// Cyclomatic number of the individual/mating graph: > 0 iff the pedigree
/// has a marriage or inbreeding loop.
inline int loop_count(const Pedigree& ped) {
  std::vector<std::pair<int, int>> matings;
  std::vector<std::pair<int, int>> edges;  // node ids: individuals, then matings
  const int n = static_cast<int>(ped.size());
  for (int i = 0; i < n; ++i) {
    if (ped.father(static_cast<std::size_t>(i)) < 0) continue;
    const std::pair<int, int> m{ped.father(static_cast<std::size_t>(i)), ped.mother(static_cast<std::size_t>(i))};
    auto it = std::find(matings.begin(), matings.end(), m);
    int node;
    if (it == matings.end()) {
      matings.push_back(m);
      node = n + static_cast<int>(matings.size()) - 1;
      edges.push_back({m.first, node});
      edges.push_back({m.second, node});
    } else {
      node = n + static_cast<int>(it - matings.begin());
    }
    edges.push_back({i, node});
  }
  const int nodes = n + static_cast<int>(matings.size());
  std::vector<int> parent(static_cast<std::size_t>(nodes));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  int components = nodes;
  for (auto [a, b] : edges) {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent[static_cast<std::size_t>(a)] = b;
      --components;
    }
  }
  return static_cast<int>(edges.size()) - nodes + components;
}

/// Random model parameters with a random step baseline and k covariates.
inline ModelParams random_params(Rng& rng, std::size_t k) {
  ModelParams p;
  p.q = rng.uniform(0.05, 0.5);
  p.beta = rng.uniform(-1.5, 1.5);
  for (std::size_t j = 0; j < k; ++j) p.gamma.push_back(rng.uniform(-0.8, 0.8));
  p.epsilon = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0.0, 0.05);
  p.eta = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0.0, 0.01);
  std::vector<double> times;
  std::vector<double> inc;
  double t = 0.0;
  const int jumps = 2 + static_cast<int>(rng.below(12));
  for (int j = 0; j < jumps; ++j) {
    t += rng.uniform(1.0, 10.0);
    times.push_back(t);
    inc.push_back(rng.uniform(0.005, 0.15));
  }
  p.baseline = BaselineHazard(times, inc);
  return p;
}

struct RandomFamily {
  Pedigree pedigree;
  std::vector<OrderedGenotype> truth;
};

/// Random family of `size` members built founder-first. Children pick a
/// random father and mother among existing members, so inbreeding and
/// marriage loops arise naturally (more often with `loop_bias`). Evidence
/// is drawn consistently with a forward-simulated genotype so that P(ev) > 0.
inline RandomFamily random_family(Rng& rng, std::size_t size, const ModelParams& params, const std::string& fam,
                                  bool loop_bias = false) {
  std::vector<IndividualRecord> recs;
  std::vector<OrderedGenotype> g;
  std::vector<int> fathers;
  std::vector<int> mothers;
  const auto k = params.gamma.size();
  auto add = [&](int f, int m) {
    IndividualRecord r;
    r.family_id = fam;
    r.individual_id = "i" + std::to_string(recs.size() + 1);
    if (f >= 0) {
      r.father_id = recs[static_cast<std::size_t>(f)].individual_id;
      r.mother_id = recs[static_cast<std::size_t>(m)].individual_id;
    }
    r.sex = rng.bernoulli(0.5) ? Sex::Male : Sex::Female;
    for (std::size_t j = 0; j < k; ++j) r.covariates.push_back(rng.uniform(-1.0, 1.0));
    OrderedGenotype x;
    if (f < 0) {
      x = make_genotype(rng.bernoulli(params.q), rng.bernoulli(params.q));
    } else {
      const auto gf = g[static_cast<std::size_t>(f)];
      const auto gm = g[static_cast<std::size_t>(m)];
      x = make_genotype(rng.bernoulli(0.5) ? paternal_mutated(gf) : maternal_mutated(gf),
                        rng.bernoulli(0.5) ? paternal_mutated(gm) : maternal_mutated(gm));
    }
    recs.push_back(std::move(r));
    g.push_back(x);
  };
  add(-1, -1);
  add(-1, -1);
  recs[0].sex = Sex::Male;
  recs[1].sex = Sex::Female;
  while (recs.size() < size) {
    std::vector<int> males;
    std::vector<int> females;
    for (std::size_t i = 0; i < recs.size(); ++i) (recs[i].sex == Sex::Male ? males : females).push_back(static_cast<int>(i));
    const double p_founder = loop_bias ? 0.1 : 0.3;
    if (males.empty() || females.empty() || rng.bernoulli(p_founder)) {
      add(-1, -1);
      continue;
    }
    int f;
    int m;
    if (loop_bias && recs.size() >= 4) {
      // Prefer matings between non-founders to close loops.
      std::vector<int> nf_m;
      std::vector<int> nf_f;
      for (int i : males)
        if (recs[static_cast<std::size_t>(i)].father_id) nf_m.push_back(i);
      for (int i : females)
        if (recs[static_cast<std::size_t>(i)].father_id) nf_f.push_back(i);
      f = !nf_m.empty() && rng.bernoulli(0.7) ? nf_m[rng.below(nf_m.size())] : males[rng.below(males.size())];
      m = !nf_f.empty() && rng.bernoulli(0.7) ? nf_f[rng.below(nf_f.size())] : females[rng.below(females.size())];
    } else {
      f = males[rng.below(males.size())];
      m = females[rng.below(females.size())];
    }
    add(f, m);
  }

  for (std::size_t i = 0; i < recs.size(); ++i) {
    auto& r = recs[i];
    r.age = rng.uniform(0.0, 90.0);
    r.status = is_carrier(g[i]) && rng.bernoulli(0.5) ? Status::Affected : Status::Censored;
    const double u = rng.uniform();
    if (u < 0.4) {
      r.gene_test = GeneTest::Missing;
    } else {
      bool positive = is_carrier(g[i]);
      // Flip only where the model allows it.
      if (positive && params.epsilon > 0.0 && rng.bernoulli(0.1)) positive = false;
      if (!positive && !is_carrier(g[i]) && params.eta > 0.0 && rng.bernoulli(0.1)) positive = true;
      r.gene_test = positive ? GeneTest::Positive : GeneTest::Negative;
    }
    if (rng.bernoulli(0.1)) r.pinned_genotype = g[i];
    if (rng.bernoulli(0.1)) r.phenotype_suppressed = true;
  }
  return {Pedigree(fam, std::move(recs)), std::move(g)};
}

// ---------------------------------------------------------------------------
// Independent oracles. These restate the model from its definitions without
// touching the library's factor tables.

inline double oracle_prior(double q, OrderedGenotype x) {
  const double p = paternal_mutated(x) ? q : 1.0 - q;
  const double m = maternal_mutated(x) ? q : 1.0 - q;
  return p * m;
}

inline double oracle_transmit(OrderedGenotype parent, bool mutated_allele_passed) {
  const double p = 0.5 * (static_cast<double>(paternal_mutated(parent)) + static_cast<double>(maternal_mutated(parent)));
  return mutated_allele_passed ? p : 1.0 - p;
}

inline double oracle_phi(const IndividualRecord& r, OrderedGenotype x, const ModelParams& p) {
  double v = 1.0;
  if (!r.phenotype_suppressed) {
    if (x == OrderedGenotype::NonCarrier) {
      v = r.affected() ? 0.0 : 1.0;
    } else {
      double lp = 0.0;
      for (std::size_t j = 0; j < r.covariates.size(); ++j) lp += r.covariates[j] * p.gamma[j];
      if (x == OrderedGenotype::HetPaternal) lp += p.beta;
      // Cumulative baseline by direct summation.
      double cum = 0.0;
      for (std::size_t j = 0; j < p.baseline.times().size(); ++j)
        if (p.baseline.times()[j] <= r.age) cum += p.baseline.increments()[j];
      v = std::exp(-cum * std::exp(lp));
      if (r.affected()) v *= std::exp(lp);
    }
  }
  if (r.gene_test == GeneTest::Positive) v *= is_carrier(x) ? 1.0 - p.epsilon : p.eta;
  if (r.gene_test == GeneTest::Negative) v *= is_carrier(x) ? p.epsilon : 1.0 - p.eta;
  if (r.pinned_genotype && *r.pinned_genotype != x) v = 0.0;
  return v;
}

/// P(X = x, ev) for one full assignment.
inline double oracle_joint(const Pedigree& ped, const std::vector<OrderedGenotype>& x, const ModelParams& p) {
  double v = 1.0;
  for (std::size_t i = 0; i < ped.size(); ++i) {
    if (ped.father(i) < 0) {
      v *= oracle_prior(p.q, x[i]);
    } else {
      v *= oracle_transmit(x[static_cast<std::size_t>(ped.father(i))], paternal_mutated(x[i]));
      v *= oracle_transmit(x[static_cast<std::size_t>(ped.mother(i))], maternal_mutated(x[i]));
    }
    v *= oracle_phi(ped[i], x[i], p);
  }
  return v;
}

struct OracleMarginals {
  std::vector<std::array<double, 4>> marginals;
  double log_evidence = 0.0;
};

/// Odometer enumeration over all 4^n assignments.
inline OracleMarginals oracle_marginals(const Pedigree& ped, const ModelParams& p) {
  const std::size_t n = ped.size();
  std::vector<OrderedGenotype> x(n, OrderedGenotype::NonCarrier);
  std::vector<std::array<double, 4>> acc(n, {0.0, 0.0, 0.0, 0.0});
  double total = 0.0;
  while (true) {
    const double v = oracle_joint(ped, x, p);
    total += v;
    for (std::size_t i = 0; i < n; ++i) acc[i][static_cast<std::size_t>(index(x[i]))] += v;
    std::size_t k = 0;
    while (k < n && x[k] == OrderedGenotype::Homozygous) x[k++] = OrderedGenotype::NonCarrier;
    if (k == n) break;
    x[k] = genotype_from_index(index(x[k]) + 1);
  }
  for (auto& a : acc)
    for (auto& v : a) v /= total;
  return {acc, std::log(total)};
}

// ---------------------------------------------------------------------------
// Cox helpers.

inline std::vector<WeightedObservation> random_cox_data(Rng& rng, std::size_t n, std::size_t k, bool ties) {
  std::vector<WeightedObservation> data;
  for (std::size_t i = 0; i < n; ++i) {
    WeightedObservation o;
    o.poo = rng.bernoulli(0.5) ? Poo::Pat : Poo::Mat;
    for (std::size_t j = 0; j < k; ++j) o.covariates.push_back(rng.uniform(-1.0, 1.0));
    o.time = ties ? std::floor(rng.uniform(1.0, 15.0)) : rng.uniform(0.0, 50.0);
    o.status = rng.bernoulli(0.6) ? 1 : 0;
    o.weight = rng.bernoulli(0.1) ? 0.0 : rng.uniform(0.05, 1.0);
    data.push_back(std::move(o));
  }
  // Guarantee events with weight in both groups.
  data[0].poo = Poo::Pat;
  data[0].status = 1;
  data[0].weight = 0.7;
  data[1].poo = Poo::Mat;
  data[1].status = 1;
  data[1].weight = 0.6;
  return data;
}

inline double linear_predictor(const WeightedObservation& o, const Eigen::VectorXd& b) {
  double lp = o.poo == Poo::Pat ? b[0] : 0.0;
  for (std::size_t j = 0; j < o.covariates.size(); ++j) lp += o.covariates[j] * b[static_cast<Eigen::Index>(j + 1)];
  return lp;
}

/// Breslow weighted log partial likelihood, O(n^2) over events and risk sets.
inline double oracle_cox_loglik(const std::vector<WeightedObservation>& d, const Eigen::VectorXd& b) {
  double ll = 0.0;
  for (const auto& e : d) {
    if (e.status != 1 || e.weight == 0.0) continue;
    double risk = 0.0;
    for (const auto& r : d)
      if (r.time >= e.time) risk += r.weight * std::exp(linear_predictor(r, b));
    ll += e.weight * (linear_predictor(e, b) - std::log(risk));
  }
  return ll;
}

inline Eigen::VectorXd oracle_cox_score(const std::vector<WeightedObservation>& d, const Eigen::VectorXd& b) {
  const auto p = b.size();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
  auto design = [&](const WeightedObservation& o) {
    Eigen::VectorXd x(p);
    x[0] = o.poo == Poo::Pat ? 1.0 : 0.0;
    for (Eigen::Index j = 1; j < p; ++j) x[j] = o.covariates[static_cast<std::size_t>(j - 1)];
    return x;
  };
  for (const auto& e : d) {
    if (e.status != 1 || e.weight == 0.0) continue;
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    for (const auto& r : d)
      if (r.time >= e.time) {
        const double w = r.weight * std::exp(linear_predictor(r, b));
        s0 += w;
        s1 += w * design(r);
      }
    u += e.weight * (design(e) - s1 / s0);
  }
  return u;
}

}  // namespace poocox::testing
