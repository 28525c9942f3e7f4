// Exhaustive enumeration over all ordered-genotype configurations using the
// local model functions only. Zero-probability branches are skipped.

#include <cmath>
#include <string>

#include "poocox/errors.hpp"
#include "poocox/inference.hpp"

namespace poocox {

namespace {

struct Enumerator {
  const Pedigree& ped;
  std::vector<int> order;
  std::vector<GenotypeDistribution> phi;
  GenotypeDistribution prior;
  std::vector<int> state;
  std::vector<GenotypeDistribution> joint;  // unnormalized P(X_i = x, ev)
  double total = 0.0;

  void run(std::size_t depth, double weight) {
    if (depth == order.size()) {
      total += weight;
      for (std::size_t i = 0; i < state.size(); ++i) joint[i][static_cast<std::size_t>(state[i])] += weight;
      return;
    }
    const auto i = static_cast<std::size_t>(order[depth]);
    GenotypeDistribution local = prior;
    if (ped.father(i) >= 0)
      local = transmission(genotype_from_index(state[static_cast<std::size_t>(ped.father(i))]),
                           genotype_from_index(state[static_cast<std::size_t>(ped.mother(i))]));
    for (int x = 0; x < kGenotypeStates; ++x) {
      const double w = weight * local[static_cast<std::size_t>(x)] * phi[i][static_cast<std::size_t>(x)];
      if (w == 0.0) continue;
      state[i] = x;
      run(depth + 1, w);
    }
  }
};

}  // namespace

FamilyPosterior brute_force_marginals(const Pedigree& ped, const ModelParams& params, std::size_t cap) {
  if (ped.size() > cap)
    throw CapExceeded("family " + ped.family_id() + " has " + std::to_string(ped.size()) +
                      " members; brute-force enumeration is capped at " + std::to_string(cap));
  params.check();
  Enumerator e{ped, ped.topological_order(), {}, founder_prior(params.q), {}, {}, 0.0};
  e.phi.reserve(ped.size());
  for (const auto& rec : ped.individuals()) e.phi.push_back(evidence_values(rec, params, rec.phenotype_suppressed));
  e.state.assign(ped.size(), 0);
  e.joint.assign(ped.size(), GenotypeDistribution{});
  e.run(0, 1.0);
  if (!(e.total > 0.0)) throw ImpossibleEvidence(ped.family_id());

  FamilyPosterior out;
  out.log_evidence = std::log(e.total);
  for (auto& m : e.joint) {
    for (auto& v : m) v /= e.total;
    out.marginals.push_back(m);
    out.weights.push_back(aggregate(m));
  }
  return out;
}

}  // namespace poocox
