#include <array>
#include <cmath>

#include "poocox/errors.hpp"
#include "poocox/inference.hpp"
#include "poocox/kernels.hpp"

namespace poocox {

namespace {

// P(child | father, mother) laid out over scope {child, father, mother}.
const std::array<double, 64>& transmission_table() {
  static const std::array<double, 64> table = [] {
    std::array<double, 64> t{};
    for (auto gm : kAllGenotypes)
      for (auto gf : kAllGenotypes) {
        auto d = transmission(gf, gm);
        for (auto c : kAllGenotypes) t[index(c) + 4 * index(gf) + 16 * index(gm)] = d[index(c)];
      }
    return t;
  }();
  return table;
}

// Sum a clique table onto a separator and normalize; returns the normalizer.
double marginalize_normalized(std::span<const double> table, std::span<const std::uint32_t> map,
                              std::vector<double>& msg, std::size_t size) {
  msg.assign(size, 0.0);
  kernels::scatter_add(msg, table, map);
  const double z = kernels::sum(msg);
  if (z > 0.0) kernels::scale(msg, 1.0 / z);
  return z;
}

}  // namespace

PosteriorWeights aggregate(const GenotypeDistribution& m) noexcept {
  return {m[index(OrderedGenotype::HetPaternal)],
          m[index(OrderedGenotype::HetMaternal)] + m[index(OrderedGenotype::Homozygous)],
          m[index(OrderedGenotype::NonCarrier)]};
}

Propagation propagate(const Pedigree& ped, const CliqueTree& tree, const ModelParams& params) {
  const auto& cliques = tree.cliques();
  const std::size_t k = cliques.size();
  const std::size_t n = ped.size();

  std::vector<std::vector<double>> potential(k);
  for (std::size_t c = 0; c < k; ++c) potential[c].assign(cliques[c].table_size, 1.0);
  const auto prior = founder_prior(params.q);
  const auto& trans = transmission_table();
  for (std::size_t i = 0; i < n; ++i) {
    const int self = static_cast<int>(i);
    auto& pot = potential[static_cast<std::size_t>(tree.home_clique(self))];
    if (ped.father(i) < 0)
      kernels::gather_multiply(pot, prior, tree.family_scope_map(self));
    else
      kernels::gather_multiply(pot, trans, tree.family_scope_map(self));
    const auto phi = evidence_values(ped[i], params, ped[i].phenotype_suppressed);
    kernels::gather_multiply(pot, phi, tree.self_map(self));
  }

  Propagation out;
  out.upward.assign(k, {});
  out.downward.assign(k, {});
  out.beliefs.assign(k, {});
  std::vector<std::vector<double>> inward(k);
  const auto& order = tree.preorder();

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int c = *it;
    auto& in = inward[static_cast<std::size_t>(c)];
    in = potential[static_cast<std::size_t>(c)];
    for (int child : tree.children(c))
      kernels::gather_multiply(in, out.upward[static_cast<std::size_t>(child)], tree.parent_to_separator(child));
    double z;
    if (tree.parent(c) < 0)
      z = kernels::sum(in);
    else
      z = marginalize_normalized(in, tree.child_to_separator(c), out.upward[static_cast<std::size_t>(c)],
                                 tree.separator_size(c));
    if (!(z > 0.0) || !std::isfinite(z)) throw ImpossibleEvidence(ped.family_id());
    out.log_evidence += std::log(z);
  }

  std::vector<double> base;
  std::vector<double> scratch;
  for (int c : order) {
    const auto uc = static_cast<std::size_t>(c);
    base = potential[uc];
    if (tree.parent(c) >= 0) kernels::gather_multiply(base, out.downward[uc], tree.child_to_separator(c));
    const auto& kids = tree.children(c);
    for (int target : kids) {
      scratch = base;
      for (int other : kids)
        if (other != target)
          kernels::gather_multiply(scratch, out.upward[static_cast<std::size_t>(other)],
                                   tree.parent_to_separator(other));
      const double z = marginalize_normalized(scratch, tree.parent_to_separator(target),
                                              out.downward[static_cast<std::size_t>(target)],
                                              tree.separator_size(target));
      if (!(z > 0.0)) throw ImpossibleEvidence(ped.family_id());
    }
    auto& belief = out.beliefs[uc];
    belief = inward[uc];
    if (tree.parent(c) >= 0) kernels::gather_multiply(belief, out.downward[uc], tree.child_to_separator(c));
    const double z = kernels::sum(belief);
    if (!(z > 0.0)) throw ImpossibleEvidence(ped.family_id());
    kernels::scale(belief, 1.0 / z);
  }

  out.marginals.resize(n);
  std::vector<double> m;
  for (std::size_t i = 0; i < n; ++i) {
    const int self = static_cast<int>(i);
    const double z = marginalize_normalized(out.beliefs[static_cast<std::size_t>(tree.home_clique(self))],
                                            tree.self_map(self), m, kGenotypeStates);
    if (!(z > 0.0)) throw ImpossibleEvidence(ped.family_id());
    for (int s = 0; s < kGenotypeStates; ++s) out.marginals[i][static_cast<std::size_t>(s)] = m[static_cast<std::size_t>(s)];
  }
  return out;
}

FamilyPosterior posterior_marginals(const Pedigree& ped, const CliqueTree& tree, const ModelParams& params) {
  auto prop = propagate(ped, tree, params);
  FamilyPosterior out;
  out.log_evidence = prop.log_evidence;
  out.marginals = std::move(prop.marginals);
  out.weights.reserve(out.marginals.size());
  for (const auto& m : out.marginals) out.weights.push_back(aggregate(m));
  return out;
}

FamilyPosterior posterior_marginals(const Pedigree& ped, const ModelParams& params, const InferenceOptions& options) {
  params.check();
  const auto tree = CliqueTree::build(ped);
  if (!options.suppress_proband_phenotype) return posterior_marginals(ped, tree, params);
  Pedigree corrected = ped;
  for (std::size_t i = 0; i < corrected.size(); ++i)
    if (corrected[i].proband) corrected.record(i).phenotype_suppressed = true;
  return posterior_marginals(corrected, tree, params);
}

std::vector<FamilyPosterior> posterior_marginals(std::span<const Pedigree> families, const ModelParams& params,
                                                 const InferenceOptions& options) {
  std::vector<FamilyPosterior> out;
  out.reserve(families.size());
  for (const auto& ped : families) out.push_back(posterior_marginals(ped, params, options));
  return out;
}

}  // namespace poocox
