#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "poocox/genetic_model.hpp"
#include "poocox/pedigree.hpp"

namespace poocox {

struct PosteriorWeights {
  double w_pat = 0.0;   // P(X = 1p | ev)
  double w_mat = 0.0;   // P(X in {1m, 2} | ev)
  double w_zero = 0.0;  // P(X = 0 | ev)
};

PosteriorWeights aggregate(const GenotypeDistribution& marginal) noexcept;

struct Clique {
  std::vector<int> members;  // sorted individual indices
  std::size_t table_size = 1;
};

/// Junction tree over the genotype variables of one family: min-fill
/// triangulation of the moral graph, maximal cliques joined by a maximum
/// weight spanning forest on separator sizes. Immutable once built.
class CliqueTree {
 public:
  /// Builds the tree, rooting every connected component at its lowest-index clique.
  static CliqueTree build(const Pedigree& pedigree);

  /// Same cliques and edges, rooted at the given cliques (one per component;
  /// components not covered keep their default root).
  CliqueTree rerooted(std::span<const int> roots) const;

  std::size_t variable_count() const noexcept { return variables_; }
  const std::vector<Clique>& cliques() const noexcept { return cliques_; }
  const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }
  const std::vector<int>& roots() const noexcept { return roots_; }
  int parent(int c) const { return parent_[static_cast<std::size_t>(c)]; }
  const std::vector<int>& children(int c) const { return children_[static_cast<std::size_t>(c)]; }
  /// Parents before children, component by component.
  const std::vector<int>& preorder() const noexcept { return preorder_; }
  std::vector<int> separator(int c) const;
  /// Number of entries of the message across the edge (c, parent(c)).
  std::size_t separator_size(int c) const { return sep_size_[static_cast<std::size_t>(c)]; }
  /// Clique that receives the genotype and evidence factors of an individual.
  int home_clique(int individual) const { return home_[static_cast<std::size_t>(individual)]; }

  std::size_t max_clique_size() const;
  /// For every individual, the cliques containing it form a connected subtree.
  bool has_running_intersection() const;

  // Index maps used by propagation. Entries of a clique table are indexed by
  // sum_k state(members[k]) * 4^k.
  const std::vector<std::uint32_t>& child_to_separator(int c) const { return child_to_sep_[static_cast<std::size_t>(c)]; }
  const std::vector<std::uint32_t>& parent_to_separator(int c) const { return parent_to_sep_[static_cast<std::size_t>(c)]; }
  const std::vector<std::uint32_t>& family_scope_map(int individual) const { return family_map_[static_cast<std::size_t>(individual)]; }
  const std::vector<std::uint32_t>& self_map(int individual) const { return self_map_[static_cast<std::size_t>(individual)]; }

 private:
  void root_and_index(std::span<const int> requested_roots);

  std::size_t variables_ = 0;
  std::vector<Clique> cliques_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> roots_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<int> preorder_;
  std::vector<int> home_;
  std::vector<std::vector<int>> family_scope_;  // {i} or {i, father, mother}
  std::vector<std::size_t> sep_size_;
  std::vector<std::vector<std::uint32_t>> child_to_sep_;
  std::vector<std::vector<std::uint32_t>> parent_to_sep_;
  std::vector<std::vector<std::uint32_t>> family_map_;
  std::vector<std::vector<std::uint32_t>> self_map_;
};

/// All intermediate state of one two-pass propagation.
struct Propagation {
  std::vector<std::vector<double>> upward;    // message from clique c to its parent (normalized)
  std::vector<std::vector<double>> downward;  // message from the parent into clique c (normalized)
  std::vector<std::vector<double>> beliefs;   // normalized clique marginals
  std::vector<GenotypeDistribution> marginals;
  double log_evidence = 0.0;
};

/// Inward (post-order) then outward (pre-order) sum-product with per-message
/// normalization. Throws ImpossibleEvidence if P(ev) = 0.
Propagation propagate(const Pedigree& pedigree, const CliqueTree& tree, const ModelParams& params);

struct InferenceOptions {
  bool suppress_proband_phenotype = false;
};

struct FamilyPosterior {
  std::vector<PosteriorWeights> weights;
  std::vector<GenotypeDistribution> marginals;
  double log_evidence = 0.0;  // log P(ev), lambda0(t) factors excluded
};

FamilyPosterior posterior_marginals(const Pedigree& pedigree, const ModelParams& params,
                                    const InferenceOptions& options = {});
FamilyPosterior posterior_marginals(const Pedigree& pedigree, const CliqueTree& tree, const ModelParams& params);
std::vector<FamilyPosterior> posterior_marginals(std::span<const Pedigree> families, const ModelParams& params,
                                                 const InferenceOptions& options = {});

inline constexpr std::size_t kBruteForceCap = 12;

/// Exhaustive enumeration of all 4^n genotype configurations. Throws
/// CapExceeded above `cap` members and ImpossibleEvidence if P(ev) = 0.
FamilyPosterior brute_force_marginals(const Pedigree& pedigree, const ModelParams& params,
                                      std::size_t cap = kBruteForceCap);

}  // namespace poocox
