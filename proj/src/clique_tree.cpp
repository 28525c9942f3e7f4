#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "poocox/inference.hpp"

namespace poocox {

namespace {

std::size_t pow4(std::size_t k) { return std::size_t{1} << (2 * k); }

// For every entry of a table over `from`, the index into a table over `to`
// (every member of `to` must appear in `from`).
std::vector<std::uint32_t> projection_map(const std::vector<int>& from, const std::vector<int>& to) {
  std::vector<std::size_t> pos(to.size());
  for (std::size_t k = 0; k < to.size(); ++k) {
    auto it = std::find(from.begin(), from.end(), to[k]);
    if (it == from.end()) throw std::logic_error("projection target not contained in source scope");
    pos[k] = static_cast<std::size_t>(it - from.begin());
  }
  const std::size_t size = pow4(from.size());
  std::vector<std::uint32_t> out(size);
  for (std::size_t j = 0; j < size; ++j) {
    std::uint32_t idx = 0;
    for (std::size_t k = 0; k < to.size(); ++k) idx |= static_cast<std::uint32_t>((j >> (2 * pos[k])) & 3u) << (2 * k);
    out[j] = idx;
  }
  return out;
}

std::vector<int> intersect(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

CliqueTree CliqueTree::build(const Pedigree& pedigree) {
  const std::size_t n = pedigree.size();
  CliqueTree tree;
  tree.variables_ = n;

  // Moral graph: child-parent edges plus an edge between co-parents.
  std::vector<std::vector<int>> nb(n);
  auto link = [&](int a, int b) {
    if (a == b) return;
    auto add = [](std::vector<int>& v, int x) {
      auto it = std::lower_bound(v.begin(), v.end(), x);
      if (it == v.end() || *it != x) v.insert(it, x);
    };
    add(nb[a], b);
    add(nb[b], a);
  };
  auto adjacent = [&](int a, int b) { return std::binary_search(nb[a].begin(), nb[a].end(), b); };
  for (std::size_t i = 0; i < n; ++i) {
    const int f = pedigree.father(i);
    const int m = pedigree.mother(i);
    if (f < 0) continue;
    link(static_cast<int>(i), f);
    link(static_cast<int>(i), m);
    link(f, m);
  }

  // Min-fill elimination; ties to the lowest individual index. Neighbor
  // lists only ever hold uneliminated vertices.
  std::vector<char> eliminated(n, 0);
  std::vector<std::vector<int>> elim_cliques;
  elim_cliques.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    int best = -1;
    std::size_t best_fill = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (eliminated[v]) continue;
      const auto& nbrs = nb[v];
      std::size_t fill = 0;
      for (std::size_t a = 0; a < nbrs.size() && (best < 0 || fill < best_fill); ++a)
        for (std::size_t b = a + 1; b < nbrs.size(); ++b)
          if (!adjacent(nbrs[a], nbrs[b])) ++fill;
      if (best < 0 || fill < best_fill) {
        best = static_cast<int>(v);
        best_fill = fill;
        if (fill == 0) break;
      }
    }
    std::vector<int> clique = nb[best];
    for (std::size_t a = 0; a < clique.size(); ++a)
      for (std::size_t b = a + 1; b < clique.size(); ++b) link(clique[a], clique[b]);
    for (int u : clique) nb[u].erase(std::lower_bound(nb[u].begin(), nb[u].end(), best));
    nb[best].clear();
    eliminated[best] = 1;
    clique.insert(std::lower_bound(clique.begin(), clique.end(), best), best);
    elim_cliques.push_back(std::move(clique));
  }

  // Keep maximal cliques only.
  std::vector<std::vector<int>> maximal;
  for (std::size_t a = 0; a < elim_cliques.size(); ++a) {
    bool contained = false;
    for (std::size_t b = 0; b < elim_cliques.size() && !contained; ++b) {
      if (a == b) continue;
      const auto& A = elim_cliques[a];
      const auto& B = elim_cliques[b];
      if (A.size() > B.size()) continue;
      if (!std::includes(B.begin(), B.end(), A.begin(), A.end())) continue;
      // Equal sets: keep the first occurrence.
      contained = A.size() < B.size() || b < a;
    }
    if (!contained) maximal.push_back(elim_cliques[a]);
  }
  std::sort(maximal.begin(), maximal.end());
  for (auto& m : maximal) tree.cliques_.push_back({m, pow4(m.size())});

  // Maximum-weight spanning forest on separator sizes (Kruskal).
  struct Candidate {
    std::size_t weight;
    int a, b;
  };
  std::vector<Candidate> candidates;
  const int k = static_cast<int>(tree.cliques_.size());
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      auto sep = intersect(tree.cliques_[a].members, tree.cliques_[b].members);
      if (!sep.empty()) candidates.push_back({sep.size(), a, b});
    }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) { return x.weight > y.weight; });
  DisjointSet ds(static_cast<std::size_t>(k));
  for (const auto& c : candidates)
    if (ds.unite(c.a, c.b)) tree.edges_.emplace_back(c.a, c.b);

  tree.family_scope_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tree.family_scope_[i] = {static_cast<int>(i)};
    if (pedigree.father(i) >= 0) {
      tree.family_scope_[i].push_back(pedigree.father(i));
      tree.family_scope_[i].push_back(pedigree.mother(i));
    }
  }
  tree.root_and_index({});
  return tree;
}

CliqueTree CliqueTree::rerooted(std::span<const int> roots) const {
  CliqueTree copy = *this;
  copy.root_and_index(roots);
  return copy;
}

void CliqueTree::root_and_index(std::span<const int> requested_roots) {
  const std::size_t k = cliques_.size();
  std::vector<std::vector<int>> adjacency(k);
  for (auto [a, b] : edges_) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  for (auto& a : adjacency) std::sort(a.begin(), a.end());

  // Component label per clique, so a requested root replaces the default one.
  std::vector<int> component(k, -1);
  int ncomp = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (component[c] >= 0) continue;
    std::vector<int> stack{static_cast<int>(c)};
    component[c] = ncomp;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int u : adjacency[v])
        if (component[u] < 0) {
          component[u] = ncomp;
          stack.push_back(u);
        }
    }
    ++ncomp;
  }
  std::vector<int> comp_root(static_cast<std::size_t>(ncomp), -1);
  for (int r : requested_roots) {
    if (r < 0 || static_cast<std::size_t>(r) >= k) throw std::out_of_range("root clique index out of range");
    comp_root[component[r]] = r;
  }
  for (std::size_t c = 0; c < k; ++c)
    if (comp_root[component[c]] < 0) comp_root[component[c]] = static_cast<int>(c);

  roots_.clear();
  preorder_.clear();
  parent_.assign(k, -1);
  children_.assign(k, {});
  std::vector<char> seen(k, 0);
  for (int root : comp_root) {
    roots_.push_back(root);
    // Breadth-first: every parent precedes its children.
    std::vector<int> queue{root};
    seen[root] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int v = queue[head];
      preorder_.push_back(v);
      for (int u : adjacency[v])
        if (!seen[u]) {
          seen[u] = 1;
          parent_[u] = v;
          children_[v].push_back(u);
          queue.push_back(u);
        }
    }
  }

  child_to_sep_.assign(k, {});
  parent_to_sep_.assign(k, {});
  sep_size_.assign(k, 1);
  for (std::size_t c = 0; c < k; ++c) {
    if (parent_[c] < 0) continue;
    auto sep = separator(static_cast<int>(c));
    sep_size_[c] = pow4(sep.size());
    child_to_sep_[c] = projection_map(cliques_[c].members, sep);
    parent_to_sep_[c] = projection_map(cliques_[parent_[c]].members, sep);
  }

  // Home clique: the first clique holding the whole family scope.
  home_.assign(variables_, -1);
  family_map_.assign(variables_, {});
  self_map_.assign(variables_, {});
  for (std::size_t i = 0; i < variables_; ++i) {
    auto scope = family_scope_[i];
    std::sort(scope.begin(), scope.end());
    for (std::size_t c = 0; c < k; ++c)
      if (std::includes(cliques_[c].members.begin(), cliques_[c].members.end(), scope.begin(), scope.end())) {
        home_[i] = static_cast<int>(c);
        break;
      }
    if (home_[i] < 0) throw std::logic_error("family scope not covered by any clique");
    const auto& members = cliques_[home_[i]].members;
    family_map_[i] = projection_map(members, family_scope_[i]);
    self_map_[i] = projection_map(members, {static_cast<int>(i)});
  }
}

std::vector<int> CliqueTree::separator(int c) const {
  const int p = parent_[static_cast<std::size_t>(c)];
  if (p < 0) return {};
  return intersect(cliques_[c].members, cliques_[p].members);
}

std::size_t CliqueTree::max_clique_size() const {
  std::size_t best = 0;
  for (const auto& c : cliques_) best = std::max(best, c.members.size());
  return best;
}

bool CliqueTree::has_running_intersection() const {
  // Within a forest, the cliques holding a variable induce a connected
  // subgraph iff edges among them = count - 1.
  std::vector<std::size_t> holders(variables_, 0);
  std::vector<std::size_t> links(variables_, 0);
  for (const auto& c : cliques_)
    for (int v : c.members) ++holders[v];
  for (auto [a, b] : edges_)
    for (int v : intersect(cliques_[a].members, cliques_[b].members)) ++links[v];
  for (std::size_t v = 0; v < variables_; ++v)
    if (holders[v] == 0 || links[v] + 1 != holders[v]) return false;
  return true;
}

}  // namespace poocox
