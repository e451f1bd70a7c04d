//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/molgraph.h"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <tuple>

#include "smiedit/errors.h"

namespace smiedit {

int valence_contribution(BondOrder order) noexcept {
  switch (order) {
  case BondOrder::kSingle:
  case BondOrder::kAromatic:
    return 1;
  case BondOrder::kDouble:
    return 2;
  case BondOrder::kTriple:
    return 3;
  }
  return 1;
}

MolGraph::MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)),
      adjacency_(atoms_.size()) {
  for (BondIndex b = 0; b < bonds_.size(); ++b) {
    const Bond &bond = bonds_[b];
    if (bond.begin >= atoms_.size() || bond.end >= atoms_.size())
      throw std::invalid_argument("bond endpoint out of range");
    if (bond.begin == bond.end)
      throw std::invalid_argument("bond endpoints must be distinct");
    adjacency_[bond.begin].push_back({ bond.end, b });
    adjacency_[bond.end].push_back({ bond.begin, b });
  }
  for (auto &adj: adjacency_) {
    std::sort(adj.begin(), adj.end(),
              [](const Neighbor &x, const Neighbor &y) {
                return x.atom < y.atom;
              });
    for (std::size_t k = 1; k < adj.size(); ++k) {
      if (adj[k].atom == adj[k - 1].atom)
        throw std::invalid_argument("duplicate bond between atom pair");
    }
  }
  std::vector<bool> ring = ring_flags(*this);
  for (BondIndex b = 0; b < bonds_.size(); ++b)
    bonds_[b].in_ring = ring[b];
}

std::optional<BondIndex> MolGraph::bond_between(AtomIndex a,
                                                AtomIndex b) const {
  const auto &adj = adjacency_[a];
  auto it = std::lower_bound(adj.begin(), adj.end(), b,
                             [](const Neighbor &n, AtomIndex x) {
                               return n.atom < x;
                             });
  if (it != adj.end() && it->atom == b)
    return it->bond;
  return std::nullopt;
}

bool MolGraph::atom_in_ring(AtomIndex i) const {
  return std::any_of(adjacency_[i].begin(), adjacency_[i].end(),
                     [this](const Neighbor &n) {
                       return bonds_[n.bond].in_ring;
                     });
}

int MolGraph::valence(AtomIndex i) const {
  int v = 0;
  for (const Neighbor &n: adjacency_[i])
    v += valence_contribution(bonds_[n.bond].order);
  return v;
}

std::optional<int> max_valence(const Atom &atom) noexcept {
  const std::string &e = atom.element;
  const int positive = std::max(atom.formal_charge, 0);
  if (e == "C")
    return 4;
  if (e == "N")
    return 3 + positive;
  if (e == "O")
    return 2 + positive;
  if (e == "S")
    return 6;
  if (e == "P")
    return 5;
  if (e == "B")
    return 3;
  if (e == "F" || e == "Cl" || e == "Br" || e == "I")
    return 1;
  return std::nullopt;
}

std::optional<AtomIndex> find_valence_violation(const MolGraph &g) {
  for (AtomIndex i = 0; i < g.num_atoms(); ++i) {
    auto limit = max_valence(g.atom(i));
    if (limit && g.valence(i) > *limit)
      return i;
  }
  return std::nullopt;
}

std::vector<bool> ring_flags(const MolGraph &g) {
  const std::size_t n = g.num_atoms();
  std::vector<bool> in_ring(g.num_bonds(), true);
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;

  struct Frame {
    AtomIndex atom;
    BondIndex parent_bond;
    std::size_t next;
  };
  constexpr BondIndex kNoBond = static_cast<BondIndex>(-1);

  std::vector<Frame> stack;
  for (AtomIndex root = 0; root < n; ++root) {
    if (disc[root] >= 0)
      continue;
    disc[root] = low[root] = timer++;
    stack.push_back({ root, kNoBond, 0 });
    while (!stack.empty()) {
      Frame &f = stack.back();
      auto adj = g.neighbors(f.atom);
      if (f.next < adj.size()) {
        const Neighbor nb = adj[f.next++];
        if (nb.bond == f.parent_bond)
          continue;
        if (disc[nb.atom] >= 0) {
          low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
        } else {
          disc[nb.atom] = low[nb.atom] = timer++;
          stack.push_back({ nb.atom, nb.bond, 0 });
        }
        continue;
      }
      const Frame done = f;
      stack.pop_back();
      if (!stack.empty()) {
        AtomIndex parent = stack.back().atom;
        low[parent] = std::min(low[parent], low[done.atom]);
        if (low[done.atom] > disc[parent])
          in_ring[done.parent_bond] = false;
      }
    }
  }
  return in_ring;
}

std::vector<std::size_t> connected_components(const MolGraph &g,
                                              std::size_t *count) {
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(g.num_atoms(), kUnset);
  std::size_t next = 0;
  std::vector<AtomIndex> stack;
  for (AtomIndex s = 0; s < g.num_atoms(); ++s) {
    if (comp[s] != kUnset)
      continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      AtomIndex a = stack.back();
      stack.pop_back();
      for (const Neighbor &nb: g.neighbors(a)) {
        if (comp[nb.atom] == kUnset) {
          comp[nb.atom] = next;
          stack.push_back(nb.atom);
        }
      }
    }
    ++next;
  }
  if (count != nullptr)
    *count = next;
  return comp;
}

MolGraph induced_subgraph(const MolGraph &g, std::span<const AtomIndex> keep,
                          std::vector<AtomIndex> *old_to_new) {
  if (keep.empty())
    throw EmptySelection();
  constexpr AtomIndex kDropped = static_cast<AtomIndex>(-1);
  std::vector<AtomIndex> remap(g.num_atoms(), kDropped);
  for (AtomIndex a: keep) {
    if (a >= g.num_atoms())
      throw std::out_of_range("induced_subgraph: atom index out of range");
    remap[a] = 0;
  }
  std::vector<Atom> atoms;
  for (AtomIndex a = 0; a < g.num_atoms(); ++a) {
    if (remap[a] == kDropped)
      continue;
    remap[a] = atoms.size();
    atoms.push_back(g.atom(a));
  }
  std::vector<Bond> bonds;
  for (const Bond &b: g.bonds()) {
    const bool keep_begin = remap[b.begin] != kDropped;
    const bool keep_end = remap[b.end] != kDropped;
    if (keep_begin && keep_end) {
      bonds.push_back({ remap[b.begin], remap[b.end], b.order, false });
    } else if (keep_begin || keep_end) {
      Atom &kept = atoms[remap[keep_begin ? b.begin : b.end]];
      if (kept.explicit_h)
        *kept.explicit_h += valence_contribution(b.order);
    }
  }
  if (old_to_new != nullptr)
    *old_to_new = remap;
  return MolGraph(std::move(atoms), std::move(bonds));
}

MolGraph disjoint_union(const MolGraph &a, const MolGraph &b) {
  std::vector<Atom> atoms = a.atoms();
  atoms.insert(atoms.end(), b.atoms().begin(), b.atoms().end());
  std::vector<Bond> bonds = a.bonds();
  for (Bond bond: b.bonds()) {
    bond.begin += a.num_atoms();
    bond.end += a.num_atoms();
    bonds.push_back(bond);
  }
  return MolGraph(std::move(atoms), std::move(bonds));
}

namespace {

// Joint color refinement over both graphs so colors are comparable.
std::pair<std::vector<int>, std::vector<int>>
refine_colors(const MolGraph &a, const MolGraph &b) {
  using InitKey = std::tuple<std::string, bool, int, std::size_t>;
  std::map<InitKey, int> init_ids;
  auto init_key = [](const MolGraph &g, AtomIndex i) {
    const Atom &atom = g.atom(i);
    return InitKey(atom.element, atom.aromatic, atom.formal_charge,
                   g.degree(i));
  };
  for (const MolGraph *g: { &a, &b })
    for (AtomIndex i = 0; i < g->num_atoms(); ++i)
      init_ids.emplace(init_key(*g, i), 0);
  int next = 0;
  for (auto &kv: init_ids)
    kv.second = next++;

  std::vector<int> ca(a.num_atoms()), cb(b.num_atoms());
  for (AtomIndex i = 0; i < a.num_atoms(); ++i)
    ca[i] = init_ids[init_key(a, i)];
  for (AtomIndex i = 0; i < b.num_atoms(); ++i)
    cb[i] = init_ids[init_key(b, i)];

  std::size_t classes = init_ids.size();
  using Key = std::pair<int, std::vector<std::pair<int, int>>>;
  for (;;) {
    auto key = [](const MolGraph &g, const std::vector<int> &c,
                  AtomIndex i) {
      Key k{ c[i], {} };
      for (const Neighbor &nb: g.neighbors(i))
        k.second.emplace_back(static_cast<int>(g.bond(nb.bond).order),
                              c[nb.atom]);
      std::sort(k.second.begin(), k.second.end());
      return k;
    };
    std::vector<Key> ka, kb;
    std::map<Key, int> ids;
    for (AtomIndex i = 0; i < a.num_atoms(); ++i)
      ids.emplace(ka.emplace_back(key(a, ca, i)), 0);
    for (AtomIndex i = 0; i < b.num_atoms(); ++i)
      ids.emplace(kb.emplace_back(key(b, cb, i)), 0);
    next = 0;
    for (auto &kv: ids)
      kv.second = next++;
    for (AtomIndex i = 0; i < a.num_atoms(); ++i)
      ca[i] = ids[ka[i]];
    for (AtomIndex i = 0; i < b.num_atoms(); ++i)
      cb[i] = ids[kb[i]];
    if (ids.size() == classes)
      break;
    classes = ids.size();
  }
  return { std::move(ca), std::move(cb) };
}

class Matcher {
public:
  Matcher(const MolGraph &a, const MolGraph &b, std::vector<int> ca,
          std::vector<int> cb)
      : a_(a), b_(b), ca_(std::move(ca)), cb_(std::move(cb)),
        map_(a.num_atoms(), kNone), inverse_(b.num_atoms(), kNone) {
    build_order();
  }

  bool run() { return extend(0); }

private:
  static constexpr AtomIndex kNone = static_cast<AtomIndex>(-1);

  void build_order() {
    // Breadth-first per component, so every non-root atom has a matched
    // neighbor by the time it is considered.
    std::vector<std::size_t> class_size;
    for (int c: ca_) {
      if (static_cast<std::size_t>(c) >= class_size.size())
        class_size.resize(c + 1, 0);
      ++class_size[c];
    }
    std::vector<bool> seen(a_.num_atoms(), false);
    for (;;) {
      AtomIndex root = kNone;
      for (AtomIndex i = 0; i < a_.num_atoms(); ++i) {
        if (seen[i])
          continue;
        if (root == kNone || class_size[ca_[i]] < class_size[ca_[root]])
          root = i;
      }
      if (root == kNone)
        break;
      std::size_t head = order_.size();
      order_.push_back(root);
      parent_.push_back(kNone);
      seen[root] = true;
      while (head < order_.size()) {
        AtomIndex u = order_[head++];
        for (const Neighbor &nb: a_.neighbors(u)) {
          if (!seen[nb.atom]) {
            seen[nb.atom] = true;
            order_.push_back(nb.atom);
            parent_.push_back(u);
          }
        }
      }
    }
  }

  bool consistent(AtomIndex u, AtomIndex v) const {
    std::size_t mapped_u = 0, mapped_v = 0;
    for (const Neighbor &nb: a_.neighbors(u)) {
      if (map_[nb.atom] == kNone)
        continue;
      ++mapped_u;
      auto bv = b_.bond_between(v, map_[nb.atom]);
      if (!bv || b_.bond(*bv).order != a_.bond(nb.bond).order)
        return false;
    }
    for (const Neighbor &nb: b_.neighbors(v))
      if (inverse_[nb.atom] != kNone)
        ++mapped_v;
    return mapped_u == mapped_v;
  }

  bool try_pair(std::size_t depth, AtomIndex u, AtomIndex v) {
    if (inverse_[v] != kNone || cb_[v] != ca_[u] || !consistent(u, v))
      return false;
    map_[u] = v;
    inverse_[v] = u;
    if (extend(depth + 1))
      return true;
    map_[u] = kNone;
    inverse_[v] = kNone;
    return false;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size())
      return true;
    const AtomIndex u = order_[depth];
    const AtomIndex p = parent_[depth];
    if (p != kNone) {
      for (const Neighbor &nb: b_.neighbors(map_[p]))
        if (try_pair(depth, u, nb.atom))
          return true;
      return false;
    }
    for (AtomIndex v = 0; v < b_.num_atoms(); ++v)
      if (try_pair(depth, u, v))
        return true;
    return false;
  }

  const MolGraph &a_;
  const MolGraph &b_;
  std::vector<int> ca_, cb_;
  std::vector<AtomIndex> map_, inverse_;
  std::vector<AtomIndex> order_, parent_;
};

}  // namespace

bool isomorphic(const MolGraph &a, const MolGraph &b) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds())
    return false;
  auto [ca, cb] = refine_colors(a, b);
  std::vector<int> ha = ca, hb = cb;
  std::sort(ha.begin(), ha.end());
  std::sort(hb.begin(), hb.end());
  if (ha != hb)
    return false;
  return Matcher(a, b, std::move(ca), std::move(cb)).run();
}

}  // namespace smiedit
