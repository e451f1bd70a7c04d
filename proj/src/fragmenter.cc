//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/fragmenter.h"

#include <algorithm>

#include "json.hpp"

#include "smiedit/errors.h"
#include "smiedit/rng.h"
#include "smiedit/smiles.h"

namespace smiedit {
namespace {

bool is_linker_heteroatom(const Atom &a) {
  return a.element == "N" || a.element == "O" || a.element == "S";
}

// Size of the component containing `start` when bonds flagged in `cut` are
// removed.
std::size_t component_size(const MolGraph &g, const std::vector<bool> &cut,
                           AtomIndex start) {
  std::vector<bool> seen(g.num_atoms(), false);
  std::vector<AtomIndex> stack{ start };
  seen[start] = true;
  std::size_t n = 0;
  while (!stack.empty()) {
    AtomIndex a = stack.back();
    stack.pop_back();
    ++n;
    for (const Neighbor &nb: g.neighbors(a)) {
      if (cut[nb.bond] || seen[nb.atom])
        continue;
      seen[nb.atom] = true;
      stack.push_back(nb.atom);
    }
  }
  return n;
}

}  // namespace

void CorruptionConfig::validate() const {
  if (!(drop_ratio >= 0.0 && drop_ratio <= 1.0))
    throw ConfigError("drop_ratio must lie in [0, 1]");
}

std::vector<BondIndex> cut_eligible_bonds(const MolGraph &g) {
  std::vector<BondIndex> out;
  for (BondIndex b = 0; b < g.num_bonds(); ++b) {
    const Bond &bond = g.bond(b);
    if (bond.order != BondOrder::kSingle || bond.in_ring)
      continue;
    const Atom &x = g.atom(bond.begin);
    const Atom &y = g.atom(bond.end);
    if (x.element == "H" || y.element == "H")
      continue;
    const bool r1 = g.atom_in_ring(bond.begin) != g.atom_in_ring(bond.end);
    const bool r2 = (x.element == "C" && is_linker_heteroatom(y))
                    || (y.element == "C" && is_linker_heteroatom(x));
    if (r1 || r2)
      out.push_back(b);
  }
  return out;
}

FragmentSet fragment(const MolGraph &g) {
  FragmentSet fs;
  fs.parent = g;
  std::vector<bool> cut(g.num_bonds(), false);
  for (BondIndex b: cut_eligible_bonds(g)) {
    cut[b] = true;
    const Bond &bond = g.bond(b);
    if (component_size(g, cut, bond.begin) < kMinFragmentAtoms
        || component_size(g, cut, bond.end) < kMinFragmentAtoms) {
      cut[b] = false;
      continue;
    }
    fs.cut_bonds.push_back(b);
  }

  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> frag_of(g.num_atoms(), kUnset);
  for (AtomIndex s = 0; s < g.num_atoms(); ++s) {
    if (frag_of[s] != kUnset)
      continue;
    const std::size_t id = fs.fragments.size();
    Fragment &f = fs.fragments.emplace_back();
    std::vector<AtomIndex> stack{ s };
    frag_of[s] = id;
    while (!stack.empty()) {
      AtomIndex a = stack.back();
      stack.pop_back();
      f.atoms.push_back(a);
      for (const Neighbor &nb: g.neighbors(a)) {
        if (cut[nb.bond] || frag_of[nb.atom] != kUnset)
          continue;
        frag_of[nb.atom] = id;
        stack.push_back(nb.atom);
      }
    }
    std::sort(f.atoms.begin(), f.atoms.end());
  }
  for (BondIndex b: fs.cut_bonds) {
    fs.fragments[frag_of[g.bond(b).begin]].attachments.push_back(b);
    fs.fragments[frag_of[g.bond(b).end]].attachments.push_back(b);
  }
  return fs;
}

CorruptionRecord corrupt(const MolGraph &g, const CorruptionConfig &cfg,
                         std::string original_smiles) {
  cfg.validate();
  CorruptionRecord rec;
  rec.original = g;
  rec.original_smiles =
      original_smiles.empty() ? write_smiles(g) : std::move(original_smiles);
  rec.seed = cfg.seed;

  const FragmentSet fs = fragment(g);
  const std::size_t n = fs.fragments.size();
  Rng rng(cfg.seed);
  std::vector<bool> drop(n, false);
  for (std::size_t i = 0; i < n; ++i)
    drop[i] = rng.bernoulli(cfg.drop_ratio);

  const std::size_t want = std::min(cfg.min_retained, n);
  std::size_t retained = std::count(drop.begin(), drop.end(), false);
  while (retained < want) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i)
      if (drop[i])
        candidates.push_back(i);
    drop[candidates[rng.index(candidates.size())]] = false;
    ++retained;
  }

  std::vector<AtomIndex> keep;
  for (std::size_t i = 0; i < n; ++i) {
    if (drop[i]) {
      rec.dropped.push_back(i);
    } else {
      keep.insert(keep.end(), fs.fragments[i].atoms.begin(),
                  fs.fragments[i].atoms.end());
    }
  }
  if (rec.dropped.empty()) {
    rec.corrupted = g;
    rec.corrupted_smiles = rec.original_smiles;
  } else {
    rec.corrupted = induced_subgraph(g, keep);
    rec.corrupted_smiles = write_smiles(rec.corrupted);
  }
  return rec;
}

std::string to_jsonl(const CorruptionRecord &rec) {
  nlohmann::ordered_json j;
  j["orig"] = rec.original_smiles;
  j["corrupt"] = rec.corrupted_smiles;
  j["dropped"] = rec.dropped;
  j["seed"] = rec.seed;
  return j.dump();
}

}  // namespace smiedit
