//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_MOLGRAPH_H_
#define SMIEDIT_MOLGRAPH_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace smiedit {

using AtomIndex = std::size_t;
using BondIndex = std::size_t;

struct Atom {
  std::string element;  // "C", "Cl", "Na", ...
  bool aromatic = false;
  int formal_charge = 0;
  // Set only for bracket atoms; hydrogens are never expanded into atoms.
  std::optional<int> explicit_h;
  std::optional<int> isotope;

  friend bool operator==(const Atom &, const Atom &) = default;
};

enum class BondOrder: std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Contribution to the valence plausibility sum. Aromatic bonds count as one.
int valence_contribution(BondOrder order) noexcept;

struct Bond {
  AtomIndex begin;
  AtomIndex end;
  BondOrder order = BondOrder::kSingle;
  bool in_ring = false;

  AtomIndex other(AtomIndex a) const noexcept {
    return a == begin ? end : begin;
  }
};

struct Neighbor {
  AtomIndex atom;
  BondIndex bond;
};

/*
 * Heavy-atom molecular graph. Immutable after construction: ring flags and
 * the adjacency index are computed by the constructor. The graph may be
 * disconnected.
 */
class MolGraph {
public:
  MolGraph() = default;

  // Throws std::invalid_argument on self loops, duplicate bonds or
  // out-of-range endpoints. Ring flags on the input bonds are recomputed.
  MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds);

  std::size_t num_atoms() const noexcept { return atoms_.size(); }
  std::size_t num_bonds() const noexcept { return bonds_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  const std::vector<Atom> &atoms() const noexcept { return atoms_; }
  const std::vector<Bond> &bonds() const noexcept { return bonds_; }
  const Atom &atom(AtomIndex i) const { return atoms_[i]; }
  const Bond &bond(BondIndex i) const { return bonds_[i]; }

  // Neighbors sorted by atom index.
  std::span<const Neighbor> neighbors(AtomIndex i) const {
    return adjacency_[i];
  }
  std::size_t degree(AtomIndex i) const { return adjacency_[i].size(); }

  std::optional<BondIndex> bond_between(AtomIndex a, AtomIndex b) const;

  // True if any incident bond is a ring bond.
  bool atom_in_ring(AtomIndex i) const;

  int valence(AtomIndex i) const;

  // Number of stereo markers discarded while this graph was parsed.
  int stereo_discarded() const noexcept { return stereo_discarded_; }
  void set_stereo_discarded(int n) noexcept { stereo_discarded_ = n; }

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  int stereo_discarded_ = 0;
};

// Element maximum for the plausibility check, or nullopt if unchecked.
std::optional<int> max_valence(const Atom &atom) noexcept;

// Index of the first atom violating max_valence, if any.
std::optional<AtomIndex> find_valence_violation(const MolGraph &g);

// Per-bond flag, true iff the bond is not a bridge.
std::vector<bool> ring_flags(const MolGraph &g);

// Component id per atom, numbered in order of lowest atom index.
std::vector<std::size_t> connected_components(const MolGraph &g,
                                              std::size_t *count = nullptr);

/*
 * Keeps the listed atoms (any order, duplicates ignored) and the bonds among
 * them. Atoms are re-indexed in increasing original index order. Bracket
 * atoms gain one explicit hydrogen per unit of severed bond valence.
 * Throws EmptySelection if `keep` is empty.
 */
MolGraph induced_subgraph(const MolGraph &g, std::span<const AtomIndex> keep,
                          std::vector<AtomIndex> *old_to_new = nullptr);

// Disjoint union, `b` indexed after `a`.
MolGraph disjoint_union(const MolGraph &a, const MolGraph &b);

/*
 * Element, charge, aromaticity and bond-order preserving isomorphism.
 * Atoms of both graphs are colored jointly by iterative neighborhood
 * refinement; a backtracking search then matches atoms within color classes.
 */
bool isomorphic(const MolGraph &a, const MolGraph &b);

}  // namespace smiedit

#endif  // SMIEDIT_MOLGRAPH_H_
