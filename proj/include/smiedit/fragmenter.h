//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_FRAGMENTER_H_
#define SMIEDIT_FRAGMENTER_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "smiedit/molgraph.h"

namespace smiedit {

struct Fragment {
  std::vector<AtomIndex> atoms;       // sorted, into the parent graph
  std::vector<BondIndex> attachments;  // cut bonds incident to this fragment
};

struct FragmentSet {
  MolGraph parent;
  // Ordered by lowest atom index.
  std::vector<Fragment> fragments;
  std::vector<BondIndex> cut_bonds;
};

struct CorruptionConfig {
  double drop_ratio = 0.15;
  std::size_t min_retained = 1;
  std::uint64_t seed = 0;

  // Throws ConfigError when drop_ratio is outside [0, 1].
  void validate() const;
};

struct CorruptionRecord {
  MolGraph original;
  std::string original_smiles;
  MolGraph corrupted;
  std::string corrupted_smiles;
  std::vector<std::size_t> dropped;  // fragment indices, ascending
  std::uint64_t seed = 0;
};

/*
 * Acyclic single bonds between heavy atoms that match either
 *   R1: exactly one endpoint is a ring atom, or
 *   R2: the endpoints are a carbon and one of N, O, S.
 * Returned in bond-index order.
 */
std::vector<BondIndex> cut_eligible_bonds(const MolGraph &g);

// Fragments with fewer than this many heavy atoms are never created.
inline constexpr std::size_t kMinFragmentAtoms = 2;

/*
 * Applies eligible cuts greedily in bond-index order, skipping any cut that
 * would leave either side with fewer than kMinFragmentAtoms heavy atoms
 * given the cuts accepted so far.
 */
FragmentSet fragment(const MolGraph &g);

/*
 * Drops each fragment independently with probability drop_ratio. If fewer
 * than min_retained fragments survive, uniformly chosen dropped fragments
 * are restored. The corrupted graph is the induced subgraph on retained
 * atoms, serialized with write_smiles.
 */
CorruptionRecord corrupt(const MolGraph &g, const CorruptionConfig &cfg,
                         std::string original_smiles = {});

// {"orig": ..., "corrupt": ..., "dropped": [...], "seed": ...}
std::string to_jsonl(const CorruptionRecord &rec);

}  // namespace smiedit

#endif  // SMIEDIT_FRAGMENTER_H_
