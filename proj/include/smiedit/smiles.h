//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_SMILES_H_
#define SMIEDIT_SMILES_H_

#include <string>
#include <string_view>

#include "smiedit/molgraph.h"

namespace smiedit {

/*
 * Parses SMILES into a heavy-atom graph. Supports branches, ring closures
 * (digits and %nn), '.' disconnection, lowercase aromatic atoms and bracket
 * atoms with isotope, hydrogen count and charge. Stereo markers ('/', '\\',
 * '@' inside brackets) are discarded and counted in
 * MolGraph::stereo_discarded(). Wildcards, reaction arrows, quadruple and
 * query bonds are rejected.
 *
 * Throws LexError or ParseError.
 */
MolGraph parse_smiles(std::string_view smiles);

/*
 * Writes a depth-first SMILES. Components are joined by '.', each rooted at
 * its lowest atom index; neighbors are visited in increasing index order and
 * the last child of an atom continues the chain inline. Ring-closure digits
 * are allocated lowest-free-first from 1-9 then %10-%99.
 *
 * Throws WriteError if more than 99 ring closures are open at once.
 */
std::string write_smiles(const MolGraph &g);

}  // namespace smiedit

#endif  // SMIEDIT_SMILES_H_
