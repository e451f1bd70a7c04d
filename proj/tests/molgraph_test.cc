//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/molgraph.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "smiedit/errors.h"
#include "smiedit/rng.h"
#include "smiedit/smiles.h"
#include "smiedit/tokenizer.h"

namespace smiedit {
namespace {

Atom make_atom(std::string element, int charge = 0) {
  Atom a;
  a.element = std::move(element);
  a.formal_charge = charge;
  return a;
}

// Independent ring oracle: a bond lies on a cycle iff some simple path
// between its endpoints avoids it. Exhaustive DFS over simple paths.
bool path_avoiding(const MolGraph &g, AtomIndex from, AtomIndex to,
                   BondIndex banned, std::vector<bool> &seen) {
  if (from == to)
    return true;
  seen[from] = true;
  for (const Neighbor &nb: g.neighbors(from)) {
    if (nb.bond == banned || seen[nb.atom])
      continue;
    if (path_avoiding(g, nb.atom, to, banned, seen))
      return true;
  }
  seen[from] = false;
  return false;
}

std::vector<bool> cycle_oracle(const MolGraph &g) {
  std::vector<bool> out(g.num_bonds());
  for (BondIndex b = 0; b < g.num_bonds(); ++b) {
    std::vector<bool> seen(g.num_atoms(), false);
    out[b] = path_avoiding(g, g.bond(b).begin, g.bond(b).end, b, seen);
  }
  return out;
}

MolGraph random_graph(Rng &rng, std::size_t n, double p) {
  std::vector<Atom> atoms(n, make_atom("C"));
  std::vector<Bond> bonds;
  for (AtomIndex i = 0; i < n; ++i)
    for (AtomIndex j = i + 1; j < n; ++j)
      if (rng.bernoulli(p))
        bonds.push_back({ i, j });
  return MolGraph(std::move(atoms), std::move(bonds));
}

TEST(MolGraphTest, RejectsMalformedBonds) {
  std::vector<Atom> atoms(2, make_atom("C"));
  EXPECT_THROW(MolGraph(atoms, { { 0, 0 } }), std::invalid_argument);
  EXPECT_THROW(MolGraph(atoms, { { 0, 2 } }), std::invalid_argument);
  EXPECT_THROW(MolGraph(atoms, { { 0, 1 }, { 1, 0 } }), std::invalid_argument);
}

TEST(RingFlagsTest, Basics) {
  for (bool f: ring_flags(parse_smiles("c1ccccc1")))
    EXPECT_TRUE(f);
  EXPECT_FALSE(ring_flags(parse_smiles("CC"))[0]);

  MolGraph g = parse_smiles("CC(=O)Nc1ccc(O)cc1");
  auto flags = ring_flags(g);
  EXPECT_EQ(std::count(flags.begin(), flags.end(), true), 6);
  for (BondIndex b = 0; b < g.num_bonds(); ++b) {
    EXPECT_EQ(flags[b], g.atom(g.bond(b).begin).aromatic
                            && g.atom(g.bond(b).end).aromatic);
  }
}

TEST(RingFlagsTest, MatchesCycleOracleOnRandomGraphs) {
  Rng rng(11);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + rng.index(12);
    const double p = 0.05 + 0.3 * rng.uniform();
    MolGraph g = random_graph(rng, n, p);
    ASSERT_EQ(ring_flags(g), cycle_oracle(g)) << "trial " << trial;
  }
}

TEST(RingFlagsTest, MatchesCycleOracleOnSmallCorpusMolecules) {
  auto corpus = read_corpus_file(SMIEDIT_TEST_DATA "/fixture_corpus.txt");
  int checked = 0;
  for (const std::string &s: corpus) {
    MolGraph g = parse_smiles(s);
    if (g.num_atoms() > 12)
      continue;
    ASSERT_EQ(ring_flags(g), cycle_oracle(g)) << s;
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(ValenceTest, Maxima) {
  EXPECT_EQ(max_valence(make_atom("C")), 4);
  EXPECT_EQ(max_valence(make_atom("N", 1)), 4);
  EXPECT_EQ(max_valence(make_atom("O", 1)), 3);
  EXPECT_EQ(max_valence(make_atom("S")), 6);
  EXPECT_EQ(max_valence(make_atom("P")), 5);
  EXPECT_EQ(max_valence(make_atom("Cl")), 1);
  EXPECT_FALSE(max_valence(make_atom("Na")).has_value());
}

TEST(InducedSubgraphTest, KeepAllIsIdentity) {
  MolGraph g = parse_smiles("CC(=O)Nc1ccc(O)cc1");
  std::vector<AtomIndex> all(g.num_atoms());
  std::iota(all.begin(), all.end(), 0);
  MolGraph h = induced_subgraph(g, all);
  EXPECT_EQ(h.num_atoms(), g.num_atoms());
  EXPECT_EQ(h.num_bonds(), g.num_bonds());
  EXPECT_TRUE(isomorphic(g, h));
}

TEST(InducedSubgraphTest, RemoveAcetyl) {
  MolGraph g = parse_smiles("CC(=O)Nc1ccc(O)cc1");
  std::vector<AtomIndex> keep = { 3, 4, 5, 6, 7, 8, 9, 10 };
  MolGraph h = induced_subgraph(g, keep);
  EXPECT_TRUE(isomorphic(h, parse_smiles("Nc1ccc(O)cc1")));
}

TEST(InducedSubgraphTest, TriangleEdge) {
  MolGraph g = parse_smiles("C1CC1");
  std::vector<AtomIndex> keep = { 2, 0 };
  MolGraph h = induced_subgraph(g, keep);
  EXPECT_EQ(h.num_atoms(), 2);
  EXPECT_EQ(h.num_bonds(), 1);
  EXPECT_FALSE(h.bond(0).in_ring);
}

TEST(InducedSubgraphTest, EmptySelectionThrows) {
  MolGraph g = parse_smiles("CC");
  EXPECT_THROW(induced_subgraph(g, std::vector<AtomIndex>{}), EmptySelection);
}

TEST(InducedSubgraphTest, BracketAtomsGainHydrogens) {
  MolGraph g = parse_smiles("C[NH+](C)C");
  std::vector<AtomIndex> keep = { 0, 1 };
  MolGraph h = induced_subgraph(g, keep);
  EXPECT_EQ(h.atom(1).explicit_h, 3);
  EXPECT_FALSE(h.atom(0).explicit_h.has_value());
  EXPECT_FALSE(find_valence_violation(h).has_value());
}

TEST(InducedSubgraphTest, NeverGrows) {
  auto corpus = read_corpus_file(SMIEDIT_TEST_DATA "/fixture_corpus.txt");
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    MolGraph g = parse_smiles(corpus[rng.index(corpus.size())]);
    std::vector<AtomIndex> keep;
    for (AtomIndex a = 0; a < g.num_atoms(); ++a)
      if (rng.bernoulli(0.6))
        keep.push_back(a);
    if (keep.empty())
      continue;
    std::vector<AtomIndex> map;
    MolGraph h = induced_subgraph(g, keep, &map);
    EXPECT_LE(h.num_atoms(), g.num_atoms());
    EXPECT_LE(h.num_bonds(), g.num_bonds());
    EXPECT_EQ(h.num_atoms(), keep.size());
    // Re-parsing the serialization succeeds and is isomorphic.
    EXPECT_TRUE(isomorphic(h, parse_smiles(write_smiles(h))));
  }
}

TEST(IsomorphicTest, Examples) {
  MolGraph g = parse_smiles("CC(=O)Nc1ccc(O)cc1");
  EXPECT_TRUE(isomorphic(g, g));
  EXPECT_TRUE(isomorphic(parse_smiles("OCC"), parse_smiles("CCO")));
  EXPECT_FALSE(isomorphic(parse_smiles("CCO"), parse_smiles("CC=O")));
  EXPECT_FALSE(isomorphic(parse_smiles("CCO"), parse_smiles("CCN")));
  EXPECT_FALSE(isomorphic(parse_smiles("CC[O-]"), parse_smiles("CCO")));
  EXPECT_FALSE(isomorphic(parse_smiles("c1ccccc1"), parse_smiles("C1CCCCC1")));
}

TEST(IsomorphicTest, RegularGraphsNeedSearch) {
  // Same degree sequence; refinement alone cannot split them.
  MolGraph hexagon = parse_smiles("C1CCCCC1");
  MolGraph triangles = parse_smiles("C1CC1.C1CC1");
  EXPECT_FALSE(isomorphic(hexagon, triangles));
  // Prism vs. K3,3: both 3-regular on 6 vertices.
  std::vector<Atom> atoms(6, make_atom("C"));
  MolGraph prism(atoms, { { 0, 1 }, { 1, 2 }, { 2, 0 }, { 3, 4 }, { 4, 5 },
                           { 5, 3 }, { 0, 3 }, { 1, 4 }, { 2, 5 } });
  MolGraph k33(atoms, { { 0, 3 }, { 0, 4 }, { 0, 5 }, { 1, 3 }, { 1, 4 },
                        { 1, 5 }, { 2, 3 }, { 2, 4 }, { 2, 5 } });
  EXPECT_FALSE(isomorphic(prism, k33));
}

TEST(IsomorphicTest, InvariantUnderRelabeling) {
  auto corpus = read_corpus_file(SMIEDIT_TEST_DATA "/fixture_corpus.txt");
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    MolGraph g = parse_smiles(corpus[rng.index(corpus.size())]);
    std::vector<AtomIndex> perm(g.num_atoms());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    std::vector<Atom> atoms(g.num_atoms());
    for (AtomIndex a = 0; a < g.num_atoms(); ++a)
      atoms[perm[a]] = g.atom(a);
    std::vector<Bond> bonds;
    for (const Bond &b: g.bonds())
      bonds.push_back({ perm[b.begin], perm[b.end], b.order });
    rng.shuffle(bonds.begin(), bonds.end());
    MolGraph h(atoms, bonds);
    ASSERT_TRUE(isomorphic(g, h));
    // Changing one bond order breaks the isomorphism.
    if (!bonds.empty() && bonds[0].order == BondOrder::kSingle) {
      bonds[0].order = BondOrder::kDouble;
      EXPECT_FALSE(isomorphic(g, MolGraph(atoms, bonds)));
    }
  }
}

TEST(DisjointUnionTest, ComponentsAdd) {
  MolGraph u = disjoint_union(parse_smiles("CC"), parse_smiles("c1ccccc1"));
  EXPECT_EQ(u.num_atoms(), 8);
  EXPECT_EQ(u.num_bonds(), 7);
  std::size_t n = 0;
  connected_components(u, &n);
  EXPECT_EQ(n, 2);
  EXPECT_TRUE(isomorphic(u, parse_smiles("c1ccccc1.CC")));
}

}  // namespace
}  // namespace smiedit
