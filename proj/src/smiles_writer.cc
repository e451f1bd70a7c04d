//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include "smiedit/errors.h"
#include "smiedit/smiles.h"

namespace smiedit {
namespace {

bool in_organic_subset(const Atom &atom) {
  static const std::set<std::string> aliphatic = {
    "B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I",
  };
  static const std::set<std::string> aromatic = {
    "B", "C", "N", "O", "P", "S",
  };
  return atom.aromatic ? aromatic.contains(atom.element)
                       : aliphatic.contains(atom.element);
}

std::string atom_symbol(const Atom &atom) {
  std::string element = atom.element;
  if (atom.aromatic) {
    for (char &c: element)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  const bool bracket = atom.explicit_h.has_value() || atom.isotope.has_value()
                       || atom.formal_charge != 0 || !in_organic_subset(atom);
  if (!bracket)
    return element;

  std::string out = "[";
  if (atom.isotope)
    out += std::to_string(*atom.isotope);
  out += element;
  const int h = atom.explicit_h.value_or(0);
  if (h > 0) {
    out += 'H';
    if (h > 1)
      out += std::to_string(h);
  }
  if (atom.formal_charge != 0) {
    out += atom.formal_charge > 0 ? '+' : '-';
    const int mag = std::abs(atom.formal_charge);
    if (mag > 1)
      out += std::to_string(mag);
  }
  out += ']';
  return out;
}

std::string bond_symbol(const MolGraph &g, const Bond &bond) {
  const bool both_aromatic =
      g.atom(bond.begin).aromatic && g.atom(bond.end).aromatic;
  switch (bond.order) {
  case BondOrder::kSingle:
    return both_aromatic ? "-" : "";
  case BondOrder::kDouble:
    return "=";
  case BondOrder::kTriple:
    return "#";
  case BondOrder::kAromatic:
    return both_aromatic ? "" : ":";
  }
  return "";
}

std::string ring_label(int digit) {
  if (digit < 10)
    return std::string(1, static_cast<char>('0' + digit));
  return "%" + std::to_string(digit);
}

struct Closure {
  BondIndex bond;
  AtomIndex partner;
  bool opens;  // true at the atom written first
};

class Writer {
public:
  explicit Writer(const MolGraph &g)
      : g_(g), visited_(g.num_atoms(), false), bond_used_(g.num_bonds(), false),
        rank_(g.num_atoms(), 0), children_(g.num_atoms()),
        parent_bond_(g.num_atoms(), kNoBond), closures_(g.num_atoms()),
        open_digit_(g.num_bonds(), 0) { }

  std::string run() {
    std::string out;
    std::size_t next_rank = 0;
    for (AtomIndex root = 0; root < g_.num_atoms(); ++root) {
      if (visited_[root])
        continue;
      traverse(root, next_rank);
      if (!out.empty())
        out += '.';
      emit(root, out);
    }
    return out;
  }

private:
  static constexpr BondIndex kNoBond = static_cast<BondIndex>(-1);

  void traverse(AtomIndex root, std::size_t &next_rank) {
    struct Frame {
      AtomIndex atom;
      std::size_t next;
    };
    std::vector<Frame> stack{ { root, 0 } };
    visited_[root] = true;
    rank_[root] = next_rank++;
    while (!stack.empty()) {
      Frame &f = stack.back();
      auto adj = g_.neighbors(f.atom);
      if (f.next == adj.size()) {
        stack.pop_back();
        continue;
      }
      const Neighbor nb = adj[f.next++];
      if (bond_used_[nb.bond])
        continue;
      bond_used_[nb.bond] = true;
      const AtomIndex u = f.atom;
      if (!visited_[nb.atom]) {
        visited_[nb.atom] = true;
        rank_[nb.atom] = next_rank++;
        children_[u].push_back(nb.atom);
        parent_bond_[nb.atom] = nb.bond;
        stack.push_back({ nb.atom, 0 });
      } else {
        // nb.atom is an ancestor still on the stack and was written first.
        closures_[nb.atom].push_back({ nb.bond, u, true });
        closures_[u].push_back({ nb.bond, nb.atom, false });
      }
    }
  }

  int take_digit(std::size_t at_bond) {
    for (int d = 1; d <= 99; ++d) {
      if (!in_use_.contains(d)) {
        in_use_.insert(d);
        return d;
      }
    }
    throw WriteError("ring-closure digits exhausted at bond "
                     + std::to_string(at_bond));
  }

  void emit(AtomIndex a, std::string &out) {
    if (parent_bond_[a] != kNoBond)
      out += bond_symbol(g_, g_.bond(parent_bond_[a]));
    out += atom_symbol(g_.atom(a));
    write_closures(a, out);
    const auto &kids = children_[a];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      if (k + 1 == kids.size()) {
        emit(kids[k], out);
      } else {
        out += '(';
        emit(kids[k], out);
        out += ')';
      }
    }
  }

  void write_closures(AtomIndex a, std::string &out) {
    auto &list = closures_[a];
    std::vector<Closure *> closing, opening;
    for (Closure &c: list)
      (c.opens ? opening : closing).push_back(&c);
    std::sort(closing.begin(), closing.end(),
              [this](const Closure *x, const Closure *y) {
                return open_digit_[x->bond] < open_digit_[y->bond];
              });
    std::sort(opening.begin(), opening.end(),
              [this](const Closure *x, const Closure *y) {
                return rank_[x->partner] < rank_[y->partner];
              });
    std::vector<int> released;
    for (Closure *c: closing) {
      const int d = open_digit_[c->bond];
      out += ring_label(d);
      released.push_back(d);
    }
    for (Closure *c: opening) {
      const int d = take_digit(c->bond);
      open_digit_[c->bond] = d;
      out += bond_symbol(g_, g_.bond(c->bond));
      out += ring_label(d);
    }
    for (int d: released)
      in_use_.erase(d);
  }

  const MolGraph &g_;
  std::vector<bool> visited_;
  std::vector<bool> bond_used_;
  std::vector<std::size_t> rank_;
  std::vector<std::vector<AtomIndex>> children_;
  std::vector<BondIndex> parent_bond_;
  std::vector<std::vector<Closure>> closures_;
  std::vector<int> open_digit_;
  std::set<int> in_use_;
};

}  // namespace

std::string write_smiles(const MolGraph &g) {
  return Writer(g).run();
}

}  // namespace smiedit
