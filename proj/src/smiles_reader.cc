//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smiedit/errors.h"
#include "smiedit/smiles.h"
#include "smiedit/tokenizer.h"

namespace smiedit {
namespace {

constexpr std::array<std::string_view, 52> kTwoLetterElements = {
  "He", "Li", "Be", "Ne", "Na", "Mg", "Al", "Si", "Cl", "Ar", "Ca", "Sc",
  "Ti", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se",
  "Br", "Kr", "Rb", "Sr", "Zr", "Nb", "Mo", "Ru", "Rh", "Pd", "Ag", "Cd",
  "In", "Sn", "Sb", "Te", "Xe", "Cs", "Ba", "La", "Gd", "Pt", "Au", "Hg",
  "Tl", "Pb", "Bi", "Ra",
};

constexpr std::string_view kOneLetterElements = "HBCNOFPSKVYIUW";

bool is_two_letter_element(std::string_view s) {
  for (std::string_view e: kTwoLetterElements)
    if (e == s)
      return true;
  return false;
}

int read_int(std::string_view s, std::size_t &i) {
  int v = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    v = v * 10 + (s[i] - '0');
    ++i;
  }
  return v;
}

struct BracketParse {
  Atom atom;
  int stereo = 0;
};

// `text` includes the brackets; `base` is its offset in the SMILES string.
BracketParse parse_bracket(std::string_view text, std::size_t base) {
  BracketParse out;
  Atom &atom = out.atom;
  const std::string_view s = text.substr(1, text.size() - 2);
  std::size_t i = 0;
  auto fail = [&](const std::string &why) -> ParseError {
    return ParseError(base + 1 + i, why);
  };

  if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
    atom.isotope = read_int(s, i);

  if (i >= s.size())
    throw fail("bracket atom without element");
  if (s[i] == '*')
    throw fail("wildcard atoms are not supported");
  if (std::islower(static_cast<unsigned char>(s[i]))) {
    std::string_view two = s.substr(i, 2);
    if (two == "se" || two == "as" || two == "te") {
      atom.element = { static_cast<char>(std::toupper(two[0])), two[1] };
      i += 2;
    } else if (std::string_view("bcnops").find(s[i])
               != std::string_view::npos) {
      atom.element = std::string(
          1, static_cast<char>(std::toupper(static_cast<unsigned char>(s[i]))));
      ++i;
    } else {
      throw fail("unknown aromatic element");
    }
    atom.aromatic = true;
  } else if (std::isupper(static_cast<unsigned char>(s[i]))) {
    if (i + 1 < s.size() && std::islower(static_cast<unsigned char>(s[i + 1]))
        && is_two_letter_element(s.substr(i, 2))) {
      atom.element = std::string(s.substr(i, 2));
      i += 2;
    } else if (kOneLetterElements.find(s[i]) != std::string_view::npos) {
      atom.element = std::string(1, s[i]);
      ++i;
    } else {
      throw fail("unknown element");
    }
  } else {
    throw fail("expected element symbol");
  }

  if (i < s.size() && s[i] == '@') {
    ++out.stereo;
    ++i;
    if (i < s.size() && s[i] == '@') {
      ++i;
    } else if (i + 1 < s.size() && std::isupper(static_cast<unsigned char>(s[i]))
               && std::isupper(static_cast<unsigned char>(s[i + 1]))) {
      i += 2;
      read_int(s, i);
    }
  }

  atom.explicit_h = 0;
  if (i < s.size() && s[i] == 'H') {
    ++i;
    atom.explicit_h = 1;
    if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
      atom.explicit_h = read_int(s, i);
  }

  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    const char sign = s[i];
    const int unit = sign == '+' ? 1 : -1;
    ++i;
    if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      atom.formal_charge = unit * read_int(s, i);
    } else {
      int n = 1;
      while (i < s.size() && s[i] == sign) {
        ++n;
        ++i;
      }
      atom.formal_charge = unit * n;
    }
    if (atom.formal_charge < -4 || atom.formal_charge > 4)
      throw fail("formal charge outside [-4, +4]");
  }

  if (i < s.size() && s[i] == ':') {
    ++i;
    if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
      throw fail("atom class requires digits");
    read_int(s, i);
  }

  if (i != s.size())
    throw fail("unexpected character in bracket atom");
  return out;
}

Atom organic_atom(std::string_view text) {
  Atom atom;
  if (std::islower(static_cast<unsigned char>(text[0]))) {
    atom.aromatic = true;
    atom.element = std::string(
        1, static_cast<char>(std::toupper(static_cast<unsigned char>(text[0]))));
  } else {
    atom.element = std::string(text);
  }
  return atom;
}

struct PendingBond {
  BondOrder order;
  std::size_t position;
};

struct OpenRing {
  AtomIndex atom;
  std::optional<BondOrder> order;
  std::size_t position;
};

class Reader {
public:
  explicit Reader(std::string_view smiles): smiles_(smiles) { }

  MolGraph run() {
    for (const Lexeme &lx: lex(smiles_))
      consume(lx);
    if (pending_)
      throw ParseError(pending_->position, "dangling bond");
    if (!rings_.empty()) {
      throw ParseError(rings_.begin()->second.position,
                       "unclosed ring " + std::to_string(rings_.begin()->first));
    }
    if (!branches_.empty())
      throw ParseError(smiles_.size(), "unclosed branch");

    MolGraph g(std::move(atoms_), std::move(bonds_));
    g.set_stereo_discarded(stereo_);
    if (auto bad = find_valence_violation(g)) {
      throw ParseError(atom_pos_[*bad],
                       "valence violation on " + g.atom(*bad).element);
    }
    return g;
  }

private:
  void consume(const Lexeme &lx) {
    switch (lx.cls) {
    case TokenClass::kBracketAtom: {
      BracketParse bp = parse_bracket(lx.text, lx.position);
      stereo_ += bp.stereo;
      add_atom(std::move(bp.atom), lx.position);
      return;
    }
    case TokenClass::kHalogen2:
    case TokenClass::kOrganic:
      add_atom(organic_atom(lx.text), lx.position);
      return;
    case TokenClass::kRingPercent:
      ring_bond(std::stoi(std::string(lx.text.substr(1))), lx.position);
      return;
    case TokenClass::kSymbol:
      symbol(lx.text[0], lx.position);
      return;
    }
  }

  void symbol(char c, std::size_t pos) {
    if (c >= '0' && c <= '9') {
      ring_bond(c - '0', pos);
      return;
    }
    switch (c) {
    case '(':
      if (!prev_)
        throw ParseError(pos, "branch without preceding atom");
      if (pending_)
        throw ParseError(pending_->position, "dangling bond");
      branches_.push_back(*prev_);
      return;
    case ')':
      if (branches_.empty())
        throw ParseError(pos, "unmatched ')'");
      if (pending_)
        throw ParseError(pending_->position, "dangling bond");
      if (!prev_)
        throw ParseError(pos, "empty branch");
      prev_ = branches_.back();
      branches_.pop_back();
      return;
    case '.':
      if (pending_)
        throw ParseError(pending_->position, "dangling bond");
      prev_.reset();
      return;
    case '-':
      set_bond(BondOrder::kSingle, pos);
      return;
    case '=':
      set_bond(BondOrder::kDouble, pos);
      return;
    case '#':
      set_bond(BondOrder::kTriple, pos);
      return;
    case ':':
      set_bond(BondOrder::kAromatic, pos);
      return;
    case '/':
    case '\\':
      ++stereo_;
      set_bond(BondOrder::kSingle, pos);
      return;
    case '$':
      throw ParseError(pos, "quadruple bonds are not supported");
    case '~':
    case '?':
      throw ParseError(pos, "query bonds are not supported");
    case '*':
      throw ParseError(pos, "wildcard atoms are not supported");
    case '>':
      throw ParseError(pos, "reaction SMILES are not supported");
    case '@':
      throw ParseError(pos, "chirality marker outside bracket atom");
    case '+':
      throw ParseError(pos, "charge outside bracket atom");
    default:
      throw ParseError(pos, std::string("unexpected symbol '") + c + "'");
    }
  }

  void set_bond(BondOrder order, std::size_t pos) {
    if (!prev_)
      throw ParseError(pos, "bond without preceding atom");
    if (pending_)
      throw ParseError(pos, "consecutive bond symbols");
    pending_ = PendingBond{ order, pos };
  }

  BondOrder default_order(AtomIndex a, AtomIndex b) const {
    return atoms_[a].aromatic && atoms_[b].aromatic ? BondOrder::kAromatic
                                                    : BondOrder::kSingle;
  }

  void connect(AtomIndex a, AtomIndex b, BondOrder order, std::size_t pos) {
    for (const Bond &bond: bonds_) {
      if ((bond.begin == a && bond.end == b)
          || (bond.begin == b && bond.end == a))
        throw ParseError(pos, "duplicate bond between atom pair");
    }
    bonds_.push_back({ a, b, order, false });
  }

  void add_atom(Atom atom, std::size_t pos) {
    const AtomIndex idx = atoms_.size();
    atoms_.push_back(std::move(atom));
    atom_pos_.push_back(pos);
    if (prev_) {
      BondOrder order = pending_ ? pending_->order : default_order(*prev_, idx);
      connect(*prev_, idx, order, pos);
    }
    pending_.reset();
    prev_ = idx;
  }

  void ring_bond(int digit, std::size_t pos) {
    if (!prev_)
      throw ParseError(pos, "ring closure without preceding atom");
    std::optional<BondOrder> order;
    if (pending_)
      order = pending_->order;
    pending_.reset();

    auto it = rings_.find(digit);
    if (it == rings_.end()) {
      rings_.emplace(digit, OpenRing{ *prev_, order, pos });
      return;
    }
    const OpenRing open = it->second;
    rings_.erase(it);
    if (open.atom == *prev_)
      throw ParseError(pos, "ring closure to the same atom");
    if (order && open.order && *order != *open.order)
      throw ParseError(pos, "conflicting ring-closure bond orders");
    BondOrder resolved = order       ? *order
                         : open.order ? *open.order
                                      : default_order(open.atom, *prev_);
    connect(open.atom, *prev_, resolved, pos);
  }

  std::string_view smiles_;
  std::vector<Atom> atoms_;
  std::vector<std::size_t> atom_pos_;
  std::vector<Bond> bonds_;
  std::optional<AtomIndex> prev_;
  std::optional<PendingBond> pending_;
  std::vector<AtomIndex> branches_;
  std::map<int, OpenRing> rings_;
  int stereo_ = 0;
};

}  // namespace

MolGraph parse_smiles(std::string_view smiles) {
  return Reader(smiles).run();
}

}  // namespace smiedit
