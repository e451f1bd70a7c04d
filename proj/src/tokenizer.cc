//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/tokenizer.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "smiedit/errors.h"

namespace smiedit {
namespace {

bool is_organic(char c) {
  switch (c) {
  case 'B': case 'C': case 'N': case 'O': case 'S': case 'P': case 'F':
  case 'I': case 'b': case 'c': case 'n': case 'o': case 's': case 'p':
    return true;
  default:
    return false;
  }
}

bool is_symbol(char c) {
  if (c >= '0' && c <= '9')
    return true;
  switch (c) {
  case '(': case ')': case '.': case '=': case '#': case '-': case '+':
  case '\\': case '/': case ':': case '~': case '@': case '?': case '>':
  case '*': case '$':
    return true;
  default:
    return false;
  }
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<Lexeme> lex(std::string_view smiles) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  const std::size_t n = smiles.size();
  while (i < n) {
    const char c = smiles[i];
    if (c == '[') {
      std::size_t j = smiles.find(']', i + 1);
      if (j == std::string_view::npos)
        throw UnterminatedBracket(i);
      out.push_back({ smiles.substr(i, j - i + 1), i,
                      TokenClass::kBracketAtom });
      i = j + 1;
    } else if (i + 1 < n
               && ((c == 'B' && smiles[i + 1] == 'r')
                   || (c == 'C' && smiles[i + 1] == 'l'))) {
      out.push_back({ smiles.substr(i, 2), i, TokenClass::kHalogen2 });
      i += 2;
    } else if (is_organic(c)) {
      out.push_back({ smiles.substr(i, 1), i, TokenClass::kOrganic });
      ++i;
    } else if (c == '%') {
      if (i + 2 >= n || !is_digit(smiles[i + 1]) || !is_digit(smiles[i + 2]))
        throw LexError(i, "'%' must be followed by two digits");
      out.push_back({ smiles.substr(i, 3), i, TokenClass::kRingPercent });
      i += 3;
    } else if (is_symbol(c)) {
      out.push_back({ smiles.substr(i, 1), i, TokenClass::kSymbol });
      ++i;
    } else {
      throw LexError(i, std::string("unexpected character '")
                            + (std::isprint(static_cast<unsigned char>(c))
                                   ? std::string(1, c)
                                   : std::string("\\x") + std::to_string(
                                         static_cast<unsigned char>(c)))
                            + "'");
    }
  }
  return out;
}

TokenSeq tokenize(std::string_view smiles) {
  TokenSeq seq;
  for (const Lexeme &lx: lex(smiles))
    seq.tokens.emplace_back(lx.text);
  return seq;
}

std::string detokenize(const TokenSeq &seq) {
  std::string out;
  for (const Token &t: seq.tokens)
    out += t;
  return out;
}

Vocab::Vocab() {
  for (std::string_view name: kSpecialNames) {
    token_to_id_.emplace(std::string(name),
                         static_cast<TokenId>(id_to_token_.size()));
    id_to_token_.emplace_back(name);
  }
}

Vocab::Vocab(std::vector<Token> tokens): Vocab() {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  for (Token &t: tokens) {
    if (token_to_id_.contains(t))
      continue;
    token_to_id_.emplace(t, static_cast<TokenId>(id_to_token_.size()));
    id_to_token_.push_back(std::move(t));
  }
}

TokenId Vocab::id(std::string_view token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return token_to_id_.find(token) != token_to_id_.end();
}

Vocab build_vocab(std::span<const std::string> corpus) {
  std::set<Token> distinct;
  for (std::size_t line = 0; line < corpus.size(); ++line) {
    try {
      for (const Lexeme &lx: lex(corpus[line]))
        distinct.emplace(lx.text);
    } catch (const LexError &e) {
      throw LexError(e.position(), "line " + std::to_string(line + 1)
                                       + ": " + e.what());
    }
  }
  return Vocab(std::vector<Token>(distinct.begin(), distinct.end()));
}

IdSeq encode(const TokenSeq &seq, const Vocab &vocab, bool add_sentinels) {
  IdSeq ids;
  ids.reserve(seq.size() + 2);
  if (add_sentinels)
    ids.push_back(Vocab::kBos);
  for (const Token &t: seq.tokens)
    ids.push_back(vocab.id(t));
  if (add_sentinels)
    ids.push_back(Vocab::kEos);
  return ids;
}

TokenSeq decode(std::span<const TokenId> ids, const Vocab &vocab) {
  TokenSeq seq;
  std::size_t begin = 0, end = ids.size();
  if (begin < end && ids[begin] == Vocab::kBos) {
    seq.has_bos = true;
    ++begin;
  }
  if (begin < end && ids[end - 1] == Vocab::kEos) {
    seq.has_eos = true;
    --end;
  }
  for (std::size_t i = begin; i < end; ++i) {
    if (ids[i] == Vocab::kPad)
      continue;
    seq.tokens.push_back(vocab.token(ids[i]));
  }
  return seq;
}

std::vector<std::string> read_corpus(std::istream &is) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty()
           && std::isspace(static_cast<unsigned char>(line.back())))
      line.pop_back();
    if (line.empty() || line.front() == '#')
      continue;
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> read_corpus_file(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw Error("cannot open corpus file " + path);
  return read_corpus(is);
}

}  // namespace smiedit
