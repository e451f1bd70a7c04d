//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_TOKENIZER_H_
#define SMIEDIT_TOKENIZER_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace smiedit {

/*
 * SMILES lexical grammar. Scanning is left to right and the first matching
 * class wins:
 *
 *   kBracketAtom  '[' ... ']'
 *   kHalogen2     "Br" | "Cl"
 *   kOrganic      B C N O S P F I b c n o s p
 *   kRingPercent  '%' digit digit
 *   kSymbol       digit ( ) . = # - + \ / : ~ @ ? > * $
 */
enum class TokenClass {
  kBracketAtom,
  kHalogen2,
  kOrganic,
  kRingPercent,
  kSymbol,
};

using Token = std::string;

struct Lexeme {
  std::string_view text;
  std::size_t position;
  TokenClass cls;
};

// Throws LexError / UnterminatedBracket.
std::vector<Lexeme> lex(std::string_view smiles);

struct TokenSeq {
  std::vector<Token> tokens;
  bool has_bos = false;
  bool has_eos = false;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }

  friend bool operator==(const TokenSeq &, const TokenSeq &) = default;
};

TokenSeq tokenize(std::string_view smiles);

// Concatenates the non-sentinel tokens.
std::string detokenize(const TokenSeq &seq);

using TokenId = std::int32_t;
using IdSeq = std::vector<TokenId>;

class Vocab {
public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr TokenId kPlaceholder = 4;
  static constexpr TokenId kMask = 5;
  static constexpr TokenId kNumSpecials = 6;

  static constexpr std::string_view kSpecialNames[kNumSpecials] = {
    "[PAD]", "[BOS]", "[EOS]", "[UNK]", "[P]", "[MASK]",
  };

  // Specials only.
  Vocab();

  // Specials followed by `tokens` (sorted, deduplicated, specials removed).
  explicit Vocab(std::vector<Token> tokens);

  std::size_t size() const noexcept { return id_to_token_.size(); }

  TokenId id(std::string_view token) const;
  const Token &token(TokenId id) const { return id_to_token_.at(id); }
  bool contains(std::string_view token) const;

  static bool is_special(TokenId id) noexcept {
    return id >= 0 && id < kNumSpecials;
  }

  const std::vector<Token> &tokens() const noexcept { return id_to_token_; }

  friend bool operator==(const Vocab &a, const Vocab &b) {
    return a.id_to_token_ == b.id_to_token_;
  }

private:
  std::vector<Token> id_to_token_;
  std::map<Token, TokenId, std::less<>> token_to_id_;
};

// Each line must tokenize; a LexError is rethrown with the line number.
Vocab build_vocab(std::span<const std::string> corpus);

IdSeq encode(const TokenSeq &seq, const Vocab &vocab, bool add_sentinels);

// Leading [BOS] and trailing [EOS] become sentinel flags; [PAD] is dropped.
TokenSeq decode(std::span<const TokenId> ids, const Vocab &vocab);

// One SMILES per line; '#' lines and blank lines are skipped, trailing
// whitespace is stripped.
std::vector<std::string> read_corpus(std::istream &is);
std::vector<std::string> read_corpus_file(const std::string &path);

}  // namespace smiedit

#endif  // SMIEDIT_TOKENIZER_H_
