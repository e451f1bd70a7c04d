//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/tokenizer.h"

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "smiedit/errors.h"
#include "smiedit/rng.h"

namespace smiedit {
namespace {

std::vector<std::string> toks(std::string_view s) {
  return tokenize(s).tokens;
}

TEST(TokenizeTest, Paracetamol) {
  std::vector<std::string> expected = { "C", "C", "(", "=", "O", ")",
                                        "N", "c", "1", "c", "c", "c",
                                        "(", "O", ")", "c", "c", "1" };
  EXPECT_EQ(toks("CC(=O)Nc1ccc(O)cc1"), expected);
  EXPECT_EQ(expected.size(), 18);
}

TEST(TokenizeTest, SingleAtom) {
  EXPECT_EQ(toks("C"), std::vector<std::string>{ "C" });
}

TEST(TokenizeTest, TwoLetterHalogensWin) {
  EXPECT_EQ(toks("CCl"), (std::vector<std::string>{ "C", "Cl" }));
  EXPECT_EQ(toks("BrCBr"), (std::vector<std::string>{ "Br", "C", "Br" }));
  // 'Cc' is not a halogen; 'B' followed by 'r' only.
  EXPECT_EQ(toks("Cc"), (std::vector<std::string>{ "C", "c" }));
}

TEST(TokenizeTest, BracketAtomsAndPercentClosures) {
  EXPECT_EQ(toks("[nH]1cc[N+](=O)[O-]C%12CC%12"),
            (std::vector<std::string>{ "[nH]", "1", "c", "c", "[N+]", "(",
                                       "=", "O", ")", "[O-]", "C", "%12",
                                       "C", "C", "%12" }));
}

TEST(TokenizeTest, SymbolClass) {
  EXPECT_EQ(toks("C/C=C\\C.C#N"),
            (std::vector<std::string>{ "C", "/", "C", "=", "C", "\\", "C",
                                       ".", "C", "#", "N" }));
}

TEST(TokenizeTest, Errors) {
  EXPECT_THROW(tokenize("CxC"), LexError);
  EXPECT_THROW(tokenize("C[NH4+"), UnterminatedBracket);
  EXPECT_THROW(tokenize("C%1C"), LexError);
  try {
    tokenize("CCZ");
    FAIL();
  } catch (const LexError &e) {
    EXPECT_EQ(e.position(), 2);
  }
}

TEST(DetokenizeTest, Basics) {
  EXPECT_EQ(detokenize(TokenSeq{ { "C", "Cl" } }), "CCl");
  EXPECT_EQ(detokenize(TokenSeq{}), "");
  EXPECT_EQ(detokenize(tokenize("CC(=O)Nc1ccc(O)cc1")), "CC(=O)Nc1ccc(O)cc1");
}

TEST(TokenizeTest, CorpusRoundTrip) {
  auto corpus = read_corpus_file(SMIEDIT_TEST_DATA "/fixture_corpus.txt");
  ASSERT_GE(corpus.size(), 2000);
  for (const std::string &s: corpus)
    ASSERT_EQ(detokenize(tokenize(s)), s);
}

// Re-tokenizing any concatenation of produced tokens reproduces the same
// boundaries.
TEST(TokenizeTest, PrefixGreedyDeterminism) {
  auto corpus = read_corpus_file(SMIEDIT_TEST_DATA "/fixture_corpus.txt");
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string &a = corpus[rng.index(corpus.size())];
    const std::string &b = corpus[rng.index(corpus.size())];
    TokenSeq ta = tokenize(a), tb = tokenize(b);
    std::size_t ka = rng.index(ta.size() + 1), kb = rng.index(tb.size() + 1);
    std::vector<std::string> joined(ta.tokens.begin(), ta.tokens.begin() + ka);
    joined.insert(joined.end(), tb.tokens.begin() + kb, tb.tokens.end());
    std::string text;
    for (auto &t: joined)
      text += t;
    EXPECT_EQ(tokenize(text).tokens, joined);
  }
}

TEST(VocabTest, BuildFromCorpus) {
  std::vector<std::string> corpus = { "CC", "CO" };
  Vocab v = build_vocab(corpus);
  EXPECT_EQ(v.size(), 8);
  EXPECT_EQ(v.token(6), "C");
  EXPECT_EQ(v.token(7), "O");
  for (TokenId i = 0; i < Vocab::kNumSpecials; ++i)
    EXPECT_EQ(v.token(i), Vocab::kSpecialNames[i]);

  EXPECT_EQ(build_vocab(std::vector<std::string>{}).size(), 6);
  EXPECT_EQ(build_vocab(std::vector<std::string>{ "C", "C" }).size(), 7);
}

TEST(VocabTest, OrderIndependent) {
  auto corpus = read_corpus_file(SMIEDIT_TEST_DATA "/fixture_corpus.txt");
  Vocab a = build_vocab(corpus);
  std::reverse(corpus.begin(), corpus.end());
  Rng rng(3);
  rng.shuffle(corpus.begin(), corpus.end());
  Vocab b = build_vocab(corpus);
  EXPECT_EQ(a, b);
}

TEST(VocabTest, LexErrorCarriesLine) {
  std::vector<std::string> corpus = { "CC", "CxC" };
  try {
    build_vocab(corpus);
    FAIL();
  } catch (const LexError &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(EncodeTest, SentinelsAndUnknown) {
  Vocab v = build_vocab(std::vector<std::string>{ "C" });
  EXPECT_EQ(encode(tokenize("C"), v, true), (IdSeq{ 1, 6, 2 }));
  EXPECT_EQ(encode(tokenize("N"), v, false), (IdSeq{ Vocab::kUnk }));
}

TEST(EncodeTest, DecodeRoundTripOverCorpus) {
  auto corpus = read_corpus_file(SMIEDIT_TEST_DATA "/fixture_corpus.txt");
  Vocab v = build_vocab(corpus);
  for (const std::string &s: corpus) {
    TokenSeq seq = tokenize(s);
    TokenSeq back = decode(encode(seq, v, true), v);
    EXPECT_TRUE(back.has_bos && back.has_eos);
    EXPECT_EQ(back.tokens, seq.tokens);
  }
}

TEST(ReadCorpusTest, CommentsAndWhitespace) {
  std::istringstream is("# header\nCCO  \n\n#x\nc1ccccc1\t\n");
  EXPECT_EQ(read_corpus(is), (std::vector<std::string>{ "CCO", "c1ccccc1" }));
}

}  // namespace
}  // namespace smiedit
