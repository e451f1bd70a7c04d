//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_EDIT_EXPERT_H_
#define SMIEDIT_EDIT_EXPERT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "smiedit/tokenizer.h"

namespace smiedit {

// Insertion classes are 0..255 per slot.
inline constexpr std::size_t kMaxInsertionsPerSlot = 255;

struct EditAlignment {
  // (source index, target index), strictly increasing in both.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  // Insert/delete edit distance.
  std::size_t distance = 0;
};

struct InsertionPlan {
  std::vector<std::uint8_t> counts;  // one per slot, slot 0 before token 0
  std::vector<TokenId> fill;         // target tokens in placeholder order
};

struct EditPlan {
  std::vector<std::uint8_t> deletions;  // one flag per source token
  InsertionPlan insertion;
  std::size_t distance = 0;
};

/*
 * Operations below take content tokens only; callers strip sentinels. The
 * operation set is insertion and deletion, so a substitution costs two.
 */

std::size_t edit_distance(std::span<const TokenId> a, std::span<const TokenId> b);
std::size_t edit_distance(const TokenSeq &a, const TokenSeq &b);

/*
 * Maximum common subsequence, lexicographically smallest as a list of
 * pairs: the earliest source position is matched first, and for it the
 * earliest target position.
 */
EditAlignment align(std::span<const TokenId> a, std::span<const TokenId> b);
EditAlignment align(const TokenSeq &a, const TokenSeq &b);

// 1 for every source token left unmatched by align(y, target).
std::vector<std::uint8_t> expert_deletion(std::span<const TokenId> y,
                                          std::span<const TokenId> target);
std::vector<std::uint8_t> expert_deletion(const TokenSeq &y,
                                          const TokenSeq &target);

/*
 * `kept` must be a subsequence of `target` (ShapeMismatch otherwise).
 * Throws OverlongInsertion when a slot needs more than 255 tokens.
 */
InsertionPlan expert_insertion_plan(std::span<const TokenId> kept,
                                    std::span<const TokenId> target);

EditPlan expert_plan(std::span<const TokenId> y,
                     std::span<const TokenId> target);

// Edit environment. Each throws ShapeMismatch on inconsistent shapes.
template <class T>
std::vector<T> apply_deletion(std::span<const T> y,
                              std::span<const std::uint8_t> labels);
template <class T>
std::vector<T> apply_insertion(std::span<const T> y,
                               std::span<const std::uint8_t> counts,
                               const T &placeholder);
template <class T>
std::vector<T> fill_placeholders(std::span<const T> y,
                                 std::span<const T> tokens,
                                 const T &placeholder);

IdSeq apply_deletion(const IdSeq &y, std::span<const std::uint8_t> labels);
IdSeq apply_insertion(const IdSeq &y, std::span<const std::uint8_t> counts);
IdSeq fill_placeholders(const IdSeq &y, std::span<const TokenId> tokens);

TokenSeq apply_deletion(const TokenSeq &y, std::span<const std::uint8_t> labels);
TokenSeq apply_insertion(const TokenSeq &y, std::span<const std::uint8_t> counts);
TokenSeq fill_placeholders(const TokenSeq &y, std::span<const Token> tokens);

// Applies all three steps.
IdSeq apply_plan(const IdSeq &y, const EditPlan &plan);

}  // namespace smiedit

#endif  // SMIEDIT_EDIT_EXPERT_H_
