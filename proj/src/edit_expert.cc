//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/edit_expert.h"

#include <algorithm>
#include <map>
#include <string>

#include "smiedit/errors.h"

namespace smiedit {
namespace {

// Suffix LCS table: at(i, j) = LCS(a[i:], b[j:]).
class SuffixLcs {
public:
  SuffixLcs(std::span<const TokenId> a, std::span<const TokenId> b)
      : cols_(b.size() + 1), table_((a.size() + 1) * cols_, 0) {
    for (std::size_t i = a.size(); i-- > 0;) {
      for (std::size_t j = b.size(); j-- > 0;) {
        cell(i, j) = a[i] == b[j] ? at(i + 1, j + 1) + 1
                                  : std::max(at(i + 1, j), at(i, j + 1));
      }
    }
  }

  std::uint32_t at(std::size_t i, std::size_t j) const {
    return table_[i * cols_ + j];
  }

private:
  std::uint32_t &cell(std::size_t i, std::size_t j) {
    return table_[i * cols_ + j];
  }

  std::size_t cols_;
  std::vector<std::uint32_t> table_;
};

// Interns tokens from both sequences into a shared id space.
std::pair<IdSeq, IdSeq> intern(const TokenSeq &a, const TokenSeq &b) {
  std::map<std::string, TokenId> ids;
  auto conv = [&ids](const TokenSeq &s) {
    IdSeq out;
    out.reserve(s.size());
    for (const Token &t: s.tokens)
      out.push_back(ids.emplace(t, static_cast<TokenId>(ids.size()))
                        .first->second);
    return out;
  };
  IdSeq ia = conv(a);
  IdSeq ib = conv(b);
  return { std::move(ia), std::move(ib) };
}

}  // namespace

EditAlignment align(std::span<const TokenId> a, std::span<const TokenId> b) {
  SuffixLcs lcs(a, b);
  EditAlignment out;
  std::size_t i = 0, j = 0;
  std::uint32_t remaining = lcs.at(0, 0);
  while (remaining > 0) {
    bool found = false;
    for (std::size_t ii = i; ii < a.size() && !found; ++ii) {
      for (std::size_t jj = j; jj < b.size(); ++jj) {
        if (a[ii] == b[jj] && lcs.at(ii + 1, jj + 1) + 1 == remaining) {
          out.pairs.emplace_back(ii, jj);
          i = ii + 1;
          j = jj + 1;
          --remaining;
          found = true;
          break;
        }
      }
    }
  }
  out.distance = a.size() + b.size() - 2 * out.pairs.size();
  return out;
}

EditAlignment align(const TokenSeq &a, const TokenSeq &b) {
  auto [ia, ib] = intern(a, b);
  return align(ia, ib);
}

std::size_t edit_distance(std::span<const TokenId> a,
                          std::span<const TokenId> b) {
  // Two-row LCS; cheaper than the full table.
  std::vector<std::uint32_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return a.size() + b.size() - 2 * static_cast<std::size_t>(prev[b.size()]);
}

std::size_t edit_distance(const TokenSeq &a, const TokenSeq &b) {
  auto [ia, ib] = intern(a, b);
  return edit_distance(ia, ib);
}

std::vector<std::uint8_t> expert_deletion(std::span<const TokenId> y,
                                          std::span<const TokenId> target) {
  std::vector<std::uint8_t> labels(y.size(), 1);
  for (auto [i, j]: align(y, target).pairs)
    labels[i] = 0;
  return labels;
}

std::vector<std::uint8_t> expert_deletion(const TokenSeq &y,
                                          const TokenSeq &target) {
  auto [iy, it] = intern(y, target);
  return expert_deletion(iy, it);
}

InsertionPlan expert_insertion_plan(std::span<const TokenId> kept,
                                    std::span<const TokenId> target) {
  const EditAlignment al = align(kept, target);
  if (al.pairs.size() != kept.size())
    throw ShapeMismatch("kept sequence is not a subsequence of the target");
  InsertionPlan plan;
  plan.counts.reserve(kept.size() + 1);
  std::size_t next = 0;  // first target index not yet accounted for
  auto add_slot = [&](std::size_t upto) {
    const std::size_t count = upto - next;
    if (count > kMaxInsertionsPerSlot)
      throw OverlongInsertion(plan.counts.size(), count);
    plan.counts.push_back(static_cast<std::uint8_t>(count));
    for (std::size_t t = next; t < upto; ++t)
      plan.fill.push_back(target[t]);
  };
  for (auto [i, j]: al.pairs) {
    add_slot(j);
    next = j + 1;
  }
  add_slot(target.size());
  return plan;
}

EditPlan expert_plan(std::span<const TokenId> y,
                     std::span<const TokenId> target) {
  EditPlan plan;
  plan.deletions = expert_deletion(y, target);
  IdSeq kept = apply_deletion(y, std::span<const std::uint8_t>(plan.deletions));
  plan.insertion = expert_insertion_plan(kept, target);
  plan.distance = edit_distance(y, target);
  return plan;
}

template <class T>
std::vector<T> apply_deletion(std::span<const T> y,
                              std::span<const std::uint8_t> labels) {
  if (labels.size() != y.size())
    throw ShapeMismatch("deletion labels: expected " + std::to_string(y.size())
                        + ", got " + std::to_string(labels.size()));
  std::vector<T> out;
  out.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    if (labels[i] == 0)
      out.push_back(y[i]);
  return out;
}

template <class T>
std::vector<T> apply_insertion(std::span<const T> y,
                               std::span<const std::uint8_t> counts,
                               const T &placeholder) {
  if (counts.size() != y.size() + 1)
    throw ShapeMismatch("insertion counts: expected "
                        + std::to_string(y.size() + 1) + " slots, got "
                        + std::to_string(counts.size()));
  std::vector<T> out;
  for (std::size_t slot = 0; slot < counts.size(); ++slot) {
    if (slot > 0)
      out.push_back(y[slot - 1]);
    out.insert(out.end(), counts[slot], placeholder);
  }
  return out;
}

template <class T>
std::vector<T> fill_placeholders(std::span<const T> y,
                                 std::span<const T> tokens,
                                 const T &placeholder) {
  std::vector<T> out(y.begin(), y.end());
  std::size_t k = 0;
  for (T &t: out) {
    if (t != placeholder)
      continue;
    if (k == tokens.size())
      throw ShapeMismatch("fewer fill tokens than placeholders");
    t = tokens[k++];
  }
  if (k != tokens.size())
    throw ShapeMismatch("more fill tokens than placeholders");
  return out;
}

template std::vector<TokenId> apply_deletion(std::span<const TokenId>,
                                             std::span<const std::uint8_t>);
template std::vector<Token> apply_deletion(std::span<const Token>,
                                           std::span<const std::uint8_t>);
template std::vector<TokenId> apply_insertion(std::span<const TokenId>,
                                              std::span<const std::uint8_t>,
                                              const TokenId &);
template std::vector<Token> apply_insertion(std::span<const Token>,
                                            std::span<const std::uint8_t>,
                                            const Token &);
template std::vector<TokenId> fill_placeholders(std::span<const TokenId>,
                                                std::span<const TokenId>,
                                                const TokenId &);
template std::vector<Token> fill_placeholders(std::span<const Token>,
                                              std::span<const Token>,
                                              const Token &);

IdSeq apply_deletion(const IdSeq &y, std::span<const std::uint8_t> labels) {
  return apply_deletion(std::span<const TokenId>(y), labels);
}

IdSeq apply_insertion(const IdSeq &y, std::span<const std::uint8_t> counts) {
  return apply_insertion(std::span<const TokenId>(y), counts,
                         Vocab::kPlaceholder);
}

IdSeq fill_placeholders(const IdSeq &y, std::span<const TokenId> tokens) {
  return fill_placeholders(std::span<const TokenId>(y), tokens,
                           Vocab::kPlaceholder);
}

namespace {
const Token &placeholder_token() {
  static const Token p(Vocab::kSpecialNames[Vocab::kPlaceholder]);
  return p;
}
}  // namespace

TokenSeq apply_deletion(const TokenSeq &y,
                        std::span<const std::uint8_t> labels) {
  return { apply_deletion(std::span<const Token>(y.tokens), labels),
           y.has_bos, y.has_eos };
}

TokenSeq apply_insertion(const TokenSeq &y,
                         std::span<const std::uint8_t> counts) {
  return { apply_insertion(std::span<const Token>(y.tokens), counts,
                           placeholder_token()),
           y.has_bos, y.has_eos };
}

TokenSeq fill_placeholders(const TokenSeq &y, std::span<const Token> tokens) {
  return { fill_placeholders(std::span<const Token>(y.tokens), tokens,
                             placeholder_token()),
           y.has_bos, y.has_eos };
}

IdSeq apply_plan(const IdSeq &y, const EditPlan &plan) {
  IdSeq kept = apply_deletion(y, plan.deletions);
  IdSeq with_slots = apply_insertion(kept, plan.insertion.counts);
  return fill_placeholders(with_slots, plan.insertion.fill);
}

}  // namespace smiedit
