//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_OBJECTIVE_H_
#define SMIEDIT_OBJECTIVE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "smiedit/model.h"

namespace smiedit {

/*
 * One edit-pretraining example. All id sequences carry BOS/EOS; label
 * vectors are indexed by position in their sequence and are 0 at sentinels.
 *
 *   y0          corrupted input
 *   y0_kept     y0 after expert deletion
 *   insertions  placeholder count for slots BOS..last content token of y0_kept
 *   y1          y0_kept with the placeholders inserted
 *   fill        expert tokens for the placeholders of y1, in order
 *   y2          y1 with placeholders filled by the roll-in policy
 */
struct TrainingExample {
  IdSeq target;
  IdSeq y0;
  std::vector<std::uint8_t> y0_deletions;
  IdSeq y0_kept;
  std::vector<std::uint8_t> insertions;
  IdSeq y1;
  IdSeq fill;
  IdSeq y2;
  std::vector<std::uint8_t> y2_deletions;
};

struct MlmExample {
  IdSeq input;                         // with [MASK] at masked positions
  std::vector<std::size_t> positions;  // masked positions, ascending
  IdSeq labels;                        // original ids at those positions
};

enum LossComponent { kDualDel = 0, kIns = 1, kTok = 2, kDel = 3 };
inline constexpr std::array<std::string_view, 4> kLossNames = {
  "dualdel", "ins", "tok", "del"
};

/*
 * Summed negative log-likelihoods and position counts. Each component's
 * loss is its own mean over positions; the total is the sum of the four
 * means. Sums and counts add across batches.
 */
struct LossBreakdown {
  std::array<double, 4> sum{};
  std::array<std::size_t, 4> count{};
  std::size_t tok_correct = 0;

  double mean(int component) const;
  double total() const;
  double tok_accuracy() const;
  LossBreakdown &operator+=(const LossBreakdown &other);
};

struct MlmLoss {
  double sum = 0;
  std::size_t count = 0;
  std::size_t correct = 0;

  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double accuracy() const {
    return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0;
  }
  MlmLoss &operator+=(const MlmLoss &other);
};

/*
 * Loss of a batch; when `grads` is set, accumulates the gradient of
 * sum_k weights[k] * mean_k. Positions:
 *   dualdel  content positions of y0
 *   ins      slot positions of y0_kept
 *   tok      placeholder positions of y1
 *   del      content positions of y2
 * Throws NaNGuard when a component is not finite.
 */
template <class T>
LossBreakdown edit_loss(const ModelParams<T> &params,
                        std::span<const TrainingExample> batch,
                        ModelParams<T> *grads = nullptr,
                        std::array<double, 4> weights = { 1, 1, 1, 1 },
                        Rng *dropout = nullptr);

template <class T>
MlmLoss mlm_loss(const ModelParams<T> &params, std::span<const MlmExample> batch,
                 ModelParams<T> *grads = nullptr, Rng *dropout = nullptr);

}  // namespace smiedit

#endif  // SMIEDIT_OBJECTIVE_H_
