//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/objective.h"

#include <cmath>
#include <string>

#include "smiedit/errors.h"

namespace smiedit {
namespace {

// Rows of the packed states scored by one head, with their labels.
struct Selection {
  std::vector<Eigen::Index> rows;
  std::vector<int> labels;
};

struct HeadResult {
  double nll = 0;
  std::size_t correct = 0;
};

/*
 * Cross-entropy of softmax(states[rows] * head) against labels. With
 * `d_states`, adds weight / |rows| times the gradient of the summed NLL to
 * d_head and d_states. `mask_control` restricts the accuracy argmax to
 * fillable tokens; the loss always uses the full softmax.
 */
template <class T>
HeadResult score_head(const Matrix<T> &states, const Matrix<T> &head,
                      const Selection &sel, bool mask_control, double weight,
                      Matrix<T> *d_head, Matrix<T> *d_states) {
  HeadResult res;
  const Eigen::Index n = static_cast<Eigen::Index>(sel.rows.size());
  if (n == 0)
    return res;
  Matrix<T> x(n, states.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    x.row(i) = states.row(sel.rows[i]);
  Matrix<T> logits = x * head;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = logits.row(i);
    const int label = sel.labels[i];
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < row.cols(); ++j) {
      if (mask_control && !fillable(static_cast<TokenId>(j)))
        continue;
      if (best < 0 || row(j) > row(best))
        best = j;
    }
    res.correct += best == label;
    const T mx = row.maxCoeff();
    const T shifted = row(label) - mx;
    row = (row.array() - mx).exp().matrix();
    const T z = row.sum();
    res.nll += static_cast<double>(std::log(z) - shifted);
    row /= z;
  }
  if (d_states) {
    // logits now holds probabilities.
    Matrix<T> &d_logits = logits;
    for (Eigen::Index i = 0; i < n; ++i)
      d_logits(i, sel.labels[i]) -= T(1);
    d_logits *= static_cast<T>(weight / static_cast<double>(n));
    d_head->noalias() += x.transpose() * d_logits;
    Matrix<T> dx = d_logits * head.transpose();
    for (Eigen::Index i = 0; i < n; ++i)
      d_states->row(sel.rows[i]) += dx.row(i);
  }
  return res;
}

void check_finite(double v, std::string_view what) {
  if (!std::isfinite(v))
    throw NaNGuard(std::string(what) + " loss is not finite");
}

// Content positions: everything except sentinels.
bool content(TokenId id) {
  return id != Vocab::kBos && id != Vocab::kEos;
}

}  // namespace

double LossBreakdown::mean(int component) const {
  return count[component]
             ? sum[component] / static_cast<double>(count[component])
             : 0.0;
}

double LossBreakdown::total() const {
  return mean(kDualDel) + mean(kIns) + mean(kTok) + mean(kDel);
}

double LossBreakdown::tok_accuracy() const {
  return count[kTok] ? static_cast<double>(tok_correct)
                           / static_cast<double>(count[kTok])
                     : 0.0;
}

LossBreakdown &LossBreakdown::operator+=(const LossBreakdown &other) {
  for (int k = 0; k < 4; ++k) {
    sum[k] += other.sum[k];
    count[k] += other.count[k];
  }
  tok_correct += other.tok_correct;
  return *this;
}

MlmLoss &MlmLoss::operator+=(const MlmLoss &other) {
  sum += other.sum;
  count += other.count;
  correct += other.correct;
  return *this;
}

template <class T>
LossBreakdown edit_loss(const ModelParams<T> &params,
                        std::span<const TrainingExample> batch,
                        ModelParams<T> *grads, std::array<double, 4> weights,
                        Rng *dropout) {
  std::vector<IdSeq> seqs;
  seqs.reserve(batch.size() * 4);
  for (const TrainingExample &ex: batch) {
    if (ex.y0_deletions.size() != ex.y0.size()
        || ex.insertions.size() + 1 != ex.y0_kept.size()
        || ex.y2_deletions.size() != ex.y2.size()
        || ex.y1.size() != ex.y2.size())
      throw ShapeMismatch("training example labels do not match sequences");
    seqs.push_back(ex.y0);
    seqs.push_back(ex.y0_kept);
    seqs.push_back(ex.y1);
    seqs.push_back(ex.y2);
  }
  Encoder<T> enc(params);
  const Matrix<T> &states = enc.forward(seqs, dropout);
  const auto &off = enc.offsets();

  std::array<Selection, 4> sel;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    const TrainingExample &ex = batch[e];
    auto base = [&](int k) {
      return static_cast<Eigen::Index>(off[4 * e + k]);
    };
    for (std::size_t i = 0; i < ex.y0.size(); ++i) {
      if (!content(ex.y0[i]))
        continue;
      sel[kDualDel].rows.push_back(base(0) + i);
      sel[kDualDel].labels.push_back(ex.y0_deletions[i]);
    }
    for (std::size_t i = 0; i < ex.insertions.size(); ++i) {
      sel[kIns].rows.push_back(base(1) + i);
      sel[kIns].labels.push_back(ex.insertions[i]);
    }
    std::size_t k = 0;
    for (std::size_t i = 0; i < ex.y1.size(); ++i) {
      if (ex.y1[i] != Vocab::kPlaceholder)
        continue;
      if (k == ex.fill.size())
        throw ShapeMismatch("fewer fill tokens than placeholders");
      sel[kTok].rows.push_back(base(2) + i);
      sel[kTok].labels.push_back(ex.fill[k++]);
    }
    if (k != ex.fill.size())
      throw ShapeMismatch("more fill tokens than placeholders");
    for (std::size_t i = 0; i < ex.y2.size(); ++i) {
      if (!content(ex.y2[i]))
        continue;
      sel[kDel].rows.push_back(base(3) + i);
      sel[kDel].labels.push_back(ex.y2_deletions[i]);
    }
  }

  Matrix<T> d_states;
  if (grads)
    d_states = Matrix<T>::Zero(states.rows(), states.cols());
  Matrix<T> *ds = grads ? &d_states : nullptr;
  LossBreakdown out;
  const std::array<const Matrix<T> *, 4> heads = {
    &params.deletion_head, &params.insertion_head, &params.token_head,
    &params.deletion_head
  };
  std::array<Matrix<T> *, 4> d_heads = { nullptr, nullptr, nullptr, nullptr };
  if (grads)
    d_heads = { &grads->deletion_head, &grads->insertion_head,
                &grads->token_head, &grads->deletion_head };
  for (int c = 0; c < 4; ++c) {
    const bool want = grads && weights[c] != 0.0;
    HeadResult r = score_head(states, *heads[c], sel[c], c == kTok,
                              weights[c], want ? d_heads[c] : nullptr,
                              want ? ds : nullptr);
    out.sum[c] = r.nll;
    out.count[c] = sel[c].rows.size();
    if (c == kTok)
      out.tok_correct = r.correct;
    check_finite(out.mean(c), kLossNames[c]);
  }
  if (grads)
    enc.backward(d_states, *grads);
  return out;
}

template <class T>
MlmLoss mlm_loss(const ModelParams<T> &params, std::span<const MlmExample> batch,
                 ModelParams<T> *grads, Rng *dropout) {
  std::vector<IdSeq> seqs;
  seqs.reserve(batch.size());
  for (const MlmExample &ex: batch) {
    if (ex.positions.size() != ex.labels.size())
      throw ShapeMismatch("masked positions and labels differ in length");
    seqs.push_back(ex.input);
  }
  Encoder<T> enc(params);
  const Matrix<T> &states = enc.forward(seqs, dropout);
  Selection sel;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    for (std::size_t k = 0; k < batch[e].positions.size(); ++k) {
      sel.rows.push_back(static_cast<Eigen::Index>(enc.offsets()[e]
                                                   + batch[e].positions[k]));
      sel.labels.push_back(batch[e].labels[k]);
    }
  }
  Matrix<T> d_states;
  if (grads)
    d_states = Matrix<T>::Zero(states.rows(), states.cols());
  HeadResult r =
      score_head(states, params.token_head, sel, true, 1.0,
                 grads ? &grads->token_head : nullptr, grads ? &d_states : nullptr);
  MlmLoss out{ r.nll, sel.rows.size(), r.correct };
  check_finite(out.mean(), "mlm");
  if (grads)
    enc.backward(d_states, *grads);
  return out;
}

template LossBreakdown edit_loss(const ModelParams<float> &,
                                 std::span<const TrainingExample>,
                                 ModelParams<float> *, std::array<double, 4>,
                                 Rng *);
template LossBreakdown edit_loss(const ModelParams<double> &,
                                 std::span<const TrainingExample>,
                                 ModelParams<double> *, std::array<double, 4>,
                                 Rng *);
template MlmLoss mlm_loss(const ModelParams<float> &, std::span<const MlmExample>,
                          ModelParams<float> *, Rng *);
template MlmLoss mlm_loss(const ModelParams<double> &,
                          std::span<const MlmExample>, ModelParams<double> *,
                          Rng *);

}  // namespace smiedit
