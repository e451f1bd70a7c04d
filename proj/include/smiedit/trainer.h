//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_TRAINER_H_
#define SMIEDIT_TRAINER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "smiedit/fragmenter.h"
#include "smiedit/model.h"
#include "smiedit/objective.h"
#include "smiedit/rng.h"
#include "smiedit/tokenizer.h"

namespace smiedit {

enum class Objective { kEdit, kMlm };

std::string_view objective_name(Objective o) noexcept;

struct TrainConfig {
  Objective objective = Objective::kEdit;
  double drop_ratio = 0.15;
  double mask_ratio = 0.15;
  double peak_lr = 5e-4;
  int warmup = 200;
  int steps = 5000;
  std::size_t batch_tokens = 4096;  // sum of wrapped target lengths
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  double clip_norm = 1.0;
  double teacher_forcing = 0.5;  // probability of the expert token in roll-in
  std::uint64_t seed = 0;
  int eval_interval = 100;
  bool log_seconds = true;  // false leaves the seconds column empty

  // Throws ConfigError. warmup < steps is required once steps > 0.
  void validate() const;

  friend bool operator==(const TrainConfig &, const TrainConfig &) = default;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

/*
 * "key = value" lines, '#' starts a comment. Model keys: layers, hidden,
 * heads, ffn, max_len, dropout. Training keys: objective, drop_ratio,
 * mask_ratio, lr, warmup, steps, batch_tokens, beta1, beta2, adam_eps,
 * weight_decay, clip_norm, teacher_forcing, seed, eval_interval,
 * log_seconds. Throws ConfigError on unknown keys or bad values; the result
 * is not validated against a vocabulary yet.
 */
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config_file(const std::string &path, RunConfig base = {});

// Linear warmup to peak_lr at step `warmup`, then linear decay to 0 at `steps`.
double lr_schedule(int step, const TrainConfig &cfg);

/*
 * Corrupts `smiles` and attaches expert supervision. y2 is left equal to y1
 * with expert fills (a perfect roll-in) until roll_in() replaces it.
 * Throws LexError/ParseError for unparseable input and LengthExceeded when
 * a sequence exceeds `max_len`.
 */
TrainingExample make_expert_example(std::string_view smiles,
                                    const CorruptionConfig &cfg,
                                    const Vocab &v,
                                    std::size_t max_len = SIZE_MAX);

/*
 * Rebuilds y2 for every example: each placeholder takes the expert token
 * with probability `tau`, otherwise the policy's masked argmax on y1. A null
 * policy acts as tau = 1. No gradient flows through the fill.
 */
void roll_in(std::span<TrainingExample> batch, const ModelParams<float> *policy,
             double tau, Rng &rng);

TrainingExample make_training_example(std::string_view smiles,
                                      const CorruptionConfig &cfg,
                                      const Vocab &v,
                                      const ModelParams<float> *policy = nullptr,
                                      double tau = 0.5);

// ceil(ratio * n), at least 1 when n > 0.
std::size_t mlm_mask_count(std::size_t content_tokens, double ratio);

// `wrapped` carries sentinels; masked positions are content positions only.
MlmExample make_mlm_example(const IdSeq &wrapped, double ratio, Rng &rng);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  ModelConfig model;
  TrainConfig train;
  Vocab vocab;
  ModelParams<float> params;
};

// File layout: "SMED", u32 version, u64 header length (little-endian), JSON
// header, then f32 little-endian tensors in manifest order.
void save_checkpoint(const Checkpoint &ckpt, const std::string &path);

// {"model": ..., "train": ...} exactly as stored in the checkpoint header.
std::string configs_to_json(const ModelConfig &model, const TrainConfig &train);
// Throws FormatError or VersionError.
Checkpoint load_checkpoint(const std::string &path);

inline constexpr std::string_view kMetricsHeader =
    "step,lr,loss_total,loss_dualdel,loss_ins,loss_tok,loss_del,acc_tok,"
    "acc_mask,seconds";

// Validation metrics after `step` updates. Fields of the other objective
// are absent.
struct MetricsRow {
  int step = 0;
  double lr = 0;
  double loss_total = 0;
  std::optional<std::array<double, 4>> components;
  std::optional<double> acc_tok;
  std::optional<double> acc_mask;
  std::optional<double> seconds;
};

void write_metrics_csv(std::ostream &os, std::span<const MetricsRow> rows);
// Throws SchemaError on a header mismatch.
std::vector<MetricsRow> read_metrics_csv(std::istream &is);

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;  // last 5% of usable lines, at least 1
  std::size_t skipped = 0;              // unparseable or longer than max_len
};

// Usable lines keep their order; a line needs its sentinels within max_len.
CorpusSplit split_corpus(std::span<const std::string> corpus, std::size_t max_len);

struct PretrainResult {
  Checkpoint final;
  Checkpoint best;  // lowest validation loss_total
  std::vector<MetricsRow> metrics;
  std::size_t train_lines = 0;
  std::size_t validation_lines = 0;
  std::size_t skipped_lines = 0;  // unparseable or too long
};

/*
 * Trains on all but the last 5% of usable corpus lines and validates on the
 * rest at step 0, every eval_interval steps and at the final step. The
 * vocabulary comes from the whole corpus. Progress lines go to `log`.
 */
PretrainResult pretrain(const RunConfig &cfg, std::span<const std::string> corpus,
                        std::ostream *log = nullptr);

// Mean of the content-position hidden states (sentinels excluded).
Eigen::VectorXd pooled_features(const ModelParams<float> &params,
                                const Vocab &v, std::string_view smiles);

struct Probe {
  Eigen::VectorXd weights;
  double bias = 0;
  double train_rmse = 0;
  double validation_rmse = 0;

  double predict(const Eigen::VectorXd &features) const {
    return features.dot(weights) + bias;
  }
};

inline constexpr double kProbeRidge = 1e-3;

/*
 * Least squares on frozen pooled features minimizing
 *   mean((x w + b - y)^2) + kProbeRidge * |w|^2,
 * intercept unpenalized. Throws DegenerateDesign when all training feature
 * vectors are identical.
 */
Probe fit_probe(const std::vector<Eigen::VectorXd> &x, const std::vector<double> &y,
                const std::vector<Eigen::VectorXd> &val_x = {},
                const std::vector<double> &val_y = {});

using LabeledSmiles = std::pair<std::string, double>;

Probe finetune_probe(const Checkpoint &ckpt, std::span<const LabeledSmiles> train,
                     std::span<const LabeledSmiles> validation = {});

}  // namespace smiedit

#endif  // SMIEDIT_TRAINER_H_
