//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_MODEL_H_
#define SMIEDIT_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "smiedit/rng.h"
#include "smiedit/tokenizer.h"

namespace smiedit {

// Row-major so that one row is one token position.
template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelConfig {
  static constexpr int kInsertionClasses = 256;

  int layers = 2;
  int hidden = 64;
  int heads = 4;
  int ffn = 128;
  int max_len = 128;
  int vocab_size = 0;
  double dropout = 0.1;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

template <class T>
struct LayerParams {
  Matrix<T> ln1_gain, ln1_bias;
  Matrix<T> wq, bq, wk, bk, wv, bv, wo, bo;
  Matrix<T> ln2_gain, ln2_bias;
  Matrix<T> w1, b1, w2, b2;
};

/*
 * Pre-norm transformer encoder with learned positions and three bias-free
 * heads. Vectors are stored as 1-row matrices so every tensor has the same
 * type.
 */
template <class T>
struct ModelParams {
  ModelConfig config;
  Matrix<T> token_embedding;     // vocab x H
  Matrix<T> position_embedding;  // max_len x H
  std::vector<LayerParams<T>> layers;
  Matrix<T> final_gain, final_bias;
  Matrix<T> deletion_head;   // H x 2
  Matrix<T> insertion_head;  // H x 256
  Matrix<T> token_head;      // H x vocab

  // Correct shapes, all entries zero.
  static ModelParams zeros(const ModelConfig &config);
  // Weights N(0, 0.02^2) drawn from config.seed; gains 1, biases 0.
  static ModelParams initialize(const ModelConfig &config);

  // Every tensor in a fixed order, paired with tensor_names().
  std::vector<Matrix<T> *> tensors();
  std::vector<const Matrix<T> *> tensors() const;
  std::vector<std::string> tensor_names() const;
  std::size_t num_parameters() const;

  template <class U>
  ModelParams<U> cast() const;

  void set_zero();
};

/*
 * Runs the encoder on a packed batch: sequences are concatenated row-wise
 * and attention is restricted to each sequence's own rows, so no padding
 * exists. Keeps the activations of the last forward() for backward().
 */
template <class T>
class Encoder {
public:
  explicit Encoder(const ModelParams<T> &params);
  ~Encoder();
  Encoder(const Encoder &) = delete;
  Encoder &operator=(const Encoder &) = delete;

  // Throws LengthExceeded. Dropout is applied only when `dropout` is set.
  const Matrix<T> &forward(std::span<const IdSeq> seqs, Rng *dropout = nullptr);

  // Accumulates parameter gradients for d(loss)/d(states) into `grads`.
  void backward(const Matrix<T> &d_states, ModelParams<T> &grads);

  // Row offset of each sequence in the packed output, plus the total.
  const std::vector<std::size_t> &offsets() const noexcept { return offsets_; }

private:
  struct Cache;

  const ModelParams<T> &params_;
  std::vector<std::size_t> offsets_;
  std::unique_ptr<Cache> cache_;
};

// Hidden states of a single sequence, dropout disabled.
template <class T>
Matrix<T> encode_sequence(const ModelParams<T> &params, const IdSeq &ids);

// Row-wise softmax of states * head.
template <class T>
Matrix<T> predict_deletion(const ModelParams<T> &params, const Matrix<T> &states);
template <class T>
Matrix<T> predict_insertion(const ModelParams<T> &params, const Matrix<T> &states);

// With `mask_control`, [P], [PAD], [BOS] and [EOS] get zero probability.
template <class T>
Matrix<T> predict_tokens(const ModelParams<T> &params, const Matrix<T> &states,
                         bool mask_control = true);

// Token ids that may fill a placeholder.
bool fillable(TokenId id) noexcept;

struct DecodeResult {
  IdSeq ids;
  int iterations = 0;
  bool converged = false;
};

/*
 * Iterates delete -> insert placeholders -> fill on a sentinel-wrapped
 * sequence until an iteration leaves it unchanged or max_iters is reached.
 * Insertion counts are clamped left to right so the length never exceeds
 * max_len.
 */
DecodeResult decode_iterative(const ModelParams<float> &params, const IdSeq &ids,
                              int max_iters = 10);

}  // namespace smiedit

#endif  // SMIEDIT_MODEL_H_
