//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "smiedit/edit_expert.h"
#include "smiedit/errors.h"

namespace smiedit {
namespace {

constexpr double kNormEps = 1e-5;

template <class T>
using Column = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
struct NormCache {
  Matrix<T> xhat;
  Column<T> rstd;
};

template <class T>
Matrix<T> layer_norm(const Matrix<T> &x, const Matrix<T> &gain,
                     const Matrix<T> &bias, NormCache<T> &cache) {
  const Eigen::Index n = x.rows();
  cache.xhat.resize(n, x.cols());
  cache.rstd.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const T mu = x.row(r).mean();
    auto centered = x.row(r).array() - mu;
    const T var = centered.square().mean();
    const T rstd = T(1) / std::sqrt(var + T(kNormEps));
    cache.rstd(r) = rstd;
    cache.xhat.row(r) = centered * rstd;
  }
  Matrix<T> y = cache.xhat.array().rowwise() * gain.row(0).array();
  y.array().rowwise() += bias.row(0).array();
  return y;
}

template <class T>
Matrix<T> layer_norm_backward(const Matrix<T> &dy, const Matrix<T> &gain,
                              const NormCache<T> &cache, Matrix<T> &d_gain,
                              Matrix<T> &d_bias) {
  d_gain.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  d_bias.row(0) += dy.colwise().sum();
  Matrix<T> dxhat = dy.array().rowwise() * gain.row(0).array();
  Matrix<T> dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const T m1 = dxhat.row(r).mean();
    const T m2 = (dxhat.row(r).array() * cache.xhat.row(r).array()).mean();
    dx.row(r) = cache.rstd(r)
                * (dxhat.row(r).array() - m1 - cache.xhat.row(r).array() * m2);
  }
  return dx;
}

template <class T>
T gelu(T x) {
  return T(0.5) * x * (T(1) + std::erf(x * T(M_SQRT1_2)));
}

template <class T>
T gelu_grad(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x * T(M_SQRT1_2)));
  const T pdf = std::exp(T(-0.5) * x * x) * T(0.3989422804014327);
  return cdf + x * pdf;
}

// Inverted dropout mask: entries are 0 or 1 / (1 - rate).
template <class T>
Matrix<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                       Rng &rng) {
  Matrix<T> mask(rows, cols);
  const T keep = T(1.0 / (1.0 - rate));
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    mask.data()[i] = rng.bernoulli(rate) ? T(0) : keep;
  return mask;
}

template <class T>
void softmax_rows(Matrix<T> &m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const T mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp().matrix();
    m.row(r) /= m.row(r).sum();
  }
}

template <class T>
Matrix<T> random_matrix(Eigen::Index rows, Eigen::Index cols, Rng &rng) {
  Matrix<T> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<T>(0.02 * rng.normal());
  return m;
}

}  // namespace

void ModelConfig::validate() const {
  if (layers < 0 || hidden <= 0 || heads <= 0 || ffn <= 0 || max_len < 2)
    throw ConfigError("model dimensions must be positive");
  if (hidden % heads != 0)
    throw ConfigError("hidden size " + std::to_string(hidden)
                      + " is not divisible by " + std::to_string(heads)
                      + " heads");
  if (vocab_size <= Vocab::kNumSpecials)
    throw ConfigError("vocabulary has no content tokens");
  if (!(dropout >= 0.0 && dropout < 1.0))
    throw ConfigError("dropout must lie in [0, 1)");
}

template <class T>
ModelParams<T> ModelParams<T>::zeros(const ModelConfig &config) {
  config.validate();
  const int h = config.hidden, f = config.ffn;
  ModelParams p;
  p.config = config;
  p.token_embedding = Matrix<T>::Zero(config.vocab_size, h);
  p.position_embedding = Matrix<T>::Zero(config.max_len, h);
  p.layers.resize(config.layers);
  for (LayerParams<T> &l: p.layers) {
    for (Matrix<T> *v: { &l.ln1_gain, &l.ln1_bias, &l.bq, &l.bk, &l.bv, &l.bo,
                         &l.ln2_gain, &l.ln2_bias, &l.b2 })
      *v = Matrix<T>::Zero(1, h);
    for (Matrix<T> *w: { &l.wq, &l.wk, &l.wv, &l.wo })
      *w = Matrix<T>::Zero(h, h);
    l.w1 = Matrix<T>::Zero(h, f);
    l.b1 = Matrix<T>::Zero(1, f);
    l.w2 = Matrix<T>::Zero(f, h);
  }
  p.final_gain = Matrix<T>::Zero(1, h);
  p.final_bias = Matrix<T>::Zero(1, h);
  p.deletion_head = Matrix<T>::Zero(h, 2);
  p.insertion_head = Matrix<T>::Zero(h, ModelConfig::kInsertionClasses);
  p.token_head = Matrix<T>::Zero(h, config.vocab_size);
  return p;
}

template <class T>
ModelParams<T> ModelParams<T>::initialize(const ModelConfig &config) {
  ModelParams p = zeros(config);
  Rng rng(derive_seed(config.seed, { 0x1417 }));
  auto fill = [&rng](Matrix<T> &m) {
    m = random_matrix<T>(m.rows(), m.cols(), rng);
  };
  fill(p.token_embedding);
  fill(p.position_embedding);
  for (LayerParams<T> &l: p.layers) {
    l.ln1_gain.setOnes();
    l.ln2_gain.setOnes();
    for (Matrix<T> *w: { &l.wq, &l.wk, &l.wv, &l.wo, &l.w1, &l.w2 })
      fill(*w);
  }
  p.final_gain.setOnes();
  fill(p.deletion_head);
  fill(p.insertion_head);
  fill(p.token_head);
  return p;
}

template <class T>
std::vector<Matrix<T> *> ModelParams<T>::tensors() {
  std::vector<Matrix<T> *> out = { &token_embedding, &position_embedding };
  for (LayerParams<T> &l: layers) {
    out.insert(out.end(), { &l.ln1_gain, &l.ln1_bias, &l.wq, &l.bq, &l.wk,
                            &l.bk, &l.wv, &l.bv, &l.wo, &l.bo, &l.ln2_gain,
                            &l.ln2_bias, &l.w1, &l.b1, &l.w2, &l.b2 });
  }
  out.insert(out.end(), { &final_gain, &final_bias, &deletion_head,
                          &insertion_head, &token_head });
  return out;
}

template <class T>
std::vector<const Matrix<T> *> ModelParams<T>::tensors() const {
  auto mut = const_cast<ModelParams *>(this)->tensors();
  return { mut.begin(), mut.end() };
}

template <class T>
std::vector<std::string> ModelParams<T>::tensor_names() const {
  std::vector<std::string> out = { "token_embedding", "position_embedding" };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    for (const char *n: { "ln1_gain", "ln1_bias", "wq", "bq", "wk", "bk", "wv",
                          "bv", "wo", "bo", "ln2_gain", "ln2_bias", "w1", "b1",
                          "w2", "b2" })
      out.push_back(p + n);
  }
  for (const char *n: { "final_gain", "final_bias", "deletion_head",
                        "insertion_head", "token_head" })
    out.emplace_back(n);
  return out;
}

template <class T>
std::size_t ModelParams<T>::num_parameters() const {
  std::size_t n = 0;
  for (const Matrix<T> *m: tensors())
    n += static_cast<std::size_t>(m->size());
  return n;
}

template <class T>
template <class U>
ModelParams<U> ModelParams<T>::cast() const {
  ModelParams<U> out = ModelParams<U>::zeros(config);
  auto src = tensors();
  auto dst = out.tensors();
  for (std::size_t i = 0; i < src.size(); ++i)
    *dst[i] = src[i]->template cast<U>();
  return out;
}

template <class T>
void ModelParams<T>::set_zero() {
  for (Matrix<T> *m: tensors())
    m->setZero();
}

template <class T>
struct Encoder<T>::Cache {
  struct Layer {
    Matrix<T> input;
    NormCache<T> ln1;
    Matrix<T> h, q, k, v, ctx;
    std::vector<Matrix<T>> probs;  // per (sequence, head)
    Matrix<T> attn_mask;
    NormCache<T> ln2;
    Matrix<T> h2, u, g;
    Matrix<T> ffn_mask;
  };

  std::vector<TokenId> ids;
  std::vector<int> positions;
  Matrix<T> embed_mask;
  std::vector<Layer> layers;
  NormCache<T> final_norm;
  Matrix<T> out;
};

template <class T>
Encoder<T>::Encoder(const ModelParams<T> &params)
    : params_(params), cache_(std::make_unique<Cache>()) { }

template <class T>
Encoder<T>::~Encoder() = default;

template <class T>
const Matrix<T> &Encoder<T>::forward(std::span<const IdSeq> seqs, Rng *dropout) {
  const ModelConfig &cfg = params_.config;
  Cache &c = *cache_;
  offsets_.assign(1, 0);
  c.ids.clear();
  c.positions.clear();
  for (const IdSeq &s: seqs) {
    if (s.size() > static_cast<std::size_t>(cfg.max_len))
      throw LengthExceeded(s.size(), cfg.max_len);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 0 || s[i] >= cfg.vocab_size)
        throw ShapeMismatch("token id " + std::to_string(s[i])
                            + " outside the vocabulary");
      c.ids.push_back(s[i]);
      c.positions.push_back(static_cast<int>(i));
    }
    offsets_.push_back(c.ids.size());
  }
  const Eigen::Index n = static_cast<Eigen::Index>(c.ids.size());
  const int hidden = cfg.hidden;
  const int dh = hidden / cfg.heads;
  const T scale = T(1) / std::sqrt(T(dh));
  const bool drop = dropout != nullptr && cfg.dropout > 0.0;

  Matrix<T> x(n, hidden);
  for (Eigen::Index r = 0; r < n; ++r)
    x.row(r) = params_.token_embedding.row(c.ids[r])
               + params_.position_embedding.row(c.positions[r]);
  if (drop) {
    c.embed_mask = dropout_mask<T>(n, hidden, cfg.dropout, *dropout);
    x.array() *= c.embed_mask.array();
  }

  c.layers.resize(params_.layers.size());
  for (std::size_t li = 0; li < params_.layers.size(); ++li) {
    const LayerParams<T> &p = params_.layers[li];
    typename Cache::Layer &lc = c.layers[li];
    lc.input = x;
    lc.h = layer_norm(x, p.ln1_gain, p.ln1_bias, lc.ln1);
    lc.q = lc.h * p.wq;
    lc.q.array().rowwise() += p.bq.row(0).array();
    lc.k = lc.h * p.wk;
    lc.k.array().rowwise() += p.bk.row(0).array();
    lc.v = lc.h * p.wv;
    lc.v.array().rowwise() += p.bv.row(0).array();
    lc.ctx.resize(n, hidden);
    lc.probs.resize((offsets_.size() - 1) * cfg.heads);
    for (std::size_t s = 0; s + 1 < offsets_.size(); ++s) {
      const Eigen::Index o = static_cast<Eigen::Index>(offsets_[s]);
      const Eigen::Index len = static_cast<Eigen::Index>(offsets_[s + 1]) - o;
      for (int a = 0; a < cfg.heads; ++a) {
        Matrix<T> &prob = lc.probs[s * cfg.heads + a];
        prob.noalias() = lc.q.block(o, a * dh, len, dh)
                         * lc.k.block(o, a * dh, len, dh).transpose();
        prob *= scale;
        softmax_rows(prob);
        lc.ctx.block(o, a * dh, len, dh).noalias() =
            prob * lc.v.block(o, a * dh, len, dh);
      }
    }
    Matrix<T> attn = lc.ctx * p.wo;
    attn.array().rowwise() += p.bo.row(0).array();
    if (drop) {
      lc.attn_mask = dropout_mask<T>(n, hidden, cfg.dropout, *dropout);
      attn.array() *= lc.attn_mask.array();
    }
    x += attn;

    lc.h2 = layer_norm(x, p.ln2_gain, p.ln2_bias, lc.ln2);
    lc.u = lc.h2 * p.w1;
    lc.u.array().rowwise() += p.b1.row(0).array();
    lc.g = lc.u.unaryExpr([](T v) { return gelu(v); });
    Matrix<T> f = lc.g * p.w2;
    f.array().rowwise() += p.b2.row(0).array();
    if (drop) {
      lc.ffn_mask = dropout_mask<T>(n, hidden, cfg.dropout, *dropout);
      f.array() *= lc.ffn_mask.array();
    }
    x += f;
  }
  c.out = layer_norm(x, params_.final_gain, params_.final_bias, c.final_norm);
  if (!drop) {
    c.embed_mask.resize(0, 0);
    for (auto &lc: c.layers) {
      lc.attn_mask.resize(0, 0);
      lc.ffn_mask.resize(0, 0);
    }
  }
  return c.out;
}

template <class T>
void Encoder<T>::backward(const Matrix<T> &d_states, ModelParams<T> &grads) {
  const ModelConfig &cfg = params_.config;
  Cache &c = *cache_;
  const int dh = cfg.hidden / cfg.heads;
  const T scale = T(1) / std::sqrt(T(dh));

  Matrix<T> dx = layer_norm_backward(d_states, params_.final_gain, c.final_norm,
                                     grads.final_gain, grads.final_bias);
  for (std::size_t li = params_.layers.size(); li-- > 0;) {
    const LayerParams<T> &p = params_.layers[li];
    LayerParams<T> &g = grads.layers[li];
    const typename Cache::Layer &lc = c.layers[li];

    Matrix<T> df = dx;
    if (lc.ffn_mask.size())
      df.array() *= lc.ffn_mask.array();
    g.w2.noalias() += lc.g.transpose() * df;
    g.b2.row(0) += df.colwise().sum();
    Matrix<T> du = df * p.w2.transpose();
    du.array() *= lc.u.unaryExpr([](T v) { return gelu_grad(v); }).array();
    g.w1.noalias() += lc.h2.transpose() * du;
    g.b1.row(0) += du.colwise().sum();
    Matrix<T> dh2 = du * p.w1.transpose();
    dx += layer_norm_backward(dh2, p.ln2_gain, lc.ln2, g.ln2_gain, g.ln2_bias);

    Matrix<T> dattn = dx;
    if (lc.attn_mask.size())
      dattn.array() *= lc.attn_mask.array();
    g.wo.noalias() += lc.ctx.transpose() * dattn;
    g.bo.row(0) += dattn.colwise().sum();
    Matrix<T> dctx = dattn * p.wo.transpose();

    Matrix<T> dq(dctx.rows(), dctx.cols()), dk(dq.rows(), dq.cols()),
        dv(dq.rows(), dq.cols());
    for (std::size_t s = 0; s + 1 < offsets_.size(); ++s) {
      const Eigen::Index o = static_cast<Eigen::Index>(offsets_[s]);
      const Eigen::Index len = static_cast<Eigen::Index>(offsets_[s + 1]) - o;
      for (int a = 0; a < cfg.heads; ++a) {
        const Matrix<T> &prob = lc.probs[s * cfg.heads + a];
        auto dc = dctx.block(o, a * dh, len, dh);
        Matrix<T> dprob = dc * lc.v.block(o, a * dh, len, dh).transpose();
        dv.block(o, a * dh, len, dh).noalias() = prob.transpose() * dc;
        // Softmax backward, then the 1/sqrt(d) scale.
        Column<T> dot = (dprob.array() * prob.array()).rowwise().sum();
        Matrix<T> ds = prob.array() * (dprob.colwise() - dot).array();
        ds *= scale;
        dq.block(o, a * dh, len, dh).noalias() =
            ds * lc.k.block(o, a * dh, len, dh);
        dk.block(o, a * dh, len, dh).noalias() =
            ds.transpose() * lc.q.block(o, a * dh, len, dh);
      }
    }
    g.wq.noalias() += lc.h.transpose() * dq;
    g.bq.row(0) += dq.colwise().sum();
    g.wk.noalias() += lc.h.transpose() * dk;
    g.bk.row(0) += dk.colwise().sum();
    g.wv.noalias() += lc.h.transpose() * dv;
    g.bv.row(0) += dv.colwise().sum();
    Matrix<T> dh = dq * p.wq.transpose();
    dh.noalias() += dk * p.wk.transpose();
    dh.noalias() += dv * p.wv.transpose();
    dx += layer_norm_backward(dh, p.ln1_gain, lc.ln1, g.ln1_gain, g.ln1_bias);
  }
  if (c.embed_mask.size())
    dx.array() *= c.embed_mask.array();
  for (Eigen::Index r = 0; r < dx.rows(); ++r) {
    grads.token_embedding.row(c.ids[r]) += dx.row(r);
    grads.position_embedding.row(c.positions[r]) += dx.row(r);
  }
}

template <class T>
Matrix<T> encode_sequence(const ModelParams<T> &params, const IdSeq &ids) {
  Encoder<T> enc(params);
  return enc.forward(std::span<const IdSeq>(&ids, 1));
}

template <class T>
Matrix<T> predict_deletion(const ModelParams<T> &params, const Matrix<T> &states) {
  Matrix<T> out = states * params.deletion_head;
  softmax_rows(out);
  return out;
}

template <class T>
Matrix<T> predict_insertion(const ModelParams<T> &params,
                            const Matrix<T> &states) {
  Matrix<T> out = states * params.insertion_head;
  softmax_rows(out);
  return out;
}

bool fillable(TokenId id) noexcept {
  return id != Vocab::kPad && id != Vocab::kBos && id != Vocab::kEos
         && id != Vocab::kPlaceholder;
}

template <class T>
Matrix<T> predict_tokens(const ModelParams<T> &params, const Matrix<T> &states,
                         bool mask_control) {
  Matrix<T> out = states * params.token_head;
  if (mask_control) {
    for (TokenId id = 0; id < out.cols(); ++id)
      if (!fillable(id))
        out.col(id).setConstant(-std::numeric_limits<T>::infinity());
  }
  softmax_rows(out);
  return out;
}

DecodeResult decode_iterative(const ModelParams<float> &params, const IdSeq &ids,
                              int max_iters) {
  const std::size_t max_len = static_cast<std::size_t>(params.config.max_len);
  DecodeResult result;
  result.ids = ids;
  IdSeq &y = result.ids;
  for (int it = 1; it <= max_iters; ++it) {
    const IdSeq before = y;
    result.iterations = it;

    Matrix<float> states = encode_sequence(params, y);
    Matrix<float> del = predict_deletion(params, states);
    std::vector<std::uint8_t> labels(y.size(), 0);
    bool any_deleted = false;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == Vocab::kBos || y[i] == Vocab::kEos)
        continue;
      labels[i] = del(static_cast<Eigen::Index>(i), 1) > 0.5f;
      any_deleted |= labels[i] != 0;
    }
    if (any_deleted) {
      y = apply_deletion(y, labels);
      states = encode_sequence(params, y);
    }

    // Slot i follows token i; there is none after the last token.
    Matrix<float> ins = predict_insertion(params, states);
    std::vector<std::uint8_t> counts(y.size() + 1, 0);
    std::size_t budget = max_len > y.size() ? max_len - y.size() : 0;
    bool any_inserted = false;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
      Eigen::Index best;
      ins.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
      const std::size_t c = std::min(static_cast<std::size_t>(best), budget);
      counts[i + 1] = static_cast<std::uint8_t>(c);
      budget -= c;
      any_inserted |= c > 0;
    }
    if (any_inserted) {
      y = apply_insertion(y, counts);
      Matrix<float> tok = predict_tokens(params, encode_sequence(params, y));
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != Vocab::kPlaceholder)
          continue;
        Eigen::Index best;
        tok.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
        y[i] = static_cast<TokenId>(best);
      }
    }
    if (y == before) {
      result.converged = true;
      break;
    }
  }
  return result;
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<double> ModelParams<float>::cast<double>() const;
template ModelParams<float> ModelParams<double>::cast<float>() const;
template ModelParams<float> ModelParams<float>::cast<float>() const;
template ModelParams<double> ModelParams<double>::cast<double>() const;
template class Encoder<float>;
template class Encoder<double>;

#define SMIEDIT_INSTANTIATE(T)                                                 \
  template Matrix<T> encode_sequence(const ModelParams<T> &, const IdSeq &);   \
  template Matrix<T> predict_deletion(const ModelParams<T> &, const Matrix<T> &); \
  template Matrix<T> predict_insertion(const ModelParams<T> &,                 \
                                       const Matrix<T> &);                     \
  template Matrix<T> predict_tokens(const ModelParams<T> &, const Matrix<T> &, \
                                    bool);
SMIEDIT_INSTANTIATE(float)
SMIEDIT_INSTANTIATE(double)
#undef SMIEDIT_INSTANTIATE

}  // namespace smiedit
