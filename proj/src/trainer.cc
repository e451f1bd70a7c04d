//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/trainer.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include "json.hpp"

#include "smiedit/edit_expert.h"
#include "smiedit/errors.h"
#include "smiedit/smiles.h"

namespace smiedit {
namespace {

using json = nlohmann::json;

// Keys mixed into derive_seed so that independent streams never collide.
constexpr std::uint64_t kRollInKey = 0x5201;
constexpr std::uint64_t kShuffleKey = 0x5202;
constexpr std::uint64_t kDropoutKey = 0x5203;
constexpr std::uint64_t kValidationKey = 0x5204;
constexpr std::uint64_t kCorruptKey = 0x5205;
constexpr std::uint64_t kMaskKey = 0x5206;

std::string trim(std::string_view s) {
  const auto *ws = " \t\r\n";
  const std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  const std::size_t e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string &key, const std::string &value) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(value, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != value.size() || !std::isfinite(d))
    throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  return d;
}

template <class Int>
Int parse_int(const std::string &key, const std::string &value) {
  Int v{};
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("'" + key + "' expects an integer, got '" + value + "'");
  return v;
}

bool parse_bool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1")
    return true;
  if (value == "false" || value == "0")
    return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + value + "'");
}

IdSeq strip(const IdSeq &s) {
  return IdSeq(s.begin() + 1, s.end() - 1);
}

void append_f32(std::string &out, float f) {
  const std::uint32_t u = std::bit_cast<std::uint32_t>(f);
  for (int k = 0; k < 4; ++k)
    out.push_back(static_cast<char>((u >> (8 * k)) & 0xff));
}

float read_f32(const unsigned char *p) {
  std::uint32_t u = 0;
  for (int k = 0; k < 4; ++k)
    u |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  return std::bit_cast<float>(u);
}

template <class Int>
void append_le(std::string &out, Int v) {
  for (std::size_t k = 0; k < sizeof(Int); ++k)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * k)) & 0xff));
}

template <class Int>
Int read_le(const unsigned char *p) {
  std::uint64_t v = 0;
  for (std::size_t k = 0; k < sizeof(Int); ++k)
    v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  return static_cast<Int>(v);
}

json model_to_json(const ModelConfig &m) {
  return { { "layers", m.layers }, { "hidden", m.hidden }, { "heads", m.heads },
           { "ffn", m.ffn }, { "max_len", m.max_len },
           { "vocab_size", m.vocab_size }, { "dropout", m.dropout },
           { "seed", m.seed },
           { "insertion_classes", ModelConfig::kInsertionClasses } };
}

ModelConfig model_from_json(const json &j) {
  ModelConfig m;
  m.layers = j.at("layers").get<int>();
  m.hidden = j.at("hidden").get<int>();
  m.heads = j.at("heads").get<int>();
  m.ffn = j.at("ffn").get<int>();
  m.max_len = j.at("max_len").get<int>();
  m.vocab_size = j.at("vocab_size").get<int>();
  m.dropout = j.at("dropout").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  if (j.at("insertion_classes").get<int>() != ModelConfig::kInsertionClasses)
    throw FormatError("checkpoint has an unsupported insertion class count");
  return m;
}

json train_to_json(const TrainConfig &t) {
  return { { "objective", objective_name(t.objective) },
           { "drop_ratio", t.drop_ratio }, { "mask_ratio", t.mask_ratio },
           { "lr", t.peak_lr }, { "warmup", t.warmup }, { "steps", t.steps },
           { "batch_tokens", t.batch_tokens }, { "beta1", t.beta1 },
           { "beta2", t.beta2 }, { "adam_eps", t.adam_eps },
           { "weight_decay", t.weight_decay }, { "clip_norm", t.clip_norm },
           { "teacher_forcing", t.teacher_forcing }, { "seed", t.seed },
           { "eval_interval", t.eval_interval },
           { "log_seconds", t.log_seconds } };
}

TrainConfig train_from_json(const json &j) {
  TrainConfig t;
  const std::string obj = j.at("objective").get<std::string>();
  if (obj == "edit")
    t.objective = Objective::kEdit;
  else if (obj == "mlm")
    t.objective = Objective::kMlm;
  else
    throw FormatError("unknown objective '" + obj + "' in checkpoint");
  t.drop_ratio = j.at("drop_ratio").get<double>();
  t.mask_ratio = j.at("mask_ratio").get<double>();
  t.peak_lr = j.at("lr").get<double>();
  t.warmup = j.at("warmup").get<int>();
  t.steps = j.at("steps").get<int>();
  t.batch_tokens = j.at("batch_tokens").get<std::size_t>();
  t.beta1 = j.at("beta1").get<double>();
  t.beta2 = j.at("beta2").get<double>();
  t.adam_eps = j.at("adam_eps").get<double>();
  t.weight_decay = j.at("weight_decay").get<double>();
  t.clip_norm = j.at("clip_norm").get<double>();
  t.teacher_forcing = j.at("teacher_forcing").get<double>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.eval_interval = j.at("eval_interval").get<int>();
  t.log_seconds = j.at("log_seconds").get<bool>();
  return t;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c: line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<double> csv_field(const std::string &s) {
  if (s.empty())
    return std::nullopt;
  try {
    return std::stod(s);
  } catch (const std::exception &) {
    throw SchemaError("metrics field '" + s + "' is not a number");
  }
}

// Squared global norm of all gradient tensors.
double squared_norm(const ModelParams<float> &g) {
  double s = 0;
  for (const Matrix<float> *m: g.tensors())
    s += static_cast<double>(m->squaredNorm());
  return s;
}

class Adam {
public:
  Adam(const TrainConfig &cfg, const ModelConfig &model)
      : cfg_(cfg), m_(ModelParams<float>::zeros(model)),
        v_(ModelParams<float>::zeros(model)) { }

  void step(ModelParams<float> &params, const ModelParams<float> &grads,
            double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    const float b1 = static_cast<float>(cfg_.beta1);
    const float b2 = static_cast<float>(cfg_.beta2);
    const float step_size = static_cast<float>(lr / c1);
    const float inv_c2 = static_cast<float>(1.0 / c2);
    const float eps = static_cast<float>(cfg_.adam_eps);
    const float decay = static_cast<float>(lr * cfg_.weight_decay);
    auto p = params.tensors();
    auto g = grads.tensors();
    auto m = m_.tensors();
    auto v = v_.tensors();
    for (std::size_t k = 0; k < p.size(); ++k) {
      auto ga = g[k]->array();
      m[k]->array() = b1 * m[k]->array() + (1 - b1) * ga;
      v[k]->array() = b2 * v[k]->array() + (1 - b2) * ga.square();
      if (decay != 0.0f)
        p[k]->array() -= decay * p[k]->array();
      p[k]->array() -= step_size * m[k]->array()
                       / ((v[k]->array() * inv_c2).sqrt() + eps);
    }
  }

private:
  const TrainConfig &cfg_;
  ModelParams<float> m_, v_;
  int t_ = 0;
};

// Greedy token-budget batches over `order`; a batch always holds one line.
std::vector<std::vector<std::size_t>> make_batches(
    const std::vector<std::size_t> &order, const std::vector<std::size_t> &cost,
    std::size_t budget) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::size_t used = 0;
  for (std::size_t i: order) {
    if (!cur.empty() && used + cost[i] > budget) {
      out.push_back(std::move(cur));
      cur.clear();
      used = 0;
    }
    cur.push_back(i);
    used += cost[i];
  }
  if (!cur.empty())
    out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::string_view objective_name(Objective o) noexcept {
  return o == Objective::kEdit ? "edit" : "mlm";
}

void TrainConfig::validate() const {
  auto ratio = [](double r, const char *name) {
    if (!(r >= 0.0 && r <= 1.0))
      throw ConfigError(std::string(name) + " must lie in [0, 1]");
  };
  ratio(drop_ratio, "drop_ratio");
  ratio(mask_ratio, "mask_ratio");
  ratio(teacher_forcing, "teacher_forcing");
  if (steps < 0 || warmup < 0)
    throw ConfigError("steps and warmup must be non-negative");
  if (steps > 0 && warmup >= steps)
    throw ConfigError("warmup (" + std::to_string(warmup)
                      + ") must be below steps (" + std::to_string(steps) + ")");
  if (!(peak_lr > 0.0))
    throw ConfigError("lr must be positive");
  if (batch_tokens == 0)
    throw ConfigError("batch_tokens must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0) || !(clip_norm > 0.0) || !(weight_decay >= 0.0))
    throw ConfigError("adam_eps and clip_norm must be positive, weight_decay "
                      "non-negative");
  if (eval_interval <= 0)
    throw ConfigError("eval_interval must be positive");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  RunConfig c = std::move(base);
  std::istringstream in{ std::string(text) };
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty())
      continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": '" + key
                        + "' has no value");
    ModelConfig &m = c.model;
    TrainConfig &t = c.train;
    if (key == "layers") m.layers = parse_int<int>(key, value);
    else if (key == "hidden") m.hidden = parse_int<int>(key, value);
    else if (key == "heads") m.heads = parse_int<int>(key, value);
    else if (key == "ffn") m.ffn = parse_int<int>(key, value);
    else if (key == "max_len") m.max_len = parse_int<int>(key, value);
    else if (key == "dropout") m.dropout = parse_double(key, value);
    else if (key == "objective") {
      if (value == "edit")
        t.objective = Objective::kEdit;
      else if (value == "mlm")
        t.objective = Objective::kMlm;
      else
        throw ConfigError("objective must be edit or mlm, got '" + value + "'");
    }
    else if (key == "drop_ratio") t.drop_ratio = parse_double(key, value);
    else if (key == "mask_ratio") t.mask_ratio = parse_double(key, value);
    else if (key == "lr") t.peak_lr = parse_double(key, value);
    else if (key == "warmup") t.warmup = parse_int<int>(key, value);
    else if (key == "steps") t.steps = parse_int<int>(key, value);
    else if (key == "batch_tokens") t.batch_tokens = parse_int<std::size_t>(key, value);
    else if (key == "beta1") t.beta1 = parse_double(key, value);
    else if (key == "beta2") t.beta2 = parse_double(key, value);
    else if (key == "adam_eps") t.adam_eps = parse_double(key, value);
    else if (key == "weight_decay") t.weight_decay = parse_double(key, value);
    else if (key == "clip_norm") t.clip_norm = parse_double(key, value);
    else if (key == "teacher_forcing") t.teacher_forcing = parse_double(key, value);
    else if (key == "seed") t.seed = parse_int<std::uint64_t>(key, value);
    else if (key == "eval_interval") t.eval_interval = parse_int<int>(key, value);
    else if (key == "log_seconds") t.log_seconds = parse_bool(key, value);
    else
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '"
                        + key + "'");
  }
  c.train.validate();
  return c;
}

RunConfig load_config_file(const std::string &path, RunConfig base) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text, std::move(base));
}

double lr_schedule(int step, const TrainConfig &cfg) {
  if (step <= 0)
    return 0.0;
  if (step < cfg.warmup)
    return cfg.peak_lr * step / cfg.warmup;
  if (step >= cfg.steps)
    return 0.0;
  return cfg.peak_lr * (cfg.steps - step) / (cfg.steps - cfg.warmup);
}

TrainingExample make_expert_example(std::string_view smiles,
                                    const CorruptionConfig &cfg,
                                    const Vocab &v, std::size_t max_len) {
  const std::string text(smiles);
  const CorruptionRecord rec = corrupt(parse_smiles(text), cfg, text);
  TrainingExample ex;
  ex.target = encode(tokenize(text), v, true);
  ex.y0 = encode(tokenize(rec.corrupted_smiles), v, true);
  for (const IdSeq *s: { &ex.target, &ex.y0 })
    if (s->size() > max_len)
      throw LengthExceeded(s->size(), max_len);

  const EditPlan plan = expert_plan(strip(ex.y0), strip(ex.target));
  ex.y0_deletions.assign(ex.y0.size(), 0);
  std::copy(plan.deletions.begin(), plan.deletions.end(),
            ex.y0_deletions.begin() + 1);
  ex.y0_kept = apply_deletion(ex.y0, ex.y0_deletions);
  ex.insertions = plan.insertion.counts;
  // Slot 0 of the wrapped sequence follows BOS; no slot follows EOS.
  std::vector<std::uint8_t> counts(ex.y0_kept.size() + 1, 0);
  std::copy(ex.insertions.begin(), ex.insertions.end(), counts.begin() + 1);
  ex.y1 = apply_insertion(ex.y0_kept, counts);
  ex.fill = plan.insertion.fill;
  ex.y2 = fill_placeholders(ex.y1, ex.fill);
  ex.y2_deletions.assign(ex.y2.size(), 0);
  if (ex.y2 != ex.target)
    throw std::logic_error("expert plan does not reconstruct the target");
  return ex;
}

void roll_in(std::span<TrainingExample> batch, const ModelParams<float> *policy,
             double tau, Rng &rng) {
  if (!policy)
    tau = 1.0;
  std::vector<IdSeq> seqs;
  std::vector<std::size_t> owner;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    if (!batch[e].fill.empty()) {
      seqs.push_back(batch[e].y1);
      owner.push_back(e);
    }
  }
  Matrix<float> tok;
  std::vector<std::size_t> offsets;
  if (policy && tau < 1.0 && !seqs.empty()) {
    Encoder<float> enc(*policy);
    tok = predict_tokens(*policy, enc.forward(seqs));
    offsets = enc.offsets();
  }
  for (TrainingExample &ex: batch) {
    ex.y2 = ex.y1;
    ex.y2_deletions.assign(ex.y1.size(), 0);
  }
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    TrainingExample &ex = batch[owner[s]];
    std::size_t k = 0;
    for (std::size_t i = 0; i < ex.y1.size(); ++i) {
      if (ex.y1[i] != Vocab::kPlaceholder)
        continue;
      TokenId t = ex.fill[k++];
      if (tau < 1.0 && !rng.bernoulli(tau)) {
        Eigen::Index best;
        tok.row(static_cast<Eigen::Index>(offsets[s] + i)).maxCoeff(&best);
        ex.y2_deletions[i] = static_cast<TokenId>(best) != t;
        t = static_cast<TokenId>(best);
      }
      ex.y2[i] = t;
    }
  }
}

TrainingExample make_training_example(std::string_view smiles,
                                      const CorruptionConfig &cfg,
                                      const Vocab &v,
                                      const ModelParams<float> *policy,
                                      double tau) {
  const std::size_t max_len =
      policy ? static_cast<std::size_t>(policy->config.max_len) : SIZE_MAX;
  TrainingExample ex = make_expert_example(smiles, cfg, v, max_len);
  Rng rng(derive_seed(cfg.seed, { kRollInKey }));
  roll_in(std::span<TrainingExample>(&ex, 1), policy, tau, rng);
  return ex;
}

std::size_t mlm_mask_count(std::size_t content_tokens, double ratio) {
  if (content_tokens == 0)
    return 0;
  const double want = std::ceil(ratio * static_cast<double>(content_tokens));
  return std::clamp<std::size_t>(static_cast<std::size_t>(want), 1,
                                 content_tokens);
}

MlmExample make_mlm_example(const IdSeq &wrapped, double ratio, Rng &rng) {
  MlmExample ex;
  ex.input = wrapped;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < wrapped.size(); ++i)
    if (wrapped[i] != Vocab::kBos && wrapped[i] != Vocab::kEos)
      candidates.push_back(i);
  const std::size_t k = mlm_mask_count(candidates.size(), ratio);
  // Partial Fisher-Yates: the first k entries become the sample.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  ex.positions.assign(candidates.begin(), candidates.begin() + k);
  std::sort(ex.positions.begin(), ex.positions.end());
  for (std::size_t p: ex.positions) {
    ex.labels.push_back(wrapped[p]);
    ex.input[p] = Vocab::kMask;
  }
  return ex;
}

std::string configs_to_json(const ModelConfig &model, const TrainConfig &train) {
  return json{ { "model", model_to_json(model) }, { "train", train_to_json(train) } }.dump();
}

void save_checkpoint(const Checkpoint &ckpt, const std::string &path) {
  json manifest = json::array();
  std::string data;
  const auto tensors = ckpt.params.tensors();
  const auto names = ckpt.params.tensor_names();
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const Matrix<float> &m = *tensors[k];
    manifest.push_back({ { "name", names[k] },
                         { "shape", { m.rows(), m.cols() } },
                         { "offset", data.size() } });
    for (Eigen::Index i = 0; i < m.size(); ++i)
      append_f32(data, m.data()[i]);
  }
  json header = {
    { "configs", { { "model", model_to_json(ckpt.model) },
                   { "train", train_to_json(ckpt.train) } } },
    { "vocab", ckpt.vocab.tokens() },
    { "tensors", manifest },
  };
  const std::string h = header.dump();
  std::string out = "SMED";
  append_le<std::uint32_t>(out, ckpt.version);
  append_le<std::uint64_t>(out, h.size());
  out += h;
  out += data;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw FormatError("cannot write checkpoint " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f)
    throw FormatError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw FormatError("cannot read checkpoint " + path);
  const std::string bytes((std::istreambuf_iterator<char>(f)),
                          std::istreambuf_iterator<char>());
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  if (bytes.size() < 16 || bytes.compare(0, 4, "SMED") != 0)
    throw FormatError(path + " is not a checkpoint");
  Checkpoint ckpt;
  ckpt.version = read_le<std::uint32_t>(p + 4);
  if (ckpt.version != kCheckpointVersion)
    throw VersionError("checkpoint version " + std::to_string(ckpt.version)
                       + ", expected " + std::to_string(kCheckpointVersion));
  const std::uint64_t hlen = read_le<std::uint64_t>(p + 8);
  if (hlen > bytes.size() - 16)
    throw FormatError("checkpoint header is truncated");
  const std::size_t data_begin = 16 + hlen;
  try {
    const json header = json::parse(bytes.substr(16, hlen));
    ckpt.model = model_from_json(header.at("configs").at("model"));
    ckpt.train = train_from_json(header.at("configs").at("train"));
    const auto tokens = header.at("vocab").get<std::vector<std::string>>();
    if (tokens.size() < static_cast<std::size_t>(Vocab::kNumSpecials))
      throw FormatError("checkpoint vocabulary lacks special tokens");
    ckpt.vocab = Vocab(std::vector<Token>(tokens.begin() + Vocab::kNumSpecials,
                                          tokens.end()));
    if (ckpt.vocab.tokens() != tokens)
      throw FormatError("checkpoint vocabulary is not in canonical order");
    ckpt.model.validate();
    ckpt.params = ModelParams<float>::zeros(ckpt.model);
    auto tensors = ckpt.params.tensors();
    const auto names = ckpt.params.tensor_names();
    const json &manifest = header.at("tensors");
    if (manifest.size() != tensors.size())
      throw FormatError("checkpoint manifest has the wrong tensor count");
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      Matrix<float> &m = *tensors[k];
      const json &entry = manifest[k];
      const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
      if (entry.at("name").get<std::string>() != names[k] || shape.size() != 2
          || shape[0] != m.rows() || shape[1] != m.cols())
        throw FormatError("checkpoint tensor " + names[k]
                          + " does not match the model configuration");
      const std::size_t off = entry.at("offset").get<std::size_t>();
      const std::size_t need = static_cast<std::size_t>(m.size()) * 4;
      if (off > bytes.size() - data_begin || need > bytes.size() - data_begin - off)
        throw FormatError("checkpoint tensor data is truncated");
      for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = read_f32(p + data_begin + off + 4 * static_cast<std::size_t>(i));
    }
  } catch (const json::exception &e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what());
  } catch (const ConfigError &e) {
    throw FormatError(std::string("bad checkpoint configuration: ") + e.what());
  }
  return ckpt;
}

void write_metrics_csv(std::ostream &os, std::span<const MetricsRow> rows) {
  os << kMetricsHeader << '\n';
  auto opt = [](const std::optional<double> &v) {
    return v ? format_number(*v) : std::string();
  };
  for (const MetricsRow &r: rows) {
    os << r.step << ',' << format_number(r.lr) << ','
       << format_number(r.loss_total);
    for (int c = 0; c < 4; ++c)
      os << ',' << (r.components ? format_number((*r.components)[c]) : "");
    os << ',' << opt(r.acc_tok) << ',' << opt(r.acc_mask) << ','
       << opt(r.seconds) << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line))
    throw SchemaError("metrics file is empty");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  if (line != kMetricsHeader)
    throw SchemaError("unexpected metrics header '" + line + "'");
  std::vector<MetricsRow> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r")
      continue;
    const auto f = split_csv(line);
    if (f.size() != 10)
      throw SchemaError("metrics row has " + std::to_string(f.size())
                        + " fields, expected 10");
    MetricsRow r;
    const auto step = csv_field(f[0]);
    const auto lr = csv_field(f[1]);
    const auto total = csv_field(f[2]);
    if (!step || !lr || !total)
      throw SchemaError("metrics row lacks step, lr or loss_total");
    r.step = static_cast<int>(*step);
    r.lr = *lr;
    r.loss_total = *total;
    std::array<std::optional<double>, 4> comp;
    bool all = true, none = true;
    for (int c = 0; c < 4; ++c) {
      comp[c] = csv_field(f[3 + c]);
      all = all && comp[c].has_value();
      none = none && !comp[c].has_value();
    }
    if (!all && !none)
      throw SchemaError("metrics row has partial loss components");
    if (all)
      r.components = std::array<double, 4>{ *comp[0], *comp[1], *comp[2], *comp[3] };
    r.acc_tok = csv_field(f[7]);
    r.acc_mask = csv_field(f[8]);
    r.seconds = csv_field(f[9]);
    if (!rows.empty() && r.step <= rows.back().step)
      throw SchemaError("metrics steps are not increasing");
    rows.push_back(r);
  }
  return rows;
}

CorpusSplit split_corpus(std::span<const std::string> corpus,
                         std::size_t max_len) {
  CorpusSplit split;
  std::vector<std::string> lines;
  for (const std::string &s: corpus) {
    try {
      parse_smiles(s);
      if (tokenize(s).size() + 2 > max_len) {
        ++split.skipped;
        continue;
      }
    } catch (const Error &) {
      ++split.skipped;
      continue;
    }
    lines.push_back(s);
  }
  if (lines.size() < 2)
    throw ConfigError("corpus has fewer than 2 usable lines");
  const std::size_t n_val =
      std::max<std::size_t>(1, (lines.size() * 5 + 50) / 100);
  split.validation.assign(lines.end() - static_cast<std::ptrdiff_t>(n_val),
                          lines.end());
  lines.resize(lines.size() - n_val);
  split.train = std::move(lines);
  return split;
}

PretrainResult pretrain(const RunConfig &cfg, std::span<const std::string> corpus,
                        std::ostream *log) {
  const TrainConfig &tc = cfg.train;
  tc.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t max_len = static_cast<std::size_t>(cfg.model.max_len);

  PretrainResult result;
  const CorpusSplit split = split_corpus(corpus, max_len);
  std::vector<std::string> lines = split.train;
  lines.insert(lines.end(), split.validation.begin(), split.validation.end());
  const Vocab vocab = build_vocab(lines);
  const std::size_t n_train = split.train.size();
  result.train_lines = n_train;
  result.validation_lines = split.validation.size();
  result.skipped_lines = split.skipped;

  ModelConfig mc = cfg.model;
  mc.vocab_size = static_cast<int>(vocab.size());
  mc.seed = tc.seed;
  mc.validate();
  ModelParams<float> params = ModelParams<float>::initialize(mc);
  ModelParams<float> grads = ModelParams<float>::zeros(mc);
  Adam adam(tc, mc);

  std::vector<IdSeq> wrapped(lines.size());
  std::vector<std::size_t> cost(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    wrapped[i] = encode(tokenize(lines[i]), vocab, true);
    cost[i] = wrapped[i].size();
  }

  const bool edit = tc.objective == Objective::kEdit;
  auto corruption = [&](std::uint64_t seed) {
    CorruptionConfig cc;
    cc.drop_ratio = tc.drop_ratio;
    cc.seed = seed;
    return cc;
  };

  // Validation inputs are fixed once; only the roll-in follows the model.
  std::vector<TrainingExample> val_edit;
  std::vector<MlmExample> val_mlm;
  for (std::size_t j = n_train; j < lines.size(); ++j) {
    const std::uint64_t s = derive_seed(tc.seed, { kValidationKey, j });
    if (edit) {
      try {
        val_edit.push_back(
            make_expert_example(lines[j], corruption(s), vocab, max_len));
      } catch (const LengthExceeded &) {
        // Corruption rewrote the molecule past max_len.
      }
    } else {
      Rng rng(s);
      val_mlm.push_back(make_mlm_example(wrapped[j], tc.mask_ratio, rng));
    }
  }
  std::vector<std::size_t> all_val(edit ? val_edit.size() : val_mlm.size());
  std::vector<std::size_t> val_cost(all_val.size());
  for (std::size_t k = 0; k < all_val.size(); ++k) {
    all_val[k] = k;
    val_cost[k] = edit ? val_edit[k].target.size() : val_mlm[k].input.size();
  }
  const auto val_batches = make_batches(all_val, val_cost, tc.batch_tokens);

  auto evaluate = [&](int step) {
    MetricsRow row;
    row.step = step;
    row.lr = lr_schedule(step, tc);
    if (edit) {
      std::vector<TrainingExample> ex = val_edit;
      Rng rng(derive_seed(tc.seed, { kValidationKey, kRollInKey }));
      LossBreakdown total;
      for (const auto &b: val_batches) {
        std::vector<TrainingExample> batch;
        for (std::size_t k: b)
          batch.push_back(std::move(ex[k]));
        roll_in(batch, &params, tc.teacher_forcing, rng);
        total += edit_loss<float>(params, batch);
      }
      row.components = std::array<double, 4>{};
      for (int c = 0; c < 4; ++c)
        (*row.components)[c] = total.mean(c);
      row.loss_total = total.total();
      row.acc_tok = total.tok_accuracy();
    } else {
      MlmLoss total;
      for (const auto &b: val_batches) {
        std::vector<MlmExample> batch;
        for (std::size_t k: b)
          batch.push_back(val_mlm[k]);
        total += mlm_loss<float>(params, batch);
      }
      row.loss_total = total.mean();
      row.acc_mask = total.accuracy();
    }
    if (tc.log_seconds)
      row.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start).count();
    return row;
  };

  Checkpoint snapshot{ kCheckpointVersion, mc, tc, vocab, params };
  double best_loss = INFINITY;
  auto record = [&](int step) {
    MetricsRow row = evaluate(step);
    result.metrics.push_back(row);
    if (row.loss_total < best_loss) {
      best_loss = row.loss_total;
      result.best = snapshot;
      result.best.params = params;
    }
    if (log) {
      *log << objective_name(tc.objective) << " step " << step << " lr "
           << format_number(row.lr) << " val_loss "
           << format_number(row.loss_total);
      if (row.acc_tok)
        *log << " acc_tok " << format_number(*row.acc_tok);
      if (row.acc_mask)
        *log << " acc_mask " << format_number(*row.acc_mask);
      *log << std::endl;
    }
  };

  record(0);
  std::vector<std::size_t> order(n_train);
  std::vector<std::vector<std::size_t>> batches;
  std::size_t next_batch = 0;
  std::uint64_t epoch = 0;
  for (int step = 1; step <= tc.steps; ++step) {
    if (next_batch == batches.size()) {
      for (std::size_t i = 0; i < n_train; ++i)
        order[i] = i;
      Rng shuffler(derive_seed(tc.seed, { kShuffleKey, epoch }));
      shuffler.shuffle(order.begin(), order.end());
      batches = make_batches(order, cost, tc.batch_tokens);
      next_batch = 0;
      ++epoch;
    }
    const auto &lines_in_batch = batches[next_batch++];
    const std::uint64_t s = static_cast<std::uint64_t>(step);
    Rng dropout(derive_seed(tc.seed, { kDropoutKey, s }));
    grads.set_zero();
    if (edit) {
      std::vector<TrainingExample> batch;
      for (std::size_t i: lines_in_batch) {
        try {
          batch.push_back(make_expert_example(
              lines[i], corruption(derive_seed(tc.seed, { kCorruptKey, epoch, i })),
              vocab, max_len));
        } catch (const LengthExceeded &) {
        }
      }
      Rng rng(derive_seed(tc.seed, { kRollInKey, s }));
      roll_in(batch, &params, tc.teacher_forcing, rng);
      edit_loss<float>(params, batch, &grads, { 1, 1, 1, 1 }, &dropout);
    } else {
      std::vector<MlmExample> batch;
      for (std::size_t i: lines_in_batch) {
        Rng rng(derive_seed(tc.seed, { kMaskKey, epoch, i }));
        batch.push_back(make_mlm_example(wrapped[i], tc.mask_ratio, rng));
      }
      mlm_loss<float>(params, batch, &grads, &dropout);
    }
    const double norm = std::sqrt(squared_norm(grads));
    if (!std::isfinite(norm))
      throw NaNGuard("gradient norm is not finite at step " + std::to_string(step));
    if (norm > tc.clip_norm) {
      const float scale = static_cast<float>(tc.clip_norm / norm);
      for (Matrix<float> *m: grads.tensors())
        *m *= scale;
    }
    adam.step(params, grads, lr_schedule(step, tc));
    if (step % tc.eval_interval == 0 || step == tc.steps)
      record(step);
  }
  result.final = snapshot;
  result.final.params = params;
  return result;
}

Eigen::VectorXd pooled_features(const ModelParams<float> &params,
                                const Vocab &v, std::string_view smiles) {
  const IdSeq ids = encode(tokenize(smiles), v, true);
  const Matrix<float> states = encode_sequence(params, ids);
  const Eigen::Index n = states.rows();
  if (n <= 2)
    return states.colwise().mean().transpose().cast<double>();
  return states.middleRows(1, n - 2).colwise().mean().transpose().cast<double>();
}

Probe fit_probe(const std::vector<Eigen::VectorXd> &x, const std::vector<double> &y,
                const std::vector<Eigen::VectorXd> &val_x,
                const std::vector<double> &val_y) {
  if (x.size() != y.size() || val_x.size() != val_y.size())
    throw ShapeMismatch("probe features and labels differ in count");
  if (x.empty())
    throw DegenerateDesign("probe has no training rows");
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index d = x[0].size();
  Eigen::MatrixXd X(n, d);
  Eigen::VectorXd Y(n);
  bool varied = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x[i].size() != d)
      throw ShapeMismatch("probe feature vectors differ in size");
    X.row(i) = x[i].transpose();
    Y(i) = y[i];
    varied = varied || x[i] != x[0];
  }
  if (!varied)
    throw DegenerateDesign("all probe feature vectors are identical");
  const Eigen::RowVectorXd mean_x = X.colwise().mean();
  const double mean_y = Y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - mean_x;
  const Eigen::VectorXd Yc = Y.array() - mean_y;
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd A = Xc.transpose() * Xc * inv_n;
  A.diagonal().array() += kProbeRidge;
  Probe probe;
  probe.weights = A.ldlt().solve(Xc.transpose() * Yc * inv_n);
  probe.bias = mean_y - mean_x.dot(probe.weights);
  auto rmse = [&](const std::vector<Eigen::VectorXd> &xs,
                  const std::vector<double> &ys) {
    if (xs.empty())
      return 0.0;
    double s = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = probe.predict(xs[i]) - ys[i];
      s += r * r;
    }
    return std::sqrt(s / static_cast<double>(xs.size()));
  };
  probe.train_rmse = rmse(x, y);
  probe.validation_rmse = rmse(val_x, val_y);
  return probe;
}

Probe finetune_probe(const Checkpoint &ckpt, std::span<const LabeledSmiles> train,
                     std::span<const LabeledSmiles> validation) {
  std::vector<Eigen::VectorXd> x, vx;
  std::vector<double> y, vy;
  for (const auto &[s, label]: train) {
    x.push_back(pooled_features(ckpt.params, ckpt.vocab, s));
    y.push_back(label);
  }
  for (const auto &[s, label]: validation) {
    vx.push_back(pooled_features(ckpt.params, ckpt.vocab, s));
    vy.push_back(label);
  }
  return fit_probe(x, y, vx, vy);
}

}  // namespace smiedit
