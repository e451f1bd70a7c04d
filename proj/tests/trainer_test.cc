//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/trainer.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "json.hpp"

#include "smiedit/edit_expert.h"
#include "smiedit/errors.h"

namespace smiedit {
namespace {

std::vector<std::string> fixture(std::size_t n) {
  auto lines = read_corpus_file(SMIEDIT_TEST_DATA "/fixture_corpus.txt");
  if (lines.size() > n)
    lines.resize(n);
  return lines;
}

IdSeq wrap(const std::string &s, const Vocab &v) {
  return encode(tokenize(s), v, true);
}

RunConfig tiny_run(Objective objective, int steps) {
  RunConfig c;
  c.model.layers = 1;
  c.model.hidden = 16;
  c.model.heads = 2;
  c.model.ffn = 32;
  c.model.max_len = 96;
  c.train.objective = objective;
  c.train.steps = steps;
  c.train.warmup = steps > 0 ? steps / 5 : 0;
  c.train.peak_lr = 3e-3;
  c.train.batch_tokens = 160;
  c.train.eval_interval = 10;
  c.train.seed = 11;
  c.train.log_seconds = false;
  return c;
}

std::string temp_path(const std::string &name) {
  return (std::filesystem::temp_directory_path()
          / ("smiedit_trainer_test_" + name)).string();
}

TEST(ConfigTest, ParsesKeysAndComments) {
  const RunConfig c = parse_config(
      "# desk run\n"
      "objective = mlm\n"
      "hidden = 32   # trailing comment\n"
      "heads=2\n"
      "lr = 1e-3\n"
      "steps = 300\n"
      "warmup = 30\n"
      "seed = 7\n"
      "log_seconds = false\n");
  EXPECT_EQ(c.train.objective, Objective::kMlm);
  EXPECT_EQ(c.model.hidden, 32);
  EXPECT_EQ(c.model.heads, 2);
  EXPECT_DOUBLE_EQ(c.train.peak_lr, 1e-3);
  EXPECT_EQ(c.train.steps, 300);
  EXPECT_EQ(c.train.warmup, 30);
  EXPECT_EQ(c.train.seed, 7u);
  EXPECT_FALSE(c.train.log_seconds);
  EXPECT_EQ(c.model.layers, 2);  // default kept
}

TEST(ConfigTest, RejectsBadInput) {
  EXPECT_THROW(parse_config("learning_rate = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("steps = many\n"), ConfigError);
  EXPECT_THROW(parse_config("steps\n"), ConfigError);
  EXPECT_THROW(parse_config("drop_ratio = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("warmup = 500\nsteps = 500\n"), ConfigError);
  EXPECT_THROW(parse_config("objective = gpt\n"), ConfigError);
  EXPECT_NO_THROW(parse_config("steps = 0\nwarmup = 0\n"));
}

TEST(LrScheduleTest, Examples) {
  TrainConfig c;
  c.peak_lr = 5e-4;
  c.warmup = 200;
  c.steps = 5000;
  EXPECT_DOUBLE_EQ(lr_schedule(200, c), 5e-4);
  EXPECT_DOUBLE_EQ(lr_schedule(5000, c), 0.0);
  EXPECT_NEAR(lr_schedule(2600, c), 2.5e-4, 1e-15);
  EXPECT_DOUBLE_EQ(lr_schedule(0, c), 0.0);
  EXPECT_NEAR(lr_schedule(100, c), 2.5e-4, 1e-15);
}

TEST(LrScheduleTest, RisesThenFalls) {
  TrainConfig c;
  c.warmup = 37;
  c.steps = 400;
  for (int s = 1; s <= c.steps; ++s) {
    if (s <= c.warmup)
      EXPECT_GT(lr_schedule(s, c), lr_schedule(s - 1, c)) << s;
    else
      EXPECT_LT(lr_schedule(s, c), lr_schedule(s - 1, c)) << s;
    EXPECT_LE(lr_schedule(s, c), c.peak_lr);
  }
}

class ExampleTest: public ::testing::Test {
protected:
  void SetUp() override {
    corpus = fixture(400);
    vocab = build_vocab(corpus);
  }
  std::vector<std::string> corpus;
  Vocab vocab;
};

TEST_F(ExampleTest, SingleFragmentGivesZeroEdits) {
  CorruptionConfig cc;
  cc.drop_ratio = 0.9;
  const TrainingExample ex = make_training_example("CCO", cc, vocab);
  EXPECT_EQ(ex.y0, ex.target);
  EXPECT_EQ(std::count(ex.y0_deletions.begin(), ex.y0_deletions.end(), 1), 0);
  EXPECT_EQ(std::count(ex.insertions.begin(), ex.insertions.end(), 0),
            static_cast<std::ptrdiff_t>(ex.insertions.size()));
  EXPECT_TRUE(ex.fill.empty());
  EXPECT_EQ(ex.y2, ex.target);
}

TEST_F(ExampleTest, ParacetamolAcetylDrop) {
  const std::string para = "CC(=O)Nc1ccc(O)cc1";
  CorruptionConfig cc;
  cc.drop_ratio = 0.5;
  bool found = false;
  for (std::uint64_t seed = 0; seed < 64 && !found; ++seed) {
    cc.seed = seed;
    const TrainingExample ex = make_training_example(para, cc, vocab);
    if (ex.y0 != wrap("Nc1ccc(O)cc1", vocab))
      continue;
    found = true;
    EXPECT_EQ(ex.target.size() - 2, 18u);
    // Only insertions are needed; the acetyl tokens precede the kept text.
    EXPECT_EQ(std::count(ex.y0_deletions.begin(), ex.y0_deletions.end(), 1), 0);
    EXPECT_EQ(ex.fill.size(), 6u);
    EXPECT_EQ(ex.y1.size(), ex.target.size());
  }
  EXPECT_TRUE(found);
}

TEST_F(ExampleTest, ExpertTargetsReconstructOverCorpus) {
  CorruptionConfig cc;
  cc.drop_ratio = 0.3;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    cc.seed = derive_seed(5, { i });
    const TrainingExample ex = make_expert_example(corpus[i], cc, vocab);
    ASSERT_EQ(ex.y0_deletions.front(), 0);
    ASSERT_EQ(ex.y0_deletions.back(), 0);
    // Replay the stored labels through the generic operations.
    const IdSeq kept = apply_deletion(ex.y0, ex.y0_deletions);
    ASSERT_EQ(kept, ex.y0_kept);
    std::vector<std::uint8_t> counts(kept.size() + 1, 0);
    std::copy(ex.insertions.begin(), ex.insertions.end(), counts.begin() + 1);
    ASSERT_EQ(fill_placeholders(apply_insertion(kept, counts), ex.fill), ex.target)
        << corpus[i];
    ASSERT_LE(ex.target.size(), 96u);
  }
}

TEST_F(ExampleTest, RollInLabelsMarkWrongFills) {
  ModelConfig mc;
  mc.layers = 1;
  mc.hidden = 16;
  mc.heads = 2;
  mc.ffn = 32;
  mc.vocab_size = static_cast<int>(vocab.size());
  mc.seed = 3;
  const auto params = ModelParams<float>::initialize(mc);
  CorruptionConfig cc;
  cc.drop_ratio = 0.5;
  std::size_t placeholders = 0, wrong = 0;
  for (std::size_t i = 0; i < 60; ++i) {
    cc.seed = derive_seed(9, { i });
    // tau = 1 is a perfect roll-in.
    const TrainingExample perfect =
        make_training_example(corpus[i], cc, vocab, &params, 1.0);
    EXPECT_EQ(perfect.y2, perfect.target);
    EXPECT_EQ(std::count(perfect.y2_deletions.begin(), perfect.y2_deletions.end(), 1), 0);

    // tau = 0: the model fills every placeholder; y1 and the target align
    // position by position, so the labels are exactly the mismatches.
    const TrainingExample ex = make_training_example(corpus[i], cc, vocab, &params, 0.0);
    ASSERT_EQ(ex.y2.size(), ex.target.size());
    for (std::size_t k = 0; k < ex.y2.size(); ++k) {
      if (ex.y1[k] != Vocab::kPlaceholder) {
        EXPECT_EQ(ex.y2[k], ex.target[k]);
        EXPECT_EQ(ex.y2_deletions[k], 0);
        continue;
      }
      ++placeholders;
      EXPECT_TRUE(fillable(ex.y2[k]));
      EXPECT_EQ(ex.y2_deletions[k], ex.y2[k] != ex.target[k]);
      wrong += ex.y2_deletions[k];
    }
  }
  EXPECT_GT(placeholders, 0u);
  EXPECT_GT(wrong, 0u);  // an untrained policy is mostly wrong
}

TEST(MlmTest, MaskCountMatchesIntegerCeiling) {
  for (int pct: { 15, 30, 45 }) {
    for (std::size_t n = 1; n <= 300; ++n) {
      const std::size_t want = std::max<std::size_t>(1, (pct * n + 99) / 100);
      ASSERT_EQ(mlm_mask_count(n, pct / 100.0), want) << pct << " " << n;
    }
  }
  EXPECT_EQ(mlm_mask_count(0, 0.15), 0u);
  EXPECT_EQ(mlm_mask_count(5, 0.0), 1u);
}

TEST(MlmTest, ExamplesMaskOnlyContent) {
  const auto corpus = fixture(200);
  const Vocab v = build_vocab(corpus);
  Rng rng(4);
  for (const std::string &s: corpus) {
    const IdSeq ids = wrap(s, v);
    const MlmExample ex = make_mlm_example(ids, 0.15, rng);
    const std::size_t n = ids.size() - 2;
    ASSERT_EQ(ex.positions.size(), mlm_mask_count(n, 0.15));
    ASSERT_TRUE(std::is_sorted(ex.positions.begin(), ex.positions.end()));
    ASSERT_EQ(std::adjacent_find(ex.positions.begin(), ex.positions.end()),
              ex.positions.end());
    for (std::size_t k = 0; k < ex.positions.size(); ++k) {
      const std::size_t p = ex.positions[k];
      ASSERT_GT(p, 0u);
      ASSERT_LT(p, ids.size() - 1);
      EXPECT_EQ(ex.input[p], Vocab::kMask);
      EXPECT_EQ(ex.labels[k], ids[p]);
    }
    EXPECT_EQ(std::count(ex.input.begin(), ex.input.end(), Vocab::kMask),
              static_cast<std::ptrdiff_t>(ex.positions.size()));
  }
}

class CheckpointTest: public ::testing::Test {
protected:
  void SetUp() override {
    const auto corpus = fixture(50);
    ckpt.vocab = build_vocab(corpus);
    ckpt.model.layers = 2;
    ckpt.model.hidden = 8;
    ckpt.model.heads = 2;
    ckpt.model.ffn = 12;
    ckpt.model.max_len = 20;
    ckpt.model.vocab_size = static_cast<int>(ckpt.vocab.size());
    ckpt.model.seed = 99;
    ckpt.train.objective = Objective::kMlm;
    ckpt.train.seed = 99;
    ckpt.params = ModelParams<float>::initialize(ckpt.model);
    // Awkward values must survive too.
    ckpt.params.token_head(0, 0) = -0.0f;
    ckpt.params.token_head(0, 1) = 1e-40f;
    ckpt.params.token_head(0, 2) = 3.4e38f;
    path = temp_path("ckpt.smed");
  }
  void TearDown() override { std::filesystem::remove(path); }

  std::string bytes() const {
    std::ifstream f(path, std::ios::binary);
    return { std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>() };
  }
  void write(const std::string &b) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(b.data(), static_cast<std::streamsize>(b.size()));
  }

  Checkpoint ckpt;
  std::string path;
};

TEST_F(CheckpointTest, RoundTripIsBitExact) {
  save_checkpoint(ckpt, path);
  const Checkpoint back = load_checkpoint(path);
  EXPECT_EQ(back.version, kCheckpointVersion);
  EXPECT_EQ(back.model, ckpt.model);
  EXPECT_EQ(back.train, ckpt.train);
  EXPECT_EQ(back.vocab, ckpt.vocab);
  const auto a = ckpt.params.tensors();
  const auto b = back.params.tensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_EQ(a[k]->size(), b[k]->size());
    EXPECT_EQ(std::memcmp(a[k]->data(), b[k]->data(),
                          sizeof(float) * static_cast<std::size_t>(a[k]->size())),
              0);
  }
  save_checkpoint(back, path + ".2");
  const std::string again = [&] {
    std::ifstream f(path + ".2", std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  }();
  EXPECT_EQ(again, bytes());
  std::filesystem::remove(path + ".2");
}

TEST_F(CheckpointTest, LayoutMatchesManifest) {
  save_checkpoint(ckpt, path);
  const std::string b = bytes();
  ASSERT_GE(b.size(), 16u);
  EXPECT_EQ(b.substr(0, 4), "SMED");
  auto le = [&](std::size_t at, int width) {
    std::uint64_t v = 0;
    for (int k = 0; k < width; ++k)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[at + k])) << (8 * k);
    return v;
  };
  EXPECT_EQ(le(4, 4), kCheckpointVersion);
  const std::size_t hlen = le(8, 8);
  const auto header = nlohmann::json::parse(b.substr(16, hlen));
  const auto names = ckpt.params.tensor_names();
  const auto tensors = ckpt.params.tensors();
  ASSERT_EQ(header.at("tensors").size(), names.size());
  std::size_t expected_offset = 0;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto &e = header["tensors"][k];
    EXPECT_EQ(e["name"], names[k]);
    EXPECT_EQ(e["shape"][0].get<long>(), tensors[k]->rows());
    EXPECT_EQ(e["shape"][1].get<long>(), tensors[k]->cols());
    EXPECT_EQ(e["offset"].get<std::size_t>(), expected_offset);
    // First value of each tensor, decoded by hand.
    const std::size_t at = 16 + hlen + expected_offset;
    const std::uint32_t u = static_cast<std::uint32_t>(le(at, 4));
    float f;
    std::memcpy(&f, &u, 4);
    EXPECT_EQ(std::memcmp(&f, tensors[k]->data(), 4), 0) << names[k];
    expected_offset += 4 * static_cast<std::size_t>(tensors[k]->size());
  }
  EXPECT_EQ(b.size(), 16 + hlen + expected_offset);
  EXPECT_EQ(header["vocab"].size(), ckpt.vocab.size());
  EXPECT_EQ(header["configs"]["model"]["hidden"], 8);
  EXPECT_EQ(header["configs"]["train"]["objective"], "mlm");
}

TEST_F(CheckpointTest, CorruptFilesRejected) {
  save_checkpoint(ckpt, path);
  const std::string good = bytes();

  write(good.substr(0, good.size() - 3));
  EXPECT_THROW(load_checkpoint(path), FormatError);
  write(good.substr(0, 10));
  EXPECT_THROW(load_checkpoint(path), FormatError);
  write(good.substr(0, 40));
  EXPECT_THROW(load_checkpoint(path), FormatError);

  std::string magic = good;
  magic[0] = 'X';
  write(magic);
  EXPECT_THROW(load_checkpoint(path), FormatError);

  std::string version = good;
  version[4] = 2;
  write(version);
  EXPECT_THROW(load_checkpoint(path), VersionError);

  std::string header = good;
  header[16] = '[';
  write(header);
  EXPECT_THROW(load_checkpoint(path), FormatError);

  EXPECT_THROW(load_checkpoint(path + ".missing"), FormatError);
}

TEST(MetricsCsvTest, HeaderAndRoundTrip) {
  std::vector<MetricsRow> rows(2);
  rows[0].step = 0;
  rows[0].loss_total = 4.5;
  rows[0].components = std::array<double, 4>{ 1, 1.5, 1.25, 0.75 };
  rows[0].acc_tok = 0.125;
  rows[1].step = 10;
  rows[1].lr = 1e-4;
  rows[1].loss_total = 2.0;
  rows[1].components = std::array<double, 4>{ 0.5, 0.5, 0.5, 0.5 };
  rows[1].acc_tok = 0.5;
  rows[1].seconds = 1.5;
  std::ostringstream os;
  write_metrics_csv(os, rows);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "step,lr,loss_total,loss_dualdel,loss_ins,loss_tok,loss_del,acc_tok,"
            "acc_mask,seconds");
  EXPECT_NE(text.find("\n0,0,4.5,1,1.5,1.25,0.75,0.125,,\n"), std::string::npos);
  std::istringstream is(text);
  const auto back = read_metrics_csv(is);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].step, 10);
  EXPECT_EQ(*back[1].seconds, 1.5);
  EXPECT_FALSE(back[0].seconds);
  EXPECT_FALSE(back[0].acc_mask);

  std::istringstream bad("step,lr,loss\n1,2,3\n");
  EXPECT_THROW(read_metrics_csv(bad), SchemaError);
  std::istringstream backwards(std::string(kMetricsHeader) + "\n5,0,1,,,,,,0.5,\n"
                               "5,0,1,,,,,,0.5,\n");
  EXPECT_THROW(read_metrics_csv(backwards), SchemaError);
}

TEST(PretrainTest, ZeroStepsKeepsInitialization) {
  const auto corpus = fixture(80);
  const PretrainResult r = pretrain(tiny_run(Objective::kEdit, 0), corpus);
  ModelConfig mc = r.final.model;
  const auto init = ModelParams<float>::initialize(mc);
  const auto a = init.tensors();
  const auto b = r.final.params.tensors();
  for (std::size_t k = 0; k < a.size(); ++k)
    EXPECT_EQ(*a[k], *b[k]);
  ASSERT_EQ(r.metrics.size(), 1u);
  EXPECT_EQ(r.metrics[0].step, 0);
  EXPECT_EQ(r.train_lines + r.validation_lines, 80u);
  EXPECT_EQ(r.validation_lines, 4u);
}

TEST(PretrainTest, EditRunLearnsAndDecomposes) {
  const auto corpus = fixture(120);
  const PretrainResult r = pretrain(tiny_run(Objective::kEdit, 40), corpus);
  ASSERT_EQ(r.metrics.size(), 5u);
  for (const MetricsRow &row: r.metrics) {
    ASSERT_TRUE(row.components);
    const auto &c = *row.components;
    EXPECT_NEAR(row.loss_total, c[0] + c[1] + c[2] + c[3], 1e-6);
    EXPECT_TRUE(row.acc_tok);
    EXPECT_FALSE(row.acc_mask);
    EXPECT_FALSE(row.seconds);
  }
  EXPECT_LT(r.metrics.back().loss_total, r.metrics.front().loss_total);
  // The best checkpoint holds the lowest validation loss.
  double best = INFINITY;
  for (const MetricsRow &row: r.metrics)
    best = std::min(best, row.loss_total);
  EXPECT_LE(best, r.metrics.back().loss_total);
}

TEST(PretrainTest, MlmRunHasMaskColumnsOnly) {
  const auto corpus = fixture(120);
  const PretrainResult r = pretrain(tiny_run(Objective::kMlm, 20), corpus);
  for (const MetricsRow &row: r.metrics) {
    EXPECT_FALSE(row.components);
    EXPECT_FALSE(row.acc_tok);
    ASSERT_TRUE(row.acc_mask);
    EXPECT_GE(*row.acc_mask, 0.0);
    EXPECT_LE(*row.acc_mask, 1.0);
  }
  EXPECT_LT(r.metrics.back().loss_total, r.metrics.front().loss_total);
}

TEST(PretrainTest, IdenticalRunsGiveIdenticalCsv) {
  const auto corpus = fixture(100);
  auto csv = [&] {
    const PretrainResult r = pretrain(tiny_run(Objective::kEdit, 20), corpus);
    std::ostringstream os;
    write_metrics_csv(os, r.metrics);
    return os.str();
  };
  const std::string a = csv();
  EXPECT_EQ(a, csv());
  RunConfig other = tiny_run(Objective::kEdit, 20);
  other.train.seed = 12;
  std::ostringstream os;
  write_metrics_csv(os, pretrain(other, corpus).metrics);
  EXPECT_NE(a, os.str());
}

TEST(ProbeTest, ZeroLabelsGiveZeroWeights) {
  Rng rng(1);
  std::vector<Eigen::VectorXd> x;
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd v(5);
    for (int k = 0; k < 5; ++k)
      v(k) = rng.normal();
    x.push_back(v);
  }
  const Probe p = fit_probe(x, std::vector<double>(20, 0.0));
  EXPECT_EQ(p.weights.norm(), 0.0);
  EXPECT_EQ(p.bias, 0.0);
  EXPECT_EQ(p.train_rmse, 0.0);
}

TEST(ProbeTest, MatchesAugmentedLeastSquares) {
  Rng rng(2);
  const int n = 40, d = 6;
  std::vector<Eigen::VectorXd> x;
  std::vector<double> y;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v(d);
    for (int k = 0; k < d; ++k)
      v(k) = rng.normal();
    x.push_back(v);
    y.push_back(v.sum() * 0.5 + rng.normal() * 0.1 + 3.0);
  }
  const Probe p = fit_probe(x, y);
  // Independent route: QR on [X 1; sqrt(n * lambda) I 0] against [y; 0].
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + d, d + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + d);
  for (int i = 0; i < n; ++i) {
    A.row(i).head(d) = x[i].transpose();
    A(i, d) = 1.0;
    b(i) = y[i];
  }
  for (int k = 0; k < d; ++k)
    A(n + k, k) = std::sqrt(n * kProbeRidge);
  const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(b);
  for (int k = 0; k < d; ++k)
    EXPECT_NEAR(p.weights(k), sol(k), 1e-9);
  EXPECT_NEAR(p.bias, sol(d), 1e-9);
}

TEST(ProbeTest, DuplicatedRowsKeepSolution) {
  Rng rng(3);
  std::vector<Eigen::VectorXd> x;
  std::vector<double> y;
  for (int i = 0; i < 15; ++i) {
    Eigen::VectorXd v(4);
    for (int k = 0; k < 4; ++k)
      v(k) = rng.normal();
    x.push_back(v);
    y.push_back(rng.normal());
  }
  const Probe p = fit_probe(x, y);
  auto x2 = x;
  auto y2 = y;
  x2.insert(x2.end(), x.begin(), x.end());
  y2.insert(y2.end(), y.begin(), y.end());
  const Probe q = fit_probe(x2, y2);
  EXPECT_LT((p.weights - q.weights).norm(), 1e-10);
  EXPECT_NEAR(p.bias, q.bias, 1e-10);
}

TEST(ProbeTest, DegenerateDesignRejected) {
  std::vector<Eigen::VectorXd> x(5, Eigen::VectorXd::Ones(3));
  EXPECT_THROW(fit_probe(x, { 1, 2, 3, 4, 5 }), DegenerateDesign);
  EXPECT_THROW(fit_probe({}, {}), DegenerateDesign);
}

TEST(ProbeTest, FinetuneOnCheckpointFeatures) {
  const auto corpus = fixture(60);
  Checkpoint ckpt;
  ckpt.vocab = build_vocab(corpus);
  ckpt.model.layers = 1;
  ckpt.model.hidden = 8;
  ckpt.model.heads = 2;
  ckpt.model.ffn = 8;
  ckpt.model.vocab_size = static_cast<int>(ckpt.vocab.size());
  ckpt.params = ModelParams<float>::initialize(ckpt.model);
  std::vector<LabeledSmiles> train;
  for (const std::string &s: corpus)
    train.emplace_back(s, static_cast<double>(s.size()));
  const Probe p = finetune_probe(ckpt, train);
  EXPECT_EQ(p.weights.size(), 8);
  const Eigen::VectorXd f = pooled_features(ckpt.params, ckpt.vocab, corpus[0]);
  const Matrix<float> states = encode_sequence(ckpt.params, wrap(corpus[0], ckpt.vocab));
  const Eigen::Index n = states.rows();
  EXPECT_LT((f - states.middleRows(1, n - 2).colwise().mean().transpose().cast<double>())
                .norm(),
            1e-12);
}

}  // namespace
}  // namespace smiedit
