//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/cli.h"

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"

#include "smiedit/analysis.h"
#include "smiedit/edit_expert.h"
#include "smiedit/errors.h"
#include "smiedit/fragmenter.h"
#include "smiedit/smiles.h"
#include "smiedit/tokenizer.h"
#include "smiedit/trainer.h"

namespace smiedit {
namespace {

using json = nlohmann::ordered_json;

struct Options {
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
  int threads = 1;

  std::string input;
  std::string smiles;
  std::string source;
  std::string target;
  std::string checkpoint;
  std::string objective;
  double drop_ratio = -1;
  double mask_ratio = -1;
  int steps = -1;
  int max_iters = 10;
  bool holdout = false;
  int warmup = 200;
  std::vector<std::string> metrics;
};

// Thrown for problems the user must fix on the command line.
class UsageError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> inputs(const Options &o) {
  if (!o.smiles.empty())
    return { o.smiles };
  if (o.input.empty())
    throw UsageError("one of --smiles or --input is required");
  return read_corpus_file(o.input);
}

// Runs `body` against --out when given, otherwise against `out`.
void with_output(const Options &o, std::ostream &out,
                 const std::function<void(std::ostream &)> &body) {
  if (o.out.empty()) {
    body(out);
    return;
  }
  std::ofstream f(o.out);
  if (!f)
    throw UsageError("cannot create output file " + o.out);
  body(f);
}

void check_creatable(const std::string &path) {
  if (path.empty())
    return;
  const auto parent = std::filesystem::absolute(path).parent_path();
  if (!std::filesystem::is_directory(parent))
    throw UsageError("output directory " + parent.string() + " does not exist");
}

json plan_json(const EditPlan &plan, const Vocab &v) {
  json fill = json::array();
  for (TokenId t: plan.insertion.fill)
    fill.push_back(v.token(t));
  return { { "distance", plan.distance },
           { "deletions", plan.deletions },
           { "insertions", plan.insertion.counts },
           { "fill", fill } };
}

void cmd_tokenize(const Options &o, std::ostream &out) {
  with_output(o, out, [&](std::ostream &os) {
    for (const std::string &s: inputs(o)) {
      const TokenSeq t = tokenize(s);
      os << t.size() << '\t';
      for (std::size_t i = 0; i < t.size(); ++i)
        os << (i ? " " : "") << t.tokens[i];
      os << '\n';
    }
  });
}

void cmd_fragment(const Options &o, std::ostream &out) {
  with_output(o, out, [&](std::ostream &os) {
    for (const std::string &s: inputs(o)) {
      const FragmentSet fs = fragment(parse_smiles(s));
      json frags = json::array();
      for (const Fragment &f: fs.fragments)
        frags.push_back({ { "atoms", f.atoms },
                          { "smiles", write_smiles(induced_subgraph(fs.parent, f.atoms)) } });
      json cuts = json::array();
      for (BondIndex b: fs.cut_bonds)
        cuts.push_back({ fs.parent.bond(b).begin, fs.parent.bond(b).end });
      os << json{ { "smiles", s }, { "cut_bonds", cuts }, { "fragments", frags } }.dump()
         << '\n';
    }
  });
}

void cmd_corrupt(const Options &o, std::ostream &out) {
  CorruptionConfig cc;
  cc.drop_ratio = o.drop_ratio < 0 ? 0.15 : o.drop_ratio;
  cc.validate();
  const auto lines = inputs(o);
  with_output(o, out, [&](std::ostream &os) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      cc.seed = derive_seed(o.seed, { i });
      os << to_jsonl(corrupt(parse_smiles(lines[i]), cc, lines[i])) << '\n';
    }
  });
}

void cmd_expert(const Options &o, std::ostream &out) {
  const TokenSeq src = tokenize(o.source), tgt = tokenize(o.target);
  std::vector<Token> all = src.tokens;
  all.insert(all.end(), tgt.tokens.begin(), tgt.tokens.end());
  const Vocab v(all);
  const IdSeq a = encode(src, v, false), b = encode(tgt, v, false);
  const EditPlan plan = expert_plan(a, b);
  json j = { { "source", o.source }, { "target", o.target } };
  j.update(plan_json(plan, v));
  j["result"] = detokenize(decode(apply_plan(a, plan), v));
  with_output(o, out, [&](std::ostream &os) { os << j.dump() << '\n'; });
}

RunConfig run_config(const Options &o) {
  RunConfig c;
  if (!o.config.empty())
    c = load_config_file(o.config);
  if (!o.objective.empty())
    c = parse_config("objective = " + o.objective, c);
  if (o.drop_ratio >= 0)
    c.train.drop_ratio = o.drop_ratio;
  if (o.mask_ratio >= 0)
    c.train.mask_ratio = o.mask_ratio;
  if (o.steps >= 0)
    c.train.steps = o.steps;
  c.train.seed = o.seed;
  c.train.validate();
  return c;
}

void cmd_pretrain(const Options &o, std::ostream &out, std::ostream &err) {
  if (o.out.empty())
    throw UsageError("pretrain needs --out DIR");
  const RunConfig cfg = run_config(o);
  std::filesystem::create_directories(o.out);
  const auto corpus = read_corpus_file(o.input);
  const PretrainResult r = pretrain(cfg, corpus, &err);
  const std::filesystem::path dir(o.out);
  save_checkpoint(r.final, (dir / "final.smed").string());
  save_checkpoint(r.best, (dir / "best.smed").string());
  std::ofstream csv(dir / "metrics.csv");
  write_metrics_csv(csv, r.metrics);
  out << json{ { "train_lines", r.train_lines },
               { "validation_lines", r.validation_lines },
               { "skipped_lines", r.skipped_lines },
               { "final_loss", r.metrics.back().loss_total } }.dump()
      << '\n';
}

void cmd_decode(const Options &o, std::ostream &out) {
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  with_output(o, out, [&](std::ostream &os) {
    for (const std::string &s: inputs(o)) {
      const IdSeq ids = encode(tokenize(s), ckpt.vocab, true);
      if (ids.size() > static_cast<std::size_t>(ckpt.model.max_len))
        throw LengthExceeded(ids.size(), static_cast<std::size_t>(ckpt.model.max_len));
      const DecodeResult r = decode_iterative(ckpt.params, ids, o.max_iters);
      const IdSeq content(r.ids.begin() + 1, r.ids.end() - 1);
      os << json{ { "input", s }, { "output", detokenize(decode(content, ckpt.vocab)) },
                  { "iterations", r.iterations }, { "converged", r.converged } }.dump()
         << '\n';
    }
  });
}

void cmd_probe(const Options &o, std::ostream &out) {
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  const ProbeExperiment e = probe_experiment(ckpt, read_corpus_file(o.input), o.seed);
  with_output(o, out, [&](std::ostream &os) { os << to_json(e) << '\n'; });
}

void cmd_eval_reconstruct(const Options &o, std::ostream &out) {
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  std::vector<std::string> corpus = read_corpus_file(o.input);
  if (o.holdout)
    corpus = split_corpus(corpus, static_cast<std::size_t>(ckpt.model.max_len)).validation;
  ReconstructionConfig rc;
  rc.drop_ratio = o.drop_ratio < 0 ? 0.15 : o.drop_ratio;
  rc.seed = o.seed;
  rc.max_iters = o.max_iters;
  const ReconstructionMetrics m = evaluate_reconstruction(ckpt, corpus, rc);
  with_output(o, out, [&](std::ostream &os) { os << to_json(m) << '\n'; });
}

void cmd_saturation(const Options &o, std::ostream &out) {
  std::vector<std::vector<MetricsRow>> runs;
  for (const std::string &path: o.metrics) {
    std::ifstream f(path);
    runs.push_back(read_metrics_csv(f));
  }
  const SaturationReport r = saturation_report(runs, o.warmup);
  with_output(o, out, [&](std::ostream &os) { write_saturation_csv(os, r); });
  if (!o.out.empty()) {
    json flags = { { "mlm_saturates_first", r.mlm_saturates_first },
                   { "tok_loss_highest", r.tok_loss_highest },
                   { "tok_above_del", r.tok_above_del },
                   { "tok_highest_share", r.tok_highest_share },
                   { "max_difference", r.max_difference } };
    flags["mlm_saturation_step"] =
        r.mlm_saturation_step ? json(*r.mlm_saturation_step) : json(nullptr);
    flags["edit_saturation_step"] =
        r.edit_saturation_step ? json(*r.edit_saturation_step) : json(nullptr);
    out << flags.dump() << '\n';
  }
}

void cmd_inspect(const Options &o, std::ostream &out) {
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  json tensors = json::array();
  const auto names = ckpt.params.tensor_names();
  const auto ts = ckpt.params.tensors();
  for (std::size_t k = 0; k < ts.size(); ++k)
    tensors.push_back({ { "name", names[k] }, { "shape", { ts[k]->rows(), ts[k]->cols() } } });
  json j = {
    { "version", ckpt.version },
    { "objective", objective_name(ckpt.train.objective) },
    { "configs", json::parse(configs_to_json(ckpt.model, ckpt.train)) },
    { "vocab_size", ckpt.vocab.size() },
    { "parameters", ckpt.params.num_parameters() },
    { "tensors", tensors },
  };
  with_output(o, out, [&](std::ostream &os) { os << j.dump(2) << '\n'; });
}

}  // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  Options o;
  CLI::App app{ "Edit-based SMILES pre-training toolkit", "smiedit" };
  app.require_subcommand(1);
  app.add_option("--seed", o.seed, "Seed for every stochastic step");
  app.add_option("--config", o.config, "Training config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output file or directory");
  app.add_option("--threads", o.threads, "Worker cap")->check(CLI::PositiveNumber);
  // Shared flags are accepted after the subcommand as well.
  app.fallthrough();

  auto input_opts = [&](CLI::App *sub) {
    auto *in = sub->add_option("--input", o.input, "One SMILES per line")
                   ->check(CLI::ExistingFile);
    auto *sm = sub->add_option("--smiles", o.smiles, "A single SMILES");
    in->excludes(sm);
  };
  auto ckpt_opt = [&](CLI::App *sub) {
    sub->add_option("--checkpoint", o.checkpoint, "Checkpoint file")
        ->required()
        ->check(CLI::ExistingFile);
  };

  auto *tok = app.add_subcommand("tokenize", "Token count and tokens per line");
  input_opts(tok);
  auto *frag = app.add_subcommand("fragment", "Fragments as JSON lines");
  input_opts(frag);
  auto *cor = app.add_subcommand("corrupt", "Corruption records as JSON lines");
  input_opts(cor);
  cor->add_option("--drop-ratio", o.drop_ratio)->check(CLI::Range(0.0, 1.0));
  auto *exp = app.add_subcommand("expert", "Expert edit plan as JSON");
  exp->add_option("--source", o.source)->required();
  exp->add_option("--target", o.target)->required();
  auto *pre = app.add_subcommand("pretrain", "Train and write checkpoints and metrics");
  pre->add_option("--input", o.input)->required()->check(CLI::ExistingFile);
  pre->add_option("--objective", o.objective)->check(CLI::IsMember({ "edit", "mlm" }));
  pre->add_option("--drop-ratio", o.drop_ratio)->check(CLI::Range(0.0, 1.0));
  pre->add_option("--mask-ratio", o.mask_ratio)->check(CLI::Range(0.0, 1.0));
  pre->add_option("--steps", o.steps)->check(CLI::NonNegativeNumber);
  auto *dec = app.add_subcommand("decode", "Iterative edit decoding");
  ckpt_opt(dec);
  input_opts(dec);
  dec->add_option("--max-iters", o.max_iters)->check(CLI::PositiveNumber);
  auto *probe = app.add_subcommand("probe", "Linear probe and perturbation shifts");
  ckpt_opt(probe);
  probe->add_option("--input", o.input)->required()->check(CLI::ExistingFile);
  auto *rec = app.add_subcommand("eval-reconstruct", "Reconstruction metrics");
  ckpt_opt(rec);
  rec->add_option("--input", o.input)->required()->check(CLI::ExistingFile);
  rec->add_option("--drop-ratio", o.drop_ratio)->check(CLI::Range(0.0, 1.0));
  rec->add_option("--max-iters", o.max_iters)->check(CLI::PositiveNumber);
  rec->add_flag("--holdout", o.holdout, "Only the held-out 5% split");
  auto *sat = app.add_subcommand("saturation-report", "Compare metrics files");
  sat->add_option("--metrics", o.metrics)->required()->check(CLI::ExistingFile);
  sat->add_option("--warmup", o.warmup)->check(CLI::NonNegativeNumber);
  auto *ins = app.add_subcommand("inspect-checkpoint", "Checkpoint summary");
  ckpt_opt(ins);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    Eigen::setNbThreads(o.threads);
    if (!pre->parsed())
      check_creatable(o.out);
    if (tok->parsed()) cmd_tokenize(o, out);
    else if (frag->parsed()) cmd_fragment(o, out);
    else if (cor->parsed()) cmd_corrupt(o, out);
    else if (exp->parsed()) cmd_expert(o, out);
    else if (pre->parsed()) cmd_pretrain(o, out, err);
    else if (dec->parsed()) cmd_decode(o, out);
    else if (probe->parsed()) cmd_probe(o, out);
    else if (rec->parsed()) cmd_eval_reconstruct(o, out);
    else if (sat->parsed()) cmd_saturation(o, out);
    else if (ins->parsed()) cmd_inspect(o, out);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace smiedit
