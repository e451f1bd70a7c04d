//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "smiedit/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include "json.hpp"

#include "smiedit/edit_expert.h"
#include "smiedit/errors.h"
#include "smiedit/fragmenter.h"
#include "smiedit/smiles.h"

namespace smiedit {
namespace {

using json = nlohmann::json;

bool plain(const Atom &a, std::string_view element) {
  return a.element == element && !a.aromatic && a.formal_charge == 0
         && !a.explicit_h && !a.isotope;
}

// Degree-1 atom whose only bond has `order`.
bool terminal(const MolGraph &g, AtomIndex i, BondOrder order) {
  return g.degree(i) == 1 && g.bond(g.neighbors(i)[0].bond).order == order;
}

bool has_double_to_oxygen(const MolGraph &g, AtomIndex c) {
  for (const Neighbor &n: g.neighbors(c))
    if (g.bond(n.bond).order == BondOrder::kDouble && g.atom(n.atom).element == "O")
      return true;
  return false;
}

ShiftStats make_stats(std::vector<double> v) {
  ShiftStats s;
  s.shifts = std::move(v);
  const double n = static_cast<double>(s.shifts.size());
  if (s.shifts.empty())
    return s;
  s.mean = std::accumulate(s.shifts.begin(), s.shifts.end(), 0.0) / n;
  if (s.shifts.size() > 1) {
    double ss = 0;
    for (double x: s.shifts)
      ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / (n - 1));
  }
  return s;
}

json stats_json(const ShiftStats &s) {
  return { { "mean", s.mean }, { "sd", s.sd }, { "n", s.shifts.size() } };
}

IdSeq strip(const IdSeq &s) {
  return IdSeq(s.begin() + 1, s.end() - 1);
}

}  // namespace

std::string_view group_name(GroupKind k) noexcept {
  switch (k) {
  case GroupKind::kHydroxyl: return "hydroxyl";
  case GroupKind::kCarboxyl: return "carboxyl";
  case GroupKind::kPrimaryAmine: return "primary_amine";
  }
  return "?";
}

std::string_view perturbation_name(Perturbation p) noexcept {
  switch (p) {
  case Perturbation::kHgDelete: return "hg_delete";
  case Perturbation::kRandDelete: return "rand_delete";
  case Perturbation::kHgReplace: return "hg_replace";
  }
  return "?";
}

std::vector<GroupMatch> match_hydrophilic_groups(const MolGraph &g) {
  const std::size_t n = g.num_atoms();
  std::vector<bool> claimed(n, false);
  std::vector<GroupMatch> out;
  auto terminal_oxygen = [&](AtomIndex i, BondOrder order) {
    return !claimed[i] && plain(g.atom(i), "O") && terminal(g, i, order);
  };

  for (AtomIndex c = 0; c < n; ++c) {
    if (!plain(g.atom(c), "C"))
      continue;
    std::optional<AtomIndex> dbl, sgl;
    for (const Neighbor &nb: g.neighbors(c)) {
      if (!dbl && terminal_oxygen(nb.atom, BondOrder::kDouble))
        dbl = nb.atom;
      else if (!sgl && terminal_oxygen(nb.atom, BondOrder::kSingle))
        sgl = nb.atom;
    }
    if (!dbl || !sgl)
      continue;
    GroupMatch m{ GroupKind::kCarboxyl, { c, *dbl, *sgl }, c, false };
    std::sort(m.atoms.begin(), m.atoms.end());
    for (AtomIndex a: m.atoms)
      claimed[a] = true;
    for (const Neighbor &nb: g.neighbors(c)) {
      if (!claimed[nb.atom]) {
        m.anchor = nb.atom;
        m.attached = true;
        break;
      }
    }
    if (!m.attached)
      m.anchor = m.atoms.front();
    out.push_back(std::move(m));
  }

  for (AtomIndex i = 0; i < n; ++i) {
    if (claimed[i])
      continue;
    const Atom &a = g.atom(i);
    if (terminal_oxygen(i, BondOrder::kSingle)) {
      out.push_back({ GroupKind::kHydroxyl, { i }, g.neighbors(i)[0].atom, true });
      claimed[i] = true;
    } else if (plain(a, "N") && terminal(g, i, BondOrder::kSingle)) {
      const AtomIndex c = g.neighbors(i)[0].atom;
      if (g.atom(c).element == "C" && !has_double_to_oxygen(g, c)) {
        out.push_back({ GroupKind::kPrimaryAmine, { i }, c, true });
        claimed[i] = true;
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const GroupMatch &x, const GroupMatch &y) {
    return std::pair(x.anchor, x.atoms.front()) < std::pair(y.anchor, y.atoms.front());
  });
  return out;
}

MolGraph perturb(const MolGraph &g, Perturbation kind, std::uint64_t seed) {
  const std::vector<GroupMatch> matches = match_hydrophilic_groups(g);
  if (kind != Perturbation::kRandDelete && matches.empty())
    throw NoGroups();
  const std::size_t n = g.num_atoms();
  std::vector<bool> in_group(n, false);
  std::size_t group_atoms = 0;
  for (const GroupMatch &m: matches) {
    for (AtomIndex a: m.atoms)
      in_group[a] = true;
    group_atoms += m.atoms.size();
  }

  std::vector<AtomIndex> keep;
  if (kind == Perturbation::kRandDelete) {
    if (group_atoms == 0)
      return g;
    std::vector<AtomIndex> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    // Partial Fisher-Yates: the first group_atoms entries are removed.
    for (std::size_t i = 0; i < group_atoms && i < n; ++i)
      std::swap(order[i], order[i + rng.index(n - i)]);
    keep.assign(order.begin() + std::min(group_atoms, n), order.end());
    std::sort(keep.begin(), keep.end());
    return induced_subgraph(g, keep);
  }
  for (AtomIndex i = 0; i < n; ++i)
    if (!in_group[i])
      keep.push_back(i);
  if (kind == Perturbation::kHgDelete)
    return induced_subgraph(g, keep);

  // The replacement restores every severed anchor bond, so kept atoms are
  // copied unchanged.
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<std::size_t> old_to_new(n, SIZE_MAX);
  for (AtomIndex i: keep) {
    old_to_new[i] = atoms.size();
    atoms.push_back(g.atom(i));
  }
  for (const Bond &b: g.bonds())
    if (!in_group[b.begin] && !in_group[b.end])
      bonds.push_back({ old_to_new[b.begin], old_to_new[b.end], b.order, false });
  for (const GroupMatch &m: matches) {
    const std::size_t first = atoms.size();
    for (std::size_t k = 0; k < m.atoms.size(); ++k) {
      Atom c;
      c.element = "C";
      atoms.push_back(c);
      if (k > 0)
        bonds.push_back({ first + k - 1, first + k, BondOrder::kSingle, false });
    }
    if (m.attached && !in_group[m.anchor])
      bonds.push_back({ old_to_new[m.anchor], first, BondOrder::kSingle, false });
  }
  return MolGraph(std::move(atoms), std::move(bonds));
}

double synthetic_hydrophilicity(const MolGraph &g) {
  long tenths = 0;
  for (const GroupMatch &m: match_hydrophilic_groups(g)) {
    switch (m.kind) {
    case GroupKind::kHydroxyl: tenths += 20; break;
    case GroupKind::kCarboxyl: tenths += 30; break;
    case GroupKind::kPrimaryAmine: tenths += 20; break;
    }
  }
  for (const Atom &a: g.atoms())
    tenths -= a.element == "C";
  return static_cast<double>(tenths) / 10.0;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    return std::numeric_limits<double>::quiet_NaN();
  const ShiftStats sa = make_stats({ a.begin(), a.end() });
  const ShiftStats sb = make_stats({ b.begin(), b.end() });
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled = std::sqrt(((na - 1) * sa.sd * sa.sd + (nb - 1) * sb.sd * sb.sd)
                                  / (na + nb - 2));
  const double diff = sa.mean - sb.mean;
  if (pooled == 0.0)
    return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
  return diff / pooled;
}

ShiftReport probe_shift_report(const Checkpoint &ckpt, const Probe &probe,
                               std::span<const std::string> corpus,
                               std::uint64_t seed) {
  ShiftReport r;
  std::vector<double> del, rnd, rep, tdel, trnd, trep;
  auto predict = [&](const std::string &s) {
    return probe.predict(pooled_features(ckpt.params, ckpt.vocab, s));
  };
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    try {
      const MolGraph g = parse_smiles(corpus[i]);
      const auto matches = match_hydrophilic_groups(g);
      if (matches.empty()) {
        ++r.skipped;
        continue;
      }
      ShiftRecord rec;
      rec.smiles = corpus[i];
      rec.groups = matches.size();
      for (const GroupMatch &m: matches)
        rec.removed_atoms += m.atoms.size();
      const MolGraph gd = perturb(g, Perturbation::kHgDelete);
      const MolGraph gr = perturb(g, Perturbation::kRandDelete, derive_seed(seed, { i }));
      const MolGraph gp = perturb(g, Perturbation::kHgReplace);
      rec.prediction = predict(corpus[i]);
      rec.hg_delete = predict(write_smiles(gd)) - rec.prediction;
      rec.rand_delete = predict(write_smiles(gr)) - rec.prediction;
      rec.hg_replace = predict(write_smiles(gp)) - rec.prediction;
      const double truth = synthetic_hydrophilicity(g);
      rec.true_hg_delete = synthetic_hydrophilicity(gd) - truth;
      rec.true_rand_delete = synthetic_hydrophilicity(gr) - truth;
      rec.true_hg_replace = synthetic_hydrophilicity(gp) - truth;
      r.molecules.push_back(std::move(rec));
    } catch (const Error &) {
      ++r.skipped;
    }
  }
  if (r.molecules.empty())
    throw EmptyCohort();
  for (const ShiftRecord &m: r.molecules) {
    del.push_back(m.hg_delete);
    rnd.push_back(m.rand_delete);
    rep.push_back(m.hg_replace);
    tdel.push_back(m.true_hg_delete);
    trnd.push_back(m.true_rand_delete);
    trep.push_back(m.true_hg_replace);
  }
  r.hg_delete = make_stats(std::move(del));
  r.rand_delete = make_stats(std::move(rnd));
  r.hg_replace = make_stats(std::move(rep));
  r.true_hg_delete = make_stats(std::move(tdel));
  r.true_rand_delete = make_stats(std::move(trnd));
  r.true_hg_replace = make_stats(std::move(trep));
  r.d_delete = cohens_d(r.hg_delete.shifts, r.rand_delete.shifts);
  r.d_replace = cohens_d(r.hg_replace.shifts, r.rand_delete.shifts);
  return r;
}

namespace {

json report_json(const ShiftReport &r) {
  json mols = json::array();
  for (const ShiftRecord &m: r.molecules)
    mols.push_back({ { "smiles", m.smiles }, { "groups", m.groups },
                     { "removed_atoms", m.removed_atoms },
                     { "prediction", m.prediction },
                     { "hg_delete", m.hg_delete }, { "rand_delete", m.rand_delete },
                     { "hg_replace", m.hg_replace },
                     { "true_hg_delete", m.true_hg_delete },
                     { "true_rand_delete", m.true_rand_delete },
                     { "true_hg_replace", m.true_hg_replace } });
  json j = {
    { "molecules", r.molecules.size() },
    { "skipped", r.skipped },
    { "hg_delete", stats_json(r.hg_delete) },
    { "rand_delete", stats_json(r.rand_delete) },
    { "hg_replace", stats_json(r.hg_replace) },
    { "true_hg_delete", stats_json(r.true_hg_delete) },
    { "true_rand_delete", stats_json(r.true_rand_delete) },
    { "true_hg_replace", stats_json(r.true_hg_replace) },
    { "cohens_d_hg_delete_vs_rand_delete", r.d_delete },
    { "cohens_d_hg_replace_vs_rand_delete", r.d_replace },
    { "per_molecule", mols },
  };
  return j;
}

}  // namespace

std::string to_json(const ShiftReport &r) {
  return report_json(r).dump(2);
}

ProbeExperiment probe_experiment(const Checkpoint &ckpt,
                                 std::span<const std::string> corpus,
                                 std::uint64_t seed) {
  const std::size_t half = corpus.size() / 2;
  const std::size_t max_len = static_cast<std::size_t>(ckpt.model.max_len);
  std::vector<LabeledSmiles> train, val;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    try {
      const MolGraph g = parse_smiles(corpus[i]);
      if (tokenize(corpus[i]).size() + 2 > max_len)
        continue;
      (i < half ? train : val).emplace_back(corpus[i], synthetic_hydrophilicity(g));
    } catch (const Error &) {
    }
  }
  ProbeExperiment e;
  e.probe = finetune_probe(ckpt, train, val);
  e.train_rows = train.size();
  e.validation_rows = val.size();
  std::vector<double> labels;
  for (const auto &[s, y]: val)
    labels.push_back(y);
  const ShiftStats st = make_stats(labels);
  const double n = static_cast<double>(labels.size());
  e.validation_label_sd = n > 1 ? st.sd * std::sqrt((n - 1) / n) : 0.0;
  e.report = probe_shift_report(ckpt, e.probe, corpus.subspan(half), seed);
  return e;
}

std::string to_json(const ProbeExperiment &e) {
  json j = {
    { "probe", { { "train_rows", e.train_rows },
                 { "validation_rows", e.validation_rows },
                 { "train_rmse", e.probe.train_rmse },
                 { "validation_rmse", e.probe.validation_rmse },
                 { "validation_label_sd", e.validation_label_sd },
                 { "ridge", kProbeRidge } } },
    { "report", report_json(e.report) },
  };
  return j.dump(2);
}

ReconstructionMetrics evaluate_reconstruction(const Checkpoint &ckpt,
                                              std::span<const std::string> corpus,
                                              const ReconstructionConfig &cfg) {
  ReconstructionMetrics m;
  const std::size_t max_len = static_cast<std::size_t>(ckpt.model.max_len);
  std::size_t exact = 0, iso = 0, edited_exact = 0, edited_iso = 0;
  double residual = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CorruptionRecord rec;
    IdSeq target, y0;
    try {
      CorruptionConfig cc;
      cc.drop_ratio = cfg.drop_ratio;
      cc.seed = derive_seed(cfg.seed, { i });
      rec = corrupt(parse_smiles(corpus[i]), cc, corpus[i]);
      target = encode(tokenize(corpus[i]), ckpt.vocab, true);
      y0 = encode(tokenize(rec.corrupted_smiles), ckpt.vocab, true);
    } catch (const Error &) {
      ++m.skipped;
      continue;
    }
    if (target.size() > max_len || y0.size() > max_len) {
      ++m.skipped;
      continue;
    }
    const DecodeResult out = decode_iterative(ckpt.params, y0, cfg.max_iters);
    const bool is_exact = out.ids == target;
    bool is_iso = false;
    try {
      const std::string text = detokenize(decode(strip(out.ids), ckpt.vocab));
      is_iso = isomorphic(parse_smiles(text), rec.original);
    } catch (const Error &) {
    }
    ++m.molecules;
    exact += is_exact;
    iso += is_iso;
    residual += static_cast<double>(edit_distance(strip(out.ids), strip(target)));
    if (!rec.dropped.empty()) {
      ++m.edited;
      edited_exact += is_exact;
      edited_iso += is_iso;
    }
  }
  auto rate = [](std::size_t k, std::size_t n) {
    return n ? static_cast<double>(k) / static_cast<double>(n) : 0.0;
  };
  m.exact_rate = rate(exact, m.molecules);
  m.isomorphic_rate = rate(iso, m.molecules);
  m.mean_residual_distance = m.molecules ? residual / static_cast<double>(m.molecules) : 0.0;
  m.edited_exact_rate = rate(edited_exact, m.edited);
  m.edited_isomorphic_rate = rate(edited_iso, m.edited);
  return m;
}

std::string to_json(const ReconstructionMetrics &m) {
  json j = {
    { "molecules", m.molecules },
    { "skipped", m.skipped },
    { "exact_match_rate", m.exact_rate },
    { "isomorphic_match_rate", m.isomorphic_rate },
    { "mean_residual_edit_distance", m.mean_residual_distance },
    { "edited_molecules", m.edited },
    { "edited_exact_match_rate", m.edited_exact_rate },
    { "edited_isomorphic_match_rate", m.edited_isomorphic_rate },
  };
  return j.dump(2);
}

SaturationReport saturation_report(std::span<const std::vector<MetricsRow>> runs,
                                   int warmup) {
  const std::vector<MetricsRow> *mlm = nullptr, *edit = nullptr;
  SaturationReport r;
  auto numbers = [](const MetricsRow &row) {
    std::vector<std::optional<double>> v = { row.lr, row.loss_total, row.acc_tok,
                                             row.acc_mask };
    for (int c = 0; c < 4; ++c)
      v.push_back(row.components ? std::optional((*row.components)[c])
                                 : std::nullopt);
    return v;
  };
  auto compare = [&](const std::vector<MetricsRow> &a,
                     const std::vector<MetricsRow> &b) {
    if (a.size() != b.size()) {
      r.max_difference = INFINITY;
      return;
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k].step != b[k].step) {
        r.max_difference = INFINITY;
        return;
      }
      const auto x = numbers(a[k]), y = numbers(b[k]);
      for (std::size_t f = 0; f < x.size(); ++f) {
        if (x[f].has_value() != y[f].has_value())
          r.max_difference = INFINITY;
        else if (x[f])
          r.max_difference = std::max(r.max_difference, std::abs(*x[f] - *y[f]));
      }
    }
  };
  for (const auto &run: runs) {
    if (run.empty())
      throw SchemaError("metrics run has no rows");
    const bool is_mlm = run.front().acc_mask.has_value();
    const bool is_edit = run.front().components.has_value();
    if (is_mlm == is_edit)
      throw SchemaError("metrics run is neither an MLM nor an edit run");
    const std::vector<MetricsRow> *&slot = is_mlm ? mlm : edit;
    if (slot)
      compare(*slot, run);
    else
      slot = &run;
  }

  std::map<int, SaturationRow> table;
  if (mlm)
    for (const MetricsRow &row: *mlm) {
      table[row.step].step = row.step;
      table[row.step].mlm_acc_mask = row.acc_mask;
    }
  if (edit)
    for (const MetricsRow &row: *edit) {
      table[row.step].step = row.step;
      table[row.step].edit_acc_tok = row.acc_tok;
      table[row.step].edit_losses = row.components;
    }
  for (const auto &[step, row]: table)
    r.rows.push_back(row);

  auto saturation = [](const std::vector<MetricsRow> &run, bool mask)
      -> std::optional<int> {
    auto acc = [&](const MetricsRow &row) {
      return mask ? row.acc_mask : row.acc_tok;
    };
    if (!acc(run.back()))
      return std::nullopt;
    const double threshold = 0.9 * *acc(run.back());
    for (const MetricsRow &row: run)
      if (acc(row) && *acc(row) >= threshold)
        return row.step;
    return std::nullopt;
  };
  if (mlm)
    r.mlm_saturation_step = saturation(*mlm, true);
  if (edit)
    r.edit_saturation_step = saturation(*edit, false);
  r.mlm_saturates_first = r.mlm_saturation_step && r.edit_saturation_step
                          && *r.mlm_saturation_step < *r.edit_saturation_step;

  if (edit) {
    std::size_t after = 0, above_del = 0, highest = 0;
    for (const MetricsRow &row: *edit) {
      if (row.step <= warmup || !row.components)
        continue;
      const auto &c = *row.components;
      ++after;
      above_del += c[kTok] > c[kDel];
      highest += c[kTok] > c[kDel] && c[kTok] > c[kIns];
    }
    if (after) {
      r.tok_above_del = static_cast<double>(above_del) / static_cast<double>(after);
      r.tok_highest_share = static_cast<double>(highest) / static_cast<double>(after);
    }
    r.tok_loss_highest = after > 0 && r.tok_highest_share >= 0.9;
  }
  return r;
}

void write_saturation_csv(std::ostream &os, const SaturationReport &r) {
  os << kSaturationHeader << '\n';
  auto field = [](const std::optional<double> &v) {
    if (!v)
      return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", *v);
    return std::string(buf);
  };
  for (const SaturationRow &row: r.rows) {
    os << row.step << ',' << field(row.mlm_acc_mask) << ','
       << field(row.edit_acc_tok);
    for (int c: { kTok, kDel, kIns, kDualDel })
      os << ',' << (row.edit_losses ? field((*row.edit_losses)[c]) : "");
    os << '\n';
  }
}

}  // namespace smiedit
