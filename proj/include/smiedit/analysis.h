//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_ANALYSIS_H_
#define SMIEDIT_ANALYSIS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smiedit/molgraph.h"
#include "smiedit/trainer.h"

namespace smiedit {

enum class GroupKind { kHydroxyl, kCarboxyl, kPrimaryAmine };

std::string_view group_name(GroupKind k) noexcept;

struct GroupMatch {
  GroupKind kind;
  std::vector<AtomIndex> atoms;  // sorted
  // The atom outside the group it is bonded to; for a group that forms a
  // whole component, its lowest atom.
  AtomIndex anchor;
  bool attached = true;
};

/*
 * Hydrophilic groups, all atoms plain (non-aromatic, uncharged, no bracket
 * hydrogens) and "terminal" meaning degree 1:
 *   carboxyl       carbon with a double bond to a terminal O and a single
 *                  bond to a terminal O; claims all three atoms
 *   hydroxyl       terminal single-bonded O not claimed by a carboxyl
 *   primary_amine  terminal single-bonded N whose neighbor is a carbon with
 *                  no double bond to O
 * Matches are disjoint and ordered by (anchor, first atom).
 */
std::vector<GroupMatch> match_hydrophilic_groups(const MolGraph &g);

enum class Perturbation { kHgDelete, kRandDelete, kHgReplace };

std::string_view perturbation_name(Perturbation p) noexcept;

/*
 * hg_delete   removes every matched group atom
 * rand_delete removes as many uniformly chosen atoms as hg_delete would
 * hg_replace  swaps each group for a carbon chain of equal heavy-atom
 *             count bonded to the anchor by a single bond
 * Throws NoGroups for the hg kinds on a molecule without matches and
 * EmptySelection when nothing would remain.
 */
MolGraph perturb(const MolGraph &g, Perturbation kind, std::uint64_t seed = 0);

// (20 * hydroxyl + 30 * carboxyl + 20 * primary_amine - carbons) / 10.
double synthetic_hydrophilicity(const MolGraph &g);

// (mean(a) - mean(b)) over the pooled standard deviation.
double cohens_d(std::span<const double> a, std::span<const double> b);

struct ShiftStats {
  std::vector<double> shifts;  // prediction(perturbed) - prediction(original)
  double mean = 0;
  double sd = 0;  // sample standard deviation
};

struct ShiftRecord {
  std::string smiles;
  std::size_t groups = 0;
  std::size_t removed_atoms = 0;
  double prediction = 0;
  double hg_delete = 0, rand_delete = 0, hg_replace = 0;
  double true_hg_delete = 0, true_rand_delete = 0, true_hg_replace = 0;
};

struct ShiftReport {
  std::vector<ShiftRecord> molecules;
  ShiftStats hg_delete, rand_delete, hg_replace;
  ShiftStats true_hg_delete, true_rand_delete, true_hg_replace;
  double d_delete = 0;   // hg_delete vs rand_delete
  double d_replace = 0;  // hg_replace vs rand_delete
  std::size_t skipped = 0;  // no groups, unparseable, or too long
};

/*
 * Shifts of the probe prediction under each perturbation for every corpus
 * molecule with at least one group. rand_delete for line i draws from
 * derive_seed(seed, {i}). Throws EmptyCohort when no molecule qualifies.
 */
ShiftReport probe_shift_report(const Checkpoint &ckpt, const Probe &probe,
                               std::span<const std::string> corpus,
                               std::uint64_t seed);

std::string to_json(const ShiftReport &r);

struct ProbeExperiment {
  Probe probe;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  double validation_label_sd = 0;  // population standard deviation
  ShiftReport report;
};

/*
 * Fits a probe on synthetic_hydrophilicity labels of the first half of the
 * corpus, validates it on the second half, and reports perturbation shifts
 * over the second half.
 */
ProbeExperiment probe_experiment(const Checkpoint &ckpt,
                                 std::span<const std::string> corpus,
                                 std::uint64_t seed);

std::string to_json(const ProbeExperiment &e);

struct ReconstructionConfig {
  double drop_ratio = 0.15;
  std::uint64_t seed = 0;
  int max_iters = 10;
};

struct ReconstructionMetrics {
  std::size_t molecules = 0;
  std::size_t skipped = 0;
  double exact_rate = 0;
  double isomorphic_rate = 0;
  double mean_residual_distance = 0;
  // The same rates restricted to molecules that lost at least one fragment.
  std::size_t edited = 0;
  double edited_exact_rate = 0;
  double edited_isomorphic_rate = 0;
};

/*
 * Corrupts line i with derive_seed(seed, {i}), decodes and compares with
 * the original: token-exact, graph-isomorphic after re-parsing, and the
 * residual insert/delete distance.
 */
ReconstructionMetrics evaluate_reconstruction(const Checkpoint &ckpt,
                                              std::span<const std::string> corpus,
                                              const ReconstructionConfig &cfg);

std::string to_json(const ReconstructionMetrics &m);

inline constexpr std::string_view kSaturationHeader =
    "step,mlm_acc_mask,edit_acc_tok,edit_loss_tok,edit_loss_del,"
    "edit_loss_ins,edit_loss_dualdel";

struct SaturationRow {
  int step = 0;
  std::optional<double> mlm_acc_mask;
  std::optional<double> edit_acc_tok;
  std::optional<std::array<double, 4>> edit_losses;  // objective component order
};

struct SaturationReport {
  std::vector<SaturationRow> rows;  // union of steps, ascending
  // First logged step at which accuracy reaches 90% of the run's final value.
  std::optional<int> mlm_saturation_step;
  std::optional<int> edit_saturation_step;
  bool mlm_saturates_first = false;
  // Share of post-warmup edit rows with loss_tok above loss_del, and above
  // both loss_del and loss_ins.
  double tok_above_del = 0;
  double tok_highest_share = 0;
  bool tok_loss_highest = false;  // tok_highest_share >= 0.9
  // Largest absolute difference between runs of the same objective.
  double max_difference = 0;
};

/*
 * Runs are classified by their columns: mask accuracy marks an MLM run,
 * loss components an edit run. The first run of each kind fills the table.
 * Rows with step <= warmup are ignored by the loss-ordering flag.
 * Throws SchemaError when a run is empty or of neither kind.
 */
SaturationReport saturation_report(std::span<const std::vector<MetricsRow>> runs,
                                   int warmup);

void write_saturation_csv(std::ostream &os, const SaturationReport &r);

}  // namespace smiedit

#endif  // SMIEDIT_ANALYSIS_H_
