//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_CLI_H_
#define SMIEDIT_CLI_H_

#include <iosfwd>

namespace smiedit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/*
 * Entry point of the smiedit tool. Subcommands: tokenize, fragment,
 * corrupt, expert, pretrain, decode, probe, eval-reconstruct,
 * saturation-report, inspect-checkpoint. Returns kExitUsage for bad flags
 * or configuration and kExitData when input data cannot be processed.
 */
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace smiedit

#endif  // SMIEDIT_CLI_H_
