//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <iostream>

#include "smiedit/cli.h"

int main(int argc, char **argv) {
  return smiedit::run(argc, argv, std::cout, std::cerr);
}
