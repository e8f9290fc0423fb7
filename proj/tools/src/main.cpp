// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/cli.hpp"

int main(int argc, char** argv) { return dmgsl::cli::run(argc, argv); }
