// SPDX-License-Identifier: Apache-2.0
#include "scsp/cli.hpp"

int main(int argc, char** argv) { return scsp::cli::main(argc, argv); }
