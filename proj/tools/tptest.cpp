// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#include "tptest/cli.hpp"

int main(int argc, char** argv) { return tptest::run_cli(argc, argv); }
