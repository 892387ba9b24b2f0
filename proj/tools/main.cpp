// SPDX-License-Identifier: Apache-2.0

#include "xalign/cli.hpp"

int main(int argc, char** argv) {
    return xalign::cli::run_main(argc, argv);
}
