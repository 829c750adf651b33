#pragma once

#include <iosfwd>

namespace deconvkit {

namespace exit_code {
constexpr int ok = 0;
constexpr int failure = 1;
constexpr int variance_order = 2;
constexpr int parse = 3;
constexpr int unknown_scenario = 4;
constexpr int usage = 64;
} // namespace exit_code

/// Entry point of the `deconvkit` tool. Subcommands: deconvolve, simulate, plot.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace deconvkit
