#ifndef AQSKETCH_CLI_HPP_
#define AQSKETCH_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace aqsketch::cli {

// Exit codes: 0 success, 2 usage, 3 data/parameter error, 4 invariant
// failure.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_data = 3;
inline constexpr int exit_invariant = 4;

// Runs the command line against the given streams; args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace aqsketch::cli

#endif
