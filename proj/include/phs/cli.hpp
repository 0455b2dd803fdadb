#pragma once

#include <string>
#include <vector>

namespace phs {
namespace cli {

// Runs the full command-line tool; returns the process exit code.
// Exit conventions: 0 success, 1 unsolved problems / failed verification,
// 2 configuration or parse errors.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace cli
}  // namespace phs
