#pragma once

#include <string>
#include <vector>

namespace hdsp::cli {

// Runs one command (generate | train | evaluate | classify | export).
// Returns the process exit code; failures print a single
// `error:<category>:<message>` line on stderr.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace hdsp::cli
