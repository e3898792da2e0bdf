#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wfforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Entry points of the two executables. args[0] is the program name.
int wfforge_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int taskbench_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Default seed: WFFORGE_SEED when set, otherwise 0.
unsigned long long default_seed();

} // namespace wfforge::cli
