#pragma once

#include <ostream>
#include <span>
#include <string>

namespace aead {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command. `args` excludes the program name. Every option may also
/// be supplied through an AEAD_<OPTION> environment variable (e.g. AEAD_SEED).
/// Returns 0 on success, 1 on runtime/data errors and 2 on usage errors.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace aead
