#pragma once

#include <string>
#include <vector>

namespace hsps {

/// Entry point behind the hsps binary; returns the process exit code
/// (0 success, 2 config error, 3 data error, 4 fit error).
int cli_main(int argc, const char* const* argv);

/// Convenience overload for in-process tests.
int cli_run(const std::vector<std::string>& args);

/// FNV-1a 64-bit hash of a byte string, printed as 16 hex digits; every
/// output file embeds the hash of the exact config bytes that produced it.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace hsps
