#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace diraccbd::cli {

/// Runs one command line (`args[0]` is the program name) and returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace diraccbd::cli
