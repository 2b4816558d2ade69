// SPDX-License-Identifier: Apache-2.0
#include "diw/error.hpp"

namespace diw {

FormatError::FormatError(const std::string& what, std::uint64_t offset)
    : Error(ExitCode::kData, what + " (at byte offset " + std::to_string(offset) + ")"),
      offset_(offset) {}

}  // namespace diw
