#pragma once

#include <string>

namespace luxland {

// Writes content to path via a temp file + rename so interrupted runs never
// leave a partially written artifact.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace luxland
