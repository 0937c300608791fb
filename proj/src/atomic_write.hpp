#pragma once

#include <string>

namespace formsim {

// Writes `contents` to `path` through a temporary sibling that is renamed
// into place, so readers never observe a partially written file. Throws
// IoError with the offending path on any filesystem failure.
void atomic_write_file(const std::string& path, const std::string& contents);

}  // namespace formsim
