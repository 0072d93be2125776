#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

namespace bloomemb {

/// Runs `writer` against a temporary file next to `destination` and renames it
/// into place once the stream is flushed without error.
void write_atomically(const std::filesystem::path& destination,
                      const std::function<void(std::ostream&)>& writer, bool binary = false);

/// Throws DataError if the file cannot be opened.
std::ifstream open_input(const std::filesystem::path& source, bool binary = false);

}  // namespace bloomemb
