#pragma once

#include <filesystem>
#include <functional>
#include <ostream>

namespace aead {

/// Writes through `<path>.partial` and renames over `path` only after
/// `writer` returns and the stream is flushed. On any failure the partial
/// file is removed and the error rethrown, so `path` is never left truncated.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

}  // namespace aead
