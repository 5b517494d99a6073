#include "aead/io.hpp"

#include <fstream>

#include <fmt/core.h>

#include "aead/error.hpp"

namespace aead {

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
    auto partial = path;
    partial += ".partial";
    try {
        {
            std::ofstream out(partial, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
            }
            writer(out);
            out.flush();
            if (!out) {
                throw IoError(fmt::format("failed while writing '{}'", path.string()));
            }
        }
        std::error_code ec;
        std::filesystem::rename(partial, path, ec);
        if (ec) {
            throw IoError(fmt::format("cannot move '{}' into place: {}", path.string(), ec.message()));
        }
    } catch (...) {
        std::error_code ignored;
        std::filesystem::remove(partial, ignored);
        throw;
    }
}

}  // namespace aead
