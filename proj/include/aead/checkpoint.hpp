#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "aead/data.hpp"
#include "aead/losses.hpp"
#include "aead/models.hpp"
#include "aead/nn.hpp"

namespace aead {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to score new data with a trained model.
struct Checkpoint {
    ArchitectureSpec spec;
    Network net;
    Normalizer normalizer;
    std::uint64_t seed = 0;
    LossConfig loss;

    bool operator==(const Checkpoint&) const = default;
};

/// JSON document; every parameter is stored as a hex-float string so that
/// loading reproduces the exact bits.
std::string checkpoint_to_json(const Checkpoint& checkpoint);

/// Throws VersionError for another format version and FormatError for
/// anything else that does not describe a consistent model.
Checkpoint checkpoint_from_json(std::string_view text);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

/// IoError when the file cannot be read; otherwise as checkpoint_from_json.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace aead
