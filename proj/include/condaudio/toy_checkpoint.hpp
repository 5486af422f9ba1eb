#pragma once

#include <filesystem>

#include "condaudio/toy_model.hpp"

namespace condaudio::toy {

// Checkpoint container: magic "ACKP", version u16, config digest u64, then
// tagged named parameter blocks (frozen/trainable) with explicit shapes and
// little-endian IEEE-754 single-precision payloads.
constexpr std::uint16_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const ToyModel& model);

// Rebuilds the model for `config` and overwrites every parameter from the
// file. Refuses to load when the stored digest does not match the config.
ToyModel load_checkpoint(const std::filesystem::path& path, const ToyConfig& config);

}  // namespace condaudio::toy
