#pragma once

#include <string>

#include "pikan/trainer.hpp"

namespace pikan {

inline constexpr uint32_t kCheckpointVersion = 1;

/// Binary checkpoint container with a versioned header. Everything is
/// stored as raw little-endian bytes, so a save/load round trip is
/// bit-exact. A full checkpoint embeds the model, optimizer state,
/// collocation set, attention weights, Sobol cursor, RNG state and epoch
/// index; a model-only checkpoint stops after the model section.
void save_model(const std::string& path, const KanModel& model);
KanModel load_model(const std::string& path);

void save_checkpoint(const std::string& path, const TrainState& state);
TrainState load_checkpoint(const std::string& path);

}  // namespace pikan
