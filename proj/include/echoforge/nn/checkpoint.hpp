#pragma once

#include <cstdint>
#include <filesystem>

#include "echoforge/nn/model.hpp"

namespace echoforge::nn {

// "EFCK" | u16 format version | u32 params version | u64 init seed | u32 block count
// then per block: u16 name length | name | u32 rows | u32 cols | f32 row-major values.
inline constexpr std::uint16_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params);
ModelParams<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace echoforge::nn
