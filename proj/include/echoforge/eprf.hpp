#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>

#include "echoforge/echo.hpp"

namespace echoforge::eprf {

// Record layout, all little-endian:
//   "EPRF" | u16 version | u8 channel code | u32 rows | u32 cols | rows*cols f32 (row-major)
// Channel code 0-3 = SS1, DS1, DS2, SS2 profiles; 4-7 = their differentials.

inline constexpr std::uint16_t kVersion = 1;

void write(std::ostream& os, const EchoProfile& ep, std::uint8_t channel_code);
std::pair<EchoProfile, std::uint8_t> read(std::istream& is);

void save(const std::filesystem::path& path, const EchoProfile& ep, std::uint8_t channel_code);
std::pair<EchoProfile, std::uint8_t> load(const std::filesystem::path& path);

/// A tensor is eight consecutive records with codes 0..7.
void save_tensor(const std::filesystem::path& path, const EchoTensor& t);
EchoTensor load_tensor(const std::filesystem::path& path);

}  // namespace echoforge::eprf
