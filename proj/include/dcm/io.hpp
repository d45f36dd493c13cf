#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace dcm::io {

void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);

/// Writes a 4-byte magic tag followed by a u32 version.
void write_header(std::ostream& os, std::string_view magic, std::uint32_t version);
/// Reads and checks the magic tag; returns the version.
std::uint32_t read_header(std::istream& is, std::string_view magic);

std::ofstream open_out(const std::filesystem::path& path, bool binary = false);
std::ifstream open_in(const std::filesystem::path& path, bool binary = false);

}  // namespace dcm::io
