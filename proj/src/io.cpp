#include "dcm/io.hpp"

#include <string>

#include "dcm/errors.hpp"

namespace dcm::io {

void write_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), b.size());
}

void write_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), b.size());
}

std::uint32_t read_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) throw FormatError("unexpected end of file");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) throw FormatError("unexpected end of file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void write_header(std::ostream& os, std::string_view magic, std::uint32_t version) {
  os.write(magic.data(), 4);
  write_u32(os, version);
}

std::uint32_t read_header(std::istream& is, std::string_view magic) {
  std::array<char, 4> tag{};
  if (!is.read(tag.data(), 4) || std::string_view(tag.data(), 4) != magic.substr(0, 4))
    throw FormatError("bad magic, expected " + std::string(magic));
  return read_u32(is);
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, binary ? std::ios::binary | std::ios::out : std::ios::out);
  if (!os) throw RuntimeFailure("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary | std::ios::in : std::ios::in);
  if (!is) throw ValidationError("cannot open for reading: " + path.string());
  return is;
}

}  // namespace dcm::io
