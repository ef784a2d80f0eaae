#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cnnscope/tensor.hpp"

namespace cnnscope {

using Bytes = std::vector<std::uint8_t>;

/// Whole-file helpers; failures throw Error(Io) naming the path.
Bytes read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

/// "sha256:<hex>" over the tensor's little-endian binary32 values.
std::string tensor_digest(const Tensor3& t);

/// Little-endian binary32 encoding of a float sequence.
Bytes floats_to_le_bytes(std::span<const float> values);
std::vector<float> le_bytes_to_floats(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws Error(Format) on malformed input.
Bytes base64_decode(std::string_view text);

}  // namespace cnnscope
