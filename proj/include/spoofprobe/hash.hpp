#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace spoofprobe {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace spoofprobe
