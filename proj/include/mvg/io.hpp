#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mvg/tensor.hpp"

namespace mvg::io {

// ---- named-array binary archive (little-endian, versioned) ----
void save_archive(const std::string& path,
                  const std::vector<std::pair<std::string, Tensor>>& arrays);
std::map<std::string, Tensor> load_archive(const std::string& path);

// ---- content hashing (FNV-1a 64, hex) ----
std::string bytes_hash_hex(const void* data, std::size_t n);
std::string file_hash_hex(const std::string& path);
std::string combine_hashes(const std::vector<std::string>& parts);

// ---- files ----
void atomic_write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

// ---- 8-bit raster (binary PPM), values mapped linearly [-1,1] <-> [0,255] ----
std::uint8_t quant8(double v);
double dequant8(std::uint8_t q);
void write_ppm(const std::string& path, const std::uint8_t* rgb_chw, std::size_t h, std::size_t w);
std::vector<std::uint8_t> read_ppm(const std::string& path, std::size_t& h, std::size_t& w);

// Animated GIF with a fixed 6x6x6 color cube (derived preview output, never
// authoritative). Frames are CHW uint8.
void write_gif(const std::string& path, const std::vector<const std::uint8_t*>& frames_chw,
               std::size_t h, std::size_t w, int delay_cs);

} // namespace mvg::io
