#pragma once

#include <filesystem>
#include <string>

#include "halfmoll/grid.hpp"

namespace halfmoll {

// Binary layout: 8-byte magic "HMFIELD1", uint64 little-endian header length,
// UTF-8 JSON header, then float64 little-endian values in layout order.
void write_binary(const SampledField& field, const std::filesystem::path& path);
SampledField read_binary(const std::filesystem::path& path);

// JSON header describing the field (also embedded in the binary file).
std::string field_header_json(const SampledField& field);

// One row per node: coordinates (t first when present), then the value.
void write_csv(const SampledField& field, const std::filesystem::path& path);

}  // namespace halfmoll
