#pragma once

#include <string>

#include "torusperc/sampler.hpp"

namespace torusperc {

// Flat binary field file, little-endian: magic "TPFB", u32 version, u32 d,
// u32 n, f64 side, u64 seed, then n^d row-major f64 values. kernel_id and
// level_offset are not stored; reading yields them empty and 0.
void write_field_binary(const FieldSample& f, const std::string& path);
FieldSample read_field_binary(const std::string& path);

// CSV twin for small grids: integer lattice coordinates plus the value,
// one cell per row, 17 significant digits.
void write_field_csv(const FieldSample& f, const std::string& path);

}  // namespace torusperc
