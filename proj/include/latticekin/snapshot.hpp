#pragma once

#include <filesystem>

#include "latticekin/collision.hpp"

namespace latticekin {

/// "LKSN", u32 version, u32 N, f64 t, then f+ and f- as row-major f64 arrays,
/// little-endian.
void write_snapshot(const std::filesystem::path& path, const DistributionState& state);

/// Throws Error(corrupt_file) on a bad header, a short or long payload, or
/// values outside [0, 1].
DistributionState read_snapshot(const std::filesystem::path& path);

}  // namespace latticekin
