#include "latticekin/snapshot.hpp"

#include <cmath>

#include <fmt/format.h>

#include "binary.hpp"
#include "latticekin/error.hpp"

namespace latticekin {

namespace {
constexpr std::string_view kMagic = "LKSN";
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 8;
}  // namespace

void write_snapshot(const std::filesystem::path& path, const DistributionState& state) {
  detail::ByteWriter w;
  w.raw(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(state.grid_size));
  w.f64(state.time);
  for (double v : state.values) w.f64(v);
  detail::write_file(path.string(), w.bytes());
}

DistributionState read_snapshot(const std::filesystem::path& path) {
  const std::string name = path.string();
  const std::string data = detail::read_file(name);
  auto corrupt = [&](const std::string& what) {
    return Error(ErrorCode::corrupt_file, fmt::format("{}: {}", name, what));
  };
  if (data.size() < kHeaderBytes) throw corrupt("truncated header");
  detail::ByteReader r(data);
  if (r.raw(4) != kMagic) throw corrupt("not a snapshot file");
  if (const std::uint32_t v = r.u32(); v != kVersion)
    throw corrupt(fmt::format("unsupported version {}", v));
  const std::uint32_t n = r.u32();
  if (n < 4 || n % 2 != 0 || n > 4096) throw corrupt(fmt::format("bad grid size {}", n));
  DistributionState state(static_cast<int>(n));
  state.time = r.f64();
  if (!std::isfinite(state.time)) throw corrupt("non-finite time");
  if (r.remaining() != state.values.size() * 8)
    throw corrupt(fmt::format("payload is {} bytes, expected {}", r.remaining(),
                              state.values.size() * 8));
  for (double& v : state.values) {
    v = r.f64();
    if (!(v >= 0.0 && v <= 1.0)) throw corrupt("occupation outside [0, 1]");
  }
  return state;
}

}  // namespace latticekin
