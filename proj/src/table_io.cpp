#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "binary.hpp"
#include "latticekin/collision.hpp"
#include "latticekin/error.hpp"
#include "orbit.hpp"

namespace latticekin {

namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, fmt::format("cannot open {}", path));
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::io_error, fmt::format("read failed: {}", path));
  return data;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, fmt::format("cannot write {}", path));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, fmt::format("write failed: {}", path));
}

}  // namespace detail

namespace {

constexpr std::string_view kTableMagic = "LKTB";
constexpr std::uint32_t kTableVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 1 + 8;
constexpr std::size_t kRecordBytes = 4 + 4 + 4 + 1 + 8;

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::corrupt_file, what); }

}  // namespace

void write_table(const std::filesystem::path& path, const ScatteringTable& table) {
  const BrillouinGrid grid(table.grid_size());
  detail::ByteWriter w;
  w.raw(kTableMagic);
  w.u32(kTableVersion);
  w.u32(static_cast<std::uint32_t>(table.grid_size()));
  w.u8(static_cast<std::uint8_t>(table.channel_set()));
  w.f64(table.sigma());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const TableEntry& e = table.entry(i);
    w.u32(e.k);
    w.u32(e.p);
    w.u32(grid.sub(e.k, e.kq));
    w.u8(table.channel_code(i));
    w.f64(e.weight);
  }
  detail::write_file(path.string(), w.bytes());
}

ScatteringTable read_table(const std::filesystem::path& path) {
  const std::string data = detail::read_file(path.string());
  const std::string name = path.string();
  if (data.size() < kHeaderBytes) corrupt(fmt::format("{}: truncated header", name));
  detail::ByteReader r(data);
  if (r.raw(4) != kTableMagic) corrupt(fmt::format("{}: not a scattering table", name));
  const std::uint32_t version = r.u32();
  if (version != kTableVersion) corrupt(fmt::format("{}: unsupported version {}", name, version));
  const std::uint32_t n = r.u32();
  if (n < 4 || n % 2 != 0 || n > 4096) corrupt(fmt::format("{}: bad grid size {}", name, n));
  const std::uint8_t set_code = r.u8();
  if (set_code > static_cast<std::uint8_t>(ChannelSet::weak_coupling))
    corrupt(fmt::format("{}: bad channel set {}", name, set_code));
  const auto set = static_cast<ChannelSet>(set_code);
  const double sigma = r.f64();
  if (!(sigma > 0.0) || !std::isfinite(sigma)) corrupt(fmt::format("{}: bad sigma", name));
  if (r.remaining() % kRecordBytes != 0)
    corrupt(fmt::format("{}: {} trailing bytes", name, r.remaining() % kRecordBytes));

  const BrillouinGrid grid(static_cast<int>(n));
  const auto modes = static_cast<std::uint32_t>(grid.mode_count());
  const std::vector<std::uint8_t> allowed = channel_codes(set);
  const std::size_t count = r.remaining() / kRecordBytes;
  std::vector<TableEntry> entries;
  std::vector<std::uint8_t> codes;
  entries.reserve(count);
  codes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t k = r.u32(), p = r.u32(), q = r.u32();
    const std::uint8_t code = r.u8();
    const double weight = r.f64();
    if (k >= modes || p >= modes || q >= modes)
      corrupt(fmt::format("{}: record {} has a mode index out of range", name, i));
    if (std::find(allowed.begin(), allowed.end(), code) == allowed.end())
      corrupt(fmt::format("{}: record {} has channel {} outside the channel set", name, i, code));
    if (!std::isfinite(weight)) corrupt(fmt::format("{}: record {} has a non-finite weight", name, i));
    entries.push_back({k, p, grid.sub(k, q), grid.add(p, q), weight});
    codes.push_back(code);
  }
  return {static_cast<int>(n), set, sigma, 6.0, std::move(entries), std::move(codes)};
}

void check_table_consistency(const ScatteringTable& table, const BandStructure& bands,
                             double sigma) {
  const ModelParams& params = bands.params();
  if (table.grid_size() != params.grid_size)
    corrupt(fmt::format("table grid {} does not match N = {}", table.grid_size(), params.grid_size));
  if (table.channel_set() != params.channels)
    corrupt(fmt::format("table channel set {} does not match {}", to_string(table.channel_set()),
                        to_string(params.channels)));
  if (table.sigma() != sigma)
    corrupt(fmt::format("table sigma {:.17g} does not match {:.17g}", table.sigma(), sigma));

  const BrillouinGrid& grid = bands.grid();
  const auto modes = static_cast<std::uint32_t>(grid.mode_count());
  const std::vector<std::uint8_t> codes = channel_codes(params.channels);
  const detail::OrbitContext ctx(bands, sigma, table.cutoff_sigmas());
  // Enumeration order is (k, p, q, channel position); a cache must follow it.
  auto key = [&](std::size_t i) {
    const TableEntry& e = table.entry(i);
    const auto pos = std::find(codes.begin(), codes.end(), table.channel_code(i)) - codes.begin();
    return std::array<std::uint64_t, 4>{e.k, e.p, grid.sub(e.k, e.kq),
                                        static_cast<std::uint64_t>(pos)};
  };
  for (std::size_t i = 0; i < table.size(); ++i) {
    const TableEntry& e = table.entry(i);
    if (e.k >= modes || e.p >= modes || e.kq >= modes || e.pq >= modes)
      corrupt(fmt::format("entry {} has a mode index out of range", i));
    const std::uint32_t q = grid.sub(e.k, e.kq);
    if (grid.add(e.p, q) != e.pq) corrupt(fmt::format("entry {} violates momentum bookkeeping", i));
    if (i > 0 && !(key(i - 1) < key(i)))
      corrupt(fmt::format("entry {} breaks the canonical ordering", i));
    const auto expected = detail::evaluate_orbit(ctx, table.channel_code(i), e.k, e.p, q);
    if (!expected) corrupt(fmt::format("entry {} is not an admissible collision orbit", i));
    const double scale = std::max(std::abs(expected->weight), 1e-300);
    if (std::abs(expected->weight - e.weight) > 1e-12 * scale)
      corrupt(fmt::format("entry {} weight {:.17g} differs from {:.17g}", i, e.weight,
                          expected->weight));
  }
}

bool tables_identical(const ScatteringTable& a, const ScatteringTable& b) {
  if (a.grid_size() != b.grid_size() || a.channel_set() != b.channel_set() ||
      a.sigma() != b.sigma() || a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const TableEntry &x = a.entry(i), &y = b.entry(i);
    if (x.k != y.k || x.p != y.p || x.kq != y.kq || x.pq != y.pq || x.weight != y.weight ||
        a.channel_code(i) != b.channel_code(i))
      return false;
  }
  return true;
}

}  // namespace latticekin
