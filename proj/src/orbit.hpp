#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "latticekin/collision.hpp"

namespace latticekin::detail {

struct OrbitInfo {
  bool representative = false;
  double multiplicity = 1.0;
};

// A collision (in1, in2) -> (out1, out2) shares its rate with the partner
// swap, the time reverse and both combined. Exactly one member of the orbit
// (the lexicographically smallest) is stored; the multiplicity corrects for
// orbits whose members coincide. Collisions that map a pair of states onto
// itself change nothing and are never stored.
inline OrbitInfo classify(std::uint32_t in1, std::uint32_t in2, std::uint32_t out1,
                          std::uint32_t out2) {
  using Tuple = std::array<std::uint32_t, 4>;
  if ((in1 == out1 && in2 == out2) || (in1 == out2 && in2 == out1)) return {};
  const Tuple t0{in1, in2, out1, out2};
  const std::array<Tuple, 3> others{Tuple{in2, in1, out2, out1}, Tuple{out1, out2, in1, in2},
                                    Tuple{out2, out1, in2, in1}};
  int distinct = 1;
  for (std::size_t i = 0; i < others.size(); ++i) {
    if (others[i] < t0) return {};
    bool seen = others[i] == t0;
    for (std::size_t j = 0; j < i && !seen; ++j) seen = others[j] == others[i];
    if (!seen) ++distinct;
  }
  return {true, distinct / 4.0};
}

// Orbit ordering key of a (band, mode) state: + states sort before - states,
// so particle-hole orbits are stored with the quasi-particle in the k slot.
inline std::uint32_t state_key(bool single_band, bool plus, std::uint32_t mode,
                               std::uint32_t modes) {
  return single_band ? mode : (plus ? 0u : modes) + mode;
}

struct OrbitContext {
  OrbitContext(const BandStructure& bands, double sigma, double cutoff_sigmas);

  const BandStructure& bands;
  double sigma;
  double cutoff;
  bool weak;
  bool ph;
  std::uint32_t modes;
  double prefactor;
};

// The stored entry for (channel, k, p, q), or nothing when the collision is
// not an orbit representative, has V_q = 0 or a vanishing matrix element, or
// lies outside the energy cutoff.
std::optional<TableEntry> evaluate_orbit(const OrbitContext& ctx, std::uint8_t code,
                                         std::uint32_t k, std::uint32_t p, std::uint32_t q);

}  // namespace latticekin::detail
