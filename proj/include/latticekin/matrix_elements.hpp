#pragma once

#include <cstdint>
#include <string>

#include "latticekin/lattice.hpp"

namespace latticekin {

/// Band labels (a, b, c, d) of a collision: (b, p) and (d, k) scatter into
/// (a, p+q) and (c, k-q). The binary code packs the labels as a b c d with
/// + -> 1 and - -> 0, so the particle-hole channel (-,-,+,+) is 0b0011.
struct Channel {
  Band a = Band::minus;
  Band b = Band::minus;
  Band c = Band::plus;
  Band d = Band::plus;

  std::uint8_t code() const {
    return static_cast<std::uint8_t>((static_cast<int>(a) << 3) | (static_cast<int>(b) << 2) |
                                     (static_cast<int>(c) << 1) | static_cast<int>(d));
  }
  static Channel from_code(std::uint8_t code);
  std::string label() const;  // e.g. "0011"

  friend bool operator==(const Channel&, const Channel&) = default;
};

namespace channels {
inline constexpr std::uint8_t particle_hole = 0b0011;
inline constexpr std::uint8_t hole_particle = 0b1100;
inline constexpr std::uint8_t hole_hole = 0b0000;
inline constexpr std::uint8_t particle_particle = 0b1111;
inline constexpr std::uint8_t exchange = 0b0110;
inline constexpr std::uint8_t exchange_mirror = 0b1001;
}  // namespace channels

/// Grid-mode indices of the four momenta p+q, p, k-q, k.
struct MomentumQuad {
  std::uint32_t pq = 0;
  std::uint32_t p = 0;
  std::uint32_t kq = 0;
  std::uint32_t k = 0;

  /// Builds the quad from (k, p, q) using wrapped mode arithmetic.
  static MomentumQuad from_kpq(const BrillouinGrid& grid, std::uint32_t k, std::uint32_t p,
                               std::uint32_t q) {
    return {grid.add(p, q), p, grid.sub(k, q), k};
  }
};

/// Transition matrix element M^{abcd}_{p+q,p,k-q,k} from the rotated
/// sub-lattice sums. The X and Y sums factorize, so the value is
///   V_q F (V_q F - V_{k-p-q} G)
/// with F = sum_X O^a_X O^b_X O^c_Xbar O^d_Xbar and
///      G = sum_Y O^a_Y O^b_Ybar O^c_Ybar O^d_Y.
double matrix_element_full(Channel channel, const MomentumQuad& m, const BandStructure& bands);

/// Leading-order closed forms for J << V. Supports 0011/1100, 0000/1111 and
/// 0110/1001; other channels throw Error(unsupported_channel).
double matrix_element_strong(Channel channel, const MomentumQuad& m, const BandStructure& bands);

/// Weight N^{abcd} of the charge-density background rate: like M but with the
/// prefactor J_k/omega_k and the opposite band on the first O-factor of k.
double backreaction_weight(Channel channel, const MomentumQuad& m, const BandStructure& bands);

}  // namespace latticekin
