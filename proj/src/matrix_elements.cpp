#include "latticekin/matrix_elements.hpp"

#include <fmt/format.h>

#include "latticekin/error.hpp"

namespace latticekin {

Channel Channel::from_code(std::uint8_t code) {
  auto bit = [code](int shift) { return static_cast<Band>((code >> shift) & 1); };
  return {bit(3), bit(2), bit(1), bit(0)};
}

std::string Channel::label() const {
  auto digit = [](Band x) { return x == Band::plus ? '1' : '0'; };
  return {digit(a), digit(b), digit(c), digit(d)};
}

namespace {

constexpr Sublattice kSublattices[] = {Sublattice::a, Sublattice::b};

struct Factors {
  double vq;
  double vx;  // V_{k-p-q}
};

Factors interaction_factors(const MomentumQuad& m, const BandStructure& bands) {
  const BrillouinGrid& grid = bands.grid();
  const std::uint32_t q = grid.sub(m.k, m.kq);
  const std::uint32_t exchange = grid.sub(m.kq, m.p);  // k - q - p
  return {bands.interaction(q), bands.interaction(exchange)};
}

// Sum over X of O^a_X(p+q) O^b_X(p) O^c_Xbar(k-q) O^last_Xbar(k).
double direct_sum(Channel ch, Band last, const MomentumQuad& m, const BandStructure& bands) {
  const Eigenbasis& o1 = bands.eigenbasis(m.pq);
  const Eigenbasis& o2 = bands.eigenbasis(m.p);
  const Eigenbasis& o3 = bands.eigenbasis(m.kq);
  const Eigenbasis& o4 = bands.eigenbasis(m.k);
  double s = 0.0;
  for (Sublattice x : kSublattices) {
    const Sublattice xb = other(x);
    s += o1(ch.a, x) * o2(ch.b, x) * o3(ch.c, xb) * o4(last, xb);
  }
  return s;
}

// Sum over Y of O^a_Y(p+q) O^b_Ybar(p) O^c_Ybar(k-q) O^d_Y(k).
double exchange_sum(Channel ch, const MomentumQuad& m, const BandStructure& bands) {
  const Eigenbasis& o1 = bands.eigenbasis(m.pq);
  const Eigenbasis& o2 = bands.eigenbasis(m.p);
  const Eigenbasis& o3 = bands.eigenbasis(m.kq);
  const Eigenbasis& o4 = bands.eigenbasis(m.k);
  double s = 0.0;
  for (Sublattice y : kSublattices) {
    const Sublattice yb = other(y);
    s += o1(ch.a, y) * o2(ch.b, yb) * o3(ch.c, yb) * o4(ch.d, y);
  }
  return s;
}

}  // namespace

double matrix_element_full(Channel channel, const MomentumQuad& m, const BandStructure& bands) {
  const auto [vq, vx] = interaction_factors(m, bands);
  const double f = direct_sum(channel, channel.d, m, bands);
  const double g = exchange_sum(channel, m, bands);
  return vq * f * (vq * f - vx * g);
}

double matrix_element_strong(Channel channel, const MomentumQuad& m, const BandStructure& bands) {
  const auto [vq, vx] = interaction_factors(m, bands);
  const ModelParams& params = bands.params();
  const double v = params.interaction;
  const double imbalance = params.filling_a - params.filling_b;
  const double d2 = v * v * imbalance * imbalance;  // V^2 (n^A - n^B)^2
  const double j_pq = bands.hopping(m.pq);
  const double j_p = bands.hopping(m.p);
  const double j_kq = bands.hopping(m.kq);
  const double j_k = bands.hopping(m.k);

  switch (channel.code()) {
    case channels::particle_hole:
    case channels::hole_particle:
      return vq * (vq + vx * (j_p * j_k + j_pq * j_kq) / d2);
    case channels::hole_hole:
    case channels::particle_particle: {
      const double direct = j_pq * j_p + j_kq * j_k;
      const double crossed = j_pq * j_k + j_kq * j_p;
      return vq * direct / (d2 * d2) * (vq * direct - vx * crossed);
    }
    case channels::exchange:
    case channels::exchange_mirror: {
      const double hop = (j_pq * j_kq + j_p * j_k) / d2;
      return vq * hop * (vq * hop + vx);
    }
    default:
      throw Error(ErrorCode::unsupported_channel,
                  fmt::format("no strong-coupling closed form for channel {}", channel.label()));
  }
}

double backreaction_weight(Channel channel, const MomentumQuad& m, const BandStructure& bands) {
  const double omega = bands.omega(m.k);
  if (bands.hopping(m.k) == 0.0 || omega == 0.0) return 0.0;
  const auto [vq, vx] = interaction_factors(m, bands);
  const double f_bar = direct_sum(channel, opposite(channel.d), m, bands);
  const double f = direct_sum(channel, channel.d, m, bands);
  const double g = exchange_sum(channel, m, bands);
  return bands.hopping(m.k) / omega * vq * f_bar * (vq * f - vx * g);
}

}  // namespace latticekin
