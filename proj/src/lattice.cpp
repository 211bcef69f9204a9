#include "latticekin/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "latticekin/error.hpp"

namespace latticekin {

std::string_view to_string(ChannelSet set) {
  switch (set) {
    case ChannelSet::ph_only: return "ph_only";
    case ChannelSet::full: return "full";
    case ChannelSet::weak_coupling: return "weak_coupling";
  }
  return "unknown";
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::degenerate_bands: return "degenerate_bands";
    case ErrorCode::unsupported_channel: return "unsupported_channel";
    case ErrorCode::table_too_large: return "table_too_large";
    case ErrorCode::step_underflow: return "step_underflow";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::empty_region: return "empty_region";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::validation_error: return "validation_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::corrupt_file: return "corrupt_file";
  }
  return "unknown";
}

void ModelParams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::validation_error, what); };
  if (!(hopping > 0.0) || !std::isfinite(hopping)) fail("hopping J must be > 0");
  if (!(interaction > 0.0) || !std::isfinite(interaction)) fail("interaction V must be > 0");
  if (filling_a < 0.0 || filling_a > 1.0) fail("filling n^A must lie in [0, 1]");
  if (filling_b < 0.0 || filling_b > 1.0) fail("filling n^B must lie in [0, 1]");
  if (std::abs(filling_a + filling_b - 1.0) > 1e-12) fail("fillings must satisfy n^A + n^B = 1");
  if (grid_size < 4 || grid_size % 2 != 0)
    fail(fmt::format("grid size N must be even and >= 4 (got {})", grid_size));
  if (!(broadening > 0.0) || !std::isfinite(broadening)) fail("broadening factor eta must be > 0");
  if (channels == ChannelSet::ph_only && hopping / interaction > 0.1)
    fail(fmt::format("ph_only kernel requires J/V << 1 (got J/V = {})", hopping / interaction));
}

namespace {

struct Spectrum {
  double omega;
  double disp;  // (omega - |gap|)/2
  double plus;
  double minus;
  Rotation rotation;
};

// Everything that depends on k only through J_k.
Spectrum spectrum_from_hopping(double jk, const ModelParams& params) {
  const double v = params.interaction;
  const double gap = params.gap();
  const double abs_gap = std::abs(gap);
  const double omega = std::hypot(gap, 2.0 * jk);

  Spectrum s{};
  s.omega = omega;
  s.disp = omega + abs_gap > 0.0 ? 2.0 * jk * jk / (omega + abs_gap) : 0.0;
  s.plus = 0.5 * (v + abs_gap) + s.disp;
  s.minus = v - s.plus;

  if (omega > 0.0) {
    // omega +/- gap, with the small one obtained without cancellation.
    double big = omega + abs_gap;
    double small = 4.0 * jk * jk / big;
    double upper = gap >= 0.0 ? big : small;  // omega + gap
    double lower = gap >= 0.0 ? small : big;  // omega - gap
    const double sign = jk < 0.0 ? -1.0 : 1.0;
    s.rotation.cos = sign * std::sqrt(upper / (2.0 * omega));
    s.rotation.sin = std::sqrt(lower / (2.0 * omega));
  }
  return s;
}

}  // namespace

double hopping_dispersion(Momentum k, const ModelParams& params) {
  return 0.5 * params.hopping * (std::cos(k.x) + std::cos(k.y));
}

double interaction_fourier(Momentum q, const ModelParams& params) {
  return 0.5 * params.interaction * (std::cos(q.x) + std::cos(q.y));
}

BandPair band_energies(Momentum k, const ModelParams& params) {
  const Spectrum s = spectrum_from_hopping(hopping_dispersion(k, params), params);
  return {s.plus, s.minus};
}

Rotation rotation_matrix(Momentum k, const ModelParams& params) {
  const Spectrum s = spectrum_from_hopping(hopping_dispersion(k, params), params);
  if (!(s.omega > 0.0))
    throw Error(ErrorCode::degenerate_bands,
                fmt::format("bands touch at k = ({}, {}): omega_k = 0", k.x, k.y));
  return s.rotation;
}

BrillouinGrid::BrillouinGrid(int n) : n_(n) {
  if (n < 4 || n % 2 != 0)
    throw Error(ErrorCode::validation_error,
                fmt::format("grid size N must be even and >= 4 (got {})", n));
  cos_.resize(static_cast<std::size_t>(n));
  const double step = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i) {
    const int a = std::abs(offset(i));
    double c;
    if (4 * a < n)
      c = std::cos(step * a);
    else if (4 * a == n)
      c = 0.0;
    else
      c = -std::cos(step * (n / 2 - a));
    cos_[static_cast<std::size_t>(i)] = c;
  }
}

double BrillouinGrid::component(int i) const {
  return 2.0 * std::numbers::pi * offset(i) / n_;
}

Momentum BrillouinGrid::momentum(std::uint32_t m) const {
  return {component(ix(m)), component(iy(m))};
}

BandStructure::BandStructure(const BrillouinGrid& grid, const ModelParams& params)
    : grid_(grid), params_(params) {
  const std::size_t n = grid.mode_count();
  hopping_.resize(n);
  interaction_.resize(n);
  omega_.resize(n);
  disp_.resize(n);
  plus_.resize(n);
  minus_.resize(n);
  rotation_.resize(n);
  basis_.resize(n);

  for (std::uint32_t m = 0; m < n; ++m) {
    const double cs = grid.cos_sum(m);
    hopping_[m] = 0.5 * params.hopping * cs;
    interaction_[m] = 0.5 * params.interaction * cs;
    const Spectrum s = spectrum_from_hopping(hopping_[m], params);
    omega_[m] = s.omega;
    disp_[m] = s.disp;
    plus_[m] = s.plus;
    minus_[m] = s.minus;
    rotation_[m] = s.rotation;
    basis_[m] = Eigenbasis(s.rotation);
  }
  base_plus_ = 0.5 * (params.interaction + std::abs(params.gap()));
  base_minus_ = params.interaction - base_plus_;
  min_disp_ = *std::min_element(disp_.begin(), disp_.end());
  max_disp_ = *std::max_element(disp_.begin(), disp_.end());
  // max E+ - min E+, taken from the k-dependent part to keep full precision.
  bandwidth_ = max_disp_ - min_disp_;
}

double BandStructure::energy_change(Band a, std::uint32_t out2, Band b, std::uint32_t in2,
                                    Band c, std::uint32_t out1, Band d,
                                    std::uint32_t in1) const {
  auto up = [](Band x) { return x == Band::plus ? 1 : 0; };
  auto sgn = [](Band x) { return x == Band::plus ? 1.0 : -1.0; };
  const int uppers = up(a) - up(b) + up(c) - up(d);
  const double offset = uppers == 0 ? 0.0 : uppers * (base_plus_ - base_minus_);
  const double disp =
      sgn(a) * disp_[out2] - sgn(b) * disp_[in2] + sgn(c) * disp_[out1] - sgn(d) * disp_[in1];
  return offset + disp;
}

void BandStructure::flip_eigenvector(std::uint32_t m, Band band) {
  auto& row = basis_[m].entry[static_cast<int>(band)];
  row[0] = -row[0];
  row[1] = -row[1];
}

}  // namespace latticekin
