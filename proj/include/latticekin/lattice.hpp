#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "latticekin/params.hpp"

namespace latticekin {

struct Momentum {
  double x = 0.0;
  double y = 0.0;
};

/// Band label. The numeric value doubles as the binary label used for the
/// channel superscripts: 0 is the quasi-hole band, 1 the quasi-particle band.
enum class Band : std::uint8_t { minus = 0, plus = 1 };

inline Band opposite(Band b) { return b == Band::plus ? Band::minus : Band::plus; }

/// Sub-lattice label; X-bar is `other(X)`.
enum class Sublattice : std::uint8_t { a = 0, b = 1 };

inline Sublattice other(Sublattice s) { return s == Sublattice::a ? Sublattice::b : Sublattice::a; }

struct BandPair {
  double plus = 0.0;
  double minus = 0.0;
};

/// Entries of the 2x2 orthogonal matrix O^a_X(k) with rows a = (+, -) and
/// columns X = (A, B):  [[cos, sin], [-sin, cos]].
struct Rotation {
  double cos = 1.0;
  double sin = 0.0;

  double operator()(Band a, Sublattice x) const {
    if (a == Band::plus) return x == Sublattice::a ? cos : sin;
    return x == Sublattice::a ? -sin : cos;
  }
};

/// O^a_X(k) stored entry by entry, indexed [band][sublattice], so that single
/// eigenvectors can be re-signed independently.
struct Eigenbasis {
  double entry[2][2] = {{1.0, 0.0}, {0.0, 1.0}};

  Eigenbasis() = default;
  explicit Eigenbasis(const Rotation& r) {
    for (Band a : {Band::minus, Band::plus})
      for (Sublattice x : {Sublattice::a, Sublattice::b})
        entry[static_cast<int>(a)][static_cast<int>(x)] = r(a, x);
  }

  double operator()(Band a, Sublattice x) const {
    return entry[static_cast<int>(a)][static_cast<int>(x)];
  }
};

/// J_k = (J/2)(cos kx + cos ky).
double hopping_dispersion(Momentum k, const ModelParams& params);

/// V_q = (V/2)(cos qx + cos qy).
double interaction_fourier(Momentum q, const ModelParams& params);

/// E^{+/-}_k = (V +/- omega_k)/2 with omega_k = sqrt((V^A - V^B)^2 + 4 J_k^2).
BandPair band_energies(Momentum k, const ModelParams& params);

/// Throws Error(degenerate_bands) when omega_k = 0.
Rotation rotation_matrix(Momentum k, const ModelParams& params);

/// Square-lattice zone [-pi, pi)^2 sampled by N x N modes. Mode (i, j) has
/// momentum (2 pi i/N - pi, 2 pi j/N - pi); linear index i*N + j.
///
/// Mode arithmetic is integer arithmetic modulo N, so sums and differences of
/// modes land exactly on modes. Cosines come from a table built so that the
/// symmetries cos(-k) = cos(k) and cos(k + pi) = -cos(k) hold bitwise and the
/// cosine vanishes exactly at +/- pi/2.
class BrillouinGrid {
 public:
  explicit BrillouinGrid(int n);

  int size() const { return n_; }
  std::size_t mode_count() const { return static_cast<std::size_t>(n_) * n_; }
  double weight() const { return 1.0 / static_cast<double>(mode_count()); }

  std::uint32_t index(int ix, int iy) const {
    return static_cast<std::uint32_t>(wrap(ix) * n_ + wrap(iy));
  }
  int ix(std::uint32_t m) const { return static_cast<int>(m) / n_; }
  int iy(std::uint32_t m) const { return static_cast<int>(m) % n_; }

  /// Signed offset of component i from the zone centre, in [-N/2, N/2).
  int offset(int i) const { return i - n_ / 2; }

  double component(int i) const;
  Momentum momentum(std::uint32_t m) const;
  double cos_component(int i) const { return cos_[static_cast<std::size_t>(i)]; }

  /// cos kx + cos ky, exact on the symmetry lines.
  double cos_sum(std::uint32_t m) const { return cos_component(ix(m)) + cos_component(iy(m)); }

  std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
    return index(ix(a) + ix(b) - n_ / 2, iy(a) + iy(b) - n_ / 2);
  }
  std::uint32_t sub(std::uint32_t a, std::uint32_t b) const {
    return index(ix(a) - ix(b) + n_ / 2, iy(a) - iy(b) + n_ / 2);
  }
  std::uint32_t negate(std::uint32_t a) const { return index(n_ - ix(a), n_ - iy(a)); }
  std::uint32_t zero() const { return index(n_ / 2, n_ / 2); }

 private:
  int wrap(int i) const { return ((i % n_) + n_) % n_; }

  int n_;
  std::vector<double> cos_;
};

/// Per-mode spectrum of the two-band CDW state, precomputed once.
///
/// Energies are kept in two forms: the absolute E^{+/-}_k, and the split
/// E^+ = base_plus + disp_k, E^- = base_minus - disp_k with
/// disp_k = 2 J_k^2 / (omega_k + |V^A - V^B|). Energy differences are
/// assembled from the split form so that the O(V) offsets cancel exactly.
class BandStructure {
 public:
  BandStructure(const BrillouinGrid& grid, const ModelParams& params);

  const BrillouinGrid& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }
  std::size_t mode_count() const { return grid_.mode_count(); }

  double hopping(std::uint32_t m) const { return hopping_[m]; }
  double interaction(std::uint32_t m) const { return interaction_[m]; }
  double omega(std::uint32_t m) const { return omega_[m]; }
  double dispersion(std::uint32_t m) const { return disp_[m]; }
  const Rotation& rotation(std::uint32_t m) const { return rotation_[m]; }
  const Eigenbasis& eigenbasis(std::uint32_t m) const { return basis_[m]; }

  double energy(Band b, std::uint32_t m) const { return b == Band::plus ? plus_[m] : minus_[m]; }
  const std::vector<double>& plus_energies() const { return plus_; }
  const std::vector<double>& minus_energies() const { return minus_; }
  const std::vector<double>& dispersions() const { return disp_; }

  double base(Band b) const { return b == Band::plus ? base_plus_ : base_minus_; }

  /// E^a_{out2} - E^b_{in2} + E^c_{out1} - E^d_{in1} evaluated from the split
  /// representation.
  double energy_change(Band a, std::uint32_t out2, Band b, std::uint32_t in2, Band c,
                       std::uint32_t out1, Band d, std::uint32_t in1) const;

  /// max_k E^+_k - min_k E^+_k.
  double bandwidth() const { return bandwidth_; }
  double min_dispersion() const { return min_disp_; }
  double max_dispersion() const { return max_disp_; }

  /// Flips the sign of the eigenvector of (m, band). Only used to probe gauge
  /// invariance; physical results must not change.
  void flip_eigenvector(std::uint32_t m, Band band);

 private:
  BrillouinGrid grid_;
  ModelParams params_;
  std::vector<double> hopping_, interaction_, omega_, disp_, plus_, minus_;
  std::vector<Rotation> rotation_;
  std::vector<Eigenbasis> basis_;
  double base_plus_ = 0.0, base_minus_ = 0.0;
  double bandwidth_ = 0.0, min_disp_ = 0.0, max_disp_ = 0.0;
};

}  // namespace latticekin
