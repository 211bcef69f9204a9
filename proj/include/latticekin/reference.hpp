#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "latticekin/params.hpp"

// Literal, unoptimized transliterations of the kinetic equations: per-mode
// triple loops over (k, p, q), matrix elements as explicit double sums over
// sub-lattices. Shares no code with the table-based evaluation and is only
// meant for small grids.
namespace latticekin::reference {

class Model {
 public:
  explicit Model(const ModelParams& params);

  int n() const { return n_; }
  int modes() const { return n_ * n_; }
  int add(int a, int b) const;
  int sub(int a, int b) const;

  double hopping(int m) const { return j_[m]; }
  double interaction(int m) const { return v_[m]; }
  double omega(int m) const { return omega_[m]; }
  // band 0 = minus, 1 = plus; sublattice 0 = A, 1 = B.
  double o(int band, int sublattice, int m) const { return o_[m][band][sublattice]; }
  // E^band_m - (V -/+ |gap|)/2, i.e. the k-dependent part with its sign.
  double shift(int band, int m) const { return band == 1 ? disp_[m] : -disp_[m]; }
  double energy(int band, int m) const;

  // E^a_{p+q} - E^b_p + E^c_{k-q} - E^d_k.
  double energy_change(int a, int pq, int b, int p, int c, int kq, int d, int k) const;

  const ModelParams& params() const { return params_; }

 private:
  ModelParams params_;
  int n_;
  std::vector<double> j_, v_, omega_, disp_;
  std::vector<std::array<std::array<double, 2>, 2>> o_;
};

double matrix_element(const Model& model, std::uint8_t code, int pq, int p, int kq, int k);
double backreaction_weight(const Model& model, std::uint8_t code, int pq, int p, int kq, int k);

/// df/dt of both bands (layout [f+ | f-]) in units of 1/V, for the ph_only or
/// full channel set.
std::vector<double> strong_rhs(const Model& model, std::span<const double> f, double sigma,
                               double cutoff);

/// df/dt of the single weak-coupling band.
std::vector<double> weak_rhs(const Model& model, std::span<const double> f, double sigma,
                             double cutoff);

/// dn^A/dt summed over the model's channel set.
double backreaction_rate(const Model& model, std::span<const double> f, double sigma,
                         double cutoff);

/// Number of (k, p, q, channel) tuples with V_q != 0, nonzero cross section,
/// |dE| <= cutoff and at least one state actually changed.
std::size_t admissible_collisions(const Model& model, double cutoff);

}  // namespace latticekin::reference
