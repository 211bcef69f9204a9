#include "latticekin/reference.hpp"

#include <cmath>
#include <numbers>

namespace latticekin::reference {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<std::uint8_t> codes_for(ChannelSet set) {
  if (set == ChannelSet::ph_only) return {0b0011, 0b1100};
  return {0b0011, 0b1100, 0b0000, 0b1111, 0b0110, 0b1001};
}

int bit(std::uint8_t code, int shift) { return (code >> shift) & 1; }

double gaussian(double x, double sigma) {
  return std::exp(-x * x / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * kPi));
}

// f1 f2 (1 - f3)(1 - f4) - f3 f4 (1 - f1)(1 - f2)
double bracket(double f1, double f2, double f3, double f4) {
  return f1 * f2 * (1 - f3) * (1 - f4) - f4 * f3 * (1 - f1) * (1 - f2);
}

}  // namespace

Model::Model(const ModelParams& params) : params_(params), n_(params.grid_size) {
  const int m = modes();
  j_.resize(m);
  v_.resize(m);
  omega_.resize(m);
  disp_.resize(m);
  o_.resize(m);
  const double gap = params.interaction * (params.filling_b - params.filling_a);
  const double abs_gap = std::abs(gap);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      double cx = std::cos(2 * kPi * (i - n_ / 2) / n_);
      double cy = std::cos(2 * kPi * (j - n_ / 2) / n_);
      if (std::abs(cx) < 1e-12) cx = 0;
      if (std::abs(cy) < 1e-12) cy = 0;
      double cs = cx + cy;
      if (std::abs(cs) < 1e-12) cs = 0;  // e.g. cos(pi/3) + cos(2pi/3)
      const int idx = i * n_ + j;
      const double jk = params.hopping / 2 * cs;
      j_[idx] = jk;
      v_[idx] = params.interaction / 2 * cs;
      omega_[idx] = std::sqrt(gap * gap + 4 * jk * jk);
      if (abs_gap > 0) {
        const double x = 2 * jk / abs_gap;
        disp_[idx] = abs_gap / 2 * x * x / (std::sqrt(1 + x * x) + 1);
      } else {
        disp_[idx] = std::abs(jk);
      }
      // cos(alpha) = sgn(J) cos(theta/2), sin(alpha) = sin(theta/2) with
      // tan(theta) = 2|J_k| / gap.
      const double theta = std::atan2(2 * std::abs(jk), gap);
      const double c = (jk < 0 ? -1.0 : 1.0) * std::cos(theta / 2);
      const double s = std::sin(theta / 2);
      o_[idx][1] = {c, s};   // + row
      o_[idx][0] = {-s, c};  // - row
    }
  }
}

int Model::add(int a, int b) const {
  const int h = n_ / 2;
  const int i = ((a / n_ + b / n_ - h) % n_ + n_) % n_;
  const int j = ((a % n_ + b % n_ - h) % n_ + n_) % n_;
  return i * n_ + j;
}

int Model::sub(int a, int b) const {
  const int h = n_ / 2;
  const int i = ((a / n_ - b / n_ + h) % n_ + n_) % n_;
  const int j = ((a % n_ - b % n_ + h) % n_ + n_) % n_;
  return i * n_ + j;
}

double Model::energy(int band, int m) const {
  const double v = params_.interaction;
  const double abs_gap = std::abs(v * (params_.filling_b - params_.filling_a));
  return band == 1 ? (v + abs_gap) / 2 + disp_[m] : (v - abs_gap) / 2 - disp_[m];
}

double Model::energy_change(int a, int pq, int b, int p, int c, int kq, int d, int k) const {
  const double v = params_.interaction;
  const double abs_gap = std::abs(v * (params_.filling_b - params_.filling_a));
  const int uppers = a - b + c - d;
  return uppers * abs_gap + shift(a, pq) - shift(b, p) + shift(c, kq) - shift(d, k);
}

double matrix_element(const Model& model, std::uint8_t code, int pq, int p, int kq, int k) {
  const int a = bit(code, 3), b = bit(code, 2), c = bit(code, 1), d = bit(code, 0);
  const double vq = model.interaction(model.sub(k, kq));
  const double vx = model.interaction(model.sub(model.sub(k, p), model.sub(k, kq)));
  double sum = 0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double first = vq * model.o(a, x, pq) * model.o(b, x, p) * model.o(c, 1 - x, kq) *
                           model.o(d, 1 - x, k);
      const double direct = vq * model.o(a, y, pq) * model.o(b, y, p) *
                            model.o(c, 1 - y, kq) * model.o(d, 1 - y, k);
      const double exchange = vx * model.o(a, y, pq) * model.o(b, 1 - y, p) *
                              model.o(c, 1 - y, kq) * model.o(d, y, k);
      sum += first * (direct - exchange);
    }
  }
  return sum;
}

double backreaction_weight(const Model& model, std::uint8_t code, int pq, int p, int kq, int k) {
  const int a = bit(code, 3), b = bit(code, 2), c = bit(code, 1), d = bit(code, 0);
  const double vq = model.interaction(model.sub(k, kq));
  const double vx = model.interaction(model.sub(model.sub(k, p), model.sub(k, kq)));
  double sum = 0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double first = vq * model.o(a, x, pq) * model.o(b, x, p) * model.o(c, 1 - x, kq) *
                           model.o(1 - d, 1 - x, k);
      const double direct = vq * model.o(a, y, pq) * model.o(b, y, p) *
                            model.o(c, 1 - y, kq) * model.o(d, 1 - y, k);
      const double exchange = vx * model.o(a, y, pq) * model.o(b, 1 - y, p) *
                              model.o(c, 1 - y, kq) * model.o(d, y, k);
      sum += first * (direct - exchange);
    }
  }
  if (model.omega(k) == 0) return 0;
  return model.hopping(k) / model.omega(k) * sum;
}

std::vector<double> strong_rhs(const Model& model, std::span<const double> f, double sigma,
                               double cutoff) {
  const int m = model.modes();
  const double w = 1.0 / m;
  const bool ph = model.params().channels == ChannelSet::ph_only;
  const auto codes = codes_for(model.params().channels);
  auto occ = [&](int band, int mode) { return f[(band == 1 ? 0 : m) + mode]; };
  std::vector<double> rate(2 * static_cast<std::size_t>(m), 0.0);
  for (int d = 0; d < 2; ++d) {
    for (int k = 0; k < m; ++k) {
      double sum = 0;
      for (int p = 0; p < m; ++p) {
        for (int q = 0; q < m; ++q) {
          const int kq = model.sub(k, q);
          const int pq = model.add(p, q);
          for (std::uint8_t code : codes) {
            if (bit(code, 0) != d) continue;
            const int a = bit(code, 3), b = bit(code, 2), c = bit(code, 1);
            const double de = model.energy_change(a, pq, b, p, c, kq, d, k);
            if (std::abs(de) > cutoff) continue;
            const double mel = ph ? model.interaction(q) * model.interaction(q)
                                  : matrix_element(model, code, pq, p, kq, k);
            sum += mel * gaussian(de, sigma) *
                   bracket(occ(d, k), occ(b, p), occ(c, kq), occ(a, pq));
          }
        }
      }
      rate[(d == 1 ? 0 : m) + k] = -2 * kPi * w * w * sum;
    }
  }
  return rate;
}

std::vector<double> weak_rhs(const Model& model, std::span<const double> f, double sigma,
                             double cutoff) {
  const int m = model.modes();
  const double w = 1.0 / m;
  std::vector<double> rate(m, 0.0);
  for (int k = 0; k < m; ++k) {
    double sum = 0;
    for (int p = 0; p < m; ++p) {
      for (int q = 0; q < m; ++q) {
        const int kq = model.sub(k, q);
        const int pq = model.add(p, q);
        const double de =
            model.hopping(k) + model.hopping(p) - model.hopping(kq) - model.hopping(pq);
        if (std::abs(de) > cutoff) continue;
        const double vq = model.interaction(q);
        const double cross = vq * (vq - model.interaction(model.sub(model.sub(k, p), q)));
        sum += cross * gaussian(de, sigma) * bracket(f[k], f[p], f[kq], f[pq]);
      }
    }
    rate[k] = -2 * kPi * w * w * sum;
  }
  return rate;
}

double backreaction_rate(const Model& model, std::span<const double> f, double sigma,
                         double cutoff) {
  const int m = model.modes();
  const double w = 1.0 / m;
  const auto codes = codes_for(model.params().channels);
  auto occ = [&](int band, int mode) { return f[(band == 1 ? 0 : m) + mode]; };
  double sum = 0;
  for (int k = 0; k < m; ++k) {
    for (int p = 0; p < m; ++p) {
      for (int q = 0; q < m; ++q) {
        const int kq = model.sub(k, q);
        const int pq = model.add(p, q);
        for (std::uint8_t code : codes) {
          const int a = bit(code, 3), b = bit(code, 2), c = bit(code, 1), d = bit(code, 0);
          const double de = model.energy_change(a, pq, b, p, c, kq, d, k);
          if (std::abs(de) > cutoff) continue;
          sum += backreaction_weight(model, code, pq, p, kq, k) * gaussian(de, sigma) *
                 bracket(occ(d, k), occ(b, p), occ(c, kq), occ(a, pq));
        }
      }
    }
  }
  return -2 * kPi * w * w * w * sum;
}

std::size_t admissible_collisions(const Model& model, double cutoff) {
  const int m = model.modes();
  const ChannelSet set = model.params().channels;
  const bool weak = set == ChannelSet::weak_coupling;
  const auto codes = weak ? std::vector<std::uint8_t>{0} : codes_for(set);
  std::size_t count = 0;
  for (int k = 0; k < m; ++k) {
    for (int p = 0; p < m; ++p) {
      for (int q = 0; q < m; ++q) {
        const double vq = model.interaction(q);
        if (vq == 0) continue;
        const int kq = model.sub(k, q);
        const int pq = model.add(p, q);
        for (std::uint8_t code : codes) {
          const int a = bit(code, 3), b = bit(code, 2), c = bit(code, 1), d = bit(code, 0);
          double de, mel;
          if (weak) {
            de = model.hopping(k) + model.hopping(p) - model.hopping(kq) - model.hopping(pq);
            mel = vq * (vq - model.interaction(model.sub(model.sub(k, p), q)));
          } else {
            de = model.energy_change(a, pq, b, p, c, kq, d, k);
            mel = set == ChannelSet::ph_only ? vq * vq : matrix_element(model, code, pq, p, kq, k);
          }
          if (std::abs(de) > cutoff || mel == 0) continue;
          // States as (band, mode); a collision that only permutes them is void.
          const int in1 = d * m + k, in2 = b * m + p, out1 = c * m + kq, out2 = a * m + pq;
          if ((in1 == out1 && in2 == out2) || (in1 == out2 && in2 == out1)) continue;
          ++count;
        }
      }
    }
  }
  return count;
}

}  // namespace latticekin::reference
