#pragma once

#include <array>
#include <compare>
#include <stdexcept>

#include "core.hpp"

namespace sixv {

// (i1, j1; i2, j2): paths entering from below / left, leaving up / right.
struct VertexType {
  int i1 = 0, j1 = 0, i2 = 0, j2 = 0;

  constexpr bool conserving() const noexcept { return i1 + j1 == i2 + j2; }
  constexpr bool admissible() const noexcept {
    return conserving() && i1 >= 0 && i2 >= 0 && (j1 == 0 || j1 == 1) && (j2 == 0 || j2 == 1);
  }
  friend constexpr auto operator<=>(const VertexType&, const VertexType&) = default;
};

inline constexpr int kMaxOccupancy = 64;

class WeightKernel {
 public:
  WeightKernel(SpinParams spin, cplx spectral, bool conjugated)
      : spin_(spin), u_(spectral), conjugated_(conjugated) {
    const cplx su = spin_.s * u_;
    if (std::abs(1.0 - su) < 1e-14 || std::abs(u_ - spin_.s) < 1e-14 * std::max(1.0, std::abs(spin_.s))) {
      throw DomainError("spectral-pole", "spectral parameter must avoid s and 1/s");
    }
    inv_ = 1.0 / (1.0 - su);
  }

  const SpinParams& spin() const noexcept { return spin_; }
  cplx spectral() const noexcept { return u_; }
  bool conjugated() const noexcept { return conjugated_; }

  cplx operator()(const VertexType& v) const {
    if (!v.admissible()) return 0.0;
    if (v.i1 > kMaxOccupancy || v.i2 > kMaxOccupancy) {
      throw std::out_of_range("vertex occupancy exceeds the supported capacity of 64");
    }
    const double q = spin_.q, s = spin_.s;
    if (v.j1 == 0 && v.j2 == 0) {
      return (1.0 - s * std::pow(q, v.i1) * u_) * inv_;
    }
    if (v.j1 == 1 && v.j2 == 1) {
      return (u_ - s * std::pow(q, v.i1)) * inv_;
    }
    if (v.j1 == 0) {  // (g+1, 0; g, 1)
      const int g = v.i2;
      const double top = conjugated_ ? 1.0 - std::pow(q, g + 1) : 1.0 - s * s * std::pow(q, g);
      return top * u_ * inv_;
    }
    // (g, 1; g+1, 0)
    const int g = v.i1;
    const double top = conjugated_ ? 1.0 - s * s * std::pow(q, g) : 1.0 - std::pow(q, g + 1);
    return top * inv_;
  }

 private:
  SpinParams spin_;
  cplx u_;
  bool conjugated_;
  cplx inv_;
};

inline cplx w(const VertexType& v, const WeightKernel& kernel) { return kernel(v); }

// Ratio w^c / w for a vertex (depends only on the vertical occupancies).
inline double conjugation_ratio(const VertexType& v, const SpinParams& spin) {
  const double q = spin.q, s2 = spin.s * spin.s;
  return q_pochhammer(q, q, v.i1) * q_pochhammer(s2, q, v.i2) /
         (q_pochhammer(q, q, v.i2) * q_pochhammer(s2, q, v.i1));
}

// c(λ) = prod over distinct parts k >= 0 of (s^2;q)_{m_k} / (q;q)_{m_k}.
inline double conjugation_factor(const Signature& lambda, const SpinParams& spin) {
  const double q = spin.q, s2 = spin.s * spin.s;
  double c = 1.0;
  for (const auto& [part, m] : lambda.multiplicities()) {
    (void)part;
    c *= q_pochhammer(s2, q, m) / q_pochhammer(q, q, m);
  }
  return c;
}

// Vertex types of the six-vertex specialization in the order w1..w6.
inline constexpr std::array<VertexType, 6> kSixVertexTypes{{
    {0, 0, 0, 0},
    {1, 1, 1, 1},
    {1, 0, 1, 0},
    {0, 1, 0, 1},
    {1, 0, 0, 1},
    {0, 1, 1, 0},
}};

struct SixVertexWeights {
  std::array<double, 6> w{};
  double operator[](std::size_t i) const { return w[i]; }
  double delta() const { return delta_parameter(w[0], w[1], w[2], w[3], w[4], w[5]); }
};

// Positive (sign-flipped) six-vertex weights at s = q^{-1/2}.
inline SixVertexWeights six_vertex_weights(const ModelParams& p) {
  const double s = p.s(), u = p.u();
  if (!(u > s)) throw DomainError("ferroelectric-order", "six-vertex weights need u > s");
  const double den = u * s - 1.0;
  return {{1.0, (u - 1.0 / s) / den, (u / s - 1.0) / den, (u - s) / den, u * (s * s - 1.0) / den,
           (1.0 - 1.0 / (s * s)) / den}};
}

// Signed six-vertex weights: the spin weights restricted to occupancy <= 1.
inline std::array<cplx, 6> signed_six_vertex_weights(const ModelParams& p) {
  const WeightKernel k(p.spin(), p.u(), false);
  std::array<cplx, 6> out{};
  for (std::size_t i = 0; i < 6; ++i) out[i] = k(kSixVertexTypes[i]);
  return out;
}

}  // namespace sixv
