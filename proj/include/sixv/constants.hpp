#pragma once

#include <cmath>

#include "core.hpp"

namespace sixv {

// Centering a, curvature c, and the scales b, d of the GUE-corners limit.
struct AsymptoticConstants {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  bool signs_ok() const { return a > 0.0 && b < 0.0 && c > 0.0 && d > 0.0; }
  json to_json() const { return json{{"a", a}, {"b", b}, {"c", c}, {"d", d}}; }
};

inline AsymptoticConstants constants(const ModelParams& p) {
  const double s = p.s(), u = p.u(), v = p.v();
  const double q = 1.0 / (s * s);
  AsymptoticConstants k;
  k.a = v * (u - 1.0 / s) * (u / s - 1.0) / ((1.0 - u * v) * (1.0 - q * u * v));
  k.b = (s * s - 1.0) / ((u - s) * (1.0 - s * u));
  k.c = 0.5 * (k.a * (1.0 / ((u - s) * (u - s)) - s * s / ((1.0 - s * u) * (1.0 - s * u))) -
               q * q * v * v / ((1.0 - q * u * v) * (1.0 - q * u * v)) + v * v / ((1.0 - u * v) * (1.0 - u * v)));
  k.d = -std::sqrt(2.0 * k.c) / k.b;
  return k;
}

}  // namespace sixv
