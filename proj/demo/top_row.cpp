// Exact law of the top row for k = 1 and a handful of sampled patterns for k = 2.

#include <iostream>

#include "sixv/asymptotics.hpp"
#include "sixv/measure.hpp"

using namespace sixv;

int main() {
  const ModelParams p = ModelParams::make(0.5, 2.0, 0.25);
  const AsymptoticConstants ac = constants(p);
  std::cout << "a=" << ac.a << " b=" << ac.b << " c=" << ac.c << " d=" << ac.d << "\n";

  const int M = 40;
  const TopRowPmf pmf = top_row_pmf(1, M, p, 1e-10);
  double mean = 0.0, second = 0.0;
  for (const auto& [mu, pr] : pmf.entries) {
    mean += pr * mu[0];
    second += pr * mu[0] * mu[0];
  }
  std::cout << "M=" << M << " mass=" << pmf.total_mass << " mean=" << mean << " (aM=" << ac.a * M
            << ") sd=" << std::sqrt(second - mean * mean) << " (d*sqrt(M)=" << ac.d * std::sqrt(M) << ")\n";

  const TopRowPmf two = top_row_pmf(2, M, p, 1e-10);
  for (const auto& pat : sample_patterns(two, p, 42, 5)) {
    std::cout << "lower " << pat.rows[0][0] << " | top " << pat.rows[1][0] << " " << pat.rows[1][1] << "\n";
  }
}
