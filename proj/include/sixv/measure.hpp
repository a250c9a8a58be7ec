#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <vector>

#include "boundary.hpp"
#include "constants.hpp"
#include "core.hpp"
#include "parallel.hpp"
#include "paths.hpp"
#include "symfunc.hpp"
#include "weights.hpp"

namespace sixv {

inline double partition_Z(int k, int M, const ModelParams& p) {
  const double q = p.q(), s = p.s();
  const std::vector<double> us = p.rows(k), vs = p.columns(M);
  double z = q_pochhammer(q, q, k);
  for (double u : us) {
    z *= (1.0 - u / s) / (1.0 - s * u);
    for (double v : vs) z *= (1.0 - q * u * v) / (1.0 - u * v);
  }
  return z;
}

// Law of the k-th cross-section λ^k over strict μ with 1 <= μ_k, μ_1 <= cap.
struct TopRowPmf {
  int k = 0;
  int M = 0;
  int cap = 0;
  int nodes = 0;
  double node_change = 0.0;
  double total_mass = 0.0;
  double shell_mass = 0.0;
  // Colexicographic order.
  std::vector<std::pair<Signature, double>> entries;

  double probability(const Signature& mu) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), mu,
                               [](const auto& e, const Signature& m) { return ColexLess{}(e.first, m); });
    return (it != entries.end() && it->first == mu) ? it->second : 0.0;
  }

  json report() const {
    return json{{"k", k},
                {"M", M},
                {"truncation_cap", cap},
                {"nodes", nodes},
                {"node_change", node_change},
                {"total_mass", total_mass},
                {"shell_mass", shell_mass},
                {"support_size", entries.size()}};
  }
};

namespace detail {

// Strict signatures with parts in [1, cap], colex order.
inline std::vector<Signature> strict_colex(int k, int cap) {
  std::vector<Signature> out;
  std::vector<int> parts(static_cast<std::size_t>(k));
  // Colex: iterate the smallest part outermost.
  auto rec = [&](auto&& self, int i, int lo) -> void {
    if (i < 0) {
      out.emplace_back(parts);
      return;
    }
    for (int x = lo; x <= cap - i; ++x) {
      parts[static_cast<std::size_t>(i)] = x;
      self(self, i - 1, x + 1);
    }
  };
  rec(rec, k - 1, 1);
  std::sort(out.begin(), out.end(), ColexLess{});
  return out;
}

inline std::size_t dense_index(const Signature& lam, int k, int cap) {
  std::size_t idx = 0;
  for (int i = 0; i < k; ++i) idx = idx * static_cast<std::size_t>(cap + 1) + static_cast<std::size_t>(lam[i]);
  return idx;
}

struct PmfPass {
  std::vector<double> values;  // aligned with the strict support list
  double mass = 0.0;
  double shell = 0.0;
};

}  // namespace detail

inline TopRowPmf top_row_pmf(int k, int M, const ModelParams& p, double tol = 1e-10) {
  if (k < 1 || k > 3) throw DomainError("rows-range", "top_row_pmf supports 1 <= k <= 3");
  if (M < 1) throw DomainError("columns-positive", "top_row_pmf needs M >= 1");
  const SpinParams spin = p.spin();
  const double q = spin.q, s = spin.s;
  const AsymptoticConstants ac = constants(p.with_rows({}).with_columns({}));
  const std::vector<double> us = p.rows(k), vs = p.columns(M);
  // Reference at the largest row parameter: |t| grows with u, so F/t^|λ| stays bounded.
  const double u0 = *std::max_element(us.begin(), us.end());
  const double t = (u0 - s) / (1.0 - s * u0);
  // Z divided by the normalization of the boundary table.
  double log_ratio = 0.0;
  double zt = q_pochhammer(q, q, k);
  for (double u : us) {
    zt *= (1.0 - u / s) / (1.0 - s * u);
    for (double v : vs) log_ratio += std::log((1.0 - q * u0 * v) / (1.0 - u0 * v)) - std::log((1.0 - q * u * v) / (1.0 - u * v));
  }
  const double scale = std::exp(log_ratio) / zt;
  std::vector<cplx> spectral(us.begin(), us.end());

  int cap = std::max(k + 2, static_cast<int>(std::ceil(ac.a * M + 10.0 * ac.d * std::sqrt(M))) + 10);
  const int node_limit = 1 << 14;
  for (int attempt = 0; attempt < 6; ++attempt) {
    const std::vector<Signature> support = detail::strict_colex(k, cap);
    const std::vector<cplx> Fdense = F_dense(spectral, spin, cap, t);
    const int shell_from = cap - std::max(3, cap / 10);
    auto pass = [&](int nodes) {
      const BoundaryTable table = boundary_table(k, p, M, cap, nodes, u0);
      detail::PmfPass out;
      out.values.resize(support.size());
      for (std::size_t i = 0; i < support.size(); ++i) {
        const std::size_t idx = detail::dense_index(support[i], k, cap);
        const double pr = Fdense[idx].real() * table.values[idx] * scale;
        out.values[i] = pr;
        out.mass += pr;
        if (support[i].largest() > shell_from) out.shell += std::abs(pr);
      }
      return out;
    };
    int nodes = static_cast<int>(std::bit_ceil(static_cast<unsigned>(std::max(256, 2 * cap))));
    detail::PmfPass coarse = pass(nodes);
    detail::PmfPass fine;
    double change = 0.0;
    while (true) {
      fine = pass(2 * nodes);
      change = 0.0;
      for (std::size_t i = 0; i < support.size(); ++i) change = std::max(change, std::abs(fine.values[i] - coarse.values[i]));
      if (change < tol / 10.0 || 2 * nodes >= node_limit) break;
      nodes *= 2;
      coarse = std::move(fine);
    }
    TopRowPmf pmf;
    pmf.k = k;
    pmf.M = M;
    pmf.cap = cap;
    pmf.nodes = 2 * nodes;
    pmf.node_change = change;
    pmf.total_mass = fine.mass;
    pmf.shell_mass = fine.shell;
    if (change >= tol / 10.0) {
      throw ConvergenceError("top-row pmf quadrature did not converge", pmf.report());
    }
    if (fine.shell > tol / 10.0) {
      cap = cap + std::max(10, cap / 2);
      continue;
    }
    if (std::abs(fine.mass - 1.0) > tol) {
      throw ConvergenceError("top-row pmf mass deficit exceeds tolerance", pmf.report());
    }
    pmf.entries.reserve(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) pmf.entries.emplace_back(support[i], fine.values[i]);
    return pmf;
  }
  throw ConvergenceError("top-row pmf truncation did not capture the mass", json{{"cap", cap}});
}

// Inverse-CDF sampler over a pmf; entries are normalized by the total mass.
class PmfSampler {
 public:
  explicit PmfSampler(const TopRowPmf& pmf) : pmf_(&pmf) {
    cdf_.reserve(pmf.entries.size());
    double acc = 0.0;
    for (const auto& e : pmf.entries) {
      acc += std::max(e.second, 0.0);
      cdf_.push_back(acc);
    }
    for (auto& c : cdf_) c /= acc;
  }
  const Signature& draw(Rng& rng) const {
    const double x = rng.uniform();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), x) - cdf_.begin());
    return pmf_->entries[std::min(i, cdf_.size() - 1)].first;
  }

 private:
  const TopRowPmf* pmf_;
  std::vector<double> cdf_;
};

inline constexpr std::size_t kSampleChunk = 4096;

inline std::vector<Signature> sample_top_row(const TopRowPmf& pmf, std::uint64_t seed, std::size_t count) {
  const PmfSampler sampler(pmf);
  std::vector<Signature> out(count);
  const std::size_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(stream_seed(seed, c));
    const std::size_t end = std::min(count, (c + 1) * kSampleChunk);
    for (std::size_t i = c * kSampleChunk; i < end; ++i) out[i] = sampler.draw(rng);
  });
  return out;
}

// Rows μ^1..μ^k, each strictly increasing, consecutive rows interlacing.
struct HalfStrictGTPattern {
  std::vector<std::vector<int>> rows;

  int depth() const { return static_cast<int>(rows.size()); }

  bool valid() const {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (rows[j].size() != j + 1) return false;
      for (std::size_t i = 0; i + 1 < rows[j].size(); ++i) {
        if (!(rows[j][i] < rows[j][i + 1])) return false;
      }
      if (j + 1 < rows.size()) {
        const auto& up = rows[j + 1];
        for (std::size_t i = 0; i < rows[j].size(); ++i) {
          if (!(up[i] <= rows[j][i] && rows[j][i] <= up[i + 1])) return false;
        }
      }
    }
    return true;
  }

  // Cross-sections λ^0 = ∅, λ^1, ..., λ^k as decreasing signatures.
  std::vector<Signature> cross_sections() const {
    std::vector<Signature> out{Signature()};
    for (const auto& r : rows) out.emplace_back(std::vector<int>(r.rbegin(), r.rend()));
    return out;
  }

  json to_json() const { return rows; }
};

inline std::vector<int> increasing(const Signature& lam) { return {lam.parts().rbegin(), lam.parts().rend()}; }

// All half-strict patterns with top row `top` (given as a decreasing signature).
inline std::vector<HalfStrictGTPattern> enumerate_gt_patterns(const Signature& top, std::size_t cap = 2'000'000) {
  if (!top.strict() || top.empty() || top.smallest() < 1) {
    throw DomainError("top-row-strict", "top row must be strict with positive parts");
  }
  const int k = static_cast<int>(top.size());
  std::vector<HalfStrictGTPattern> out;
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(k));
  rows[k - 1] = increasing(top);
  auto rec = [&](auto&& self, int j) -> void {  // fill row j (0-based) from row j+1
    if (j < 0) {
      if (out.size() >= cap) throw std::length_error("GT pattern enumeration exceeded its cap");
      out.push_back({rows});
      return;
    }
    const auto& up = rows[j + 1];
    auto& row = rows[j];
    row.assign(static_cast<std::size_t>(j + 1), 0);
    auto fill = [&](auto&& me, int i) -> void {
      if (i > j) {
        self(self, j - 1);
        return;
      }
      const int lo = std::max(up[i], i > 0 ? row[i - 1] + 1 : up[i]);
      for (int x = lo; x <= up[i + 1]; ++x) {
        row[i] = x;
        me(me, i + 1);
      }
    };
    fill(fill, 0);
  };
  rec(rec, k - 2);
  return out;
}

// Vertex-type counts over columns 1..max(top) and rows 1..k.
struct GibbsVertexCounts {
  std::array<long long, 6> n{};
  long long total() const {
    long long t = 0;
    for (auto x : n) t += x;
    return t;
  }
  double log_weight(const SixVertexWeights& w) const {
    double lw = 0.0;
    for (int i = 0; i < 6; ++i) lw += static_cast<double>(n[i]) * std::log(w[i]);
    return lw;
  }
};

inline GibbsVertexCounts gibbs_counts(const HalfStrictGTPattern& pattern) {
  const auto sections = pattern.cross_sections();
  const int width = sections.back().largest();
  GibbsVertexCounts counts;
  long long nontrivial = 0;
  for (std::size_t y = 1; y < sections.size(); ++y) {
    const bool ok = walk_row(
        sections[y - 1], sections[y], true,
        [&](int x, const VertexType& v) {
          if (x < 1 || x > width) return;
          const auto it = std::find(kSixVertexTypes.begin(), kSixVertexTypes.end(), v);
          if (it == kSixVertexTypes.end()) throw DomainError("six-vertex", "pattern is not a six-vertex configuration");
          const auto idx = static_cast<std::size_t>(it - kSixVertexTypes.begin());
          if (idx != 0) {
            ++counts.n[idx];
            ++nontrivial;
          }
        },
        [&](int from, int to, int carry) {
          if (!carry) return;
          const long long lo = std::max(from, 1), hi = std::min(to - 1, width);
          if (hi >= lo) {
            counts.n[3] += hi - lo + 1;
            nontrivial += hi - lo + 1;
          }
        });
    if (!ok) throw DomainError("interlacing", "pattern rows do not interlace");
  }
  counts.n[0] = static_cast<long long>(width) * pattern.depth() - nontrivial;
  return counts;
}

// Exact conditional law of the lower rows given the top row.
struct GibbsTable {
  std::vector<HalfStrictGTPattern> patterns;
  std::vector<double> probabilities;
  std::vector<double> cdf;

  const HalfStrictGTPattern& draw(Rng& rng) const {
    const double x = rng.uniform();
    const auto i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
    return patterns[std::min(i, patterns.size() - 1)];
  }
};

inline GibbsTable gibbs_table(const Signature& top, const ModelParams& p, std::size_t cap = 2'000'000) {
  if (top.size() > 4) throw DomainError("rows-range", "conditional sampling supports k <= 4");
  GibbsTable table;
  table.patterns = enumerate_gt_patterns(top, cap);
  const SixVertexWeights w = six_vertex_weights(p);
  std::vector<double> logw(table.patterns.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logw.size(); ++i) {
    logw[i] = gibbs_counts(table.patterns[i]).log_weight(w);
    mx = std::max(mx, logw[i]);
  }
  double total = 0.0;
  table.probabilities.resize(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) total += (table.probabilities[i] = std::exp(logw[i] - mx));
  double acc = 0.0;
  table.cdf.resize(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) {
    table.probabilities[i] /= total;
    acc += table.probabilities[i];
    table.cdf[i] = acc;
  }
  table.cdf.back() = 1.0;
  return table;
}

inline HalfStrictGTPattern conditional_lower_rows(const Signature& top, const ModelParams& p, std::uint64_t seed) {
  Rng rng(seed);
  return gibbs_table(top, p).draw(rng);
}

// Full patterns: top row from the pmf, lower rows from the Gibbs tables.
inline std::vector<HalfStrictGTPattern> sample_patterns(const TopRowPmf& pmf, const ModelParams& p,
                                                        std::uint64_t seed, std::size_t count) {
  const std::vector<Signature> tops = sample_top_row(pmf, seed, count);
  std::vector<Signature> distinct(tops.begin(), tops.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<GibbsTable> tables(distinct.size());
  parallel_for(distinct.size(), [&](std::size_t i) { tables[i] = gibbs_table(distinct[i], p); });
  std::vector<HalfStrictGTPattern> out(count);
  const std::size_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
  const std::uint64_t lower_seed = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(stream_seed(lower_seed, c));
    const std::size_t end = std::min(count, (c + 1) * kSampleChunk);
    for (std::size_t i = c * kSampleChunk; i < end; ++i) {
      const auto it = std::lower_bound(distinct.begin(), distinct.end(), tops[i]);
      out[i] = tables[static_cast<std::size_t>(it - distinct.begin())].draw(rng);
    }
  });
  return out;
}

struct MeasureSpec {
  ModelParams params;
  int rows = 1;
  int columns = 1;
};

// Parameters of the projection onto the first k rows.
inline MeasureSpec project_rows(const MeasureSpec& spec, int k) {
  if (k < 1 || k > spec.rows) throw DomainError("rows-range", "projection needs 1 <= k <= N");
  if (spec.params.row_values().empty()) return {spec.params, k, spec.columns};
  return {spec.params.with_rows(spec.params.rows(k)), k, spec.columns};
}

}  // namespace sixv
